#include "upsilon/synthesis.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>

#include "upsilon/error.hpp"

namespace upsilon {

namespace {

bool subset_of(std::span<const Symbol> a, std::span<const Symbol> sorted_b) {
  return std::all_of(a.begin(), a.end(), [&](const Symbol& s) {
    return std::binary_search(sorted_b.begin(), sorted_b.end(), s);
  });
}

void push_unique(std::vector<Symbol>& v, const Symbol& s) {
  if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
}

}  // namespace

bool RelationDef::has_attribute(std::string_view a) const {
  return std::find(attributes.begin(), attributes.end(), a) != attributes.end();
}

const RelationDef* SchemaCatalog::find(std::string_view name) const {
  for (const auto& r : relations) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

std::vector<Symbol> attribute_closure(std::span<const Symbol> x, const FdSet& sigma) {
  std::vector<Symbol> result(x.begin(), x.end());
  std::sort(result.begin(), result.end());
  result.erase(std::unique(result.begin(), result.end()), result.end());
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& fd : sigma.fds) {
      if (std::binary_search(result.begin(), result.end(), fd.dependent)) continue;
      if (subset_of(fd.determinant, result)) {
        result.insert(std::lower_bound(result.begin(), result.end(), fd.dependent), fd.dependent);
        changed = true;
      }
    }
  }
  return result;
}

// Substitutes φ for φ-determined attributes in every other determinant,
// repeated until the φ-determined set stops growing.
FdSet fold_fds(const FdSet& sigma) {
  const Symbol phi(kPhi);
  FdSet current = sigma;
  for (;;) {
    std::vector<Symbol> determined;
    for (const auto& fd : current.fds) {
      if (fd.determinant.size() == 1 && fd.determinant.front() == phi) {
        determined.push_back(fd.dependent);
      }
    }
    std::sort(determined.begin(), determined.end());

    FdSet next;
    for (const auto& fd : current.fds) {
      if (fd.determinant.size() == 1 && fd.determinant.front() == phi) {
        next.add(fd);
        continue;
      }
      std::vector<Symbol> lhs;
      for (const auto& a : fd.determinant) {
        if (!std::binary_search(determined.begin(), determined.end(), a)) lhs.push_back(a);
      }
      lhs.push_back(phi);
      Fd folded(std::move(lhs), fd.dependent);
      if (std::binary_search(folded.determinant.begin(), folded.determinant.end(),
                             folded.dependent)) {
        continue;  // trivial
      }
      next.add(std::move(folded));
    }
    if (next.fds == current.fds) return next;
    current = std::move(next);
  }
}

std::string relation_name(std::int64_t hypothesis_id, std::size_t index) {
  return "H_" + std::to_string(hypothesis_id) + "^" + std::to_string(index);
}

namespace {

// Drops determinant attributes the rest of the determinant already implies.
FdSet left_reduced(const FdSet& sigma) {
  FdSet out;
  out.attributes = sigma.attributes;
  for (const auto& fd : sigma.fds) {
    auto lhs = fd.determinant;
    for (std::size_t i = 0; i < lhs.size();) {
      auto fewer = lhs;
      fewer.erase(fewer.begin() + static_cast<std::ptrdiff_t>(i));
      auto c = attribute_closure(fewer, sigma);
      if (std::binary_search(c.begin(), c.end(), fd.dependent)) {
        lhs = std::move(fewer);
      } else {
        ++i;
      }
    }
    out.add(Fd(std::move(lhs), fd.dependent));
  }
  return out;
}

struct Draft {
  std::vector<Symbol> attributes;
  std::vector<std::vector<Symbol>> keys;
  std::size_t first = 0;
};

bool covers(std::span<const Symbol> x, std::span<const Symbol> attrs, const FdSet& sigma) {
  auto c = attribute_closure(x, sigma);
  return subset_of(attrs, c);
}

// Removes key attributes not needed to determine `attrs`.
std::vector<Symbol> minimized_key(std::vector<Symbol> key, std::span<const Symbol> attrs, const FdSet& sigma) {
  std::sort(key.begin(), key.end());
  for (std::size_t i = 0; i < key.size();) {
    auto fewer = key;
    fewer.erase(fewer.begin() + static_cast<std::ptrdiff_t>(i));
    if (covers(fewer, attrs, sigma)) {
      key = std::move(fewer);
    } else {
      ++i;
    }
  }
  return key;
}

// A proper subset of `attrs` whose closure adds some, but not all, of the
// remaining attributes. Exhaustive (smallest first) up to 16 attributes;
// wider relations are only tested against the determinants of sigma.
std::optional<std::vector<Symbol>> bcnf_violation(const std::vector<Symbol>& attrs, const FdSet& sigma) {
  std::vector<Symbol> sorted_attrs = attrs;
  std::sort(sorted_attrs.begin(), sorted_attrs.end());
  auto violates = [&](const std::vector<Symbol>& x) {
    auto c = attribute_closure(x, sigma);
    std::size_t inside = 0;
    for (const auto& a : sorted_attrs) inside += std::binary_search(c.begin(), c.end(), a) ? 1 : 0;
    return inside > x.size() && inside < attrs.size();
  };
  const auto n = attrs.size();
  if (n <= 16) {
    std::vector<std::uint32_t> masks(std::size_t{1} << n);
    std::iota(masks.begin(), masks.end(), 0u);
    std::stable_sort(masks.begin(), masks.end(),
                     [](std::uint32_t a, std::uint32_t b) { return __builtin_popcount(a) < __builtin_popcount(b); });
    for (auto mask : masks) {
      std::vector<Symbol> x;
      for (std::size_t i = 0; i < n; ++i) {
        if (mask & (1u << i)) x.push_back(attrs[i]);
      }
      std::sort(x.begin(), x.end());
      if (violates(x)) return x;
    }
    return std::nullopt;
  }
  for (const auto& fd : sigma.fds) {
    if (subset_of(fd.determinant, sorted_attrs) && violates(fd.determinant)) return fd.determinant;
  }
  return std::nullopt;
}

}  // namespace

SchemaCatalog synthesize_4c(const FdSet& folded, std::int64_t hypothesis_id) {
  if (folded.fds.empty()) {
    throw Error(ErrorCode::EmptyFdSet, "no functional dependencies to synthesize from");
  }
  const Symbol phi(kPhi);
  const Symbol upsilon(kUpsilon);
  const FdSet cover = left_reduced(folded);

  // Distinct determinants in first-appearance order.
  std::vector<std::vector<Symbol>> determinants;
  for (const auto& fd : cover.fds) {
    if (std::find(determinants.begin(), determinants.end(), fd.determinant) == determinants.end()) {
      determinants.push_back(fd.determinant);
    }
  }
  std::vector<std::vector<Symbol>> closures;
  for (const auto& d : determinants) closures.push_back(attribute_closure(d, cover));

  // Union-find over mutually implied determinants.
  std::vector<std::size_t> parent(determinants.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < determinants.size(); ++i) {
    for (std::size_t j = i + 1; j < determinants.size(); ++j) {
      if (subset_of(determinants[i], closures[j]) && subset_of(determinants[j], closures[i])) {
        parent[find(j)] = find(i);
      }
    }
  }

  std::vector<Symbol> index_vars;
  for (const auto& a : folded.attributes) {
    if (a == phi || a == upsilon) continue;
    bool dependent = std::any_of(folded.fds.begin(), folded.fds.end(),
                                 [&](const Fd& fd) { return fd.dependent == a; });
    if (!dependent) index_vars.push_back(a);
  }

  struct Group {
    std::vector<std::vector<Symbol>> keys;
    std::vector<Symbol> all;
    std::size_t first = 0;
  };
  std::map<std::size_t, Group> groups;
  for (std::size_t i = 0; i < determinants.size(); ++i) {
    auto& g = groups[find(i)];
    if (g.keys.empty()) g.first = i;
    g.keys.push_back(determinants[i]);
  }
  for (const auto& fd : cover.fds) {
    auto di = static_cast<std::size_t>(
        std::find(determinants.begin(), determinants.end(), fd.determinant) - determinants.begin());
    auto& g = groups[find(di)];
    for (const auto& a : fd.determinant) push_unique(g.all, a);
    push_unique(g.all, fd.dependent);
  }

  SchemaCatalog out;
  out.folded = folded;
  std::vector<Draft> drafts;
  for (const auto& [root, g] : groups) {
    Draft d;
    auto has = [&](const Symbol& s) { return std::find(g.all.begin(), g.all.end(), s) != g.all.end(); };
    if (has(phi)) d.attributes.push_back(phi);
    if (has(upsilon)) d.attributes.push_back(upsilon);
    for (const auto& t : index_vars) {
      if (has(t)) d.attributes.push_back(t);
    }
    for (const auto& a : g.all) push_unique(d.attributes, a);
    d.keys = g.keys;
    d.first = g.first;
    drafts.push_back(std::move(d));
  }

  // Decompose relations that are not in BCNF; this may give up preserving
  // the dependency that made the class.
  for (std::size_t i = 0; i < drafts.size();) {
    auto x = bcnf_violation(drafts[i].attributes, cover);
    if (!x) {
      ++i;
      continue;
    }
    const Draft r = drafts[i];
    const auto closure = attribute_closure(*x, cover);
    auto in_closure = [&](const Symbol& a) { return std::binary_search(closure.begin(), closure.end(), a); };
    auto in_x = [&](const Symbol& a) { return std::binary_search(x->begin(), x->end(), a); };
    Draft split{{}, {}, r.first};
    Draft rest{{}, {}, r.first};
    for (const auto& a : r.attributes) {
      if (in_closure(a)) split.attributes.push_back(a);
      if (!in_closure(a) || in_x(a)) rest.attributes.push_back(a);
    }
    split.keys.push_back(minimized_key(*x, split.attributes, cover));
    for (const auto& k : r.keys) {
      std::vector<Symbol> k2(x->begin(), x->end());
      for (const auto& a : k) {
        if (!in_closure(a)) k2.push_back(a);
      }
      auto m = minimized_key(k2, rest.attributes, cover);
      if (std::find(rest.keys.begin(), rest.keys.end(), m) == rest.keys.end()) rest.keys.push_back(std::move(m));
    }
    out.warnings.push_back("BcnfSplit: " + format_fd(Fd(*x, split.attributes.back())) +
                           " split a relation; its class dependency may not be preserved");
    drafts[i] = std::move(split);
    drafts.insert(drafts.begin() + static_cast<std::ptrdiff_t>(i) + 1, std::move(rest));
  }
  // Relations contained in another one are redundant.
  for (std::size_t i = 0; i < drafts.size();) {
    auto sorted_i = drafts[i].attributes;
    std::sort(sorted_i.begin(), sorted_i.end());
    bool redundant = false;
    for (std::size_t j = 0; j < drafts.size() && !redundant; ++j) {
      if (j == i || !subset_of(sorted_i, [&] {
            auto s = drafts[j].attributes;
            std::sort(s.begin(), s.end());
            return s;
          }())) {
        continue;
      }
      // Equal attribute sets: keep the earlier one and merge keys.
      if (drafts[j].attributes.size() == drafts[i].attributes.size()) {
        if (j > i) continue;
        for (const auto& k : drafts[i].keys) {
          if (std::find(drafts[j].keys.begin(), drafts[j].keys.end(), k) == drafts[j].keys.end()) {
            drafts[j].keys.push_back(k);
          }
        }
      }
      redundant = true;
    }
    if (redundant) {
      drafts.erase(drafts.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }

  // Without a relation holding a key of every attribute the join can be
  // lossy; add one over a minimal such key.
  {
    std::vector<RelationDef> probe;
    std::vector<Symbol> universe;
    for (const auto& d : drafts) {
      probe.push_back(RelationDef{"", d.attributes, d.keys, std::nullopt});
      for (const auto& a : d.attributes) push_unique(universe, a);
    }
    if (!is_lossless(probe, cover)) {
      auto key = minimized_key(universe, universe, cover);
      auto in_key = [&](const Symbol& a) { return std::binary_search(key.begin(), key.end(), a); };
      Draft d;
      for (const auto& a : {phi, upsilon}) {
        if (in_key(a)) d.attributes.push_back(a);
      }
      for (const auto& t : index_vars) {
        if (in_key(t)) d.attributes.push_back(t);
      }
      for (const auto& a : universe) {
        if (in_key(a)) push_unique(d.attributes, a);
      }
      std::string names;
      for (const auto& a : d.attributes) names += (names.empty() ? "" : " ") + a;
      d.keys.push_back(key);
      d.first = determinants.size();
      out.warnings.push_back("UniversalKey: added a relation over {" + names + "} for a lossless join");
      drafts.push_back(std::move(d));
    }
  }

  auto min_key = [](const Draft& d) {
    std::size_t m = d.keys.front().size();
    for (const auto& k : d.keys) m = std::min(m, k.size());
    return m;
  };
  std::stable_sort(drafts.begin(), drafts.end(), [&](const Draft& a, const Draft& b) {
    return std::pair(min_key(a), a.first) < std::pair(min_key(b), b.first);
  });

  for (std::size_t i = 0; i < drafts.size(); ++i) {
    RelationDef r;
    r.name = relation_name(hypothesis_id, i + 1);
    r.origin = hypothesis_id;
    r.attributes = std::move(drafts[i].attributes);
    r.keys = std::move(drafts[i].keys);
    if (r.keys.size() > 2) {
      out.warnings.push_back("LongCycle: " + r.name + " merges " + std::to_string(r.keys.size()) +
                             " mutually dependent determinants");
    }
    out.relations.push_back(std::move(r));
  }
  if (!is_lossless(out.relations, folded)) {
    out.warnings.push_back("LossyDecomposition: the chase found no distinguished row");
  }
  return out;
}

bool is_bcnf(const RelationDef& r, const FdSet& sigma) {
  const auto n = r.attributes.size();
  if (n >= 24) throw Error(ErrorCode::InvalidArgument, "relation too wide for exhaustive BCNF test");
  std::vector<Symbol> sorted_attrs = r.attributes;
  std::sort(sorted_attrs.begin(), sorted_attrs.end());
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    std::vector<Symbol> x;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) x.push_back(r.attributes[i]);
    }
    auto closure = attribute_closure(x, sigma);
    std::size_t inside = 0;
    for (const auto& a : sorted_attrs) {
      if (std::binary_search(closure.begin(), closure.end(), a)) ++inside;
    }
    // X determines something new within r, so X must be a superkey of r.
    if (inside > x.size() && inside < n) return false;
  }
  return true;
}

bool is_lossless(std::span<const RelationDef> relations, const FdSet& sigma) {
  std::vector<Symbol> universe = sigma.attributes;
  for (const auto& r : relations) {
    for (const auto& a : r.attributes) {
      if (!std::binary_search(universe.begin(), universe.end(), a)) {
        universe.insert(std::lower_bound(universe.begin(), universe.end(), a), a);
      }
    }
  }
  const auto cols = universe.size();
  auto col = [&](const Symbol& a) {
    return static_cast<std::size_t>(std::lower_bound(universe.begin(), universe.end(), a) -
                                    universe.begin());
  };
  // 0 is the distinguished symbol.
  std::vector<std::vector<std::size_t>> rows(relations.size(), std::vector<std::size_t>(cols));
  std::size_t fresh = 1;
  for (std::size_t i = 0; i < relations.size(); ++i) {
    for (std::size_t c = 0; c < cols; ++c) rows[i][c] = fresh++;
    for (const auto& a : relations[i].attributes) rows[i][col(a)] = 0;
  }
  std::vector<std::pair<std::vector<std::size_t>, std::size_t>> fds;
  for (const auto& fd : sigma.fds) {
    std::vector<std::size_t> lhs;
    for (const auto& a : fd.determinant) lhs.push_back(col(a));
    fds.emplace_back(std::move(lhs), col(fd.dependent));
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [lhs, rhs] : fds) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = i + 1; j < rows.size(); ++j) {
          bool agree = std::all_of(lhs.begin(), lhs.end(),
                                   [&](std::size_t c) { return rows[i][c] == rows[j][c]; });
          if (!agree || rows[i][rhs] == rows[j][rhs]) continue;
          auto keep = std::min(rows[i][rhs], rows[j][rhs]);
          auto drop = std::max(rows[i][rhs], rows[j][rhs]);
          for (auto& row : rows) {
            if (row[rhs] == drop) row[rhs] = keep;
          }
          changed = true;
        }
      }
    }
  }
  return std::any_of(rows.begin(), rows.end(), [](const std::vector<std::size_t>& row) {
    return std::all_of(row.begin(), row.end(), [](std::size_t v) { return v == 0; });
  });
}

nlohmann::json to_json(const RelationDef& r) {
  nlohmann::json j{{"name", r.name}, {"attributes", r.attributes}, {"keys", r.keys}};
  j["origin"] = r.origin ? nlohmann::json(*r.origin) : nlohmann::json("global");
  return j;
}

RelationDef relation_from_json(const nlohmann::json& j) {
  RelationDef r;
  r.name = j.at("name").get<std::string>();
  r.attributes = j.at("attributes").get<std::vector<Symbol>>();
  r.keys = j.at("keys").get<std::vector<std::vector<Symbol>>>();
  if (j.at("origin").is_number_integer()) r.origin = j.at("origin").get<std::int64_t>();
  return r;
}

nlohmann::json to_json(const SchemaCatalog& c) {
  nlohmann::json rels = nlohmann::json::array();
  for (const auto& r : c.relations) rels.push_back(to_json(r));
  return {{"relations", rels},
          {"primitive", to_json(c.primitive)},
          {"folded", to_json(c.folded)},
          {"attributes", c.folded.attributes},
          {"warnings", c.warnings}};
}

SchemaCatalog schema_from_json(const nlohmann::json& j) {
  SchemaCatalog c;
  for (const auto& r : j.at("relations")) c.relations.push_back(relation_from_json(r));
  c.primitive = fdset_from_json(j.at("primitive"));
  c.folded = fdset_from_json(j.at("folded"));
  for (const auto& a : j.at("attributes")) c.folded.add_attribute(a.get<Symbol>());
  c.warnings = j.at("warnings").get<std::vector<std::string>>();
  return c;
}

}  // namespace upsilon
