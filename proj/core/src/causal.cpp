#include "upsilon/causal.hpp"

#include <algorithm>
#include <map>

#include "upsilon/error.hpp"

namespace upsilon {

namespace {

// Bipartite graph with each equation's candidate variables in preference
// order: primary variable first, then the rest ascending.
struct Bipartite {
  std::vector<std::vector<std::size_t>> adj;  // equation -> variable indices
  std::vector<Symbol> variables;
};

Bipartite build_graph(const Structure& s) {
  Bipartite g;
  std::map<Symbol, std::size_t, std::less<>> index;
  for (const auto& d : s.declarations) {
    index.emplace(d.symbol, g.variables.size());
    g.variables.push_back(d.symbol);
  }
  for (const auto& e : s.equations) {
    for (const auto& v : e.variables) {
      if (!index.contains(v)) {
        index.emplace(v, g.variables.size());
        g.variables.push_back(v);
      }
    }
  }
  for (const auto& e : s.equations) {
    std::vector<Symbol> order = e.variables;  // already sorted
    if (e.primary) {
      auto it = std::find(order.begin(), order.end(), *e.primary);
      if (it != order.end()) std::rotate(order.begin(), it, it + 1);
    }
    std::vector<std::size_t> row;
    for (const auto& v : order) row.push_back(index.at(v));
    g.adj.push_back(std::move(row));
  }
  return g;
}

class Matcher {
 public:
  explicit Matcher(const Bipartite& g)
      : g_(g), eq_match_(g.adj.size(), kNone), var_match_(g.variables.size(), kNone) {}

  std::size_t run(const std::vector<std::size_t>& equation_order) {
    std::size_t size = 0;
    for (auto e : equation_order) {
      bool done = false;
      for (auto v : g_.adj[e]) {
        if (var_match_[v] == kNone) {
          eq_match_[e] = v;
          var_match_[v] = e;
          done = true;
          break;
        }
      }
      if (!done) {
        seen_.assign(g_.variables.size(), false);
        done = augment(e);
      }
      if (done) ++size;
    }
    return size;
  }

  const std::vector<std::size_t>& equation_matches() const { return eq_match_; }

  // An alternating cycle (unmatched edges eq->var, matched edges var->eq)
  // exists iff the perfect matching is not unique.
  bool has_alternating_cycle() const {
    const std::size_t ne = g_.adj.size();
    // nodes: equations [0, ne), variables [ne, ne + nv)
    std::vector<int> color(ne + g_.variables.size(), 0);
    std::vector<std::pair<std::size_t, std::size_t>> stack;
    for (std::size_t start = 0; start < ne; ++start) {
      if (color[start] != 0) continue;
      stack.emplace_back(start, 0);
      color[start] = 1;
      while (!stack.empty()) {
        auto& [node, next] = stack.back();
        std::size_t succ = kNone;
        if (node < ne) {
          while (next < g_.adj[node].size()) {
            auto v = g_.adj[node][next++];
            if (v != eq_match_[node]) {
              succ = ne + v;
              break;
            }
          }
        } else if (next++ == 0 && var_match_[node - ne] != kNone) {
          succ = var_match_[node - ne];
        }
        if (succ == kNone) {
          color[node] = 2;
          stack.pop_back();
          continue;
        }
        if (color[succ] == 1) return true;
        if (color[succ] == 0) {
          color[succ] = 1;
          stack.emplace_back(succ, 0);
        }
      }
    }
    return false;
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  bool augment(std::size_t e) {
    for (auto v : g_.adj[e]) {
      if (seen_[v]) continue;
      seen_[v] = true;
      if (var_match_[v] == kNone || augment(var_match_[v])) {
        eq_match_[e] = v;
        var_match_[v] = e;
        return true;
      }
    }
    return false;
  }

  const Bipartite& g_;
  std::vector<std::size_t> eq_match_;
  std::vector<std::size_t> var_match_;
  std::vector<bool> seen_;
};

std::vector<std::size_t> ascending_id_order(const Structure& s) {
  std::vector<std::size_t> order(s.equations.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return s.equations[a].id < s.equations[b].id;
  });
  return order;
}

}  // namespace

const Symbol* CausalMapping::variable_for(std::string_view equation_id) const {
  for (const auto& [e, v] : pairs) {
    if (e == equation_id) return &v;
  }
  return nullptr;
}

bool CausalMapping::ambiguous() const {
  return std::find(warnings.begin(), warnings.end(), "AmbiguousOrdering") != warnings.end();
}

Fd::Fd(std::vector<Symbol> lhs, Symbol rhs) : determinant(std::move(lhs)), dependent(std::move(rhs)) {
  std::sort(determinant.begin(), determinant.end());
  determinant.erase(std::unique(determinant.begin(), determinant.end()), determinant.end());
}

void FdSet::add_attribute(const Symbol& a) {
  auto it = std::lower_bound(attributes.begin(), attributes.end(), a);
  if (it == attributes.end() || *it != a) attributes.insert(it, a);
}

bool FdSet::has_attribute(std::string_view a) const {
  return std::binary_search(attributes.begin(), attributes.end(), a, std::less<>());
}

bool FdSet::contains(const Fd& fd) const {
  return std::find(fds.begin(), fds.end(), fd) != fds.end();
}

void FdSet::add(Fd fd) {
  if (contains(fd)) return;
  for (const auto& a : fd.determinant) add_attribute(a);
  add_attribute(fd.dependent);
  fds.push_back(std::move(fd));
}

bool FdSet::same_as(const FdSet& other) const {
  auto a = fds;
  auto b = other.fds;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b && attributes == other.attributes;
}

std::size_t maximum_matching_size(const Structure& s) {
  Bipartite g = build_graph(s);
  Matcher m(g);
  return m.run(ascending_id_order(s));
}

CausalMapping total_causal_mapping(const Structure& s) {
  if (s.equations.size() != s.declarations.size()) {
    throw Error(ErrorCode::NoPerfectMatching,
                std::to_string(s.equations.size()) + " equations vs " +
                    std::to_string(s.declarations.size()) + " variables");
  }
  Bipartite g = build_graph(s);
  Matcher m(g);
  if (m.run(ascending_id_order(s)) != s.equations.size()) {
    throw Error(ErrorCode::NoPerfectMatching, "structure '" + s.name + "' cannot be causally ordered");
  }
  CausalMapping out;
  const auto& match = m.equation_matches();
  for (std::size_t e = 0; e < s.equations.size(); ++e) {
    out.pairs.emplace_back(s.equations[e].id, g.variables[match[e]]);
  }
  if (m.has_alternating_cycle()) out.warnings.emplace_back("AmbiguousOrdering");
  return out;
}

FdSet encode_fds(const Structure& s, const CausalMapping& m) {
  FdSet sigma;
  const Symbol phi(kPhi);
  const Symbol upsilon(kUpsilon);
  for (const auto& [eq_id, var] : m.pairs) {
    const Equation* e = s.find_equation(eq_id);
    const VariableDecl* d = s.find_variable(var);
    if (e == nullptr || d == nullptr) {
      throw Error(ErrorCode::InvalidArgument, "mapping pair " + eq_id + " -> " + var +
                                                  " does not belong to the structure");
    }
    if (!std::binary_search(e->variables.begin(), e->variables.end(), var)) {
      throw Error(ErrorCode::InvalidArgument, var + " does not occur in equation " + eq_id);
    }
    if (d->role == Role::index) continue;
    const bool unary = e->variables.size() == 1;
    if (unary && d->role == Role::output) {
      throw Error(ErrorCode::RoleConflict,
                  "single-variable equation " + eq_id + " determines output " + var);
    }
    if (!unary && d->role == Role::parameter) {
      throw Error(ErrorCode::RoleConflict,
                  "equation " + eq_id + " over several variables determines parameter " + var);
    }
    if (unary) {
      sigma.add(Fd({phi}, var));
    } else {
      std::vector<Symbol> lhs;
      for (const auto& v : e->variables) {
        if (v != var) lhs.push_back(v);
      }
      lhs.push_back(upsilon);
      sigma.add(Fd(std::move(lhs), var));
    }
  }
  sigma.add_attribute(phi);
  sigma.add_attribute(upsilon);
  for (const auto& d : s.declarations) sigma.add_attribute(d.symbol);
  return sigma;
}

std::string format_fd(const Fd& fd) {
  std::string out;
  for (const auto& a : fd.determinant) {
    if (!out.empty()) out += ' ';
    out += a;
  }
  return out + " → " + fd.dependent;
}

nlohmann::json to_json(const FdSet& sigma) {
  auto fds = sigma.fds;
  std::sort(fds.begin(), fds.end(), [](const Fd& a, const Fd& b) {
    return std::tie(a.dependent, a.determinant) < std::tie(b.dependent, b.determinant);
  });
  nlohmann::json list = nlohmann::json::array();
  for (const auto& fd : fds) {
    list.push_back({{"determinant", fd.determinant}, {"dependent", fd.dependent}});
  }
  return list;
}

FdSet fdset_from_json(const nlohmann::json& j) {
  FdSet sigma;
  for (const auto& fd : j) {
    sigma.add(Fd(fd.at("determinant").get<std::vector<Symbol>>(), fd.at("dependent").get<Symbol>()));
  }
  return sigma;
}

}  // namespace upsilon
