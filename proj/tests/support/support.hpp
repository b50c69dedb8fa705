#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "upsilon/causal.hpp"
#include "upsilon/ingest.hpp"
#include "upsilon/project.hpp"
#include "upsilon/simkit.hpp"
#include "upsilon/synthesis.hpp"
#include "upsilon/uncertain.hpp"

namespace upsilon::test {

inline std::filesystem::path fixtures() { return UPSILON_FIXTURES_DIR; }

inline std::string fixture(const std::string& name) { return read_file(fixtures() / name); }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "upsilon") {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / (tag + "-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline Structure descriptor(const std::string& name) { return parse_descriptor(fixture(name)); }

// Equation over a bare variable set; the first name is the primary.
inline Equation opaque(const std::string& id, std::vector<Symbol> vars) {
  Equation e;
  e.id = id;
  e.declared_order = vars;
  e.primary = vars.front();
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  e.variables = std::move(vars);
  return e;
}

inline Structure opaque_structure(const std::vector<std::pair<std::string, std::vector<Symbol>>>& eqs,
                                  const std::map<Symbol, Role>& roles, std::int64_t id = 1) {
  Structure s;
  s.hypothesis_id = id;
  s.name = "generated";
  for (const auto& [eid, vars] : eqs) s.equations.push_back(opaque(eid, vars));
  for (const auto& [sym, role] : roles) s.declarations.push_back(VariableDecl{sym, role, ""});
  return s;
}

// Number of perfect matchings, by exhaustive assignment.
inline std::size_t count_perfect_matchings(const Structure& s) {
  if (s.equations.size() != s.declarations.size()) return 0;
  std::set<Symbol> used;
  std::function<std::size_t(std::size_t)> go = [&](std::size_t i) -> std::size_t {
    if (i == s.equations.size()) return 1;
    std::size_t n = 0;
    for (const auto& v : s.equations[i].variables) {
      if (used.contains(v)) continue;
      used.insert(v);
      n += go(i + 1);
      used.erase(v);
    }
    return n;
  };
  return go(0);
}

inline FdSet make_fds(const std::vector<std::pair<std::vector<Symbol>, Symbol>>& fds) {
  FdSet s;
  for (const auto& [lhs, rhs] : fds) {
    auto l = lhs;
    std::sort(l.begin(), l.end());
    s.add(Fd(l, rhs));
    for (const auto& a : lhs) s.add_attribute(a);
    s.add_attribute(rhs);
  }
  return s;
}

// Random valid structure: unary equations for parameters and the index t,
// one multi-variable equation per output.
inline Structure random_valid_structure(std::mt19937& rng, std::int64_t id = 1) {
  std::uniform_int_distribution<int> np(1, 5), no(1, 3), coin(0, 1);
  const int P = np(rng), O = no(rng);
  std::vector<std::pair<std::string, std::vector<Symbol>>> eqs;
  std::map<Symbol, Role> roles;
  int k = 1;
  roles["t"] = Role::index;
  eqs.push_back({"f" + std::to_string(k++), {"t"}});
  std::vector<Symbol> params, outs;
  for (int i = 0; i < P; ++i) {
    params.push_back("a" + std::to_string(i));
    roles[params.back()] = Role::parameter;
    eqs.push_back({"f" + std::to_string(k++), {params.back()}});
  }
  for (int i = 0; i < O; ++i) {
    outs.push_back("z" + std::to_string(i));
    roles[outs.back()] = Role::output;
  }
  for (int i = 0; i < O; ++i) {
    std::vector<Symbol> vars{outs[i]};
    if (coin(rng)) vars.push_back("t");
    for (const auto& p : params) {
      if (coin(rng)) vars.push_back(p);
    }
    for (int j = 0; j < O; ++j) {
      if (j != i && coin(rng)) vars.push_back(outs[j]);
    }
    if (vars.size() == 1) vars.push_back(params[std::uniform_int_distribution<int>(0, P - 1)(rng)]);
    eqs.push_back({"f" + std::to_string(k++), vars});
  }
  return opaque_structure(eqs, roles, id);
}

// Chase tableau for the lossless-join property.
inline bool chase_lossless(const std::vector<RelationDef>& rels, const FdSet& sigma) {
  std::vector<Symbol> attrs;
  for (const auto& r : rels) {
    for (const auto& a : r.attributes) {
      if (std::find(attrs.begin(), attrs.end(), a) == attrs.end()) attrs.push_back(a);
    }
  }
  // 0 = distinguished, otherwise a unique label.
  std::vector<std::vector<int>> rows;
  int label = 1;
  for (const auto& r : rels) {
    std::vector<int> row;
    for (const auto& a : attrs) row.push_back(r.has_attribute(a) ? 0 : label++);
    rows.push_back(row);
  }
  auto col = [&](const Symbol& a) -> int {
    auto it = std::find(attrs.begin(), attrs.end(), a);
    return it == attrs.end() ? -1 : static_cast<int>(it - attrs.begin());
  };
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& fd : sigma.fds) {
      const int c = col(fd.dependent);
      if (c < 0) continue;
      std::vector<int> lhs;
      bool ok = true;
      for (const auto& a : fd.determinant) {
        const int x = col(a);
        if (x < 0) ok = false;
        lhs.push_back(x);
      }
      if (!ok) continue;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = i + 1; j < rows.size(); ++j) {
          bool agree = std::all_of(lhs.begin(), lhs.end(), [&](int x) { return rows[i][x] == rows[j][x]; });
          if (!agree || rows[i][c] == rows[j][c]) continue;
          const int keep = std::min(rows[i][c], rows[j][c]);
          const int drop = std::max(rows[i][c], rows[j][c]);
          for (auto& r : rows) {
            if (r[c] == drop) r[c] = keep;
          }
          changed = true;
        }
      }
    }
  }
  return std::any_of(rows.begin(), rows.end(),
                     [](const auto& r) { return std::all_of(r.begin(), r.end(), [](int v) { return v == 0; }); });
}

// Every subset X of the relation: closure(X) restricted to the relation
// either adds nothing or covers it.
inline bool bcnf_by_subsets(const RelationDef& r, const FdSet& sigma) {
  const auto n = r.attributes.size();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    std::vector<Symbol> x;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::uint64_t{1} << i)) x.push_back(r.attributes[i]);
    }
    auto c = attribute_closure(x, sigma);
    std::size_t inside = 0;
    for (const auto& a : r.attributes) inside += std::binary_search(c.begin(), c.end(), a) ? 1 : 0;
    if (inside > x.size() && inside < n) return false;
  }
  return true;
}

// Confidence by summing over every full assignment of the world table.
inline double brute_force_conf(const std::vector<Condition>& conditions, const WorldTable& w) {
  const auto vars = w.variables();
  std::vector<int> cur(vars.size(), 1);
  double total = 0;
  for (;;) {
    double p = 1;
    for (std::size_t i = 0; i < vars.size(); ++i) p *= w.probability(vars[i], cur[i]);
    bool holds = false;
    for (const auto& c : conditions) {
      bool all = true;
      for (const auto& a : c) {
        auto it = std::find(vars.begin(), vars.end(), a.var);
        if (cur[it - vars.begin()] != a.value) all = false;
      }
      holds = holds || all;
    }
    if (holds) total += p;
    std::size_t i = 0;
    while (i < vars.size() && ++cur[i] > w.alternatives(vars[i])) cur[i++] = 1;
    if (i == vars.size()) break;
  }
  return total;
}

// Direct evaluation of the normal-likelihood Bayes update, no logs.
inline std::vector<double> direct_posterior(const std::vector<double>& priors,
                                            const std::vector<std::vector<double>>& preds,
                                            const std::vector<double>& ys, double sigma) {
  const double pi = 3.14159265358979323846;
  std::vector<double> num;
  double z = 0;
  for (std::size_t k = 0; k < priors.size(); ++k) {
    double v = priors[k];
    for (std::size_t j = 0; j < ys.size(); ++j) {
      const double d = ys[j] - preds[k][j];
      v *= std::exp(-d * d / (2 * sigma * sigma)) / (sigma * std::sqrt(2 * pi));
    }
    num.push_back(v);
    z += v;
  }
  for (auto& v : num) v /= z;
  return num;
}

inline std::vector<std::string> model_files() {
  std::vector<std::string> out;
  for (int u = 1; u <= 2; ++u) {
    for (int n = 1; n <= 2; ++n) out.push_back("models/phi2_u" + std::to_string(u) + "_" + std::to_string(n) + ".json");
  }
  for (int n = 1; n <= 6; ++n) out.push_back("models/phi2_u3_" + std::to_string(n) + ".json");
  return out;
}

// Population project: two phenomena, three hypotheses, the ten φ=2 trials.
inline Project example_project(const std::filesystem::path& root) {
  Project p = Project::init(root);
  p.add_phenomenon(fixture("phenomenon1.json"));
  p.add_phenomenon(fixture("phenomenon2.xml"));
  for (const char* f : {"malthus.xml", "logistic.xml", "lotka.xml"}) p.add_hypothesis(fixture(f));
  for (const auto& m : model_files()) {
    auto model = sim::model_from_json(nlohmann::json::parse(fixture(m)));
    p.load_trial(sim::simulate(model));
  }
  return p;
}

inline ObservationSet lynx_observations(std::optional<double> sigma = 10.0) {
  return parse_observation_csv(fixture("hudson_bay.csv"), 2, {{"t", "Year"}, {"x", "Lynx"}}, sigma);
}

}  // namespace upsilon::test
