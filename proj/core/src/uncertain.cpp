#include "upsilon/uncertain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "upsilon/csv.hpp"
#include "upsilon/error.hpp"

namespace upsilon {

namespace fs = std::filesystem;

namespace {

std::vector<double> uniform(std::size_t n) { return std::vector<double>(n, 1.0 / static_cast<double>(n)); }

std::string urelation_name(std::int64_t upsilon, std::size_t j) {
  return "Y_" + std::to_string(upsilon) + "^" + std::to_string(j);
}

bool is_output_table(const Table& t) { return t.find_column(kUpsilon).has_value(); }

nlohmann::json to_json(const RandomVar& v) {
  nlohmann::json alts = nlohmann::json::array();
  for (const auto& row : v.alternatives) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& s : row) {
      if (const auto* i = std::get_if<std::int64_t>(&s)) {
        r.push_back(*i);
      } else if (const auto* d = std::get_if<double>(&s)) {
        r.push_back(*d);
      } else {
        r.push_back(std::get<std::string>(s));
      }
    }
    alts.push_back(r);
  }
  nlohmann::json j{{"id", v.id},
                   {"scope", to_string(v.scope)},
                   {"phi", v.phenomenon},
                   {"attributes", v.attributes},
                   {"alternatives", alts}};
  j["upsilon"] = v.hypothesis ? nlohmann::json(*v.hypothesis) : nlohmann::json(nullptr);
  return j;
}

RandomVar var_from_json(const nlohmann::json& j) {
  RandomVar v;
  v.id = j.at("id").get<std::string>();
  auto scope = j.at("scope").get<std::string>();
  v.scope = scope == "empirical" ? VarScope::empirical
            : scope == "joint"   ? VarScope::joint
                                 : VarScope::theoretical;
  v.phenomenon = j.at("phi").get<std::int64_t>();
  if (!j.at("upsilon").is_null()) v.hypothesis = j.at("upsilon").get<std::int64_t>();
  v.attributes = j.at("attributes").get<std::vector<Symbol>>();
  for (const auto& r : j.at("alternatives")) {
    Row row;
    for (const auto& s : r) {
      if (s.is_number_integer()) {
        row.emplace_back(s.get<std::int64_t>());
      } else if (s.is_number()) {
        row.emplace_back(s.get<double>());
      } else {
        row.emplace_back(s.get<std::string>());
      }
    }
    v.alternatives.push_back(std::move(row));
  }
  return v;
}

nlohmann::json condition_json(const Condition& c) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& a : c) j.push_back({a.var, a.value});
  return j;
}

Condition condition_from_json(const nlohmann::json& j) {
  Condition c;
  for (const auto& a : j) c.push_back({a.at(0).get<std::string>(), a.at(1).get<int>()});
  return c;
}

}  // namespace

Condition normalized(Condition c) {
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  return c;
}

std::string format_condition(const Condition& c) {
  std::string out = "{";
  for (std::size_t i = 0; i < c.size(); ++i) {
    out += (i ? ", " : "") + c[i].var + "↦" + std::to_string(c[i].value);
  }
  return out + "}";
}

std::string_view to_string(VarScope s) {
  switch (s) {
    case VarScope::theoretical: return "theoretical";
    case VarScope::empirical: return "empirical";
    case VarScope::joint: return "joint";
  }
  return "theoretical";
}

// --- WorldTable ------------------------------------------------------------

void WorldTable::add_variable(const VarId& var, std::span<const double> marginals) {
  if (has_variable(var)) throw Error(ErrorCode::InvalidArgument, "variable " + var + " already exists");
  if (marginals.empty()) throw Error(ErrorCode::InvalidArgument, "variable " + var + " has no alternatives");
  for (std::size_t i = 0; i < marginals.size(); ++i) {
    double p = marginals[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "probability out of [0,1] for " + var);
    }
    entries_.push_back(WorldEntry{var, static_cast<int>(i + 1), p});
  }
}

void WorldTable::remove_variable(const VarId& var) {
  std::erase_if(entries_, [&](const WorldEntry& e) { return e.var == var; });
}

bool WorldTable::has_variable(const VarId& var) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const WorldEntry& e) { return e.var == var; });
}

double WorldTable::probability(const VarId& var, int value) const {
  for (const auto& e : entries_) {
    if (e.var == var && e.value == value) return e.probability;
  }
  throw Error(ErrorCode::UnknownAssignment, var + "↦" + std::to_string(value));
}

int WorldTable::alternatives(const VarId& var) const {
  int n = 0;
  for (const auto& e : entries_) n += e.var == var ? 1 : 0;
  return n;
}

std::vector<VarId> WorldTable::variables() const {
  std::vector<VarId> out;
  for (const auto& e : entries_) {
    if (out.empty() || out.back() != e.var) out.push_back(e.var);
  }
  return out;
}

double WorldTable::max_normalization_error() const {
  double worst = 0;
  for (const auto& v : variables()) {
    double sum = 0;
    for (const auto& e : entries_) sum += e.var == v ? e.probability : 0.0;
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

std::string WorldTable::to_csv() const {
  std::string out = "var,val,prob\n";
  for (const auto& e : entries_) {
    out += csv::format_record({e.var, std::to_string(e.value), format_double(e.probability)}) + "\n";
  }
  return out;
}

WorldTable WorldTable::from_csv(std::string_view text) {
  auto records = csv::parse(text);
  if (records.empty() || records.front() != csv::Record{"var", "val", "prob"}) {
    throw Error(ErrorCode::MalformedCsv, "world table header must be var,val,prob");
  }
  WorldTable w;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.size() != 3) throw Error(ErrorCode::MalformedCsv, "world table row needs 3 fields");
    w.entries_.push_back(WorldEntry{r[0], static_cast<int>(std::get<std::int64_t>(parse_scalar(r[1], ColumnType::integer))),
                                    std::get<double>(parse_scalar(r[2], ColumnType::real))});
  }
  return w;
}

nlohmann::json WorldTable::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& e : entries_) j.push_back({{"var", e.var}, {"val", e.value}, {"prob", e.probability}});
  return j;
}

std::optional<std::size_t> URelation::column(std::string_view attribute) const {
  for (std::size_t i = 0; i < attributes.size(); ++i) {
    if (attributes[i] == attribute) return i;
  }
  return std::nullopt;
}

// --- repair-key ------------------------------------------------------------

RepairResult repair_key(const ResultSet& relation, std::span<const Symbol> key,
                        const std::optional<Symbol>& weight, VarAllocator& alloc,
                        std::int64_t phenomenon_hint) {
  std::vector<std::size_t> key_cols;
  for (const auto& k : key) {
    auto c = relation.column(k);
    if (!c) throw Error(ErrorCode::UnknownAttribute, k);
    key_cols.push_back(*c);
  }
  std::optional<std::size_t> weight_col;
  if (weight) {
    weight_col = relation.column(*weight);
    if (!weight_col) throw Error(ErrorCode::UnknownAttribute, *weight);
  }
  const auto phi_col = relation.column(kPhi);

  // Groups of row indices per key value, ordered by key value.
  std::map<Row, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < relation.rows.size(); ++i) {
    Row k;
    for (auto c : key_cols) k.push_back(relation.rows[i][c]);
    groups[k].push_back(i);
  }

  RepairResult out;
  out.relation.attributes = relation.attributes;
  for (const auto& [k, rows] : groups) {
    std::vector<double> weights;
    for (auto r : rows) {
      double w = weight_col ? as_double(relation.rows[r][*weight_col]) : 1.0;
      if (!(w > 0.0)) throw Error(ErrorCode::NonPositiveWeight, "weight " + format_double(w));
      weights.push_back(w);
    }
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    RandomVar v;
    v.id = alloc.next();
    v.scope = VarScope::theoretical;
    v.phenomenon = phi_col ? std::get<std::int64_t>(relation.rows[rows.front()][*phi_col]) : phenomenon_hint;
    v.attributes = relation.attributes;
    std::vector<double> marginals;
    for (std::size_t a = 0; a < rows.size(); ++a) {
      const Row& row = relation.rows[rows[a]];
      v.alternatives.push_back(row);
      marginals.push_back(weights[a] / total);
      out.relation.tuples.push_back(UTuple{{{v.id, static_cast<int>(a + 1)}}, row});
    }
    out.variables.push_back(std::move(v));
    out.marginals.push_back(std::move(marginals));
  }
  return out;
}

// --- u-factorization -------------------------------------------------------

std::vector<std::vector<std::size_t>> bijective_clusters(const std::vector<std::vector<Scalar>>& columns) {
  // a -> b holds in the data iff equal a-values imply equal b-values.
  auto determines = [&](std::size_t a, std::size_t b) {
    std::map<Scalar, Scalar> seen;
    for (std::size_t r = 0; r < columns[a].size(); ++r) {
      auto [it, inserted] = seen.emplace(columns[a][r], columns[b][r]);
      if (!inserted && it->second != columns[b][r]) return false;
    }
    return true;
  };
  std::vector<std::vector<std::size_t>> clusters;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    bool placed = false;
    for (auto& cl : clusters) {
      auto rep = cl.front();
      if (determines(rep, c) && determines(c, rep)) {
        cl.push_back(c);
        placed = true;
        break;
      }
    }
    if (!placed) clusters.push_back({c});
  }
  return clusters;
}

Factorization u_factorize(const Database& db, std::int64_t upsilon, std::int64_t phi, VarAllocator& alloc) {
  if (db.catalog().find_hypothesis(upsilon) == nullptr) {
    throw Error(ErrorCode::UnknownHypothesis, "υ=" + std::to_string(upsilon));
  }
  const auto tids = db.trial_ids(phi, upsilon);
  if (tids.empty()) {
    throw Error(ErrorCode::NoTrials, "(φ=" + std::to_string(phi) + ", υ=" + std::to_string(upsilon) + ")");
  }
  std::map<std::int64_t, std::size_t> trial_pos;
  for (std::size_t i = 0; i < tids.size(); ++i) trial_pos[tids[i]] = i;

  Factorization f;
  f.hypothesis = upsilon;
  f.phenomenon = phi;
  std::vector<Symbol> attrs;
  std::vector<std::vector<Scalar>> columns;
  for (const auto* t : db.hypothesis_tables(upsilon)) {
    if (is_output_table(*t)) continue;
    auto tc = t->column(kTid);
    auto pc = t->column(kPhi);
    for (std::size_t c = 0; c < t->def.attributes.size(); ++c) {
      const auto& a = t->def.attributes[c];
      if (a == kTid || a == kPhi) continue;
      std::vector<Scalar> col(tids.size());
      std::vector<bool> filled(tids.size(), false);
      for (const auto& row : t->rows) {
        if (std::get<std::int64_t>(row[pc]) != phi) continue;
        auto pos = trial_pos.at(std::get<std::int64_t>(row[tc]));
        col[pos] = row[c];
        filled[pos] = true;
      }
      if (std::find(filled.begin(), filled.end(), false) != filled.end()) {
        throw Error(ErrorCode::UnfactorizedTrial, "a trial has no " + a + " value");
      }
      attrs.push_back(a);
      columns.push_back(std::move(col));
    }
  }

  std::vector<std::vector<int>> trial_alt(tids.size());
  for (const auto& members : bijective_clusters(columns)) {
    Cluster cl;
    for (auto m : members) cl.attributes.push_back(attrs[m]);
    cl.var = alloc.next();
    std::map<Row, int> index;
    for (std::size_t r = 0; r < tids.size(); ++r) {
      Row tuple;
      for (auto m : members) tuple.push_back(columns[m][r]);
      auto [it, inserted] = index.emplace(tuple, static_cast<int>(cl.alternatives.size() + 1));
      if (inserted) cl.alternatives.push_back(tuple);
      trial_alt[r].push_back(it->second);
    }
    RandomVar v;
    v.id = cl.var;
    v.scope = VarScope::empirical;
    v.phenomenon = phi;
    v.hypothesis = upsilon;
    v.attributes = cl.attributes;
    v.alternatives = cl.alternatives;
    f.variables.push_back(std::move(v));
    f.marginals.push_back(uniform(cl.alternatives.size()));
    f.clusters.push_back(std::move(cl));
  }

  std::set<std::vector<int>> distinct;
  for (std::size_t r = 0; r < tids.size(); ++r) {
    if (!distinct.insert(trial_alt[r]).second) {
      throw Error(ErrorCode::DuplicateTrial, "tid " + std::to_string(tids[r]) +
                                                 " repeats the parameters of an earlier trial");
    }
    Condition c;
    for (std::size_t k = 0; k < f.clusters.size(); ++k) c.push_back({f.clusters[k].var, trial_alt[r][k]});
    f.trial_conditions[tids[r]] = std::move(c);
  }
  std::size_t product = 1;
  for (const auto& cl : f.clusters) product *= cl.alternatives.size();
  if (distinct.size() < product) {
    f.warnings.push_back("IncompleteProduct: υ=" + std::to_string(upsilon) + " has " +
                         std::to_string(distinct.size()) + " trials for " + std::to_string(product) +
                         " parameter combinations; the rest carry prior mass without predictions");
  }

  // One U-relation per cluster, so outputs follow as Y_k^{|clusters|+1}.
  std::size_t j = 0;
  for (const auto& cl : f.clusters) {
    URelation u;
    u.name = urelation_name(upsilon, ++j);
    u.attributes = {std::string(kPhi)};
    u.attributes.insert(u.attributes.end(), cl.attributes.begin(), cl.attributes.end());
    for (std::size_t alt = 0; alt < cl.alternatives.size(); ++alt) {
      Row values{phi};
      values.insert(values.end(), cl.alternatives[alt].begin(), cl.alternatives[alt].end());
      u.tuples.push_back(UTuple{{{cl.var, static_cast<int>(alt + 1)}}, std::move(values)});
    }
    f.parameter_relations.push_back(std::move(u));
  }
  return f;
}

// --- u-propagation ---------------------------------------------------------

Propagation u_propagate(const Database& db, std::int64_t upsilon, std::int64_t phi, const Factorization& f,
                        const Assignment& theoretical) {
  if (f.hypothesis != upsilon || f.phenomenon != phi) {
    throw Error(ErrorCode::InvalidArgument, "factorization belongs to another (φ, υ)");
  }
  Propagation out;
  std::size_t j = f.parameter_relations.size();
  std::set<std::int64_t> seen_tids;
  for (const auto* t : db.hypothesis_tables(upsilon)) {
    if (!is_output_table(*t)) continue;
    URelation u;
    u.name = urelation_name(upsilon, ++j);
    auto tc = t->column(kTid);
    auto pc = t->column(kPhi);
    for (const auto& a : t->def.attributes) {
      if (a != kTid) u.attributes.push_back(a);
    }
    for (const auto& row : t->rows) {
      if (std::get<std::int64_t>(row[pc]) != phi) continue;
      auto tid = std::get<std::int64_t>(row[tc]);
      auto it = f.trial_conditions.find(tid);
      if (it == f.trial_conditions.end()) {
        throw Error(ErrorCode::UnfactorizedTrial, "tid " + std::to_string(tid) + " of υ=" +
                                                      std::to_string(upsilon) + " has no parameter assignment");
      }
      Condition theta{theoretical};
      theta.insert(theta.end(), it->second.begin(), it->second.end());
      Row values;
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c != tc) values.push_back(row[c]);
      }
      u.tuples.push_back(UTuple{std::move(theta), std::move(values)});
      seen_tids.insert(tid);
    }
    out.output_relations.push_back(std::move(u));
  }
  for (const auto& [tid, cond] : f.trial_conditions) {
    Condition theta{theoretical};
    theta.insert(theta.end(), cond.begin(), cond.end());
    out.worlds.push_back(World{upsilon, tid, std::move(theta)});
  }
  return out;
}

// --- probabilities ---------------------------------------------------------

double world_prob(const Condition& theta, const WorldTable& w) {
  double p = 1.0;
  const auto c = normalized(theta);
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i > 0 && c[i].var == c[i - 1].var) return 0.0;  // contradictory conjunction
  }
  for (const auto& a : c) p *= w.probability(a.var, a.value);
  return p;
}

double disjunction_probability(std::span<const Condition> conditions, const WorldTable& w) {
  // Per mentioned variable: the mentioned values plus one bucket (value 0)
  // carrying the remaining mass.
  std::map<VarId, std::vector<int>> values;
  for (const auto& c : conditions) {
    for (const auto& a : c) {
      w.probability(a.var, a.value);
      auto& v = values[a.var];
      if (std::find(v.begin(), v.end(), a.value) == v.end()) v.push_back(a.value);
    }
  }
  std::vector<VarId> vars;
  std::vector<std::vector<std::pair<int, double>>> domain;
  for (auto& [var, vals] : values) {
    std::vector<std::pair<int, double>> dom;
    double mentioned = 0;
    for (int v : vals) {
      double p = w.probability(var, v);
      dom.emplace_back(v, p);
      mentioned += p;
    }
    if (static_cast<int>(vals.size()) < w.alternatives(var)) dom.emplace_back(0, std::max(0.0, 1.0 - mentioned));
    vars.push_back(var);
    domain.push_back(std::move(dom));
  }
  // Conditions as index/value pairs over `vars`.
  std::vector<std::vector<std::pair<std::size_t, int>>> conds;
  for (const auto& c : conditions) {
    std::vector<std::pair<std::size_t, int>> cc;
    for (const auto& a : c) {
      auto pos = static_cast<std::size_t>(std::lower_bound(vars.begin(), vars.end(), a.var) - vars.begin());
      cc.emplace_back(pos, a.value);
    }
    conds.push_back(std::move(cc));
  }
  if (conds.empty()) return 0.0;

  double total = 0;
  std::vector<std::size_t> pick(vars.size(), 0);
  for (;;) {
    bool holds = std::any_of(conds.begin(), conds.end(), [&](const auto& cc) {
      return std::all_of(cc.begin(), cc.end(),
                         [&](const auto& iv) { return domain[iv.first][pick[iv.first]].first == iv.second; });
    });
    if (holds) {
      double p = 1;
      for (std::size_t i = 0; i < vars.size(); ++i) p *= domain[i][pick[i]].second;
      total += p;
    }
    std::size_t i = 0;
    while (i < vars.size() && ++pick[i] == domain[i].size()) pick[i++] = 0;
    if (i == vars.size()) break;
  }
  return total;
}

std::vector<Confidence> conf(std::span<const UTuple> tuples, const WorldTable& w) {
  std::vector<Row> order;
  std::map<Row, std::vector<Condition>> groups;
  for (const auto& t : tuples) {
    auto [it, inserted] = groups.try_emplace(t.values);
    if (inserted) order.push_back(t.values);
    it->second.push_back(t.condition);
  }
  std::vector<Confidence> out;
  for (const auto& values : order) {
    out.push_back(Confidence{values, disjunction_probability(groups.at(values), w)});
  }
  return out;
}

// --- UncertainDb -----------------------------------------------------------

const URelation& UncertainDb::relation(std::string_view name) const {
  auto it = urelations_.find(name);
  if (it == urelations_.end()) throw Error(ErrorCode::UnknownRelation, std::string(name));
  return it->second;
}

const RandomVar* UncertainDb::find_variable(std::string_view id) const {
  for (const auto& v : variables_) {
    if (v.id == id) return &v;
  }
  return nullptr;
}

const std::vector<World>* UncertainDb::worlds(std::int64_t phi) const {
  auto it = worlds_.find(phi);
  return it == worlds_.end() ? nullptr : &it->second;
}

std::vector<std::string> UncertainDb::hypothesis_relations(std::int64_t upsilon) const {
  auto it = hyp_relations_.find(upsilon);
  return it == hyp_relations_.end() ? std::vector<std::string>{} : it->second;
}

void UncertainDb::add_variables(const std::vector<RandomVar>& vars, const std::vector<std::vector<double>>& m) {
  for (std::size_t i = 0; i < vars.size(); ++i) {
    world_.add_variable(vars[i].id, m[i]);
    variables_.push_back(vars[i]);
  }
}

void UncertainDb::retire_variable(const VarId& id) {
  world_.remove_variable(id);
  std::erase_if(variables_, [&](const RandomVar& v) { return v.id == id; });
}

URelation& UncertainDb::urelation(const std::string& name, const std::vector<Symbol>& attributes) {
  auto [it, inserted] = urelations_.try_emplace(name);
  if (inserted) {
    it->second.name = name;
    it->second.attributes = attributes;
  } else if (it->second.attributes != attributes) {
    throw Error(ErrorCode::InvalidArgument, "U-relation " + name + " changed shape");
  }
  return it->second;
}

void UncertainDb::ensure_theoretical(const Database& db, std::int64_t phi) {
  const auto expected = db.catalog().hypotheses_for(phi);
  const RandomVar* existing = nullptr;
  bool any_theoretical = false;
  for (const auto& v : variables_) {
    if (v.scope != VarScope::theoretical) continue;
    any_theoretical = true;
    if (v.phenomenon == phi) existing = &v;
  }
  const ResultSet h0 = db.select_certain(Database::kTargetTable, {});
  const std::vector<Symbol> key{std::string(kPhi)};
  const auto uc = *h0.column(kUpsilon);

  if (existing != nullptr) {
    std::vector<std::int64_t> current;
    for (const auto& alt : existing->alternatives) current.push_back(std::get<std::int64_t>(alt[uc]));
    if (current == expected) return;
    const VarId old = existing->id;
    retire_variable(old);
    auto& y0 = urelations_.at(std::string(kTargetURelation));
    std::erase_if(y0.tuples, [&](const UTuple& t) {
      return std::any_of(t.condition.begin(), t.condition.end(), [&](const Assignment& a) { return a.var == old; });
    });
  }
  ResultSet scope = h0;
  if (any_theoretical) {
    // Only φ's group is (re)repaired; other phenomena keep their variables.
    const auto pc = *h0.column(kPhi);
    std::erase_if(scope.rows, [&](const Row& r) { return std::get<std::int64_t>(r[pc]) != phi; });
  }
  RepairResult rk = repair_key(scope, key, std::nullopt, alloc_, phi);
  add_variables(rk.variables, rk.marginals);
  auto& y0 = urelation(std::string(kTargetURelation), h0.attributes);
  for (auto& t : rk.relation.tuples) y0.tuples.push_back(std::move(t));
}

std::vector<std::string> UncertainDb::introduce(const Database& db, std::int64_t phi) {
  if (db.catalog().find_phenomenon(phi) == nullptr) {
    throw Error(ErrorCode::UnknownPhenomenon, "φ=" + std::to_string(phi));
  }
  if (introduced(phi)) {
    throw Error(ErrorCode::StageViolation, "φ=" + std::to_string(phi) + " is already U-introduced");
  }
  const auto hyps = db.catalog().hypotheses_for(phi);
  if (hyps.empty()) throw Error(ErrorCode::NoTrials, "no hypothesis targets φ=" + std::to_string(phi));

  UncertainDb next = *this;
  next.ensure_theoretical(db, phi);
  const RandomVar* theo = nullptr;
  for (const auto& v : next.variables_) {
    if (v.scope == VarScope::theoretical && v.phenomenon == phi) theo = &v;
  }
  const auto theo_id = theo->id;
  std::vector<std::int64_t> theo_alts;
  {
    const auto h0 = db.select_certain(Database::kTargetTable, {});
    const auto uc = *h0.column(kUpsilon);
    for (const auto& alt : theo->alternatives) theo_alts.push_back(std::get<std::int64_t>(alt[uc]));
  }

  std::vector<std::string> warnings;
  std::vector<World> worlds;
  for (auto upsilon : hyps) {
    Factorization f = u_factorize(db, upsilon, phi, next.alloc_);
    auto pos = std::find(theo_alts.begin(), theo_alts.end(), upsilon) - theo_alts.begin();
    Assignment theoretical{theo_id, static_cast<int>(pos + 1)};
    Propagation p = u_propagate(db, upsilon, phi, f, theoretical);
    next.add_variables(f.variables, f.marginals);
    std::vector<std::string> names;
    for (auto& u : f.parameter_relations) {
      names.push_back(u.name);
      auto& target = next.urelation(u.name, u.attributes);
      for (auto& t : u.tuples) target.tuples.push_back(std::move(t));
    }
    for (auto& u : p.output_relations) {
      names.push_back(u.name);
      auto& target = next.urelation(u.name, u.attributes);
      for (auto& t : u.tuples) target.tuples.push_back(std::move(t));
    }
    next.hyp_relations_[upsilon] = names;
    for (auto& w : p.worlds) worlds.push_back(std::move(w));
    warnings.insert(warnings.end(), f.warnings.begin(), f.warnings.end());
  }
  next.worlds_[phi] = std::move(worlds);
  *this = std::move(next);
  return warnings;
}

void UncertainDb::install_joint(std::int64_t phi, std::span<const double> marginals) {
  auto wit = worlds_.find(phi);
  if (wit == worlds_.end()) throw Error(ErrorCode::NotUIntroduced, "φ=" + std::to_string(phi));
  auto& worlds = wit->second;
  if (marginals.size() != worlds.size()) {
    throw Error(ErrorCode::InvalidArgument, "one marginal per world expected");
  }
  std::set<VarId> retired;
  for (const auto& v : variables_) {
    if (v.phenomenon == phi) retired.insert(v.id);
  }
  const VarId joint = "w" + std::to_string(phi);

  auto holds_in = [&](const Condition& c, const Condition& theta) {
    return std::all_of(c.begin(), c.end(), [&](const Assignment& a) {
      return !retired.contains(a.var) || std::find(theta.begin(), theta.end(), a) != theta.end();
    });
  };
  for (auto& [name, u] : urelations_) {
    std::vector<UTuple> rewritten;
    for (auto& t : u.tuples) {
      bool touches = std::any_of(t.condition.begin(), t.condition.end(),
                                 [&](const Assignment& a) { return retired.contains(a.var); });
      if (!touches) {
        rewritten.push_back(std::move(t));
        continue;
      }
      Condition rest;
      for (const auto& a : t.condition) {
        if (!retired.contains(a.var)) rest.push_back(a);
      }
      for (std::size_t k = 0; k < worlds.size(); ++k) {
        if (!holds_in(t.condition, worlds[k].theta)) continue;
        Condition c{{joint, static_cast<int>(k + 1)}};
        c.insert(c.end(), rest.begin(), rest.end());
        rewritten.push_back(UTuple{std::move(c), t.values});
      }
    }
    u.tuples = std::move(rewritten);
  }
  for (const auto& id : retired) retire_variable(id);

  RandomVar v;
  v.id = joint;
  v.scope = VarScope::joint;
  v.phenomenon = phi;
  for (const auto& w : worlds) v.alternatives.push_back(Row{w.hypothesis, w.tid});
  world_.add_variable(joint, marginals);
  variables_.push_back(std::move(v));
  for (std::size_t k = 0; k < worlds.size(); ++k) worlds[k].theta = {{joint, static_cast<int>(k + 1)}};
}

nlohmann::json UncertainDb::world_table_json() const {
  nlohmann::json vars = nlohmann::json::array();
  for (const auto& v : variables_) vars.push_back(to_json(v));
  return {{"entries", world_.to_json()}, {"variables", vars}};
}

bool UncertainDb::exists_on_disk(const fs::path& dir) const {
  return fs::exists(dir / "uncertain" / "state.json");
}

void UncertainDb::save(const fs::path& dir) const {
  const auto root = dir / "uncertain";
  nlohmann::json state;
  nlohmann::json vars = nlohmann::json::array();
  for (const auto& v : variables_) vars.push_back(to_json(v));
  state["variables"] = vars;
  state["next_var"] = alloc_.peek();
  nlohmann::json worlds = nlohmann::json::object();
  for (const auto& [phi, ws] : worlds_) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& w : ws) {
      list.push_back({{"upsilon", w.hypothesis}, {"tid", w.tid}, {"theta", condition_json(w.theta)}});
    }
    worlds[std::to_string(phi)] = list;
  }
  state["worlds"] = worlds;
  nlohmann::json hyp = nlohmann::json::object();
  for (const auto& [u, names] : hyp_relations_) hyp[std::to_string(u)] = names;
  state["hypothesis_relations"] = hyp;
  nlohmann::json rels = nlohmann::json::array();
  for (const auto& [name, u] : urelations_) {
    rels.push_back({{"name", name}, {"attributes", u.attributes}, {"file", "urelations/" + name + ".csv"}});
    std::size_t width = 0;
    for (const auto& t : u.tuples) width = std::max(width, t.condition.size());
    csv::Record header;
    for (std::size_t i = 1; i <= width; ++i) {
      header.push_back("V" + std::to_string(i));
      header.push_back("D" + std::to_string(i));
    }
    header.insert(header.end(), u.attributes.begin(), u.attributes.end());
    std::string body = csv::format_record(header) + "\n";
    for (const auto& t : u.tuples) {
      csv::Record r;
      for (std::size_t i = 0; i < width; ++i) {
        if (i < t.condition.size()) {
          r.push_back(t.condition[i].var);
          r.push_back(std::to_string(t.condition[i].value));
        } else {
          r.emplace_back();
          r.emplace_back();
        }
      }
      for (const auto& v : t.values) r.push_back(format_scalar(v));
      body += csv::format_record(r) + "\n";
    }
    write_file_atomic(root / "urelations" / (name + ".csv"), body);
  }
  state["urelations"] = rels;
  write_file_atomic(root / "world_table.csv", world_.to_csv());
  write_file_atomic(root / "state.json", state.dump(2) + "\n");
}

UncertainDb UncertainDb::load(const fs::path& dir) {
  const auto root = dir / "uncertain";
  UncertainDb u;
  if (!fs::exists(root / "state.json")) return u;
  auto state = nlohmann::json::parse(read_file(root / "state.json"));
  for (const auto& v : state.at("variables")) u.variables_.push_back(var_from_json(v));
  u.alloc_ = VarAllocator(state.at("next_var").get<std::size_t>());
  for (const auto& [phi, list] : state.at("worlds").items()) {
    std::vector<World> ws;
    for (const auto& w : list) {
      ws.push_back(World{w.at("upsilon").get<std::int64_t>(), w.at("tid").get<std::int64_t>(),
                         condition_from_json(w.at("theta"))});
    }
    u.worlds_[std::stoll(phi)] = std::move(ws);
  }
  for (const auto& [up, names] : state.at("hypothesis_relations").items()) {
    u.hyp_relations_[std::stoll(up)] = names.get<std::vector<std::string>>();
  }
  for (const auto& rj : state.at("urelations")) {
    URelation rel;
    rel.name = rj.at("name").get<std::string>();
    rel.attributes = rj.at("attributes").get<std::vector<Symbol>>();
    auto records = csv::parse(read_file(root / rj.at("file").get<std::string>()));
    if (records.empty()) throw Error(ErrorCode::Io, "empty U-relation file for " + rel.name);
    const std::size_t width = (records.front().size() - rel.attributes.size()) / 2;
    for (std::size_t i = 1; i < records.size(); ++i) {
      const auto& r = records[i];
      UTuple t;
      for (std::size_t c = 0; c < width; ++c) {
        if (r[2 * c].empty()) continue;
        t.condition.push_back({r[2 * c], static_cast<int>(std::get<std::int64_t>(
                                             parse_scalar(r[2 * c + 1], ColumnType::integer)))});
      }
      for (std::size_t c = 0; c < rel.attributes.size(); ++c) {
        t.values.push_back(parse_scalar(r[2 * width + c], column_type_of(rel.attributes[c])));
      }
      rel.tuples.push_back(std::move(t));
    }
    auto name = rel.name;
    u.urelations_.emplace(std::move(name), std::move(rel));
  }
  u.world_ = WorldTable::from_csv(read_file(root / "world_table.csv"));
  return u;
}

}  // namespace upsilon
