#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "upsilon/relstore.hpp"

namespace upsilon {

using VarId = std::string;

struct Assignment {
  VarId var;
  int value = 1;  // 1-based alternative index

  auto operator<=>(const Assignment&) const = default;
};

// A conjunction of assignments; a world θ when it covers all variables of
// interest.
using Condition = std::vector<Assignment>;

Condition normalized(Condition c);
std::string format_condition(const Condition& c);

struct WorldEntry {
  VarId var;
  int value = 1;
  double probability = 0;

  bool operator==(const WorldEntry&) const = default;
};

class WorldTable {
 public:
  void add_variable(const VarId& var, std::span<const double> marginals);
  void remove_variable(const VarId& var);
  bool has_variable(const VarId& var) const;
  // Throws UnknownAssignment.
  double probability(const VarId& var, int value) const;
  int alternatives(const VarId& var) const;
  std::vector<VarId> variables() const;

  const std::vector<WorldEntry>& entries() const { return entries_; }
  // Largest |Σ_v Pr(var=v) − 1| over all variables.
  double max_normalization_error() const;

  std::string to_csv() const;
  static WorldTable from_csv(std::string_view text);
  nlohmann::json to_json() const;

  bool operator==(const WorldTable&) const = default;

 private:
  std::vector<WorldEntry> entries_;  // grouped per variable, values ascending
};

struct UTuple {
  Condition condition;
  Row values;

  bool operator==(const UTuple&) const = default;
};

struct URelation {
  std::string name;
  std::vector<Symbol> attributes;  // data columns
  std::vector<UTuple> tuples;

  std::optional<std::size_t> column(std::string_view attribute) const;
  bool operator==(const URelation&) const = default;
};

enum class VarScope { theoretical, empirical, joint };

std::string_view to_string(VarScope s);

struct RandomVar {
  VarId id;
  VarScope scope = VarScope::theoretical;
  std::int64_t phenomenon = 0;
  std::optional<std::int64_t> hypothesis;  // empirical only
  std::vector<Symbol> attributes;          // empirical: cluster attributes
  // Payload of alternative i+1: theoretical -> [υ]; empirical -> cluster
  // values; joint -> [υ, tid].
  std::vector<Row> alternatives;

  bool operator==(const RandomVar&) const = default;
};

// Hands out x0, x1, ...
class VarAllocator {
 public:
  explicit VarAllocator(std::size_t next = 0) : next_(next) {}
  VarId next() { return "x" + std::to_string(next_++); }
  std::size_t peek() const { return next_; }

 private:
  std::size_t next_;
};

struct RepairResult {
  URelation relation;
  std::vector<RandomVar> variables;
  std::vector<std::vector<double>> marginals;  // per variable
};

// One fresh variable per distinct key value; its alternatives are the rows
// sharing that key value, weighted by `weight` (uniform when absent).
RepairResult repair_key(const ResultSet& relation, std::span<const Symbol> key,
                        const std::optional<Symbol>& weight, VarAllocator& alloc,
                        std::int64_t phenomenon_hint = 0);

struct Cluster {
  std::vector<Symbol> attributes;
  VarId var;
  std::vector<Row> alternatives;  // distinct value tuples, first-seen order
};

struct Factorization {
  std::int64_t hypothesis = 0;
  std::int64_t phenomenon = 0;
  std::vector<Cluster> clusters;
  std::vector<RandomVar> variables;
  std::vector<std::vector<double>> marginals;
  std::vector<URelation> parameter_relations;  // one per cluster
  std::map<std::int64_t, Condition> trial_conditions;  // tid -> cluster assignments
  std::vector<std::string> warnings;
};

// Partition of parameter columns into classes of mutually bijective columns.
// Columns are given as value vectors over the same trials.
std::vector<std::vector<std::size_t>> bijective_clusters(const std::vector<std::vector<Scalar>>& columns);

Factorization u_factorize(const Database& db, std::int64_t upsilon, std::int64_t phi,
                          VarAllocator& alloc);

struct World {
  std::int64_t hypothesis = 0;
  std::int64_t tid = 0;
  Condition theta;

  bool operator==(const World&) const = default;
};

struct Propagation {
  std::vector<URelation> output_relations;  // tuples of (φ,υ) only
  std::vector<World> worlds;
};

Propagation u_propagate(const Database& db, std::int64_t upsilon, std::int64_t phi,
                        const Factorization& f, const Assignment& theoretical);

double world_prob(const Condition& theta, const WorldTable& w);

struct Confidence {
  Row values;
  double probability = 0;
};

// Exact tuple confidence: per distinct data tuple, Pr(at least one of its
// conditions holds).
std::vector<Confidence> conf(std::span<const UTuple> tuples, const WorldTable& w);

// Probability that at least one of `conditions` holds.
double disjunction_probability(std::span<const Condition> conditions, const WorldTable& w);

// U-relational side of a project: world table, U-relations, variable
// metadata and the world index of every U-introduced phenomenon.
class UncertainDb {
 public:
  static constexpr std::string_view kTargetURelation = "Y_0";

  WorldTable& world() { return world_; }
  const WorldTable& world() const { return world_; }

  const std::map<std::string, URelation, std::less<>>& relations() const { return urelations_; }
  const URelation& relation(std::string_view name) const;
  const std::vector<RandomVar>& variables() const { return variables_; }
  const RandomVar* find_variable(std::string_view id) const;
  const std::vector<World>* worlds(std::int64_t phi) const;
  bool introduced(std::int64_t phi) const { return worlds_.contains(phi); }

  // U-relation names of hypothesis υ: parameter relations then outputs.
  std::vector<std::string> hypothesis_relations(std::int64_t upsilon) const;

  // Theoretical repair-key (if needed), then u-factorization and
  // u-propagation of every hypothesis targeting φ in ascending υ.
  std::vector<std::string> introduce(const Database& db, std::int64_t phi);

  // Replaces φ's variables by a joint variable over its worlds with the
  // given marginals (aligned with worlds(phi)) and rewrites conditions.
  void install_joint(std::int64_t phi, std::span<const double> marginals);

  void save(const std::filesystem::path& dir) const;
  static UncertainDb load(const std::filesystem::path& dir);
  bool exists_on_disk(const std::filesystem::path& dir) const;

  nlohmann::json world_table_json() const;

 private:
  void ensure_theoretical(const Database& db, std::int64_t phi);
  void add_variables(const std::vector<RandomVar>& vars, const std::vector<std::vector<double>>& m);
  void retire_variable(const VarId& id);
  URelation& urelation(const std::string& name, const std::vector<Symbol>& attributes);

  WorldTable world_;
  std::map<std::string, URelation, std::less<>> urelations_;
  std::vector<RandomVar> variables_;
  std::map<std::int64_t, std::vector<World>> worlds_;
  std::map<std::int64_t, std::vector<std::string>> hyp_relations_;
  VarAllocator alloc_;
};

}  // namespace upsilon
