#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "upsilon/ingest.hpp"
#include "upsilon/synthesis.hpp"

namespace upsilon {

// Integer ids (φ, υ, tid), double-precision measurements, descriptive text.
using Scalar = std::variant<std::int64_t, double, std::string>;

enum class ColumnType { integer, real, text };

// φ, υ and tid are integer columns, everything else in a synthesized
// relation is real.
ColumnType column_type_of(std::string_view attribute);

// Shortest representation that parses back to the same bits.
std::string format_scalar(const Scalar& v);
std::string format_double(double v);
Scalar parse_scalar(std::string_view text, ColumnType type);

// Numeric view used for arithmetic on loaded values (ids widen to double).
double as_double(const Scalar& v);

// Maps the ASCII aliases phi/upsilon to φ/υ.
std::string canonical_attribute(std::string_view a);

using Row = std::vector<Scalar>;

struct ResultSet {
  std::vector<Symbol> attributes;
  std::vector<Row> rows;

  std::optional<std::size_t> column(std::string_view attribute) const;
};

struct Table {
  RelationDef def;
  std::vector<ColumnType> types;
  std::vector<Row> rows;

  std::size_t column(std::string_view attribute) const;
  std::optional<std::size_t> find_column(std::string_view attribute) const;
};

struct SeriesPoint {
  double index = 0;
  std::map<Symbol, double> outputs;
};

struct TrialDataset {
  std::int64_t hypothesis_id = 0;
  std::int64_t phenomenon_id = 0;
  std::map<Symbol, double> parameters;
  Symbol index_symbol;
  std::vector<SeriesPoint> series;
};

// Trial CSV: a `param:<symbol>,...` header and one value row, then a
// `<index>,<out1>,...` header and the series rows.
TrialDataset parse_trial_csv(std::string_view text);
std::string format_trial_csv(const TrialDataset& d);

struct HypothesisEntry {
  std::int64_t id = 0;
  std::string name;
  Structure structure;
  SchemaCatalog schema;
};

struct Catalog {
  std::vector<PhenomenonDecl> phenomena;
  std::vector<HypothesisEntry> hypotheses;
  std::vector<std::pair<std::int64_t, std::int64_t>> h0;  // (φ, υ), sorted

  const PhenomenonDecl* find_phenomenon(std::int64_t phi) const;
  const HypothesisEntry* find_hypothesis(std::int64_t upsilon) const;
  bool has_target(std::int64_t phi, std::int64_t upsilon) const;
  std::vector<std::int64_t> hypotheses_for(std::int64_t phi) const;
};

using Predicate = std::vector<std::pair<Symbol, std::string>>;

// Certain relational store: catalog plus one table per deployed relation.
class Database {
 public:
  static constexpr std::string_view kPhenomenonTable = "PHENOMENON";
  static constexpr std::string_view kHypothesisTable = "HYPOTHESIS";
  static constexpr std::string_view kTargetTable = "H_0";

  Database();

  const Catalog& catalog() const { return catalog_; }

  void add_phenomenon(const PhenomenonDecl& p);
  // Registers the hypothesis and deploys its schema.
  void add_hypothesis(const Structure& s, const SchemaCatalog& schema);
  void add_target(std::int64_t phi, std::int64_t upsilon);

  // Materializes each relation with tid prepended to its attributes and keys.
  void deploy_schema(const SchemaCatalog& cat);

  std::int64_t load_trial(const TrialDataset& d);

  ResultSet select_certain(std::string_view relation, const Predicate& where) const;

  const Table& table(std::string_view name) const;
  const Table* find_table(std::string_view name) const;
  std::vector<std::string> table_names() const;

  // Relations deployed for hypothesis υ, in schema order.
  std::vector<const Table*> hypothesis_tables(std::int64_t upsilon) const;
  std::vector<std::int64_t> trial_ids(std::int64_t phi, std::int64_t upsilon) const;

  void save(const std::filesystem::path& dir) const;
  static Database load(const std::filesystem::path& dir);

  nlohmann::json catalog_json() const;

 private:
  void insert_rows(Table& t, std::vector<Row> rows);
  void check_keys(const Table& t, const std::vector<Row>& incoming) const;
  Table& mutable_table(std::string_view name);

  Catalog catalog_;
  std::map<std::string, Table, std::less<>> tables_;
};

// Atomic whole-file write (temp file + rename).
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace upsilon
