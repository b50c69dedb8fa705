#include "upsilon/relstore.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "upsilon/csv.hpp"
#include "upsilon/error.hpp"

namespace upsilon {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double parse_number(std::string_view text, std::string_view what) {
  auto s = trim(text);
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::MalformedCsv, "bad number '" + s + "' for " + std::string(what));
  }
  return v;
}

std::string type_name(ColumnType t) {
  switch (t) {
    case ColumnType::integer: return "integer";
    case ColumnType::real: return "real";
    case ColumnType::text: return "text";
  }
  return "real";
}

ColumnType type_from_name(std::string_view s) {
  if (s == "integer") return ColumnType::integer;
  if (s == "text") return ColumnType::text;
  return ColumnType::real;
}

Table make_table(RelationDef def) {
  Table t;
  t.def = std::move(def);
  for (const auto& a : t.def.attributes) t.types.push_back(column_type_of(a));
  return t;
}

}  // namespace

ColumnType column_type_of(std::string_view attribute) {
  if (attribute == kPhi || attribute == kUpsilon || attribute == kTid) return ColumnType::integer;
  return ColumnType::real;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string format_scalar(const Scalar& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&v)) return format_double(*d);
  return std::get<std::string>(v);
}

Scalar parse_scalar(std::string_view text, ColumnType type) {
  switch (type) {
    case ColumnType::integer: {
      auto s = trim(text);
      std::int64_t v = 0;
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
        throw Error(ErrorCode::InvalidArgument, "expected an integer, got '" + s + "'");
      }
      return v;
    }
    case ColumnType::real: {
      auto s = trim(text);
      double v = 0;
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
        throw Error(ErrorCode::InvalidArgument, "expected a number, got '" + s + "'");
      }
      return v;
    }
    case ColumnType::text: return std::string(text);
  }
  return std::string(text);
}

std::string canonical_attribute(std::string_view a) {
  if (a == "phi") return std::string(kPhi);
  if (a == "upsilon") return std::string(kUpsilon);
  return std::string(a);
}

double as_double(const Scalar& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  throw Error(ErrorCode::InvalidArgument, "text value used as a number");
}

std::optional<std::size_t> ResultSet::column(std::string_view attribute) const {
  for (std::size_t i = 0; i < attributes.size(); ++i) {
    if (attributes[i] == attribute) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> Table::find_column(std::string_view attribute) const {
  for (std::size_t i = 0; i < def.attributes.size(); ++i) {
    if (def.attributes[i] == attribute) return i;
  }
  return std::nullopt;
}

std::size_t Table::column(std::string_view attribute) const {
  auto c = find_column(attribute);
  if (!c) throw Error(ErrorCode::UnknownAttribute, std::string(attribute) + " in " + def.name);
  return *c;
}

TrialDataset parse_trial_csv(std::string_view text) {
  auto records = csv::parse(text);
  if (records.size() < 2) throw Error(ErrorCode::MalformedCsv, "trial CSV needs a parameter header and row");
  TrialDataset d;
  std::size_t at = 0;
  const auto& header = records[at++];
  bool has_params = !header.empty() && header.front().rfind("param:", 0) == 0;
  if (has_params) {
    const auto& values = records[at++];
    if (values.size() != header.size()) {
      throw Error(ErrorCode::MalformedCsv, "parameter row has " + std::to_string(values.size()) +
                                               " fields, header has " + std::to_string(header.size()));
    }
    for (std::size_t i = 0; i < header.size(); ++i) {
      auto h = trim(header[i]);
      if (h.rfind("param:", 0) != 0) {
        throw Error(ErrorCode::MalformedCsv, "parameter header cell '" + h + "' lacks param: prefix");
      }
      auto sym = h.substr(6);
      if (!d.parameters.emplace(sym, parse_number(values[i], sym)).second) {
        throw Error(ErrorCode::MalformedCsv, "parameter " + sym + " given twice");
      }
    }
  } else {
    at = 0;
  }
  if (at >= records.size()) throw Error(ErrorCode::MalformedCsv, "trial CSV has no series header");
  const auto& series_header = records[at++];
  if (series_header.empty()) throw Error(ErrorCode::MalformedCsv, "empty series header");
  std::vector<std::string> cols;
  for (const auto& h : series_header) cols.push_back(trim(h));
  d.index_symbol = cols.front();
  for (; at < records.size(); ++at) {
    const auto& r = records[at];
    if (r.size() != cols.size()) {
      throw Error(ErrorCode::MalformedCsv, "series row with " + std::to_string(r.size()) +
                                               " fields, expected " + std::to_string(cols.size()));
    }
    SeriesPoint p;
    p.index = parse_number(r[0], cols[0]);
    for (std::size_t i = 1; i < cols.size(); ++i) p.outputs[cols[i]] = parse_number(r[i], cols[i]);
    d.series.push_back(std::move(p));
  }
  return d;
}

std::string format_trial_csv(const TrialDataset& d) {
  std::ostringstream os;
  csv::Record header;
  csv::Record values;
  for (const auto& [sym, v] : d.parameters) {
    header.push_back("param:" + sym);
    values.push_back(format_double(v));
  }
  os << csv::format_record(header) << "\n" << csv::format_record(values) << "\n";
  std::vector<Symbol> outputs;
  if (!d.series.empty()) {
    for (const auto& [sym, v] : d.series.front().outputs) outputs.push_back(sym);
  }
  csv::Record sh{d.index_symbol};
  sh.insert(sh.end(), outputs.begin(), outputs.end());
  os << csv::format_record(sh) << "\n";
  for (const auto& p : d.series) {
    csv::Record r{format_double(p.index)};
    for (const auto& o : outputs) r.push_back(format_double(p.outputs.at(o)));
    os << csv::format_record(r) << "\n";
  }
  return os.str();
}

const PhenomenonDecl* Catalog::find_phenomenon(std::int64_t phi) const {
  for (const auto& p : phenomena) {
    if (p.phenomenon_id == phi) return &p;
  }
  return nullptr;
}

const HypothesisEntry* Catalog::find_hypothesis(std::int64_t upsilon) const {
  for (const auto& h : hypotheses) {
    if (h.id == upsilon) return &h;
  }
  return nullptr;
}

bool Catalog::has_target(std::int64_t phi, std::int64_t upsilon) const {
  return std::binary_search(h0.begin(), h0.end(), std::pair(phi, upsilon));
}

std::vector<std::int64_t> Catalog::hypotheses_for(std::int64_t phi) const {
  std::vector<std::int64_t> out;
  for (const auto& [p, u] : h0) {
    if (p == phi) out.push_back(u);
  }
  return out;
}

Database::Database() {
  const Symbol phi(kPhi);
  const Symbol upsilon(kUpsilon);
  Table phen;
  phen.def = RelationDef{std::string(kPhenomenonTable), {phi, "Description"}, {{phi}}, std::nullopt};
  phen.types = {ColumnType::integer, ColumnType::text};
  Table hyp;
  hyp.def = RelationDef{std::string(kHypothesisTable), {upsilon, "Name"}, {{upsilon}}, std::nullopt};
  hyp.types = {ColumnType::integer, ColumnType::text};
  Table h0;
  h0.def = RelationDef{std::string(kTargetTable), {phi, upsilon}, {{upsilon, phi}}, std::nullopt};
  std::sort(h0.def.keys.front().begin(), h0.def.keys.front().end());
  h0.types = {ColumnType::integer, ColumnType::integer};
  tables_.emplace(phen.def.name, std::move(phen));
  tables_.emplace(hyp.def.name, std::move(hyp));
  tables_.emplace(h0.def.name, std::move(h0));
}

Table& Database::mutable_table(std::string_view name) {
  auto it = tables_.find(name);
  if (it == tables_.end()) throw Error(ErrorCode::UnknownRelation, std::string(name));
  return it->second;
}

const Table* Database::find_table(std::string_view name) const {
  auto it = tables_.find(name);
  return it == tables_.end() ? nullptr : &it->second;
}

const Table& Database::table(std::string_view name) const {
  const auto* t = find_table(name);
  if (t == nullptr) throw Error(ErrorCode::UnknownRelation, std::string(name));
  return *t;
}

std::vector<std::string> Database::table_names() const {
  std::vector<std::string> out;
  for (const auto& [name, t] : tables_) out.push_back(name);
  return out;
}

void Database::add_phenomenon(const PhenomenonDecl& p) {
  if (p.phenomenon_id <= 0) throw Error(ErrorCode::InvalidArgument, "phenomenon id must be positive");
  if (catalog_.find_phenomenon(p.phenomenon_id) != nullptr) {
    throw Error(ErrorCode::DuplicatePhenomenon, "φ=" + std::to_string(p.phenomenon_id));
  }
  insert_rows(mutable_table(kPhenomenonTable), {{p.phenomenon_id, p.description}});
  catalog_.phenomena.push_back(p);
  std::sort(catalog_.phenomena.begin(), catalog_.phenomena.end(),
            [](const auto& a, const auto& b) { return a.phenomenon_id < b.phenomenon_id; });
}

void Database::add_hypothesis(const Structure& s, const SchemaCatalog& schema) {
  if (catalog_.find_hypothesis(s.hypothesis_id) != nullptr) {
    throw Error(ErrorCode::DuplicateHypothesis, "υ=" + std::to_string(s.hypothesis_id));
  }
  for (auto phi : s.targets) {
    if (catalog_.find_phenomenon(phi) == nullptr) {
      throw Error(ErrorCode::UnknownPhenomenon, "φ=" + std::to_string(phi));
    }
  }
  deploy_schema(schema);
  insert_rows(mutable_table(kHypothesisTable), {{s.hypothesis_id, s.name}});
  catalog_.hypotheses.push_back(HypothesisEntry{s.hypothesis_id, s.name, s, schema});
  for (auto phi : s.targets) add_target(phi, s.hypothesis_id);
}

void Database::add_target(std::int64_t phi, std::int64_t upsilon) {
  if (catalog_.find_phenomenon(phi) == nullptr) {
    throw Error(ErrorCode::UnknownPhenomenon, "φ=" + std::to_string(phi));
  }
  if (catalog_.find_hypothesis(upsilon) == nullptr) {
    throw Error(ErrorCode::UnknownHypothesis, "υ=" + std::to_string(upsilon));
  }
  if (catalog_.has_target(phi, upsilon)) return;
  insert_rows(mutable_table(kTargetTable), {{phi, upsilon}});
  catalog_.h0.emplace_back(phi, upsilon);
  std::sort(catalog_.h0.begin(), catalog_.h0.end());
}

void Database::deploy_schema(const SchemaCatalog& cat) {
  if (cat.relations.empty()) throw Error(ErrorCode::EmptyFdSet, "schema has no relations");
  for (const auto& r : cat.relations) {
    if (tables_.contains(r.name)) throw Error(ErrorCode::DuplicateRelation, r.name);
  }
  for (const auto& r : cat.relations) {
    RelationDef def = r;
    def.attributes.insert(def.attributes.begin(), std::string(kTid));
    for (auto& key : def.keys) {
      key.push_back(std::string(kTid));
      std::sort(key.begin(), key.end());
    }
    auto name = def.name;
    tables_.emplace(std::move(name), make_table(std::move(def)));
  }
}

std::vector<const Table*> Database::hypothesis_tables(std::int64_t upsilon) const {
  std::vector<const Table*> out;
  const auto* h = catalog_.find_hypothesis(upsilon);
  if (h == nullptr) return out;
  for (const auto& r : h->schema.relations) out.push_back(&table(r.name));
  return out;
}

std::vector<std::int64_t> Database::trial_ids(std::int64_t phi, std::int64_t upsilon) const {
  std::set<std::int64_t> tids;
  for (const auto* t : hypothesis_tables(upsilon)) {
    auto tc = t->column(kTid);
    auto pc = t->column(kPhi);
    auto uc = t->find_column(kUpsilon);
    for (const auto& row : t->rows) {
      if (std::get<std::int64_t>(row[pc]) != phi) continue;
      if (uc && std::get<std::int64_t>(row[*uc]) != upsilon) continue;
      tids.insert(std::get<std::int64_t>(row[tc]));
    }
  }
  return {tids.begin(), tids.end()};
}

void Database::check_keys(const Table& t, const std::vector<Row>& incoming) const {
  for (const auto& key : t.def.keys) {
    std::vector<std::size_t> cols;
    for (const auto& a : key) cols.push_back(t.column(a));
    std::set<Row> seen;
    auto project = [&](const Row& r) {
      Row k;
      for (auto c : cols) k.push_back(r[c]);
      return k;
    };
    for (const auto& r : t.rows) seen.insert(project(r));
    for (const auto& r : incoming) {
      if (!seen.insert(project(r)).second) {
        std::string detail = t.def.name + " key (";
        for (std::size_t i = 0; i < key.size(); ++i) {
          detail += (i ? "," : "") + key[i] + "=" + format_scalar(r[cols[i]]);
        }
        throw Error(ErrorCode::KeyViolation, detail + ")");
      }
    }
  }
}

void Database::insert_rows(Table& t, std::vector<Row> rows) {
  check_keys(t, rows);
  for (auto& r : rows) t.rows.push_back(std::move(r));
}

std::int64_t Database::load_trial(const TrialDataset& d) {
  const auto* h = catalog_.find_hypothesis(d.hypothesis_id);
  if (h == nullptr) throw Error(ErrorCode::UnknownHypothesis, "υ=" + std::to_string(d.hypothesis_id));
  if (catalog_.find_phenomenon(d.phenomenon_id) == nullptr) {
    throw Error(ErrorCode::UnknownPhenomenon, "φ=" + std::to_string(d.phenomenon_id));
  }
  if (!catalog_.has_target(d.phenomenon_id, d.hypothesis_id)) {
    throw Error(ErrorCode::InvalidArgument, "(φ=" + std::to_string(d.phenomenon_id) + ", υ=" +
                                                std::to_string(d.hypothesis_id) +
                                                ") is not a registered target pair");
  }
  const Structure& s = h->structure;

  std::set<Symbol> params;
  std::set<Symbol> outputs;
  std::optional<Symbol> index;
  for (const auto& v : s.declarations) {
    if (v.role == Role::parameter) params.insert(v.symbol);
    if (v.role == Role::output) outputs.insert(v.symbol);
    if (v.role == Role::index) index = v.symbol;
  }
  for (const auto& [sym, v] : d.parameters) {
    if (!params.contains(sym)) throw Error(ErrorCode::UnknownSymbol, "parameter " + sym);
  }
  for (const auto& p : params) {
    if (!d.parameters.contains(p)) throw Error(ErrorCode::UnknownSymbol, "missing parameter " + p);
  }
  if (index && d.index_symbol != *index) {
    throw Error(ErrorCode::UnknownSymbol, "series index '" + d.index_symbol + "', expected " + *index);
  }
  if (d.series.empty() && !outputs.empty()) {
    throw Error(ErrorCode::InvalidArgument, "trial has no series rows");
  }
  for (const auto& p : d.series) {
    for (const auto& [sym, v] : p.outputs) {
      if (!outputs.contains(sym)) throw Error(ErrorCode::UnknownSymbol, "output " + sym);
    }
    for (const auto& o : outputs) {
      if (!p.outputs.contains(o)) throw Error(ErrorCode::UnknownSymbol, "missing output " + o);
    }
  }

  auto existing = trial_ids(d.phenomenon_id, d.hypothesis_id);
  const std::int64_t tid = existing.empty() ? 1 : existing.back() + 1;

  std::vector<std::pair<Table*, std::vector<Row>>> staged;
  for (const auto& rel : h->schema.relations) {
    Table& t = mutable_table(rel.name);
    bool per_point = std::any_of(t.def.attributes.begin(), t.def.attributes.end(), [&](const Symbol& a) {
      return outputs.contains(a) || (index && a == *index);
    });
    auto value_at = [&](const Symbol& a, const SeriesPoint* p) -> Scalar {
      if (a == kTid) return tid;
      if (a == kPhi) return d.phenomenon_id;
      if (a == kUpsilon) return d.hypothesis_id;
      if (auto it = d.parameters.find(a); it != d.parameters.end()) return it->second;
      if (p != nullptr) {
        if (index && a == *index) return p->index;
        if (auto it = p->outputs.find(a); it != p->outputs.end()) return it->second;
      }
      throw Error(ErrorCode::UnknownSymbol, a + " has no value in the trial for " + t.def.name);
    };
    std::vector<Row> rows;
    if (per_point) {
      const bool has_index = index && t.find_column(*index).has_value();
      for (const auto& p : d.series) {
        Row r;
        for (const auto& a : t.def.attributes) r.push_back(value_at(a, &p));
        if (!has_index && std::find(rows.begin(), rows.end(), r) != rows.end()) continue;
        rows.push_back(std::move(r));
      }
    } else {
      Row r;
      for (const auto& a : t.def.attributes) r.push_back(value_at(a, nullptr));
      rows.push_back(std::move(r));
    }
    check_keys(t, rows);
    staged.emplace_back(&t, std::move(rows));
  }
  for (auto& [t, rows] : staged) {
    for (auto& r : rows) t->rows.push_back(std::move(r));
  }
  return tid;
}

ResultSet Database::select_certain(std::string_view relation, const Predicate& where) const {
  const Table& t = table(relation);
  std::vector<std::pair<std::size_t, Scalar>> conds;
  for (const auto& [attr, text] : where) {
    auto a = canonical_attribute(attr);
    auto c = t.find_column(a);
    if (!c) throw Error(ErrorCode::UnknownAttribute, a + " in " + t.def.name);
    conds.emplace_back(*c, parse_scalar(text, t.types[*c]));
  }
  ResultSet out;
  out.attributes = t.def.attributes;
  for (const auto& row : t.rows) {
    bool ok = std::all_of(conds.begin(), conds.end(),
                          [&](const auto& cv) { return row[cv.first] == cv.second; });
    if (ok) out.rows.push_back(row);
  }
  // Key order: the first key's attributes in column order.
  std::vector<std::size_t> order;
  if (!t.def.keys.empty()) {
    for (std::size_t i = 0; i < t.def.attributes.size(); ++i) {
      const auto& k = t.def.keys.front();
      if (std::find(k.begin(), k.end(), t.def.attributes[i]) != k.end()) order.push_back(i);
    }
  }
  std::stable_sort(out.rows.begin(), out.rows.end(), [&](const Row& a, const Row& b) {
    for (auto c : order) {
      if (a[c] != b[c]) return a[c] < b[c];
    }
    return false;
  });
  return out;
}

nlohmann::json Database::catalog_json() const {
  nlohmann::json phen = nlohmann::json::array();
  for (const auto& p : catalog_.phenomena) {
    phen.push_back({{"phi", p.phenomenon_id}, {"description", p.description}});
  }
  nlohmann::json hyps = nlohmann::json::array();
  for (const auto& h : catalog_.hypotheses) {
    hyps.push_back({{"upsilon", h.id}, {"name", h.name}, {"schema", to_json(h.schema)}});
  }
  nlohmann::json h0 = nlohmann::json::array();
  for (const auto& [phi, u] : catalog_.h0) h0.push_back({{"phi", phi}, {"upsilon", u}});
  return {{"phenomena", phen}, {"hypotheses", hyps}, {"h0", h0}};
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorCode::Io, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void Database::save(const fs::path& dir) const {
  nlohmann::json j;
  nlohmann::json phen = nlohmann::json::array();
  for (const auto& p : catalog_.phenomena) {
    phen.push_back({{"id", p.phenomenon_id}, {"description", p.description}});
  }
  nlohmann::json hyps = nlohmann::json::array();
  for (const auto& h : catalog_.hypotheses) {
    hyps.push_back({{"id", h.id},
                    {"name", h.name},
                    {"descriptor", serialize_descriptor(h.structure)},
                    {"schema", to_json(h.schema)}});
  }
  nlohmann::json h0 = nlohmann::json::array();
  for (const auto& [phi, u] : catalog_.h0) h0.push_back({phi, u});
  nlohmann::json tables = nlohmann::json::array();
  for (const auto& [name, t] : tables_) {
    nlohmann::json types = nlohmann::json::array();
    for (auto ty : t.types) types.push_back(type_name(ty));
    tables.push_back({{"def", to_json(t.def)}, {"types", types}, {"file", "relations/" + name + ".csv"}});

    std::string body = csv::format_record(t.def.attributes) + "\n";
    for (const auto& row : t.rows) {
      csv::Record rec;
      for (const auto& v : row) rec.push_back(format_scalar(v));
      body += csv::format_record(rec) + "\n";
    }
    write_file_atomic(dir / "relations" / (name + ".csv"), body);
  }
  j["phenomena"] = phen;
  j["hypotheses"] = hyps;
  j["h0"] = h0;
  j["tables"] = tables;
  write_file_atomic(dir / "catalog.json", j.dump(2) + "\n");
}

Database Database::load(const fs::path& dir) {
  auto j = nlohmann::json::parse(read_file(dir / "catalog.json"));
  Database db;
  db.tables_.clear();
  for (const auto& p : j.at("phenomena")) {
    db.catalog_.phenomena.push_back(
        PhenomenonDecl{p.at("id").get<std::int64_t>(), p.at("description").get<std::string>()});
  }
  for (const auto& h : j.at("hypotheses")) {
    HypothesisEntry e;
    e.id = h.at("id").get<std::int64_t>();
    e.name = h.at("name").get<std::string>();
    e.structure = parse_descriptor(h.at("descriptor").get<std::string>());
    e.schema = schema_from_json(h.at("schema"));
    db.catalog_.hypotheses.push_back(std::move(e));
  }
  for (const auto& p : j.at("h0")) {
    db.catalog_.h0.emplace_back(p.at(0).get<std::int64_t>(), p.at(1).get<std::int64_t>());
  }
  for (const auto& tj : j.at("tables")) {
    Table t;
    t.def = relation_from_json(tj.at("def"));
    for (const auto& ty : tj.at("types")) t.types.push_back(type_from_name(ty.get<std::string>()));
    auto records = csv::parse(read_file(dir / tj.at("file").get<std::string>()));
    if (records.empty() || records.front() != t.def.attributes) {
      throw Error(ErrorCode::Io, "header mismatch in " + tj.at("file").get<std::string>());
    }
    for (std::size_t i = 1; i < records.size(); ++i) {
      const auto& rec = records[i];
      if (rec.size() != t.types.size()) {
        throw Error(ErrorCode::Io, "row width mismatch in " + tj.at("file").get<std::string>());
      }
      Row r;
      for (std::size_t c = 0; c < rec.size(); ++c) r.push_back(parse_scalar(rec[c], t.types[c]));
      t.rows.push_back(std::move(r));
    }
    auto name = t.def.name;
    db.tables_.emplace(std::move(name), std::move(t));
  }
  return db;
}

}  // namespace upsilon
