#include "upsilon/project.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <set>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "upsilon/error.hpp"

namespace upsilon {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kMarker = "project.json";

nlohmann::json scalar_json(const Scalar& s) {
  if (const auto* i = std::get_if<std::int64_t>(&s)) return *i;
  if (const auto* d = std::get_if<double>(&s)) return *d;
  return std::get<std::string>(s);
}

// Code points; every symbol used here is one column wide.
std::size_t display_width(std::string_view s) {
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) { return (c & 0xC0) != 0x80; }));
}

std::string fdset_text(const FdSet& sigma) {
  std::string out;
  for (const auto& fd : sigma.fds) out += "  " + format_fd(fd) + "\n";
  return out;
}

std::string relation_text(const RelationDef& r) {
  std::string keys;
  for (const auto& k : r.keys) {
    keys += (keys.empty() ? "" : ", ") + fmt::format("{{{}}}", fmt::join(k, ", "));
  }
  return fmt::format("  {}({})  keys: {}\n", r.name, fmt::join(r.attributes, ", "), keys);
}

}  // namespace

HypothesisAnalysis analyze_hypothesis(const Structure& s) {
  auto report = validate_structure(s);
  if (!report.valid) {
    std::string detail;
    for (const auto& d : report.details) detail += (detail.empty() ? "" : "; ") + d;
    throw Error(ErrorCode::InvalidDescriptor, detail);
  }
  HypothesisAnalysis a;
  a.structure = s;
  a.mapping = total_causal_mapping(s);
  a.primitive = encode_fds(s, a.mapping);
  a.schema = synthesize_4c(fold_fds(a.primitive), s.hypothesis_id);
  a.schema.primitive = a.primitive;
  a.warnings = a.mapping.warnings;
  a.warnings.insert(a.warnings.end(), a.schema.warnings.begin(), a.schema.warnings.end());
  return a;
}

nlohmann::json HypothesisAnalysis::to_json() const {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [e, v] : mapping.pairs) pairs.push_back({{"equation", e}, {"variable", v}});
  return {{"upsilon", structure.hypothesis_id},
          {"name", structure.name},
          {"mapping", pairs},
          {"sigma", upsilon::to_json(primitive)},
          {"folded", upsilon::to_json(schema.folded)},
          {"schema", upsilon::to_json(schema)},
          {"warnings", warnings}};
}

std::string HypothesisAnalysis::to_text() const {
  const auto k = structure.hypothesis_id;
  std::string out = fmt::format("υ={} {}\n", k, structure.name);
  out += fmt::format("Σ{} = {{\n{}}}\n", k, fdset_text(primitive));
  out += fmt::format("Σ{}↬ = {{\n{}}}\n", k, fdset_text(schema.folded));
  out += "schema:\n";
  for (const auto& r : schema.relations) out += relation_text(r);
  for (const auto& w : warnings) out += "warning: " + w + "\n";
  return out;
}

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::deployed: return "deployed";
    case Stage::loaded: return "loaded";
    case Stage::u_introduced: return "u-introduced";
    case Stage::conditioned: return "conditioned";
  }
  return "deployed";
}

ProjectLock::ProjectLock(const fs::path& root, bool exclusive) {
  fd_ = ::open((root / ".lock").c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
  if (fd_ < 0) throw Error(ErrorCode::Io, "cannot open lock file in " + root.string());
  if (::flock(fd_, exclusive ? LOCK_EX : LOCK_SH) != 0) {
    ::close(fd_);
    throw Error(ErrorCode::Io, "cannot lock " + root.string());
  }
}

ProjectLock::~ProjectLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

bool Project::initialized(const fs::path& root) { return fs::exists(root / kMarker); }

Project Project::init(const fs::path& root) {
  if (initialized(root)) throw Error(ErrorCode::InvalidArgument, root.string() + " is already a project");
  fs::create_directories(root);
  Project p(root);
  p.save();
  write_file_atomic(root / kMarker, nlohmann::json{{"format", "upsilon-project"}, {"version", 1}}.dump(2) + "\n");
  return p;
}

Project Project::open(const fs::path& root) {
  if (!initialized(root)) throw Error(ErrorCode::ProjectNotInitialized, root.string());
  Project p(root);
  p.db_ = Database::load(root);
  p.udb_ = UncertainDb::load(root);
  return p;
}

void Project::save() const {
  udb_.save(root_);
  db_.save(root_);
}

void Project::require_not_introduced(std::int64_t phi, std::string_view what) const {
  if (udb_.introduced(phi)) {
    throw Error(ErrorCode::StageViolation,
                fmt::format("φ={} is already U-introduced; cannot {}", phi, what));
  }
}

PhenomenonDecl Project::add_phenomenon(std::string_view bytes) {
  auto p = parse_phenomenon(bytes);
  Database next = db_;
  next.add_phenomenon(p);
  db_ = std::move(next);
  save();
  return p;
}

HypothesisAnalysis Project::add_hypothesis(std::string_view descriptor, std::span<const std::int64_t> extra_targets) {
  auto s = parse_descriptor(descriptor);
  for (auto phi : extra_targets) {
    if (std::find(s.targets.begin(), s.targets.end(), phi) == s.targets.end()) s.targets.push_back(phi);
  }
  for (auto phi : s.targets) require_not_introduced(phi, "add a hypothesis targeting it");
  auto a = analyze_hypothesis(s);
  Database next = db_;
  next.add_hypothesis(s, a.schema);
  db_ = std::move(next);
  save();
  return a;
}

void Project::add_target(std::int64_t phi, std::int64_t upsilon) {
  require_not_introduced(phi, "add a target pair");
  Database next = db_;
  next.add_target(phi, upsilon);
  db_ = std::move(next);
  save();
}

std::int64_t Project::load_trial(const TrialDataset& d) {
  require_not_introduced(d.phenomenon_id, "load more trials");
  Database next = db_;
  auto tid = next.load_trial(d);
  db_ = std::move(next);
  save();
  return tid;
}

std::vector<std::string> Project::u_intro(std::int64_t phi) {
  if (db_.catalog().find_phenomenon(phi) == nullptr) {
    throw Error(ErrorCode::UnknownPhenomenon, "φ=" + std::to_string(phi));
  }
  require_not_introduced(phi, "U-introduce it again");
  const auto hyps = db_.catalog().hypotheses_for(phi);
  if (hyps.empty()) throw Error(ErrorCode::StageViolation, fmt::format("no hypothesis targets φ={}", phi));
  for (auto u : hyps) {
    if (db_.trial_ids(phi, u).empty()) {
      throw Error(ErrorCode::StageViolation, fmt::format("(φ={}, υ={}) has no loaded trial", phi, u));
    }
  }
  UncertainDb next = udb_;
  auto warnings = next.introduce(db_, phi);
  udb_ = std::move(next);
  save();
  return warnings;
}

PosteriorReport Project::condition(const ObservationSet& obs, std::span<const double> at, bool dry_run) {
  if (db_.catalog().find_phenomenon(obs.phenomenon) == nullptr) {
    throw Error(ErrorCode::UnknownPhenomenon, "φ=" + std::to_string(obs.phenomenon));
  }
  if (!udb_.introduced(obs.phenomenon)) {
    throw Error(ErrorCode::NotUIntroduced, "φ=" + std::to_string(obs.phenomenon));
  }
  if (dry_run) return ranked_predictions(db_, udb_, obs, at);
  UncertainDb next = udb_;
  auto report = condition_and_writeback(db_, next, obs, at);
  std::size_t n = 1;
  while (fs::exists(root_ / "archive" / std::to_string(n))) ++n;
  udb_.save(root_ / "archive" / std::to_string(n));
  udb_ = std::move(next);
  save();
  return report;
}

Stage Project::stage(std::int64_t phi, std::int64_t upsilon) const {
  if (!db_.catalog().has_target(phi, upsilon)) {
    throw Error(ErrorCode::UnknownHypothesis, fmt::format("(φ={}, υ={}) is not a target pair", phi, upsilon));
  }
  if (udb_.introduced(phi)) {
    for (const auto& v : udb_.variables()) {
      if (v.scope == VarScope::joint && v.phenomenon == phi) return Stage::conditioned;
    }
    return Stage::u_introduced;
  }
  return db_.trial_ids(phi, upsilon).empty() ? Stage::deployed : Stage::loaded;
}

ResultSet Project::query(std::string_view relation, const Predicate& where) const {
  auto it = udb_.relations().find(relation);
  if (it == udb_.relations().end()) return db_.select_certain(relation, where);
  const URelation& u = it->second;
  std::vector<std::pair<std::size_t, Scalar>> conds;
  for (const auto& [attr, text] : where) {
    auto a = canonical_attribute(attr);
    auto c = u.column(a);
    if (!c) throw Error(ErrorCode::UnknownAttribute, a + " in " + u.name);
    conds.emplace_back(*c, parse_scalar(text, column_type_of(a)));
  }
  ResultSet out;
  out.attributes = {"condition"};
  out.attributes.insert(out.attributes.end(), u.attributes.begin(), u.attributes.end());
  for (const auto& t : u.tuples) {
    bool ok = std::all_of(conds.begin(), conds.end(), [&](const auto& cv) { return t.values[cv.first] == cv.second; });
    if (!ok) continue;
    Row r{format_condition(t.condition)};
    r.insert(r.end(), t.values.begin(), t.values.end());
    out.rows.push_back(std::move(r));
  }
  return out;
}

nlohmann::json Project::catalog_json() const {
  auto j = db_.catalog_json();
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& [phi, u] : db_.catalog().h0) {
    stages.push_back({{"phi", phi}, {"upsilon", u}, {"stage", to_string(stage(phi, u))}});
  }
  j["stages"] = stages;
  return j;
}

nlohmann::json Project::world_table_json() const { return udb_.world_table_json(); }

nlohmann::json Project::predictions_json(std::int64_t phi) const {
  if (!udb_.introduced(phi)) throw Error(ErrorCode::NotUIntroduced, "φ=" + std::to_string(phi));
  nlohmann::json rels = nlohmann::json::array();
  for (auto u : db_.catalog().hypotheses_for(phi)) {
    for (const auto& name : udb_.hypothesis_relations(u)) {
      const auto& rel = udb_.relation(name);
      auto pc = rel.column(kPhi);
      if (!rel.column(kUpsilon) || !pc) continue;
      std::vector<Row> order;
      std::map<Row, std::vector<Condition>> groups;
      for (const auto& t : rel.tuples) {
        if (t.values[*pc] != Scalar{phi}) continue;
        auto [g, inserted] = groups.try_emplace(t.values);
        if (inserted) order.push_back(t.values);
        g->second.push_back(t.condition);
      }
      nlohmann::json tuples = nlohmann::json::array();
      for (const auto& values : order) {
        const auto& cs = groups.at(values);
        nlohmann::json cj = nlohmann::json::array();
        for (const auto& c : cs) {
          nlohmann::json one = nlohmann::json::array();
          for (const auto& a : c) one.push_back({a.var, a.value});
          cj.push_back(one);
        }
        nlohmann::json vj = nlohmann::json::array();
        for (const auto& v : values) vj.push_back(scalar_json(v));
        tuples.push_back({{"conditions", cj}, {"values", vj}, {"conf", disjunction_probability(cs, udb_.world())}});
      }
      rels.push_back({{"name", name}, {"upsilon", u}, {"attributes", rel.attributes}, {"tuples", tuples}});
    }
  }
  return {{"phi", phi}, {"relations", rels}};
}

nlohmann::json to_json(const ResultSet& rs) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : rs.rows) {
    nlohmann::json row = nlohmann::json::array();
    for (const auto& v : r) row.push_back(scalar_json(v));
    rows.push_back(row);
  }
  return {{"attributes", rs.attributes}, {"rows", rows}};
}

std::string format_table(const ResultSet& rs) {
  std::vector<std::vector<std::string>> cells{rs.attributes};
  for (const auto& r : rs.rows) {
    std::vector<std::string> line;
    for (const auto& v : r) line.push_back(format_scalar(v));
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> width(rs.attributes.size(), 0);
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      width[c] = std::max<std::size_t>(width[c], display_width(line[c]));
    }
  }
  std::string out;
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      out += (c ? " " : "") + std::string(width[c] - display_width(line[c]), ' ') + line[c];
    }
    out += "\n";
  }
  return out;
}

}  // namespace upsilon
