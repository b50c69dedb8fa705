#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "upsilon/causal.hpp"
#include "upsilon/conditioning.hpp"
#include "upsilon/ingest.hpp"
#include "upsilon/relstore.hpp"
#include "upsilon/synthesis.hpp"
#include "upsilon/uncertain.hpp"

namespace upsilon {

// Output of the hypothesis pipeline parse → validate → causal → encode →
// fold → synthesize.
struct HypothesisAnalysis {
  Structure structure;
  CausalMapping mapping;
  FdSet primitive;
  SchemaCatalog schema;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
  std::string to_text() const;
};

// Throws InvalidDescriptor when the structure is not valid.
HypothesisAnalysis analyze_hypothesis(const Structure& s);

enum class Stage { deployed, loaded, u_introduced, conditioned };
std::string_view to_string(Stage s);

// Advisory whole-project lock (flock on <root>/.lock); shared for readers,
// exclusive for writers.
class ProjectLock {
 public:
  ProjectLock(const std::filesystem::path& root, bool exclusive);
  ~ProjectLock();
  ProjectLock(const ProjectLock&) = delete;
  ProjectLock& operator=(const ProjectLock&) = delete;

 private:
  int fd_ = -1;
};

// One project directory: catalog.json and relations/ for the certain store,
// uncertain/ for the U-relational side, project.json as the marker.
class Project {
 public:
  static Project init(const std::filesystem::path& root);
  // Throws ProjectNotInitialized.
  static Project open(const std::filesystem::path& root);
  static bool initialized(const std::filesystem::path& root);

  const std::filesystem::path& root() const { return root_; }
  const Database& db() const { return db_; }
  const UncertainDb& udb() const { return udb_; }

  // Mutations persist before returning; on error nothing changes.
  PhenomenonDecl add_phenomenon(std::string_view bytes);
  HypothesisAnalysis add_hypothesis(std::string_view descriptor, std::span<const std::int64_t> extra_targets = {});
  void add_target(std::int64_t phi, std::int64_t upsilon);
  std::int64_t load_trial(const TrialDataset& d);
  std::vector<std::string> u_intro(std::int64_t phi);
  // Write-back unless dry_run; the previous uncertain state is archived.
  PosteriorReport condition(const ObservationSet& obs, std::span<const double> at, bool dry_run);

  Stage stage(std::int64_t phi, std::int64_t upsilon) const;

  // Certain relations by name; U-relations (Y_...) come back with a leading
  // `condition` column.
  ResultSet query(std::string_view relation, const Predicate& where) const;

  nlohmann::json catalog_json() const;
  nlohmann::json world_table_json() const;
  // Output U-relation tuples of φ with their confidences.
  nlohmann::json predictions_json(std::int64_t phi) const;

  void save() const;

 private:
  explicit Project(std::filesystem::path root) : root_(std::move(root)) {}
  void require_not_introduced(std::int64_t phi, std::string_view what) const;

  std::filesystem::path root_;
  Database db_;
  UncertainDb udb_;
};

nlohmann::json to_json(const ResultSet& rs);
std::string format_table(const ResultSet& rs);

}  // namespace upsilon
