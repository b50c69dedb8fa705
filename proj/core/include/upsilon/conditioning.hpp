#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "upsilon/relstore.hpp"
#include "upsilon/uncertain.hpp"

namespace upsilon {

// Normal density of y around mu. Throws NonPositiveSigma.
double log_likelihood(double y, double mu, double sigma);
double likelihood(double y, double mu, double sigma);

struct TrialEvidence {
  double prior = 0;
  std::vector<double> predictions;  // aligned with the observations
};

// Batch Bayes update in log space. Throws EmptyObservationSet,
// MissingPrediction (prediction count mismatch) and NonPositiveSigma.
std::vector<double> posterior(std::span<const TrialEvidence> trials, std::span<const double> obs, double sigma);

struct ObservationSet {
  std::int64_t phenomenon = 0;
  Symbol index_symbol;   // e.g. t
  Symbol output_symbol;  // e.g. x
  std::string index_label;  // observed column names, e.g. Year / Lynx
  std::string value_label;
  std::vector<std::pair<double, double>> samples;  // (index value, y)
  double sigma = 0;
  bool sigma_heuristic = false;
};

// Sample standard deviation of the observed values; the convenience default
// when no σ is supplied.
double heuristic_sigma(const ObservationSet& obs);

// Observation CSV. `mapping` lists (symbol, column) for the index first and
// the observed output second; when empty, the first two header cells are
// taken as the symbols themselves. σ defaults to heuristic_sigma.
ObservationSet parse_observation_csv(std::string_view text, std::int64_t phi,
                                     const std::vector<std::pair<Symbol, std::string>>& mapping,
                                     std::optional<double> sigma);

// Validates samples and σ (EmptyObservationSet, InvalidArgument on repeated
// index values, NonPositiveSigma).
void validate(const ObservationSet& obs);

struct ReportRow {
  std::int64_t phenomenon = 0;
  std::int64_t hypothesis = 0;
  std::int64_t tid = 0;
  double index = 0;
  double predicted = 0;
  double prior = 0;
  double posterior = 0;
};

struct WorldPosterior {
  std::int64_t hypothesis = 0;
  std::int64_t tid = 0;
  double prior = 0;
  double posterior = 0;
};

struct PosteriorReport {
  std::int64_t phenomenon = 0;
  std::string index_label;
  std::string value_label;
  double sigma = 0;
  bool sigma_heuristic = false;
  std::vector<WorldPosterior> worlds;  // aligned with UncertainDb::worlds(φ)
  std::vector<ReportRow> rows;         // sorted by posterior descending
  std::map<std::int64_t, double> aggregates;

  nlohmann::json to_json() const;
  std::string to_table() const;
};

// Posteriors of every world of φ, without touching the world table.
PosteriorReport compute_posteriors(const Database& db, const UncertainDb& udb, const ObservationSet& obs);

// Read-only; rows restricted to the given index values (all when empty).
PosteriorReport ranked_predictions(const Database& db, const UncertainDb& udb, const ObservationSet& obs,
                                   std::span<const double> at = {});

// compute_posteriors, then installs the posteriors as φ's joint variable.
PosteriorReport condition_and_writeback(const Database& db, UncertainDb& udb, const ObservationSet& obs,
                                        std::span<const double> at = {});

void filter_rows(PosteriorReport& report, std::span<const double> at);

}  // namespace upsilon
