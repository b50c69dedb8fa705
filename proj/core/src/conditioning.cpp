#include "upsilon/conditioning.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <fmt/format.h>

#include "upsilon/csv.hpp"
#include "upsilon/error.hpp"

namespace upsilon {

namespace {

double log_sum_exp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// (tid, index value) -> predicted output of φ under hypothesis υ.
std::map<std::pair<std::int64_t, double>, double> predictions_of(const Database& db, std::int64_t upsilon,
                                                                  std::int64_t phi, const ObservationSet& obs) {
  for (const auto* t : db.hypothesis_tables(upsilon)) {
    auto ic = t->find_column(obs.index_symbol);
    auto oc = t->find_column(obs.output_symbol);
    auto uc = t->find_column(kUpsilon);
    if (!ic || !oc || !uc) continue;
    auto tc = t->column(kTid);
    auto pc = t->column(kPhi);
    std::map<std::pair<std::int64_t, double>, double> out;
    for (const auto& row : t->rows) {
      if (std::get<std::int64_t>(row[pc]) != phi) continue;
      out[{std::get<std::int64_t>(row[tc]), as_double(row[*ic])}] = as_double(row[*oc]);
    }
    return out;
  }
  throw Error(ErrorCode::MissingPrediction, "hypothesis υ=" + std::to_string(upsilon) + " has no relation with " +
                                                obs.index_symbol + " and " + obs.output_symbol);
}

}  // namespace

double log_likelihood(double y, double mu, double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::NonPositiveSigma, "σ=" + format_double(sigma));
  const double z = (y - mu) / sigma;
  return -0.5 * z * z - std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double likelihood(double y, double mu, double sigma) { return std::exp(log_likelihood(y, mu, sigma)); }

std::vector<double> posterior(std::span<const TrialEvidence> trials, std::span<const double> obs, double sigma) {
  if (obs.empty()) throw Error(ErrorCode::EmptyObservationSet, "no observations");
  if (!(sigma > 0.0)) throw Error(ErrorCode::NonPositiveSigma, "σ=" + format_double(sigma));
  if (trials.empty()) throw Error(ErrorCode::NoTrials, "nothing to condition");
  std::vector<double> logs;
  for (const auto& t : trials) {
    if (t.predictions.size() != obs.size()) {
      throw Error(ErrorCode::MissingPrediction, "trial has " + std::to_string(t.predictions.size()) +
                                                    " predictions for " + std::to_string(obs.size()) + " observations");
    }
    if (!(t.prior >= 0.0)) throw Error(ErrorCode::InvalidArgument, "negative prior");
    double l = t.prior > 0.0 ? std::log(t.prior) : -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < obs.size(); ++j) l += log_likelihood(obs[j], t.predictions[j], sigma);
    logs.push_back(l);
  }
  const double z = log_sum_exp(logs);
  if (!std::isfinite(z)) throw Error(ErrorCode::InvalidArgument, "all trials have zero prior");
  std::vector<double> out;
  for (double l : logs) out.push_back(std::exp(l - z));
  return out;
}

double heuristic_sigma(const ObservationSet& obs) {
  const auto n = obs.samples.size();
  if (n < 2) throw Error(ErrorCode::NonPositiveSigma, "cannot estimate σ from fewer than two observations");
  double mean = 0;
  for (const auto& s : obs.samples) mean += s.second;
  mean /= static_cast<double>(n);
  double ss = 0;
  for (const auto& s : obs.samples) ss += (s.second - mean) * (s.second - mean);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

void validate(const ObservationSet& obs) {
  if (obs.samples.empty()) throw Error(ErrorCode::EmptyObservationSet, "no observations");
  std::set<double> seen;
  for (const auto& s : obs.samples) {
    if (!seen.insert(s.first).second) {
      throw Error(ErrorCode::InvalidArgument, "repeated index value " + format_double(s.first));
    }
  }
  if (!(obs.sigma > 0.0) || !std::isfinite(obs.sigma)) {
    throw Error(ErrorCode::NonPositiveSigma, "σ=" + format_double(obs.sigma));
  }
}

ObservationSet parse_observation_csv(std::string_view text, std::int64_t phi,
                                     const std::vector<std::pair<Symbol, std::string>>& mapping,
                                     std::optional<double> sigma) {
  auto records = csv::parse(text);
  if (records.empty()) throw Error(ErrorCode::EmptyObservationSet, "observation file is empty");
  const auto& header = records.front();
  ObservationSet obs;
  obs.phenomenon = phi;
  std::size_t ic = 0, vc = 1;
  if (mapping.empty()) {
    if (header.size() < 2) throw Error(ErrorCode::MalformedCsv, "observation header needs two columns");
    obs.index_symbol = header[0];
    obs.output_symbol = header[1];
  } else {
    if (mapping.size() != 2) {
      throw Error(ErrorCode::InvalidArgument, "mapping needs the index symbol then the observed symbol");
    }
    auto find = [&](const std::string& col) {
      auto it = std::find(header.begin(), header.end(), col);
      if (it == header.end()) throw Error(ErrorCode::UnknownAttribute, "observation column " + col);
      return static_cast<std::size_t>(it - header.begin());
    };
    obs.index_symbol = mapping[0].first;
    obs.output_symbol = mapping[1].first;
    ic = find(mapping[0].second);
    vc = find(mapping[1].second);
  }
  obs.index_label = header[ic];
  obs.value_label = header[vc];
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.size() <= std::max(ic, vc)) throw Error(ErrorCode::MalformedCsv, "short observation row " + std::to_string(i + 1));
    if (r[vc].empty()) continue;  // missing observation
    obs.samples.emplace_back(std::get<double>(parse_scalar(r[ic], ColumnType::real)),
                             std::get<double>(parse_scalar(r[vc], ColumnType::real)));
  }
  if (obs.samples.empty()) throw Error(ErrorCode::EmptyObservationSet, "no observation rows");
  if (sigma) {
    obs.sigma = *sigma;
  } else {
    obs.sigma = heuristic_sigma(obs);
    obs.sigma_heuristic = true;
  }
  validate(obs);
  return obs;
}

PosteriorReport compute_posteriors(const Database& db, const UncertainDb& udb, const ObservationSet& obs) {
  validate(obs);
  const auto* worlds = udb.worlds(obs.phenomenon);
  if (worlds == nullptr) throw Error(ErrorCode::NotUIntroduced, "φ=" + std::to_string(obs.phenomenon));

  std::map<std::int64_t, std::map<std::pair<std::int64_t, double>, double>> preds;
  std::vector<TrialEvidence> evidence;
  std::vector<double> ys;
  for (const auto& s : obs.samples) ys.push_back(s.second);
  for (const auto& w : *worlds) {
    if (!preds.contains(w.hypothesis)) preds[w.hypothesis] = predictions_of(db, w.hypothesis, obs.phenomenon, obs);
    const auto& p = preds.at(w.hypothesis);
    TrialEvidence e;
    e.prior = world_prob(w.theta, udb.world());
    for (const auto& s : obs.samples) {
      auto it = p.find({w.tid, s.first});
      if (it == p.end()) {
        throw Error(ErrorCode::MissingPrediction, fmt::format("υ={} tid={} has no {} at {}={}", w.hypothesis, w.tid,
                                                              obs.output_symbol, obs.index_symbol,
                                                              format_double(s.first)));
      }
      e.predictions.push_back(it->second);
    }
    evidence.push_back(std::move(e));
  }
  const auto post = posterior(evidence, ys, obs.sigma);

  PosteriorReport r;
  r.phenomenon = obs.phenomenon;
  r.index_label = obs.index_label.empty() ? obs.index_symbol : obs.index_label;
  r.value_label = obs.value_label.empty() ? obs.output_symbol : obs.value_label;
  r.sigma = obs.sigma;
  r.sigma_heuristic = obs.sigma_heuristic;
  for (std::size_t k = 0; k < worlds->size(); ++k) {
    const auto& w = (*worlds)[k];
    r.worlds.push_back(WorldPosterior{w.hypothesis, w.tid, evidence[k].prior, post[k]});
    r.aggregates[w.hypothesis] += post[k];
    for (std::size_t j = 0; j < obs.samples.size(); ++j) {
      r.rows.push_back(ReportRow{obs.phenomenon, w.hypothesis, w.tid, obs.samples[j].first, evidence[k].predictions[j],
                                 evidence[k].prior, post[k]});
    }
  }
  std::stable_sort(r.rows.begin(), r.rows.end(),
                   [](const ReportRow& a, const ReportRow& b) { return a.posterior > b.posterior; });
  return r;
}

void filter_rows(PosteriorReport& report, std::span<const double> at) {
  if (at.empty()) return;
  std::erase_if(report.rows, [&](const ReportRow& row) {
    return std::find(at.begin(), at.end(), row.index) == at.end();
  });
}

PosteriorReport ranked_predictions(const Database& db, const UncertainDb& udb, const ObservationSet& obs,
                                   std::span<const double> at) {
  auto r = compute_posteriors(db, udb, obs);
  filter_rows(r, at);
  return r;
}

PosteriorReport condition_and_writeback(const Database& db, UncertainDb& udb, const ObservationSet& obs,
                                        std::span<const double> at) {
  auto r = compute_posteriors(db, udb, obs);
  std::vector<double> marginals;
  for (const auto& w : r.worlds) marginals.push_back(w.posterior);
  udb.install_joint(obs.phenomenon, marginals);
  filter_rows(r, at);
  return r;
}

nlohmann::json PosteriorReport::to_json() const {
  nlohmann::json rows_j = nlohmann::json::array();
  for (const auto& row : rows) {
    rows_j.push_back({{"phi", row.phenomenon},
                      {"upsilon", row.hypothesis},
                      {"tid", row.tid},
                      {"index", row.index},
                      {"predicted", row.predicted},
                      {"prior", row.prior},
                      {"posterior", row.posterior}});
  }
  nlohmann::json worlds_j = nlohmann::json::array();
  for (const auto& w : worlds) {
    worlds_j.push_back({{"upsilon", w.hypothesis}, {"tid", w.tid}, {"prior", w.prior}, {"posterior", w.posterior}});
  }
  nlohmann::json agg = nlohmann::json::array();
  for (const auto& [u, p] : aggregates) agg.push_back({{"upsilon", u}, {"posterior", p}});
  return {{"phi", phenomenon},      {"index_label", index_label}, {"value_label", value_label},
          {"sigma", sigma},         {"sigma_heuristic", sigma_heuristic},
          {"rows", rows_j},         {"worlds", worlds_j},         {"aggregates", agg}};
}

std::string PosteriorReport::to_table() const {
  const auto iw = std::max<std::size_t>(6, index_label.size());
  const auto vw = std::max<std::size_t>(10, value_label.size());
  std::string out = fmt::format("{:>3} {:>3} {:>4} {:>{}} {:>{}} {:>9} {:>9}\n", "φ", "υ", "tid", index_label, iw,
                                value_label, vw, "Prior", "Posterior");
  for (const auto& r : rows) {
    out += fmt::format("{:>3} {:>3} {:>4} {:>{}} {:>{}.2f} {:>9.4f} {:>9.4f}\n", r.phenomenon, r.hypothesis, r.tid,
                       format_double(r.index), iw, r.predicted, vw, r.prior, r.posterior);
  }
  out += "\n";
  for (const auto& [u, p] : aggregates) out += fmt::format("υ={} aggregate posterior {:.4f}\n", u, p);
  out += fmt::format("σ={}{}\n", format_double(sigma), sigma_heuristic ? " (heuristic: sample standard deviation)" : "");
  return out;
}

}  // namespace upsilon
