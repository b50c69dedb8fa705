#include "upsilon/simkit.hpp"

#include <cmath>
#include <mutex>

#include "upsilon/error.hpp"

namespace upsilon::sim {

namespace {

std::map<std::string, ModelSpec, std::less<>>& mutable_registry() {
  static std::map<std::string, ModelSpec, std::less<>> r = [] {
    std::map<std::string, ModelSpec, std::less<>> m;
    m["malthus"] = ModelSpec{{"x0", "b"}, {"x"}, {"x0"}, [](const auto& p, const State& s) {
                               return State{p.at("b") * s[0]};
                             }};
    m["logistic"] = ModelSpec{{"x0", "K", "b"}, {"x"}, {"x0"}, [](const auto& p, const State& s) {
                                return State{p.at("b") * (1.0 - s[0] / p.at("K")) * s[0]};
                              }};
    m["lotka_volterra"] = ModelSpec{{"x0", "b", "p", "y0", "d", "r"}, {"x", "y"}, {"x0", "y0"},
                                    [](const auto& p, const State& s) {
                                      return State{s[0] * (p.at("b") - p.at("p") * s[1]),
                                                   s[1] * (p.at("r") * s[0] - p.at("d"))};
                                    }};
    return m;
  }();
  return r;
}

std::mutex registry_mutex;

State axpy(const State& x, double a, const State& k) {
  State out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + a * k[i];
  return out;
}

}  // namespace

const std::map<std::string, ModelSpec, std::less<>>& registry() { return mutable_registry(); }

void register_model(const std::string& kind, ModelSpec spec) {
  std::lock_guard lock(registry_mutex);
  if (spec.state.size() != spec.initial.size() || !spec.rhs) {
    throw Error(ErrorCode::InvalidModel, "model " + kind + " needs one initial parameter per state and a rhs");
  }
  mutable_registry()[kind] = std::move(spec);
}

OdeModel model_from_json(const nlohmann::json& j) {
  try {
    OdeModel m;
    m.kind = j.at("kind").get<std::string>();
    m.parameters = j.at("parameters").get<std::map<Symbol, double>>();
    const auto& g = j.at("grid");
    m.grid.start = g.at("start").get<double>();
    m.grid.end = g.at("end").get<double>();
    m.grid.step = g.value("step", 1.0);
    if (g.contains("h")) m.grid.h = g.at("h").get<double>();
    m.phenomenon = j.value("phi", std::int64_t{0});
    m.hypothesis = j.value("upsilon", std::int64_t{0});
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidModel, e.what());
  }
}

nlohmann::json to_json(const OdeModel& m) {
  nlohmann::json g{{"start", m.grid.start}, {"end", m.grid.end}, {"step", m.grid.step}};
  if (m.grid.h) g["h"] = *m.grid.h;
  return {{"kind", m.kind}, {"parameters", m.parameters}, {"grid", g}, {"phi", m.phenomenon},
          {"upsilon", m.hypothesis}};
}

TrialDataset simulate(const OdeModel& m) {
  const auto& reg = registry();
  auto it = reg.find(m.kind);
  if (it == reg.end()) throw Error(ErrorCode::InvalidModel, "unknown model kind " + m.kind);
  const ModelSpec& spec = it->second;
  for (const auto& p : spec.parameters) {
    if (!m.parameters.contains(p)) throw Error(ErrorCode::InvalidModel, m.kind + " needs parameter " + p);
  }
  const auto& g = m.grid;
  if (!(g.end > g.start) || !(g.step > 0)) throw Error(ErrorCode::InvalidModel, "grid needs end > start and step > 0");
  const double h = g.h.value_or(g.step / 1000.0);
  if (!(h > 0)) throw Error(ErrorCode::InvalidModel, "internal step must be positive");
  const auto substeps = static_cast<long>(std::llround(g.step / h));
  if (substeps < 1 || std::abs(static_cast<double>(substeps) * h - g.step) > 1e-9 * g.step) {
    throw Error(ErrorCode::InvalidModel, "internal step does not divide the output step");
  }
  const auto outputs = static_cast<long>(std::llround((g.end - g.start) / g.step));
  if (std::abs(static_cast<double>(outputs) * g.step - (g.end - g.start)) > 1e-9 * g.step) {
    throw Error(ErrorCode::InvalidModel, "output step does not divide the time range");
  }
  const double dt = g.step / static_cast<double>(substeps);

  State s;
  for (const auto& p : spec.initial) s.push_back(m.parameters.at(p));

  TrialDataset d;
  d.hypothesis_id = m.hypothesis;
  d.phenomenon_id = m.phenomenon;
  d.parameters = m.parameters;
  d.index_symbol = "t";
  auto emit = [&](long i) {
    SeriesPoint pt;
    pt.index = g.start + static_cast<double>(i) * g.step;
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (!std::isfinite(s[k])) {
        throw Error(ErrorCode::NonFiniteState, spec.state[k] + " is not finite at t=" + format_double(pt.index));
      }
      pt.outputs[spec.state[k]] = s[k];
    }
    d.series.push_back(std::move(pt));
  };
  emit(0);
  for (long i = 1; i <= outputs; ++i) {
    for (long n = 0; n < substeps; ++n) {
      const State k1 = spec.rhs(m.parameters, s);
      const State k2 = spec.rhs(m.parameters, axpy(s, dt / 2, k1));
      const State k3 = spec.rhs(m.parameters, axpy(s, dt / 2, k2));
      const State k4 = spec.rhs(m.parameters, axpy(s, dt, k3));
      for (std::size_t k = 0; k < s.size(); ++k) s[k] += dt / 6 * (k1[k] + 2 * k2[k] + 2 * k3[k] + k4[k]);
    }
    emit(i);
  }
  return d;
}

}  // namespace upsilon::sim
