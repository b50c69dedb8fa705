#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "upsilon/relstore.hpp"

namespace upsilon::sim {

struct TimeGrid {
  double start = 0;
  double end = 0;
  double step = 1;               // output step
  std::optional<double> h;       // internal step, default step / 1000
};

struct OdeModel {
  std::string kind;  // malthus | logistic | lotka_volterra | registered addition
  std::map<Symbol, double> parameters;
  TimeGrid grid;
  std::int64_t phenomenon = 0;
  std::int64_t hypothesis = 0;
};

using State = std::vector<double>;
using Rhs = std::function<State(const std::map<Symbol, double>& params, const State& s)>;

struct ModelSpec {
  std::vector<Symbol> parameters;  // all required parameter names
  std::vector<Symbol> state;       // output symbols, integration order
  std::vector<Symbol> initial;     // parameter holding each state's initial value
  Rhs rhs;
};

// Built-in kinds plus anything added through register_model.
const std::map<std::string, ModelSpec, std::less<>>& registry();
void register_model(const std::string& kind, ModelSpec spec);

// Model manifest: {"kind", "parameters": {...}, "grid": {"start", "end",
// "step", "h"?}, "phi"?, "upsilon"?}.
OdeModel model_from_json(const nlohmann::json& j);
nlohmann::json to_json(const OdeModel& m);

// Classic RK4 with fixed internal step; throws InvalidModel, NonFiniteState.
TrialDataset simulate(const OdeModel& m);

}  // namespace upsilon::sim
