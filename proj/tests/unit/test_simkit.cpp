#include <doctest.h>

#include "support.hpp"
#include "upsilon/error.hpp"

using namespace upsilon;
using namespace upsilon::test;

namespace {

sim::OdeModel malthus(double x0, double b, double end, double step, std::optional<double> h) {
  return sim::OdeModel{"malthus", {{"x0", x0}, {"b", b}}, {0, end, step, h}, 1, 1};
}

double last_x(const TrialDataset& d) { return d.series.back().outputs.at("x"); }

}  // namespace

TEST_CASE("Malthus against the analytic solution") {
  auto d = sim::simulate(malthus(1, .5, 10, 1, .01));
  REQUIRE(d.series.size() == 11);
  CHECK(d.series.back().index == 10);
  CHECK(std::abs(last_x(d) / std::exp(5.0) - 1) <= 1e-5);
  for (const auto& pt : d.series) {
    CHECK(std::abs(pt.outputs.at("x") / std::exp(.5 * pt.index) - 1) <= 1e-5);
  }
}

TEST_CASE("RK4 error falls by at least 8 when h halves") {
  for (double h : {.5, .25, .1}) {
    CAPTURE(h);
    const double exact = std::exp(5.0);
    const double e1 = std::abs(last_x(sim::simulate(malthus(1, .5, 10, 1, h))) - exact);
    const double e2 = std::abs(last_x(sim::simulate(malthus(1, .5, 10, 1, h / 2))) - exact);
    CHECK(e1 / e2 >= 8);
  }
}

TEST_CASE("zero growth and logistic fixed point") {
  for (const auto& pt : sim::simulate(malthus(30, 0, 20, 1, std::nullopt)).series) CHECK(pt.outputs.at("x") == 30);
  sim::OdeModel m{"logistic", {{"x0", 80}, {"K", 80}, {"b", 1.2}}, {1900, 1920, 1, std::nullopt}, 2, 2};
  for (const auto& pt : sim::simulate(m).series) CHECK(std::abs(pt.outputs.at("x") - 80) <= 1e-9);
}

TEST_CASE("Lotka-Volterra initial condition is exact") {
  auto m = sim::model_from_json(nlohmann::json::parse(fixture("models/phi2_u3_6.json")));
  auto d = sim::simulate(m);
  CHECK(d.hypothesis_id == 3);
  CHECK(d.phenomenon_id == 2);
  CHECK(d.series.front().index == 1900);
  CHECK(d.series.front().outputs.at("x") == 30);
  CHECK(d.series.front().outputs.at("y") == 4);
  CHECK(d.series.size() == 21);
  CHECK(d.parameters.at("b") == .397);
}

TEST_CASE("simulation is deterministic and round-trips its manifest") {
  auto m = sim::model_from_json(nlohmann::json::parse(fixture("models/phi2_u3_2.json")));
  auto a = sim::simulate(m);
  auto b = sim::simulate(sim::model_from_json(sim::to_json(m)));
  REQUIRE(a.series.size() == b.series.size());
  for (std::size_t i = 0; i < a.series.size(); ++i) CHECK(a.series[i].outputs == b.series[i].outputs);
  CHECK(format_trial_csv(a) == format_trial_csv(b));
}

TEST_CASE("invalid models") {
  auto code = [](const sim::OdeModel& m) {
    try {
      sim::simulate(m);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Io;
  };
  CHECK(code(sim::OdeModel{"nope", {}, {0, 1, 1, {}}, 1, 1}) == ErrorCode::InvalidModel);
  CHECK(code(sim::OdeModel{"malthus", {{"x0", 1}}, {0, 1, 1, {}}, 1, 1}) == ErrorCode::InvalidModel);
  CHECK(code(malthus(1, .5, 10, 3, std::nullopt)) == ErrorCode::InvalidModel);
  CHECK(code(malthus(1, .5, 10, 1, .3)) == ErrorCode::InvalidModel);
  CHECK(code(malthus(1, 500, 10, 1, .01)) == ErrorCode::NonFiniteState);
}

TEST_CASE("registered models") {
  sim::register_model("decay", sim::ModelSpec{{"x0", "k"}, {"x"}, {"x0"}, [](const auto& p, const sim::State& s) {
                                                return sim::State{-p.at("k") * s[0]};
                                              }});
  auto d = sim::simulate(sim::OdeModel{"decay", {{"x0", 2}, {"k", 1}}, {0, 1, 1, .01}, 1, 1});
  CHECK(last_x(d) == doctest::Approx(2 * std::exp(-1.0)).epsilon(1e-8));
}
