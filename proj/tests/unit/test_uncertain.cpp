#include <doctest.h>

#include "support.hpp"
#include "upsilon/error.hpp"

using namespace upsilon;
using namespace upsilon::test;

namespace {

ResultSet h0_rows() {
  ResultSet rs;
  rs.attributes = {"φ", "υ"};
  for (auto [phi, u] : std::vector<std::pair<int, int>>{{1, 1}, {1, 2}, {2, 1}, {2, 2}, {2, 3}}) {
    rs.rows.push_back({std::int64_t{phi}, std::int64_t{u}});
  }
  return rs;
}

TrialDataset lotka_trial(double b, double d, double p, double r) {
  TrialDataset t;
  t.hypothesis_id = 3;
  t.phenomenon_id = 2;
  t.parameters = {{"x0", 30}, {"b", b}, {"p", p}, {"y0", 4}, {"d", d}, {"r", r}};
  t.index_symbol = "t";
  t.series = {{1900, {{"x", 30}, {"y", 4}}}, {1901, {{"x", 41.5 + b}, {"y", 4.12 + p}}}};
  return t;
}

// The six υ=3 trials of the lynx fixture, in tid order.
Database lynx_db() {
  Database db;
  db.add_phenomenon(parse_phenomenon(fixture("phenomenon2.xml")));
  auto s = descriptor("lotka.xml");
  db.add_hypothesis(s, analyze_hypothesis(s).schema);
  for (auto [b, d] : std::vector<std::pair<double, double>>{{.5, .75}, {.4, .8}, {.397, .786}}) {
    for (auto [p, r] : std::vector<std::pair<double, double>>{{.020, .020}, {.018, .023}}) {
      db.load_trial(lotka_trial(b, d, p, r));
    }
  }
  return db;
}

struct LynxWorlds {
  Database db;
  WorldTable w;
  Factorization f;
  Propagation prop;
};

LynxWorlds lynx_worlds() {
  LynxWorlds out{lynx_db(), {}, {}, {}};
  VarAllocator alloc;
  auto rk = repair_key(h0_rows(), std::vector<Symbol>{"φ"}, std::nullopt, alloc);
  for (std::size_t i = 0; i < rk.variables.size(); ++i) out.w.add_variable(rk.variables[i].id, rk.marginals[i]);
  out.f = u_factorize(out.db, 3, 2, alloc);
  for (std::size_t i = 0; i < out.f.variables.size(); ++i) {
    out.w.add_variable(out.f.variables[i].id, out.f.marginals[i]);
  }
  out.prop = u_propagate(out.db, 3, 2, out.f, Assignment{"x1", 3});
  return out;
}

// Pairwise-FD partition: i and j share a class iff each determines the other.
std::set<std::set<std::size_t>> fd_oracle(const std::vector<std::vector<Scalar>>& cols) {
  auto determines = [&](std::size_t a, std::size_t b) {
    std::map<Scalar, Scalar> f;
    for (std::size_t r = 0; r < cols[a].size(); ++r) {
      auto [it, fresh] = f.emplace(cols[a][r], cols[b][r]);
      if (!fresh && it->second != cols[b][r]) return false;
    }
    return true;
  };
  std::set<std::set<std::size_t>> out;
  std::set<std::size_t> done;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (done.contains(i)) continue;
    std::set<std::size_t> cls{i};
    for (std::size_t j = i + 1; j < cols.size(); ++j) {
      if (!done.contains(j) && determines(i, j) && determines(j, i)) cls.insert(j);
    }
    done.insert(cls.begin(), cls.end());
    out.insert(cls);
  }
  return out;
}

}  // namespace

TEST_CASE("repair-key of H_0") {
  VarAllocator alloc;
  auto rk = repair_key(h0_rows(), std::vector<Symbol>{"φ"}, std::nullopt, alloc);
  REQUIRE(rk.variables.size() == 2);
  CHECK(rk.variables[0].id == "x0");
  CHECK(rk.variables[1].id == "x1");
  REQUIRE(rk.marginals[0].size() == 2);
  REQUIRE(rk.marginals[1].size() == 3);
  for (double m : rk.marginals[0]) CHECK(std::abs(m - 0.5) <= 1e-12);
  for (double m : rk.marginals[1]) CHECK(std::abs(m - 1.0 / 3.0) <= 1e-12);
  REQUIRE(rk.relation.tuples.size() == 5);
  CHECK(rk.relation.tuples[4].condition == Condition{{"x1", 3}});
}

TEST_CASE("repair-key on an existing key and with weights") {
  VarAllocator alloc;
  auto rk = repair_key(h0_rows(), std::vector<Symbol>{"φ", "υ"}, std::nullopt, alloc);
  CHECK(rk.variables.size() == 5);
  for (const auto& m : rk.marginals) CHECK(m == std::vector<double>{1.0});

  ResultSet weighted;
  weighted.attributes = {"k", "w"};
  weighted.rows = {{std::int64_t{1}, 1.0}, {std::int64_t{1}, 3.0}};
  auto wk = repair_key(weighted, std::vector<Symbol>{"k"}, Symbol("w"), alloc);
  REQUIRE(wk.marginals.size() == 1);
  CHECK(wk.marginals[0][0] == doctest::Approx(.25).epsilon(1e-12));
  CHECK(wk.marginals[0][1] == doctest::Approx(.75).epsilon(1e-12));

  weighted.rows[1][1] = 0.0;
  CHECK_THROWS_AS(repair_key(weighted, std::vector<Symbol>{"k"}, Symbol("w"), alloc), Error);
}

TEST_CASE("u-factorization of the six lynx trials") {
  auto s = lynx_worlds();
  REQUIRE(s.f.clusters.size() == 3);
  CHECK(s.f.clusters[0].attributes == std::vector<Symbol>{"x0", "y0"});
  CHECK(s.f.clusters[0].alternatives.size() == 1);
  CHECK(s.f.clusters[1].attributes == std::vector<Symbol>{"b", "d"});
  CHECK(s.f.clusters[1].alternatives == std::vector<Row>{{.5, .75}, {.4, .8}, {.397, .786}});
  CHECK(s.f.clusters[2].attributes == std::vector<Symbol>{"p", "r"});
  CHECK(s.f.clusters[2].alternatives == std::vector<Row>{{.020, .020}, {.018, .023}});
  CHECK(s.f.clusters[0].var == "x2");
  CHECK(s.f.clusters[1].var == "x3");
  CHECK(s.f.clusters[2].var == "x4");
  CHECK(s.w.probability("x2", 1) == 1.0);
  CHECK(s.w.probability("x3", 2) == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(s.w.probability("x4", 2) == .5);
  CHECK(s.f.warnings.empty());
  CHECK(s.w.max_normalization_error() <= 1e-9);

  REQUIRE(s.f.parameter_relations.size() == 3);
  CHECK(s.f.parameter_relations[1].name == "Y_3^2");
  CHECK(s.f.parameter_relations[1].attributes == std::vector<Symbol>{"φ", "b", "d"});
}

TEST_CASE("tid 6 gets θ = {x1↦3, x2↦1, x3↦3, x4↦2} at Pr 1/18") {
  auto s = lynx_worlds();
  REQUIRE(s.prop.worlds.size() == 6);
  const auto& w6 = s.prop.worlds[5];
  CHECK(w6.tid == 6);
  CHECK(normalized(w6.theta) == Condition{{"x1", 3}, {"x2", 1}, {"x3", 3}, {"x4", 2}});
  CHECK(std::abs(world_prob(w6.theta, s.w) - 1.0 / 18) <= 1e-12);
  CHECK(std::abs(world_prob(w6.theta, s.w) - .055) <= .001);
}

TEST_CASE("propagated worlds are the cartesian product of cluster alternatives") {
  auto s = lynx_worlds();
  std::set<Condition> seen;
  double total = 0;
  for (const auto& w : s.prop.worlds) {
    seen.insert(normalized(w.theta));
    total += world_prob(w.theta, s.w);
  }
  std::set<Condition> product;
  for (int b = 1; b <= 3; ++b) {
    for (int p = 1; p <= 2; ++p) product.insert(normalized({{"x1", 3}, {"x2", 1}, {"x3", b}, {"x4", p}}));
  }
  CHECK(seen == product);
  // Law of total probability: the worlds of υ=3 carry x1↦3's mass.
  CHECK(total == doctest::Approx(1.0 / 3).epsilon(1e-12));
}

TEST_CASE("u-propagation is lossless") {
  auto s = lynx_worlds();
  REQUIRE(s.prop.output_relations.size() == 1);
  const auto& out = s.prop.output_relations[0];
  CHECK(out.name == "Y_3^4");
  CHECK(out.attributes == std::vector<Symbol>{"φ", "υ", "t", "y", "x"});
  auto certain = s.db.select_certain("H_3^2", {});
  CHECK(out.tuples.size() == certain.rows.size());
  auto params = s.db.select_certain("H_3^1", {});
  for (const auto& w : s.prop.worlds) {
    const auto theta = normalized(w.theta);
    auto holds = [&](const Condition& c) {
      const auto n = normalized(c);
      return std::includes(theta.begin(), theta.end(), n.begin(), n.end());
    };
    // Output rows.
    std::vector<Row> got, want;
    for (const auto& t : out.tuples) {
      if (normalized(t.condition) == theta) got.push_back(t.values);
    }
    for (const auto& r : certain.rows) {
      if (std::get<std::int64_t>(r[0]) == w.tid) want.emplace_back(r.begin() + 1, r.end());
    }
    CHECK(got == want);
    // Parameter rows: join every parameter U-relation on the world.
    std::map<Symbol, Scalar> joined;
    for (const auto& rel : s.f.parameter_relations) {
      int matches = 0;
      for (const auto& t : rel.tuples) {
        if (!holds(t.condition)) continue;
        ++matches;
        for (std::size_t i = 0; i < rel.attributes.size(); ++i) joined[rel.attributes[i]] = t.values[i];
      }
      CHECK(matches == 1);
    }
    const Row* row = nullptr;
    for (const auto& r : params.rows) {
      if (std::get<std::int64_t>(r[0]) == w.tid) row = &r;
    }
    REQUIRE(row != nullptr);
    for (std::size_t i = 1; i < params.attributes.size(); ++i) CHECK(joined.at(params.attributes[i]) == (*row)[i]);
  }
}

TEST_CASE("single trial factorizes into one certain variable") {
  Database db;
  db.add_phenomenon(parse_phenomenon(fixture("phenomenon2.xml")));
  auto s = descriptor("lotka.xml");
  db.add_hypothesis(s, analyze_hypothesis(s).schema);
  db.load_trial(lotka_trial(.5, .75, .02, .02));
  VarAllocator alloc(5);
  auto f = u_factorize(db, 3, 2, alloc);
  REQUIRE(f.clusters.size() == 1);
  CHECK(f.clusters[0].attributes.size() == 6);
  CHECK(f.marginals[0] == std::vector<double>{1.0});
  auto p = u_propagate(db, 3, 2, f, Assignment{"x1", 1});
  REQUIRE(p.worlds.size() == 1);
  for (const auto& a : p.worlds[0].theta) CHECK(a.value == 1);
}

TEST_CASE("u-factorization errors and warnings") {
  Database db;
  db.add_phenomenon(parse_phenomenon(fixture("phenomenon2.xml")));
  auto s = descriptor("lotka.xml");
  db.add_hypothesis(s, analyze_hypothesis(s).schema);
  VarAllocator alloc;
  CHECK_THROWS_AS(u_factorize(db, 3, 2, alloc), Error);
  db.load_trial(lotka_trial(.5, .75, .02, .02));
  db.load_trial(lotka_trial(.4, .8, .018, .023));
  db.load_trial(lotka_trial(.4, .8, .02, .02));
  auto f = u_factorize(db, 3, 2, alloc);
  CHECK(f.clusters.size() == 3);
  CHECK_FALSE(f.warnings.empty());
  db.load_trial(lotka_trial(.4, .8, .02, .02));
  auto err = ErrorCode::Io;
  try {
    u_factorize(db, 3, 2, alloc);
  } catch (const Error& e) {
    err = e.code();
  }
  CHECK(err == ErrorCode::DuplicateTrial);
}

TEST_CASE("bijective a,b with independent c") {
  std::vector<std::vector<Scalar>> cols{{1.0, 2.0, 1.0, 2.0}, {10.0, 20.0, 10.0, 20.0}, {5.0, 5.0, 6.0, 6.0}};
  auto c = bijective_clusters(cols);
  CHECK(c == std::vector<std::vector<std::size_t>>{{0, 1}, {2}});
}

TEST_CASE("clusters agree with a pairwise FD oracle") {
  std::mt19937 rng(23);
  for (int iter = 0; iter < 200; ++iter) {
    const int ncols = std::uniform_int_distribution<int>(1, 6)(rng);
    const int nrows = std::uniform_int_distribution<int>(1, 6)(rng);
    std::vector<std::vector<Scalar>> cols;
    for (int c = 0; c < ncols; ++c) {
      std::vector<Scalar> col;
      const int mode = std::uniform_int_distribution<int>(0, 2)(rng);
      for (int r = 0; r < nrows; ++r) {
        if (mode == 0 && c > 0) {
          // Relabelled copy of an earlier column.
          col.push_back(as_double(cols[c - 1][r]) * 7 + 1);
        } else {
          col.push_back(static_cast<double>(std::uniform_int_distribution<int>(0, 2)(rng)));
        }
      }
      cols.push_back(col);
    }
    auto got = bijective_clusters(cols);
    std::set<std::set<std::size_t>> as_set;
    std::set<std::size_t> all;
    for (const auto& cl : got) {
      as_set.emplace(cl.begin(), cl.end());
      for (auto i : cl) CHECK(all.insert(i).second);
    }
    CAPTURE(iter);
    CHECK(all.size() == static_cast<std::size_t>(ncols));
    CHECK(as_set == fd_oracle(cols));
  }
}

TEST_CASE("world probability") {
  WorldTable w;
  w.add_variable("x0", std::vector<double>{.25, .75});
  CHECK(world_prob({}, w) == 1.0);
  CHECK(world_prob({{"x0", 1}}, w) == .25);
  CHECK_THROWS_AS(world_prob({{"x9", 1}}, w), Error);
  CHECK_THROWS_AS(world_prob({{"x0", 3}}, w), Error);
}

TEST_CASE("conf examples") {
  WorldTable w;
  w.add_variable("x", std::vector<double>{.5, .5});
  w.add_variable("y", std::vector<double>{.2, .8});
  const Row a{1.0};
  std::vector<UTuple> single{{{{"x", 1}, {"y", 2}}, a}};
  CHECK(conf(single, w)[0].probability == doctest::Approx(world_prob(single[0].condition, w)));
  std::vector<UTuple> split{{{{"x", 1}}, a}, {{{"x", 2}}, a}};
  auto c = conf(split, w);
  REQUIRE(c.size() == 1);
  CHECK(c[0].probability == doctest::Approx(1.0).epsilon(1e-12));

  VarAllocator alloc;
  auto rk = repair_key(h0_rows(), std::vector<Symbol>{"φ"}, std::nullopt, alloc);
  WorldTable h;
  for (std::size_t i = 0; i < rk.variables.size(); ++i) h.add_variable(rk.variables[i].id, rk.marginals[i]);
  auto confs = conf(rk.relation.tuples, h);
  bool found = false;
  for (const auto& cf : confs) {
    if (cf.values == Row{std::int64_t{2}, std::int64_t{3}}) {
      found = true;
      CHECK(std::abs(cf.probability - 1.0 / 3) <= 1e-12);
    }
  }
  CHECK(found);
}

TEST_CASE("conf equals possible-worlds enumeration") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  for (int iter = 0; iter < 1000; ++iter) {
    WorldTable w;
    const int nv = std::uniform_int_distribution<int>(1, 4)(rng);
    std::vector<int> alts;
    for (int v = 0; v < nv; ++v) {
      const int k = std::uniform_int_distribution<int>(1, 3)(rng);
      std::vector<double> m;
      double z = 0;
      for (int i = 0; i < k; ++i) z += m.emplace_back(unit(rng));
      for (auto& x : m) x /= z;
      w.add_variable("x" + std::to_string(v), m);
      alts.push_back(k);
    }
    std::vector<UTuple> tuples;
    const int nt = std::uniform_int_distribution<int>(1, 6)(rng);
    for (int t = 0; t < nt; ++t) {
      Condition c;
      for (int v = 0; v < nv; ++v) {
        if (std::uniform_int_distribution<int>(0, 1)(rng)) {
          c.push_back({"x" + std::to_string(v), std::uniform_int_distribution<int>(1, alts[v])(rng)});
        }
      }
      tuples.push_back({c, Row{static_cast<double>(std::uniform_int_distribution<int>(0, 2)(rng))}});
    }
    CAPTURE(iter);
    for (const auto& cf : conf(tuples, w)) {
      std::vector<Condition> conds;
      for (const auto& t : tuples) {
        if (t.values == cf.values) conds.push_back(t.condition);
      }
      CHECK(std::abs(cf.probability - brute_force_conf(conds, w)) <= 1e-12);
    }
  }
}

TEST_CASE("world table csv round trip") {
  WorldTable w;
  w.add_variable("x0", std::vector<double>{.5, .5});
  w.add_variable("x1", std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3});
  auto back = WorldTable::from_csv(w.to_csv());
  CHECK(back == w);
  CHECK(w.to_csv().rfind("var,val,prob\n", 0) == 0);
}
