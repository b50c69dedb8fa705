#include <doctest.h>

#include "support.hpp"
#include "upsilon/error.hpp"

using namespace upsilon;
using namespace upsilon::test;

namespace {

FdSet sigma_of(const char* file) {
  auto s = descriptor(file);
  return encode_fds(s, total_causal_mapping(s));
}

}  // namespace

TEST_CASE("S_1 mapping") {
  auto s = descriptor("malthus.xml");
  CHECK(count_perfect_matchings(s) == 1);
  auto m = total_causal_mapping(s);
  CHECK(m.pairs == std::vector<std::pair<std::string, Symbol>>{{"f1", "t"}, {"f2", "x0"}, {"f3", "b"}, {"f4", "x"}});
  CHECK_FALSE(m.ambiguous());
}

TEST_CASE("S_3 mapping takes x for f8 and y for f9") {
  auto s = descriptor("lotka.xml");
  // f8 and f9 both range over {x, y}: two perfect matchings exist.
  CHECK(count_perfect_matchings(s) == 2);
  auto m = total_causal_mapping(s);
  CHECK(*m.variable_for("f8") == "x");
  CHECK(*m.variable_for("f9") == "y");
  CHECK(*m.variable_for("f1") == "t");
  CHECK(*m.variable_for("f7") == "r");
  CHECK(m.ambiguous());
}

TEST_CASE("symmetric pair is ambiguous and tie-broken lexicographically") {
  auto s = opaque_structure({{"g1", {"a", "b"}}, {"g2", {"a", "b"}}}, {{"a", Role::output}, {"b", Role::output}});
  auto m = total_causal_mapping(s);
  CHECK(m.pairs == std::vector<std::pair<std::string, Symbol>>{{"g1", "a"}, {"g2", "b"}});
  CHECK(m.ambiguous());
}

TEST_CASE("Sigma_1 to Sigma_3") {
  CHECK(sigma_of("malthus.xml").same_as(make_fds({{{"φ"}, "x0"}, {{"φ"}, "b"}, {{"x0", "b", "t", "υ"}, "x"}})));
  CHECK(sigma_of("logistic.xml")
            .same_as(make_fds({{{"φ"}, "x0"}, {{"φ"}, "K"}, {{"φ"}, "b"}, {{"x0", "K", "b", "t", "υ"}, "x"}})));
  CHECK(sigma_of("lotka.xml").same_as(make_fds({{{"φ"}, "x0"},
                                                {{"φ"}, "b"},
                                                {{"φ"}, "p"},
                                                {{"φ"}, "y0"},
                                                {{"φ"}, "d"},
                                                {{"φ"}, "r"},
                                                {{"x0", "b", "p", "t", "υ", "y"}, "x"},
                                                {{"y0", "d", "r", "t", "υ", "x"}, "y"}})));
}

TEST_CASE("one FD per non-index variable, none for the index") {
  for (const char* f : {"malthus.xml", "logistic.xml", "lotka.xml"}) {
    auto s = descriptor(f);
    auto sigma = encode_fds(s, total_causal_mapping(s));
    std::size_t non_index = 0;
    for (const auto& d : s.declarations) non_index += d.role != Role::index;
    CHECK(sigma.fds.size() == non_index);
    for (const auto& fd : sigma.fds) CHECK(s.find_variable(fd.dependent)->role != Role::index);
  }
}

TEST_CASE("lone index equation") {
  auto s = opaque_structure({{"f", {"t"}}}, {{"t", Role::index}});
  auto sigma = encode_fds(s, total_causal_mapping(s));
  CHECK(sigma.fds.empty());
  CHECK(sigma.attributes == std::vector<Symbol>{"t", "υ", "φ"});
}

TEST_CASE("FdSet json is canonical") {
  auto sigma = sigma_of("lotka.xml");
  auto j = to_json(sigma);
  CHECK(j.size() == 8);
  CHECK(j[0]["dependent"] == "b");
  CHECK(fdset_from_json(j).same_as(sigma));
}

TEST_CASE("mapping succeeds iff a perfect matching exists") {
  std::mt19937 rng(11);
  for (int iter = 0; iter < 400; ++iter) {
    const int n = std::uniform_int_distribution<int>(1, 8)(rng);
    std::map<Symbol, Role> roles;
    std::vector<Symbol> vars;
    for (int i = 0; i < n; ++i) {
      vars.push_back("v" + std::to_string(i));
      roles[vars.back()] = Role::output;
    }
    std::vector<std::pair<std::string, std::vector<Symbol>>> eqs;
    for (int e = 0; e < n; ++e) {
      std::vector<Symbol> vs;
      for (const auto& v : vars) {
        if (std::uniform_int_distribution<int>(0, 3)(rng) == 0) vs.push_back(v);
      }
      if (vs.empty()) vs.push_back(vars[std::uniform_int_distribution<int>(0, n - 1)(rng)]);
      eqs.push_back({"e" + std::to_string(e), vs});
    }
    auto s = opaque_structure(eqs, roles);
    const auto count = count_perfect_matchings(s);
    CAPTURE(iter);
    if (count == 0) {
      CHECK_THROWS_AS(total_causal_mapping(s), Error);
      CHECK(maximum_matching_size(s) < static_cast<std::size_t>(n));
      continue;
    }
    auto m = total_causal_mapping(s);
    CHECK(m.ambiguous() == (count > 1));
    std::set<Symbol> seen;
    for (const auto& [eid, v] : m.pairs) {
      const auto* e = s.find_equation(eid);
      CHECK(std::binary_search(e->variables.begin(), e->variables.end(), v));
      CHECK(seen.insert(v).second);
    }
    CHECK(seen.size() == static_cast<std::size_t>(n));
    CHECK(total_causal_mapping(s) == m);
  }
}

TEST_CASE("role conflicts") {
  auto s = opaque_structure({{"f", {"x"}}}, {{"x", Role::output}});
  CHECK_THROWS_AS(encode_fds(s, total_causal_mapping(s)), Error);
}
