#include <doctest.h>

#include "support.hpp"
#include "upsilon/error.hpp"

using namespace upsilon;
using namespace upsilon::test;

namespace {

FdSet sigma3() {
  auto s = descriptor("lotka.xml");
  return encode_fds(s, total_causal_mapping(s));
}

std::vector<Symbol> sorted(std::vector<Symbol> v) {
  std::sort(v.begin(), v.end());
  return v;
}

// Number of determinant classes under mutual closure containment.
std::size_t determinant_classes(const FdSet& sigma) {
  std::vector<std::vector<Symbol>> dets;
  for (const auto& fd : sigma.fds) {
    if (std::find(dets.begin(), dets.end(), fd.determinant) == dets.end()) dets.push_back(fd.determinant);
  }
  std::vector<int> cls(dets.size(), -1);
  int n = 0;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (cls[i] >= 0) continue;
    cls[i] = n;
    const auto ci = attribute_closure(dets[i], sigma);
    for (std::size_t j = i + 1; j < dets.size(); ++j) {
      const auto cj = attribute_closure(dets[j], sigma);
      if (std::includes(ci.begin(), ci.end(), dets[j].begin(), dets[j].end()) &&
          std::includes(cj.begin(), cj.end(), dets[i].begin(), dets[i].end())) {
        cls[j] = n;
      }
    }
    ++n;
  }
  return static_cast<std::size_t>(n);
}

}  // namespace

TEST_CASE("closure examples") {
  const auto s3 = sigma3();
  CHECK(attribute_closure(std::vector<Symbol>{"φ"}, s3) == sorted({"φ", "x0", "b", "p", "y0", "d", "r"}));
  CHECK(attribute_closure(std::vector<Symbol>{}, s3).empty());
  CHECK(attribute_closure(std::vector<Symbol>{"φ", "t", "υ", "y"}, fold_fds(s3)) ==
        sorted({"φ", "t", "υ", "y", "x0", "b", "p", "y0", "d", "r", "x"}));
}

TEST_CASE("folding Sigma_3") {
  auto folded = fold_fds(sigma3());
  CHECK(folded.same_as(make_fds({{{"φ"}, "x0"},
                                 {{"φ"}, "b"},
                                 {{"φ"}, "p"},
                                 {{"φ"}, "y0"},
                                 {{"φ"}, "d"},
                                 {{"φ"}, "r"},
                                 {{"φ", "t", "υ", "y"}, "x"},
                                 {{"φ", "t", "υ", "x"}, "y"}})));
}

TEST_CASE("folding Sigma_1 keeps the closure of φ t υ") {
  auto s = descriptor("malthus.xml");
  auto sigma = encode_fds(s, total_causal_mapping(s));
  auto folded = fold_fds(sigma);
  CHECK(folded.same_as(make_fds({{{"φ"}, "x0"}, {{"φ"}, "b"}, {{"φ", "t", "υ"}, "x"}})));
  const std::vector<Symbol> key{"t", "υ", "φ"};
  auto a = attribute_closure(key, sigma);
  auto b = attribute_closure(key, folded);
  CHECK(std::binary_search(a.begin(), a.end(), "x"));
  CHECK(a == b);
}

TEST_CASE("folding a lone parameter FD is the identity") {
  auto s = make_fds({{{"φ"}, "a"}});
  CHECK(fold_fds(s).same_as(s));
}

TEST_CASE("H_3 schema") {
  auto cat = synthesize_4c(fold_fds(sigma3()), 3);
  REQUIRE(cat.relations.size() == 2);
  const auto& h1 = cat.relations[0];
  const auto& h2 = cat.relations[1];
  CHECK(h1.name == "H_3^1");
  CHECK(h1.attributes == std::vector<Symbol>{"φ", "x0", "b", "p", "y0", "d", "r"});
  CHECK(h1.keys == std::vector<std::vector<Symbol>>{{"φ"}});
  CHECK(h2.name == "H_3^2");
  CHECK(h2.attributes == std::vector<Symbol>{"φ", "υ", "t", "y", "x"});
  CHECK(h2.keys.size() == 2);
  CHECK(std::find(h2.keys.begin(), h2.keys.end(), sorted({"φ", "t", "υ", "y"})) != h2.keys.end());
  CHECK(std::find(h2.keys.begin(), h2.keys.end(), sorted({"φ", "t", "υ", "x"})) != h2.keys.end());
  CHECK(h2.origin == 3);
}

TEST_CASE("H_1 schema") {
  auto s = descriptor("malthus.xml");
  auto cat = synthesize_4c(fold_fds(encode_fds(s, total_causal_mapping(s))), 1);
  REQUIRE(cat.relations.size() == 2);
  CHECK(cat.relations[0].attributes == std::vector<Symbol>{"φ", "x0", "b"});
  CHECK(cat.relations[1].attributes == std::vector<Symbol>{"φ", "υ", "t", "x"});
  CHECK(cat.relations[1].keys == std::vector<std::vector<Symbol>>{sorted({"φ", "t", "υ"})});
}

TEST_CASE("trivial and empty synthesis") {
  auto cat = synthesize_4c(make_fds({{{"φ"}, "a"}}), 9);
  REQUIRE(cat.relations.size() == 1);
  CHECK(cat.relations[0].attributes == std::vector<Symbol>{"φ", "a"});
  CHECK_THROWS_AS(synthesize_4c(FdSet{}, 9), Error);
}

TEST_CASE("schema json round trip") {
  auto cat = synthesize_4c(fold_fds(sigma3()), 3);
  auto back = schema_from_json(to_json(cat));
  CHECK(back.relations == cat.relations);
  CHECK(back.folded.same_as(cat.folded));
}

TEST_CASE("fold is idempotent on random encoded FD sets") {
  std::mt19937 rng(5);
  for (int i = 0; i < 1000; ++i) {
    auto s = random_valid_structure(rng);
    auto once = fold_fds(encode_fds(s, total_causal_mapping(s)));
    CAPTURE(i);
    CHECK(fold_fds(once).same_as(once));
  }
}

TEST_CASE("random structures synthesize to BCNF lossless schemas") {
  std::mt19937 rng(17);
  for (int i = 0; i < 500; ++i) {
    auto s = random_valid_structure(rng);
    auto folded = fold_fds(encode_fds(s, total_causal_mapping(s)));
    auto cat = synthesize_4c(folded, 1);
    CAPTURE(i);
    const auto has_warning = [&](std::string_view tag) {
      return std::count_if(cat.warnings.begin(), cat.warnings.end(),
                           [&](const std::string& w) { return w.starts_with(tag); });
    };
    // One relation per determinant class, plus the universal key relation;
    // BCNF splits can add more.
    if (has_warning("BcnfSplit") == 0) {
      CHECK(cat.relations.size() == determinant_classes(folded) + has_warning("UniversalKey"));
    }
    CHECK(chase_lossless(cat.relations, folded));
    CHECK(is_lossless(cat.relations, folded));
    std::set<Symbol> covered;
    for (const auto& r : cat.relations) {
      CHECK(bcnf_by_subsets(r, folded));
      CHECK(is_bcnf(r, folded));
      CHECK(std::set<Symbol>(r.attributes.begin(), r.attributes.end()).size() == r.attributes.size());
      for (const auto& k : r.keys) {
        for (const auto& a : k) CHECK(r.has_attribute(a));
        auto c = attribute_closure(k, folded);
        for (const auto& a : r.attributes) CHECK(std::binary_search(c.begin(), c.end(), a));
      }
      covered.insert(r.attributes.begin(), r.attributes.end());
    }
    for (const auto& fd : folded.fds) {
      CHECK(covered.contains(fd.dependent));
      for (const auto& a : fd.determinant) CHECK(covered.contains(a));
    }
  }
}

TEST_CASE("extraneous determinant attributes are reduced before grouping") {
  // z1 depends on the hypothesis only, so it is redundant in z0's determinant.
  auto folded = make_fds({{{"φ"}, "a0"}, {{"φ", "t", "υ", "z1"}, "z0"}, {{"φ", "υ"}, "z1"}});
  auto cat = synthesize_4c(folded, 1);
  REQUIRE(cat.relations.size() == 3);
  CHECK(cat.relations[1].attributes == std::vector<Symbol>{"φ", "υ", "z1"});
  CHECK(cat.relations[2].attributes == std::vector<Symbol>{"φ", "υ", "t", "z0"});
  CHECK(cat.relations[2].keys == std::vector<std::vector<Symbol>>{sorted({"φ", "t", "υ"})});
  for (const auto& r : cat.relations) CHECK(bcnf_by_subsets(r, folded));
}

TEST_CASE("a BCNF violation inside a class is split off") {
  // z0 = f(z1, t), z1 = g(z0): {z0 υ φ} → z1 holds inside {φ υ t z1 z0}.
  auto folded = make_fds({{{"φ", "t", "υ", "z1"}, "z0"}, {{"φ", "υ", "z0"}, "z1"}});
  auto cat = synthesize_4c(folded, 1);
  for (const auto& r : cat.relations) CHECK(bcnf_by_subsets(r, folded));
  CHECK(chase_lossless(cat.relations, folded));
  CHECK(std::any_of(cat.warnings.begin(), cat.warnings.end(),
                    [](const std::string& w) { return w.starts_with("BcnfSplit"); }));
}

TEST_CASE("mutually dependent outputs without the index get a key relation") {
  auto folded = make_fds({{{"φ"}, "a0"}, {{"φ", "t", "υ"}, "z0"}, {{"φ", "υ", "z2"}, "z1"}, {{"φ", "υ", "z1"}, "z2"}});
  auto cat = synthesize_4c(folded, 1);
  CHECK(chase_lossless(cat.relations, folded));
  CHECK(cat.relations.size() == 4);
  CHECK(std::any_of(cat.warnings.begin(), cat.warnings.end(),
                    [](const std::string& w) { return w.starts_with("UniversalKey"); }));
}

TEST_CASE("fixture schemas pass the BCNF and chase checks") {
  for (const char* f : {"malthus.xml", "logistic.xml", "lotka.xml"}) {
    auto s = descriptor(f);
    auto folded = fold_fds(encode_fds(s, total_causal_mapping(s)));
    auto cat = synthesize_4c(folded, s.hypothesis_id);
    CHECK(chase_lossless(cat.relations, folded));
    for (const auto& r : cat.relations) CHECK(bcnf_by_subsets(r, folded));
  }
}
