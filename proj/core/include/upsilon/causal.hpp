#pragma once

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "upsilon/ingest.hpp"

namespace upsilon {

// Bijection equation id -> variable, in the structure's equation order.
struct CausalMapping {
  std::vector<std::pair<std::string, Symbol>> pairs;
  // "AmbiguousOrdering" when more than one perfect matching exists.
  std::vector<std::string> warnings;

  const Symbol* variable_for(std::string_view equation_id) const;
  bool ambiguous() const;

  bool operator==(const CausalMapping&) const = default;
};

struct Fd {
  std::vector<Symbol> determinant;  // sorted, unique
  Symbol dependent;

  Fd() = default;
  Fd(std::vector<Symbol> lhs, Symbol rhs);

  auto operator<=>(const Fd&) const = default;
};

// Keeps insertion order (it fixes column order downstream) and drops exact
// duplicates. `attributes` is sorted.
struct FdSet {
  std::vector<Fd> fds;
  std::vector<Symbol> attributes;

  void add(Fd fd);
  void add_attribute(const Symbol& a);
  bool contains(const Fd& fd) const;
  bool has_attribute(std::string_view a) const;
  // Order-insensitive equality of the FD lists and attribute sets.
  bool same_as(const FdSet& other) const;
};

std::size_t maximum_matching_size(const Structure& s);

CausalMapping total_causal_mapping(const Structure& s);

FdSet encode_fds(const Structure& s, const CausalMapping& m);

// "x0 b t υ → x" with the determinant in sorted order.
std::string format_fd(const Fd& fd);

// A list of {determinant, dependent}, sorted by dependent then determinant.
// Attributes not mentioned by any FD are not serialized.
nlohmann::json to_json(const FdSet& sigma);
FdSet fdset_from_json(const nlohmann::json& j);

}  // namespace upsilon
