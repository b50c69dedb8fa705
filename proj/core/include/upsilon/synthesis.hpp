#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "upsilon/causal.hpp"

namespace upsilon {

struct RelationDef {
  std::string name;
  std::vector<Symbol> attributes;
  std::vector<std::vector<Symbol>> keys;  // each sorted
  std::optional<std::int64_t> origin;     // hypothesis id, nullopt = global

  bool has_attribute(std::string_view a) const;
  bool operator==(const RelationDef&) const = default;
};

struct SchemaCatalog {
  std::vector<RelationDef> relations;
  FdSet folded;
  FdSet primitive;
  std::vector<std::string> warnings;

  const RelationDef* find(std::string_view name) const;
};

// Sorted closure of `x` under `sigma`.
std::vector<Symbol> attribute_closure(std::span<const Symbol> x, const FdSet& sigma);

FdSet fold_fds(const FdSet& sigma);

SchemaCatalog synthesize_4c(const FdSet& folded, std::int64_t hypothesis_id);

// Exhaustive BCNF test of `r` against the FDs implied by `sigma` (projected
// onto r's attributes).
bool is_bcnf(const RelationDef& r, const FdSet& sigma);

// Chase test for the lossless-join property of the decomposition.
bool is_lossless(std::span<const RelationDef> relations, const FdSet& sigma);

std::string relation_name(std::int64_t hypothesis_id, std::size_t index);

nlohmann::json to_json(const RelationDef& r);
RelationDef relation_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SchemaCatalog& c);
SchemaCatalog schema_from_json(const nlohmann::json& j);

}  // namespace upsilon
