#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace upsilon {

using Symbol = std::string;

// Reserved attribute symbols: phenomenon id, hypothesis id, trial id.
inline constexpr std::string_view kPhi = "φ";
inline constexpr std::string_view kUpsilon = "υ";
inline constexpr std::string_view kTid = "tid";

bool is_reserved_symbol(std::string_view s);

enum class Role { parameter, index, output };

std::string_view to_string(Role r);
std::optional<Role> parse_role(std::string_view s);

struct VariableDecl {
  Symbol symbol;
  Role role = Role::parameter;
  std::string description;

  bool operator==(const VariableDecl&) const = default;
};

// Content-MathML expression tree. `name` is the operator for apply nodes
// (eq, plus, minus, times, divide, power, diff), the identifier for ci,
// the literal text for cn, and empty for the bvar/lowlimit qualifiers.
struct Expr {
  enum class Kind { apply, ci, cn, bvar, lowlimit };

  Kind kind = Kind::ci;
  std::string name;
  std::vector<Expr> children;

  bool operator==(const Expr&) const = default;

  static Expr ci(std::string s) { return Expr{Kind::ci, std::move(s), {}}; }
  static Expr cn(std::string s) { return Expr{Kind::cn, std::move(s), {}}; }
  static Expr apply(std::string op, std::vector<Expr> args) {
    return Expr{Kind::apply, std::move(op), std::move(args)};
  }
};

// Identifier leaves of `e` in document order, duplicates kept.
void collect_identifiers(const Expr& e, std::vector<Symbol>& out);

struct Equation {
  std::string id;
  // Sorted, unique.
  std::vector<Symbol> variables;
  // The variable the equation is "about": the lhs identifier, the function
  // of a lhs derivative, or the first name of an opaque `vars` list.
  std::optional<Symbol> primary;
  // Root is apply(eq, lhs, rhs); absent for opaque equations.
  std::optional<Expr> expression;
  // Set when the equation reads `symbol = literal`.
  std::optional<double> literal;
  // Original order of an opaque `vars` list, for round-tripping.
  std::vector<Symbol> declared_order;

  bool operator==(const Equation&) const = default;
};

struct Structure {
  std::int64_t hypothesis_id = 0;
  std::string name;
  std::vector<Equation> equations;
  std::vector<VariableDecl> declarations;
  // Phenomena this hypothesis targets (rows of H_0); may be empty.
  std::vector<std::int64_t> targets;

  const VariableDecl* find_variable(std::string_view symbol) const;
  const Equation* find_equation(std::string_view id) const;

  bool operator==(const Structure&) const = default;
};

struct PhenomenonDecl {
  std::int64_t phenomenon_id = 0;
  std::string description;

  bool operator==(const PhenomenonDecl&) const = default;
};

Structure parse_descriptor(std::string_view bytes);
std::string serialize_descriptor(const Structure& s);

PhenomenonDecl parse_phenomenon(std::string_view bytes);

enum class Violation { CountMismatch, NoPerfectMatching, OrphanVariable, EmptyStructure };

std::string_view to_string(Violation v);

struct ValidityReport {
  bool valid = false;
  std::vector<Violation> reasons;
  std::vector<std::string> details;

  bool has(Violation v) const;
};

ValidityReport validate_structure(const Structure& s);

}  // namespace upsilon
