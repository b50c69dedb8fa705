#include "upsilon/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "upsilon/causal.hpp"
#include "upsilon/error.hpp"
#include "xml.hpp"

namespace upsilon {

namespace {

const std::set<std::string, std::less<>> kOperators = {"eq",     "plus",  "minus", "times",
                                                       "divide", "power", "diff"};

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::int64_t parse_id(const std::string* text, std::string_view what) {
  if (text == nullptr) throw Error(ErrorCode::InvalidDescriptor, std::string(what) + " is missing");
  std::int64_t v = 0;
  auto s = trim(*text);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v <= 0) {
    throw Error(ErrorCode::InvalidDescriptor,
                std::string(what) + " must be a positive integer, got '" + s + "'");
  }
  return v;
}

Expr convert(const xml::Node& n);

Expr convert_apply(const xml::Node& n) {
  if (n.children.empty()) throw Error(ErrorCode::InvalidDescriptor, "empty <apply>");
  const auto& head = n.children.front();
  if (!kOperators.contains(head.name)) {
    throw Error(ErrorCode::UnknownElement, "<" + head.name + "> is not a supported operator");
  }
  if (!head.children.empty()) {
    throw Error(ErrorCode::InvalidDescriptor, "operator <" + head.name + "> must be empty");
  }
  Expr e = Expr::apply(head.name, {});
  std::size_t operands = 0;
  for (std::size_t i = 1; i < n.children.size(); ++i) {
    const auto& c = n.children[i];
    if (c.name == "bvar" || c.name == "lowlimit") {
      if (head.name != "diff") {
        throw Error(ErrorCode::InvalidDescriptor, "<" + c.name + "> is only valid inside diff");
      }
      if (c.children.size() != 1 || c.children.front().name != "ci") {
        throw Error(ErrorCode::InvalidDescriptor, "<" + c.name + "> must hold exactly one <ci>");
      }
      e.children.push_back(Expr{c.name == "bvar" ? Expr::Kind::bvar : Expr::Kind::lowlimit,
                                "",
                                {convert(c.children.front())}});
    } else {
      e.children.push_back(convert(c));
      ++operands;
    }
  }
  const auto& op = head.name;
  bool ok = true;
  if (op == "eq" || op == "divide" || op == "power") ok = operands == 2;
  if (op == "minus") ok = operands == 1 || operands == 2;
  if (op == "plus" || op == "times") ok = operands >= 1;
  if (op == "diff") {
    auto bvars = std::count_if(e.children.begin(), e.children.end(),
                               [](const Expr& c) { return c.kind == Expr::Kind::bvar; });
    ok = operands == 1 && bvars <= 1;
  }
  if (!ok) {
    throw Error(ErrorCode::InvalidDescriptor,
                "<" + op + "> applied to " + std::to_string(operands) + " operand(s)");
  }
  return e;
}

Expr convert(const xml::Node& n) {
  if (n.name == "apply") return convert_apply(n);
  if (n.name == "ci") {
    auto s = trim(n.text);
    if (s.empty()) throw Error(ErrorCode::InvalidDescriptor, "empty <ci>");
    return Expr::ci(s);
  }
  if (n.name == "cn") {
    auto s = trim(n.text);
    if (!parse_double(s)) throw Error(ErrorCode::InvalidDescriptor, "bad <cn> literal '" + s + "'");
    return Expr::cn(s);
  }
  throw Error(ErrorCode::UnknownElement, "<" + n.name + "> is outside the supported MathML subset");
}

// The identifier an equation defines: lhs `ci`, or the function of a lhs
// derivative.
std::optional<Symbol> primary_of(const Expr& eq) {
  const Expr& lhs = eq.children.at(0);
  if (lhs.kind == Expr::Kind::ci) return lhs.name;
  if (lhs.kind == Expr::Kind::apply && lhs.name == "diff") {
    for (const auto& c : lhs.children) {
      if (c.kind == Expr::Kind::ci) return c.name;
    }
  }
  return std::nullopt;
}

Equation convert_equation(const xml::Node& n) {
  Equation eq;
  const auto* id = n.attribute("id");
  if (id == nullptr || trim(*id).empty()) {
    throw Error(ErrorCode::InvalidDescriptor, "<equation> without id");
  }
  eq.id = trim(*id);
  const auto* vars = n.attribute("vars");
  std::vector<const xml::Node*> maths;
  for (const auto& c : n.children) {
    if (c.name != "math") {
      throw Error(ErrorCode::UnknownElement, "<" + c.name + "> inside <equation " + eq.id + ">");
    }
    maths.push_back(&c);
  }
  if ((vars != nullptr) == !maths.empty() || maths.size() > 1) {
    throw Error(ErrorCode::InvalidDescriptor,
                "equation " + eq.id + " needs exactly one of a <math> child or a vars attribute");
  }
  if (vars != nullptr) {
    eq.declared_order = split_list(*vars);
    if (eq.declared_order.empty()) {
      throw Error(ErrorCode::InvalidDescriptor, "equation " + eq.id + " has an empty vars list");
    }
    eq.primary = eq.declared_order.front();
    eq.variables = eq.declared_order;
  } else {
    const auto& math = *maths.front();
    if (math.children.size() != 1) {
      throw Error(ErrorCode::InvalidDescriptor, "<math> of " + eq.id + " must hold one element");
    }
    Expr root = convert(math.children.front());
    if (root.kind != Expr::Kind::apply || root.name != "eq") {
      throw Error(ErrorCode::InvalidDescriptor, "equation " + eq.id + " is not an apply(eq, ...)");
    }
    collect_identifiers(root, eq.variables);
    eq.primary = primary_of(root);
    const Expr& lhs = root.children[0];
    const Expr& rhs = root.children[1];
    if (lhs.kind == Expr::Kind::ci && rhs.kind == Expr::Kind::cn) eq.literal = parse_double(rhs.name);
    eq.expression = std::move(root);
  }
  std::sort(eq.variables.begin(), eq.variables.end());
  eq.variables.erase(std::unique(eq.variables.begin(), eq.variables.end()), eq.variables.end());
  return eq;
}

void write_expr(std::ostringstream& os, const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::ci: os << "<ci>" << xml::escape(e.name) << "</ci>"; return;
    case Expr::Kind::cn: os << "<cn>" << xml::escape(e.name) << "</cn>"; return;
    case Expr::Kind::bvar:
    case Expr::Kind::lowlimit: {
      const char* tag = e.kind == Expr::Kind::bvar ? "bvar" : "lowlimit";
      os << "<" << tag << ">";
      for (const auto& c : e.children) write_expr(os, c);
      os << "</" << tag << ">";
      return;
    }
    case Expr::Kind::apply:
      os << "<apply><" << e.name << "/>";
      for (const auto& c : e.children) write_expr(os, c);
      os << "</apply>";
      return;
  }
}

}  // namespace

bool is_reserved_symbol(std::string_view s) { return s == kPhi || s == kUpsilon || s == kTid; }

std::string_view to_string(Role r) {
  switch (r) {
    case Role::parameter: return "parameter";
    case Role::index: return "index";
    case Role::output: return "output";
  }
  return "parameter";
}

std::optional<Role> parse_role(std::string_view s) {
  if (s == "parameter") return Role::parameter;
  if (s == "index") return Role::index;
  if (s == "output") return Role::output;
  return std::nullopt;
}

void collect_identifiers(const Expr& e, std::vector<Symbol>& out) {
  if (e.kind == Expr::Kind::ci) {
    out.push_back(e.name);
    return;
  }
  for (const auto& c : e.children) collect_identifiers(c, out);
}

const VariableDecl* Structure::find_variable(std::string_view symbol) const {
  for (const auto& d : declarations) {
    if (d.symbol == symbol) return &d;
  }
  return nullptr;
}

const Equation* Structure::find_equation(std::string_view id) const {
  for (const auto& e : equations) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

Structure parse_descriptor(std::string_view bytes) {
  xml::Node root = xml::parse(bytes);
  if (root.name != "hypothesis") {
    throw Error(ErrorCode::InvalidDescriptor, "root element must be <hypothesis>, got <" +
                                                  root.name + ">");
  }
  Structure s;
  s.hypothesis_id = parse_id(root.attribute("id"), "hypothesis id");
  if (const auto* name = root.attribute("name")) s.name = *name;
  if (const auto* targets = root.attribute("targets")) {
    for (const auto& t : split_list(*targets)) s.targets.push_back(parse_id(&t, "target"));
  }

  std::set<std::string, std::less<>> equation_ids;
  for (const auto& child : root.children) {
    if (child.name == "variable") {
      VariableDecl d;
      const auto* symbol = child.attribute("symbol");
      if (symbol == nullptr || trim(*symbol).empty()) {
        throw Error(ErrorCode::InvalidDescriptor, "<variable> without symbol");
      }
      d.symbol = trim(*symbol);
      if (is_reserved_symbol(d.symbol)) {
        throw Error(ErrorCode::ReservedSymbol, "'" + d.symbol + "' is reserved");
      }
      const auto* role = child.attribute("role");
      auto parsed = role ? parse_role(*role) : std::nullopt;
      if (!parsed) {
        throw Error(ErrorCode::InvalidDescriptor,
                    "variable " + d.symbol + " needs role=parameter|index|output");
      }
      d.role = *parsed;
      if (const auto* desc = child.attribute("description")) d.description = *desc;
      if (s.find_variable(d.symbol) != nullptr) {
        throw Error(ErrorCode::DuplicateVariable, d.symbol);
      }
      s.declarations.push_back(std::move(d));
    } else if (child.name == "equation") {
      Equation eq = convert_equation(child);
      if (!equation_ids.insert(eq.id).second) throw Error(ErrorCode::DuplicateEquationId, eq.id);
      s.equations.push_back(std::move(eq));
    } else {
      throw Error(ErrorCode::UnknownElement, "<" + child.name + "> inside <hypothesis>");
    }
  }

  for (const auto& eq : s.equations) {
    for (const auto& v : eq.variables) {
      if (s.find_variable(v) == nullptr) {
        throw Error(ErrorCode::UndeclaredVariable, v + " (equation " + eq.id + ")");
      }
    }
  }
  return s;
}

std::string serialize_descriptor(const Structure& s) {
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<hypothesis id=\"" << s.hypothesis_id << "\" name=\"" << xml::escape(s.name) << "\"";
  if (!s.targets.empty()) {
    os << " targets=\"";
    for (std::size_t i = 0; i < s.targets.size(); ++i) os << (i ? " " : "") << s.targets[i];
    os << "\"";
  }
  os << ">\n";
  for (const auto& d : s.declarations) {
    os << "  <variable symbol=\"" << xml::escape(d.symbol) << "\" role=\"" << to_string(d.role)
       << "\"";
    if (!d.description.empty()) os << " description=\"" << xml::escape(d.description) << "\"";
    os << "/>\n";
  }
  for (const auto& e : s.equations) {
    os << "  <equation id=\"" << xml::escape(e.id) << "\"";
    if (!e.expression) {
      os << " vars=\"";
      for (std::size_t i = 0; i < e.declared_order.size(); ++i) {
        os << (i ? " " : "") << xml::escape(e.declared_order[i]);
      }
      os << "\"/>\n";
      continue;
    }
    os << "><math xmlns=\"http://www.w3.org/1998/Math/MathML\">";
    write_expr(os, *e.expression);
    os << "</math></equation>\n";
  }
  os << "</hypothesis>\n";
  return os.str();
}

PhenomenonDecl parse_phenomenon(std::string_view bytes) {
  auto first = bytes.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) throw Error(ErrorCode::InvalidArgument, "empty phenomenon file");
  PhenomenonDecl p;
  if (bytes[first] == '{') {
    auto j = nlohmann::json::parse(bytes, nullptr, false);
    if (j.is_discarded() || !j.contains("id") || !j["id"].is_number_integer() ||
        j["id"].get<std::int64_t>() <= 0) {
      throw Error(ErrorCode::InvalidArgument, "phenomenon JSON needs a positive integer id");
    }
    p.phenomenon_id = j["id"].get<std::int64_t>();
    if (j.contains("description") && j["description"].is_string()) {
      p.description = j["description"].get<std::string>();
    }
    return p;
  }
  xml::Node root = xml::parse(bytes);
  if (root.name != "phenomenon") {
    throw Error(ErrorCode::InvalidArgument, "root element must be <phenomenon>");
  }
  p.phenomenon_id = parse_id(root.attribute("id"), "phenomenon id");
  if (const auto* d = root.attribute("description")) {
    p.description = *d;
  } else {
    p.description = trim(root.text);
  }
  return p;
}

std::string_view to_string(Violation v) {
  switch (v) {
    case Violation::CountMismatch: return "CountMismatch";
    case Violation::NoPerfectMatching: return "NoPerfectMatching";
    case Violation::OrphanVariable: return "OrphanVariable";
    case Violation::EmptyStructure: return "EmptyStructure";
  }
  return "";
}

bool ValidityReport::has(Violation v) const {
  return std::find(reasons.begin(), reasons.end(), v) != reasons.end();
}

ValidityReport validate_structure(const Structure& s) {
  ValidityReport r;
  auto add = [&r](Violation v, std::string detail) {
    r.reasons.push_back(v);
    r.details.push_back(std::move(detail));
  };
  if (s.equations.empty()) add(Violation::EmptyStructure, "structure has no equations");
  const auto ne = s.equations.size();
  const auto nv = s.declarations.size();
  if (ne != nv) {
    add(Violation::CountMismatch,
        std::to_string(ne) + " equations vs " + std::to_string(nv) + " variables");
  } else if (ne > 0 && maximum_matching_size(s) != ne) {
    add(Violation::NoPerfectMatching, "no equation-to-variable bijection exists");
  }
  for (const auto& d : s.declarations) {
    bool used = std::any_of(s.equations.begin(), s.equations.end(), [&](const Equation& e) {
      return std::binary_search(e.variables.begin(), e.variables.end(), d.symbol);
    });
    if (!used) add(Violation::OrphanVariable, d.symbol + " occurs in no equation");
  }
  r.valid = r.reasons.empty();
  return r;
}

}  // namespace upsilon
