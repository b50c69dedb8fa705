#include "xml.hpp"

#include <expat.h>

#include <memory>

#include "upsilon/error.hpp"

namespace upsilon::xml {

namespace {

std::string local_name(const char* qualified) {
  std::string_view q(qualified);
  auto sep = q.rfind('\x1f');
  if (sep != std::string_view::npos) q.remove_prefix(sep + 1);
  auto colon = q.rfind(':');
  if (colon != std::string_view::npos) q.remove_prefix(colon + 1);
  return std::string(q);
}

struct Builder {
  Node root;
  std::vector<Node*> stack;
  bool has_root = false;
};

void on_start(void* user, const XML_Char* name, const XML_Char** attrs) {
  auto* b = static_cast<Builder*>(user);
  Node node;
  node.name = local_name(name);
  for (int i = 0; attrs[i] != nullptr; i += 2) {
    node.attributes.emplace_back(local_name(attrs[i]), attrs[i + 1]);
  }
  if (b->stack.empty()) {
    b->root = std::move(node);
    b->has_root = true;
    b->stack.push_back(&b->root);
  } else {
    Node* parent = b->stack.back();
    parent->children.push_back(std::move(node));
    b->stack.push_back(&parent->children.back());
  }
}

void on_end(void* user, const XML_Char*) {
  static_cast<Builder*>(user)->stack.pop_back();
}

void on_text(void* user, const XML_Char* s, int len) {
  auto* b = static_cast<Builder*>(user);
  if (!b->stack.empty()) b->stack.back()->text.append(s, static_cast<std::size_t>(len));
}

}  // namespace

const std::string* Node::attribute(std::string_view key) const {
  for (const auto& [k, v] : attributes) {
    if (k == key) return &v;
  }
  return nullptr;
}

Node parse(std::string_view bytes) {
  std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)> parser(
      XML_ParserCreateNS("UTF-8", '\x1f'), &XML_ParserFree);
  if (!parser) throw Error(ErrorCode::Io, "cannot allocate XML parser");

  // Only the innermost open element gains children, so pointers held on the
  // builder stack (ancestors of it) stay valid.
  Builder builder;
  XML_SetUserData(parser.get(), &builder);
  XML_SetElementHandler(parser.get(), on_start, on_end);
  XML_SetCharacterDataHandler(parser.get(), on_text);
  if (XML_Parse(parser.get(), bytes.data(), static_cast<int>(bytes.size()), XML_TRUE) ==
      XML_STATUS_ERROR) {
    throw Error(ErrorCode::MalformedXml,
                std::string(XML_ErrorString(XML_GetErrorCode(parser.get()))) + " at line " +
                    std::to_string(XML_GetCurrentLineNumber(parser.get())));
  }
  if (!builder.has_root) throw Error(ErrorCode::MalformedXml, "no root element");
  return std::move(builder.root);
}

std::string escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace upsilon::xml
