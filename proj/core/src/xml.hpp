#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace upsilon::xml {

// Minimal DOM: element names are namespace-local, text is the concatenated
// character data directly under the element.
struct Node {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<Node> children;
  std::string text;

  const std::string* attribute(std::string_view key) const;
};

// Throws Error{MalformedXml} on any well-formedness error.
Node parse(std::string_view bytes);

std::string escape(std::string_view s);

}  // namespace upsilon::xml
