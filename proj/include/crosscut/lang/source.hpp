#pragma once

#include <compare>
#include <memory>
#include <string>

namespace crosscut::lang {

// Lines and columns are 1-based; the end position is one past the last
// character of the last token.
struct SourceSpan {
  std::string module_path;
  int start_line = 1;
  int start_col = 1;
  int end_line = 1;
  int end_col = 1;

  bool operator==(const SourceSpan&) const = default;
};

std::string to_string(const SourceSpan& span);

// (module, function) identity of a procedure. Example roots use the name
// "#<example>" and lambdas use "<lambda>@<line>:<col>".
struct MethodId {
  std::string module_path;
  std::string function_name;

  auto operator<=>(const MethodId&) const = default;
  bool operator==(const MethodId&) const = default;

  // "module.name", the form matched by tree filters.
  std::string qualified() const { return module_path + "." + function_name; }
  bool is_lambda() const { return function_name.rfind("<lambda>", 0) == 0; }
};

using MethodRef = std::shared_ptr<const MethodId>;

} // namespace crosscut::lang
