#pragma once

#include "crosscut/error.hpp"
#include "crosscut/lang/ast.hpp"

#include <memory>
#include <string>
#include <string_view>

namespace crosscut::lang {

class ParseError : public Error {
public:
  ParseError(SourceSpan span, const std::string& message)
      : Error(ErrorCode::ParseError, to_string(span) + ": " + message), span_(std::move(span)),
        detail_(message) {}

  const SourceSpan& span() const noexcept { return span_; }
  const std::string& detail() const noexcept { return detail_; }

private:
  SourceSpan span_;
  std::string detail_;
};

// Parses one module. Node ids are assigned densely in pre-order starting at
// `first_id`, so a multi-module program can keep ids unique by chaining bases.
std::unique_ptr<AstNode> parse(std::string_view source_text, const std::string& module_path,
                               NodeId first_id = 0);

} // namespace crosscut::lang
