#pragma once

#include "crosscut/error.hpp"
#include "crosscut/lang/program.hpp"

#include <string>
#include <vector>

namespace crosscut::annotations {

struct Example {
  std::string example_id; // "<module>#<name>"
  std::string name;
  std::string module_path;
  const lang::AstNode* decl = nullptr;
  const lang::AstNode* setup = nullptr;
  const lang::AstNode* body = nullptr;
  const lang::AstNode* teardown = nullptr;
  bool active = true;

  // Label of the synthetic root frame: {module, "#<name>"}.
  lang::MethodId root_method() const { return {module_path, "#" + name}; }
};

struct Probe {
  std::string probe_id; // "<module>:<line>:<col>" of the "@{" token
  const lang::AstNode* anchor = nullptr;
  // Innermost function-decl around the anchor; the example root label for
  // probes written directly in an example.
  lang::MethodId enclosing_method;
  std::string source_excerpt;
};

std::string example_id(const std::string& module_path, const std::string& name);
std::string probe_id(const lang::SourceSpan& anchor_span);

struct Annotations {
  std::vector<Example> examples;
  std::vector<Probe> probes;
};

// Examples and probes in source order (modules in program order). Throws
// Error(AnnotationError) for a probe with no enclosing function or example.
Annotations extract_annotations(const lang::SourceProgram& program);

// Returns a copy with only the named example's flag changed. Throws
// Error(UnknownExample).
std::vector<Example> set_active(std::vector<Example> examples, const std::string& example_id, bool active);

const Example* find_example(const std::vector<Example>& examples, const std::string& example_id);
const Probe* find_probe(const std::vector<Probe>& probes, const std::string& probe_id);

// Text covered by `span` in `source`, or empty if the span is out of range.
std::string excerpt(const std::string& source, const lang::SourceSpan& span);

} // namespace crosscut::annotations
