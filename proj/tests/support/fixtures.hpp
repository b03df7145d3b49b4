#pragma once

#include "crosscut/analysis/call_tree.hpp"
#include "crosscut/annotations/annotations.hpp"
#include "crosscut/lang/program.hpp"
#include "crosscut/trace/tracer.hpp"

#include <json.hpp>

#include <memory>
#include <string>
#include <vector>

namespace crosscut::testing {

// Every .cc file of tests/fixtures/<name>, paths relative to that directory.
std::vector<lang::ModuleSource> fixture_sources(const std::string& name);

// A parsed program with its annotations, traced on demand.
struct Loaded {
  std::shared_ptr<const lang::SourceProgram> program;
  annotations::Annotations annotations;

  const annotations::Example& example(std::size_t i = 0) const { return annotations.examples.at(i); }
  trace::Trace run(std::size_t i = 0) const;
  trace::Trace run(const trace::TraceScope& scope, std::size_t i = 0) const;
};

// Result of an example as JSON: {"value": v} on success, otherwise
// {"error": kind, "thrown": v?}. Used to compare traced and untraced runs.
nlohmann::json untraced_outcome(const lang::SourceProgram& program, const annotations::Example& example);
nlohmann::json traced_outcome(const trace::Trace& trace);

// Well-bracketedness plus exception exits for every frame still open when a
// failed run unwound. Returns an empty string or a description of the first
// violation.
std::string bracketing_violation(const trace::Trace& trace);

Loaded load(std::vector<lang::ModuleSource> sources);
Loaded load_fixture(const std::string& name);
// Single-module program "m.cc".
Loaded load_text(const std::string& text);

} // namespace crosscut::testing
