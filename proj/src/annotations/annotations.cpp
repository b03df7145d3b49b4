#include "crosscut/annotations/annotations.hpp"

#include <algorithm>

namespace crosscut::annotations {

std::string example_id(const std::string& module_path, const std::string& name) {
  return module_path + "#" + name;
}

std::string probe_id(const lang::SourceSpan& anchor_span) {
  return anchor_span.module_path + ":" + std::to_string(anchor_span.start_line) + ":" +
         std::to_string(anchor_span.start_col);
}

std::string excerpt(const std::string& source, const lang::SourceSpan& span) {
  std::size_t line = 1;
  std::size_t offset = 0;
  auto offset_of = [&](int target_line, int target_col) -> std::size_t {
    while (line < static_cast<std::size_t>(target_line)) {
      const auto nl = source.find('\n', offset);
      if (nl == std::string::npos) {
        return std::string::npos;
      }
      offset = nl + 1;
      ++line;
    }
    return offset + static_cast<std::size_t>(target_col - 1);
  };
  const std::size_t begin = offset_of(span.start_line, span.start_col);
  const std::size_t end = offset_of(span.end_line, span.end_col);
  if (begin == std::string::npos || end == std::string::npos || end < begin || end > source.size()) {
    return {};
  }
  return source.substr(begin, end - begin);
}

namespace {

struct Context {
  const lang::Module& module;
  Annotations& out;
};

void scan(const lang::AstNode& node, const Context& ctx, const lang::MethodId* enclosing) {
  using lang::NodeKind;
  if (node.kind == NodeKind::ProbeWrapper) {
    if (enclosing == nullptr) {
      throw Error(ErrorCode::AnnotationError,
                  lang::to_string(node.span) + ": probe is not inside a function or example");
    }
    Probe probe;
    probe.probe_id = probe_id(node.span);
    probe.anchor = &node;
    probe.enclosing_method = *enclosing;
    probe.source_excerpt = excerpt(ctx.module.text, node.child(0).span);
    ctx.out.probes.push_back(std::move(probe));
  }
  if (node.kind == NodeKind::FunctionDecl) {
    const lang::MethodId method{ctx.module.path, node.name};
    for (const auto& child : node.children) {
      scan(*child, ctx, &method);
    }
    return;
  }
  if (node.kind == NodeKind::ExampleDecl) {
    Example example;
    example.name = node.name;
    example.module_path = ctx.module.path;
    example.example_id = example_id(ctx.module.path, node.name);
    example.decl = &node;
    example.setup = node.example_setup();
    example.body = node.example_body();
    example.teardown = node.example_teardown();
    const lang::MethodId root = example.root_method();
    ctx.out.examples.push_back(std::move(example));
    for (const auto& child : node.children) {
      scan(*child, ctx, &root);
    }
    return;
  }
  for (const auto& child : node.children) {
    scan(*child, ctx, enclosing);
  }
}

} // namespace

Annotations extract_annotations(const lang::SourceProgram& program) {
  Annotations out;
  for (const auto& module : program.modules()) {
    scan(*module.root, Context{module, out}, nullptr);
  }
  return out;
}

std::vector<Example> set_active(std::vector<Example> examples, const std::string& example_id, bool active) {
  auto it = std::find_if(examples.begin(), examples.end(),
                         [&](const Example& e) { return e.example_id == example_id; });
  if (it == examples.end()) {
    throw Error(ErrorCode::UnknownExample, "unknown example '" + example_id + "'");
  }
  it->active = active;
  return examples;
}

const Example* find_example(const std::vector<Example>& examples, const std::string& example_id) {
  auto it = std::find_if(examples.begin(), examples.end(),
                         [&](const Example& e) { return e.example_id == example_id; });
  return it == examples.end() ? nullptr : &*it;
}

const Probe* find_probe(const std::vector<Probe>& probes, const std::string& probe_id) {
  auto it = std::find_if(probes.begin(), probes.end(), [&](const Probe& p) { return p.probe_id == probe_id; });
  return it == probes.end() ? nullptr : &*it;
}

} // namespace crosscut::annotations
