#include "crosscut/error.hpp"
#include "crosscut/lang/interpreter.hpp"
#include "crosscut/lang/parser.hpp"
#include "crosscut/lang/program.hpp"

#include <doctest.h>

using namespace crosscut;
using namespace crosscut::lang;

namespace {

Value eval_text(const std::string& text) {
  auto program = SourceProgram::parse({{"m.cc", "#example \"e\" { " + text + " }"}});
  const auto& decl = *program->modules().front().root->children.back();
  return evaluate(*program, *decl.example_body());
}

std::string show(const std::string& text) { return display(eval_text(text)); }

RuntimeErrorKind failure_of(const std::string& text) {
  try {
    eval_text(text);
  } catch (const RuntimeError& e) {
    return e.kind();
  }
  FAIL("expected a runtime error");
  return RuntimeErrorKind::TypeMismatch;
}

} // namespace

TEST_CASE("arithmetic and precedence") {
  CHECK(show("1 + 2 * 3;") == "7");
  CHECK(show("(1 + 2) * 3;") == "9");
  CHECK(show("7 % 3;") == "1");
  CHECK(show("7 / 2;") == "3");
  CHECK(show("1 + 0.5;") == "1.5");
  CHECK(show("\"a\" + 1;") == "a1");
  CHECK(show("!nil;") == "true");
  CHECK(show("0 && 1;") == "true");
}

TEST_CASE("control flow, closures and containers") {
  CHECK(show("let s = 0; let i = 0; while i < 5 { s = s + i; i = i + 1; } s;") == "10");
  CHECK(show("let mk = fn(a) { return fn(b) { return a + b; }; }; mk(2)(3);") == "5");
  CHECK(show("let l = [1, 2]; push(l, 3); len(l);") == "3");
  CHECK(show("let r = {a: 1}; r.a = 5; r[\"a\"];") == "5");
  CHECK(show("let v = 0; try { throw 4; } catch (e) { v = e; } v;") == "4");
}

TEST_CASE("runtime errors") {
  CHECK(failure_of("1 / 0;") == RuntimeErrorKind::DivisionByZero);
  CHECK(failure_of("nil + 1;") == RuntimeErrorKind::TypeMismatch);
  CHECK(failure_of("missing;") == RuntimeErrorKind::UndefinedName);
  CHECK(failure_of("throw 1;") == RuntimeErrorKind::UncaughtThrow);
  CHECK(failure_of("9223372036854775807 + 1;") == RuntimeErrorKind::IntegerOverflow);
  CHECK(failure_of("let f = fn(a) { return a; }; f();") == RuntimeErrorKind::Arity);
  CHECK(failure_of("let f = fn() { return f(); }; f();") != RuntimeErrorKind::TypeMismatch);
}

TEST_CASE("parse errors carry a span") {
  try {
    SourceProgram::parse({{"m.cc", "fn f( { }"}});
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    CHECK(e.span().module_path == "m.cc");
    CHECK(e.span().start_line == 1);
  }
  CHECK_THROWS_AS(SourceProgram::parse({{"m.cc", "fn f(){} fn f(){}"}}), ParseError);
}

TEST_CASE("probes parse as primaries") {
  auto program = SourceProgram::parse({{"m.cc", "fn fact(n){ if n <= 1 { return 1; } return n * @{ fact(n - 1) }; }"}});
  int probes = 0;
  walk(*program->modules().front().root, [&](const AstNode& n) {
    probes += n.kind == NodeKind::ProbeWrapper;
    return true;
  });
  CHECK(probes == 1);
}
