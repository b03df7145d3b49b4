#include "canonical_tree.hpp"
#include "fixtures.hpp"
#include "program_gen.hpp"

#include "crosscut/analysis/call_tree.hpp"
#include "crosscut/error.hpp"
#include "crosscut/trace/jsonl.hpp"
#include "crosscut/trace/tracer.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace crosscut;
using namespace crosscut::trace;
using namespace crosscut::testing;
using nlohmann::json;

namespace {

std::size_t count_calls(const Trace& t) {
  std::size_t n = 0;
  for (const auto& e : t.events) n += e.probe() == nullptr;
  return n;
}

std::vector<json> hit_values(const Trace& t) {
  std::vector<json> out;
  for (const auto& e : t.events) {
    if (e.probe()) out.push_back(to_json(e.probe()->value));
  }
  return out;
}

// Runs `body` in an example, probing `probe_expr` first, then returns the
// recorded snapshot of the first probe hit.
Snapshot first_hit(const std::string& text) {
  auto loaded = load_text(text);
  const auto t = loaded.run();
  for (const auto& e : t.events) {
    if (e.probe()) return e.probe()->value;
  }
  FAIL("no probe hit");
  return {};
}

} // namespace

TEST_CASE("annotations") {
  auto f2 = load_fixture("f2");
  REQUIRE(f2.annotations.examples.size() == 1);
  CHECK(f2.annotations.examples[0].example_id == "m.cc#ex1");
  REQUIRE(f2.annotations.probes.size() == 1);
  CHECK(f2.annotations.probes[0].probe_id == "m.cc:1:17");
  CHECK(f2.annotations.probes[0].source_excerpt == "x * 2");
  CHECK(f2.annotations.probes[0].enclosing_method == lang::MethodId{"m.cc", "g"});

  auto none = load_text("fn f(){ return 1; }");
  CHECK(none.annotations.examples.empty());
  CHECK(none.annotations.probes.empty());

  auto two = load_text("fn f(a){ return @{a} + @{a}; }");
  REQUIRE(two.annotations.probes.size() == 2);
  CHECK(two.annotations.probes[0].probe_id == "m.cc:1:17");
  CHECK(two.annotations.probes[1].probe_id == "m.cc:1:24");

  // a probe in an example body is attributed to the example root
  auto in_body = load_text("#example \"e\" { @{ 1 }; }");
  CHECK(in_body.annotations.probes[0].enclosing_method.function_name == "#e");

  // re-parsing unchanged text keeps ids; a line above shifts them
  CHECK(load_fixture("f2").annotations.probes[0].probe_id == "m.cc:1:17");
  auto shifted = load_text("\n" + fixture_sources("f2")[0].text);
  CHECK(shifted.annotations.probes[0].probe_id == "m.cc:2:17");

  auto examples = annotations::set_active(f2.annotations.examples, "m.cc#ex1", false);
  CHECK_FALSE(examples[0].active);
  examples = annotations::set_active(examples, "m.cc#ex1", true);
  examples = annotations::set_active(examples, "m.cc#ex1", true);
  CHECK(examples[0].active);
  CHECK_THROWS_AS(annotations::set_active(examples, "m.cc#nope", true), Error);
}

TEST_CASE("tracer: F2 event stream") {
  auto f2 = load_fixture("f2");
  const auto t = f2.run();
  CHECK(t.status == TraceStatus::Completed);
  CHECK(count_calls(t) == 12);
  CHECK(hit_values(t) == std::vector<json>{6, 8, 20});
  CHECK(bracketing_violation(t).empty());
  const auto* root = t.events.front().enter();
  REQUIRE(root != nullptr);
  CHECK(root->frame == kRootFrame);
  CHECK(root->parent == kNoFrame);
  CHECK(root->method->function_name == "#ex1");
}

TEST_CASE("tracer: empty body and failing body") {
  auto empty = load_text("#example \"e\" { }");
  const auto t = empty.run();
  REQUIRE(t.events.size() == 2);
  CHECK(t.events[0].enter() != nullptr);
  CHECK(t.events[1].exit() != nullptr);

  auto thrower = load_text("fn f(a){ throw a + 1; } #example \"e\" { f(1); }");
  const auto ft = thrower.run();
  CHECK(ft.status == TraceStatus::Failed);
  REQUIRE(ft.failure.has_value());
  CHECK(ft.failure->phase == "body");
  CHECK(ft.failure->kind == "uncaught-throw");
  REQUIRE(ft.events.size() == 4);
  CHECK(ft.events[2].exit()->frame == 1);
  CHECK(ft.events[2].exit()->kind == ExitKind::Exception);
  CHECK(to_json(ft.events[2].exit()->result) == 2);
  CHECK(ft.events[3].exit()->frame == 0);
  CHECK(ft.events[3].exit()->kind == ExitKind::Exception);
  CHECK(bracketing_violation(ft).empty());

  auto runtime = load_text("fn f(a){ return a / 0; } #example \"e\" { f(1); }");
  const auto rt = runtime.run();
  CHECK(rt.failure->kind == "division-by-zero");
  CHECK(to_json(rt.events[2].exit()->result)["error"] == "division-by-zero");
}

TEST_CASE("tracer: setup and teardown failures") {
  auto setup = load_text("#example \"e\" setup { let x = 1 / 0; } { 1; }");
  const auto st = setup.run();
  CHECK(st.status == TraceStatus::Failed);
  CHECK(st.events.empty());
  CHECK(st.failure->phase == "setup");
  CHECK(analysis::build_call_tree(st).size() == 1);

  auto teardown = load_text("fn f(){ return 1; } #example \"e\" { f(); } teardown { missing; }");
  const auto tt = teardown.run();
  CHECK(tt.status == TraceStatus::Failed);
  CHECK(tt.failure->phase == "teardown");
  CHECK(tt.events.size() == 4);
  CHECK(bracketing_violation(tt).empty());

  auto shared = load_text("#example \"e\" setup { let xs = [1]; } { push(xs, 2); len(xs); } teardown { print(len(xs)); }");
  const auto sh = shared.run();
  CHECK(sh.status == TraceStatus::Completed);
  CHECK(to_json(*root_result(sh)) == 2);
  CHECK(sh.output == std::vector<std::string>{"2"});
}

TEST_CASE("tracer: event cap overflow stays bracketed") {
  auto loop = load_text("fn f(n){ return @{ n }; } #example \"e\" { let i = 0; while i < 100 { f(i); i = i + 1; } }");
  for (std::size_t cap : {2, 3, 4, 5, 10, 57, 100}) {
    CAPTURE(cap);
    TraceOptions options;
    options.event_cap = cap;
    const auto t = trace_run(*loop.program, loop.example(), full_scope(*loop.program), options);
    CHECK(t.status == TraceStatus::Overflowed);
    CHECK(t.events.size() <= cap);
    CHECK(bracketing_violation(t).empty());
    CHECK_NOTHROW(analysis::build_call_tree(t));
  }
}

TEST_CASE("tracer: scope suppression re-parents probes") {
  const std::vector<lang::ModuleSource> sources{
      {"m.cc", "import \"lib.cc\"; fn f(x){ return lib.twice(x); } #example \"e\" { f(2); }"},
      {"lib.cc", "fn twice(x){ return helper(@{ x * 2 }); } fn helper(y){ return y; }"}};
  auto loaded = load(sources);
  const auto full = loaded.run();
  const auto full_tree = analysis::build_call_tree(full);
  CHECK(full_tree.size() == 1 + 3 + 1);

  TraceScope narrow;
  narrow.included_modules = {"m.cc"};
  const auto t = loaded.run(narrow);
  const auto tree = analysis::build_call_tree(t);
  REQUIRE(tree.size() == 1 + 1 + 1);
  const auto& f = tree.node(tree.root().children.at(0));
  CHECK(f.method->function_name == "f");
  REQUIRE(f.children.size() == 1);
  CHECK(tree.node(f.children[0]).is_hit());
  CHECK(to_json(tree.node(f.children[0]).value) == 4);
  for (const auto& e : t.events) {
    if (e.enter() && e.enter()->frame != 0) CHECK(e.enter()->method->module_path == "m.cc");
  }
  // widening restores the original tree
  CHECK(canonical(analysis::build_call_tree(loaded.run())) == canonical(full_tree));
  // the example's own module is always traced
  TraceScope empty_scope;
  CHECK(loaded.run(empty_scope).scope.includes("m.cc"));
}

TEST_CASE("tracer: lambdas are traced with their definition site") {
  auto loaded = load_text("#example \"e\" { let sq = fn(v) { return v * v; }; sq(3); }");
  const auto t = loaded.run();
  REQUIRE(t.events.size() == 4);
  CHECK(t.events[1].enter()->method->function_name == "<lambda>@1:25");
  CHECK(to_json(*root_result(t)) == 9);
}

TEST_CASE("tracer properties on random programs") {
  std::mt19937_64 rng(4242);
  for (int i = 0; i < 150; ++i) {
    auto generated = generate_program(rng, GenOptions{});
    if (i % 2 == 1) {
      GenOptions no_try;
      no_try.allow_try = false;
      generated = mutate_to_fail(generate_program(rng, no_try), rng);
    }
    auto loaded = load(generated.sources());
    TraceScope scope = full_scope(*loaded.program);
    if (i % 3 == 0) scope.included_modules = {"m.cc"};
    const auto t = loaded.run(scope);
    CAPTURE(generated.sources().front().text);
    CHECK(bracketing_violation(t) == "");
    if (i % 2 == 1) CHECK(t.status == TraceStatus::Failed);
    for (const auto& e : t.events) {
      if (e.enter()) CHECK(t.scope.includes(e.enter()->method->module_path));
    }
    CHECK(traced_outcome(t) == untraced_outcome(*loaded.program, loaded.example()));
  }
}

TEST_CASE("measure_overhead") {
  auto fast = load_text("#example \"e\" { 1; }");
  try {
    measure_overhead(*fast.program, fast.example(), full_scope(*fast.program));
    FAIL("expected Unmeasurable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Unmeasurable);
  }
  auto slow = load_text(
      "fn step(i){ return i + 1; } #example \"e\" { let i = 0; let s = 0; while i < 20000 { s = s + @{ i % 7 }; i = step(i); } s; }");
  const auto report = measure_overhead(*slow.program, slow.example(), full_scope(*slow.program));
  CHECK(report.base_ms > 0.0);
  CHECK(report.factor > 0.0);
}

TEST_CASE("snapshots") {
  CHECK(to_json(first_hit("#example \"e\" { @{ 6 }; }")) == 6);
  CHECK(to_json(first_hit("#example \"e\" { @{ 1.5 }; }")) == 1.5);
  CHECK(to_json(first_hit("#example \"e\" { @{ nil }; }")).is_null());
  CHECK(to_json(first_hit("#example \"e\" { @{ {b: 1, a: \"x\"} }; }")).dump() == R"({"a":"x","b":1})");
  CHECK(to_json(first_hit("fn f(){ return 1; } #example \"e\" { @{ f }; }")) == json{{"$fn", "m.cc.f"}});

  const auto cyc = first_hit("#example \"e\" { let l = [1]; push(l, l); @{ l }; }");
  REQUIRE(cyc.as_list() != nullptr);
  CHECK(cyc.as_list()->items[1].is_cycle());

  const auto deep = first_hit(
      "#example \"e\" { let r = {v: 0}; let i = 0; while i < 9 { r = {v: r}; i = i + 1; } @{ r }; }");
  CHECK(deep.depth() == 8);
  const Snapshot* cur = &deep;
  for (int level = 1; level < 8; ++level) cur = &cur->as_record()->fields[0].second;
  CHECK(cur->is_truncated());

  const auto big = first_hit("#example \"e\" { let l = []; let i = 0; while i < 150 { push(l, i); i = i + 1; } @{ l }; }");
  CHECK(big.as_list()->items.size() == 100);
  CHECK(big.as_list()->omitted == 50);
  CHECK(snapshot_from_json(to_json(big)) == big);
  CHECK(snapshot_from_json(to_json(deep)) == deep);
  CHECK(snapshot_from_json(to_json(cyc)) == cyc);
}

TEST_CASE("snapshots are unaffected by later mutation") {
  const char* programs[] = {
      "#example \"e\" { let l = [1, 2]; @{ l }; push(l, 3); }",
      "#example \"e\" { let l = [1, 2]; @{ l }; l[0] = 9; }",
      "#example \"e\" { let r = {a: 1}; @{ r }; r.a = 2; }",
      "#example \"e\" { let r = {a: 1}; @{ r }; r[\"b\"] = 2; }",
      "#example \"e\" { let l = [[1]]; @{ l }; push(l[0], 2); }",
      "#example \"e\" { let r = {a: [1]}; @{ r }; push(r.a, 2); }",
      "fn f(l){ push(l, 0); return l; } #example \"e\" { let l = [1]; @{ l }; f(l); }",
      "#example \"e\" { let l = [1]; let r = {x: l}; @{ r }; l[0] = 5; }",
      "#example \"e\" { let l = [1]; let i = 0; while i < 3 { @{ l }; push(l, i); i = i + 1; } }",
      "#example \"e\" { let r = {a: {b: 1}}; @{ r }; r.a.b = 7; r.a = nil; }",
  };
  for (const char* text : programs) {
    CAPTURE(text);
    auto loaded = load_text(text);
    const auto t = loaded.run();
    REQUIRE(t.status == TraceStatus::Completed);
    // re-run with the program cut at the probe: its value at hit time
    const json recorded = to_json(t.events[1].probe()->value);
    const json first = to_json(first_hit(text));
    CHECK(recorded == first);
    CHECK(recorded.dump().find('9') == std::string::npos);
    CHECK(recorded.dump().find('5') == std::string::npos);
    CHECK(recorded.dump().find('7') == std::string::npos);
  }
}

TEST_CASE("jsonl round trip and validation") {
  auto f2 = load_fixture("f2");
  const auto t = f2.run();
  const std::string text = to_jsonl(t);
  const auto back = from_jsonl(text);
  CHECK(to_jsonl(back) == text);
  CHECK(canonical(analysis::build_call_tree(back)) == canonical(analysis::build_call_tree(t)));

  const auto probe_line = text.substr(text.find("\"type\":\"probe\"") - 10, 200);
  CHECK(probe_line.find("\"probe\":\"m.cc:1:17\"") != std::string::npos);

  auto expect_malformed = [](const std::string& s) {
    try {
      from_jsonl(s);
      FAIL("expected malformed-trace");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MalformedTrace);
    }
  };
  std::string truncated = text.substr(0, text.size() - 1);
  truncated = truncated.substr(0, truncated.rfind('\n') + 1);
  expect_malformed(truncated);
  expect_malformed("");
  expect_malformed("not json\n");

  auto empty = load_text("#example \"e\" { }");
  const std::string empty_text = to_jsonl(empty.run());
  CHECK(std::count(empty_text.begin(), empty_text.end(), '\n') == 3);

  const auto dir = std::filesystem::temp_directory_path() / "crosscut-jsonl-test";
  std::filesystem::create_directories(dir);
  export_trace(t, dir / "f2.jsonl");
  CHECK(to_jsonl(import_trace(dir / "f2.jsonl")) == text);
  try {
    import_trace(dir / "missing.jsonl");
    FAIL("expected io error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Io);
  }
  std::filesystem::remove_all(dir);

  // failed and overflowed traces survive the round trip as well
  auto thrower = load_text("fn f(a){ throw {why: a}; } #example \"e\" { f(1); }");
  const auto ft = thrower.run();
  CHECK(to_jsonl(from_jsonl(to_jsonl(ft))) == to_jsonl(ft));
}
