#pragma once

#include "crosscut/error.hpp"
#include "crosscut/lang/program.hpp"
#include "crosscut/lang/value.hpp"

#include <cstdint>
#include <exception>
#include <optional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace crosscut::lang {

enum class RuntimeErrorKind {
  UndefinedName,
  TypeMismatch,
  Arity,
  DivisionByZero,
  IntegerOverflow,
  UncaughtThrow,
  StepLimit,
  IndexOutOfRange,
  StackOverflow,
};

std::string_view runtime_error_kind_name(RuntimeErrorKind kind);
std::optional<RuntimeErrorKind> parse_runtime_error_kind(std::string_view name);

class RuntimeError : public Error {
public:
  RuntimeError(RuntimeErrorKind kind, SourceSpan span, const std::string& message, Value thrown = Nil{})
      : Error(ErrorCode::RuntimeError, message), kind_(kind), span_(std::move(span)),
        thrown_(std::move(thrown)) {}

  RuntimeErrorKind kind() const noexcept { return kind_; }
  const SourceSpan& span() const noexcept { return span_; }
  // The thrown value for UncaughtThrow, nil otherwise.
  const Value& thrown() const noexcept { return thrown_; }

private:
  RuntimeErrorKind kind_;
  SourceSpan span_;
  Value thrown_;
};

// Thrown by an observer to stop evaluation immediately. Propagates through
// try/catch in the interpreted program.
class ExecutionAborted : public std::exception {
public:
  const char* what() const noexcept override { return "execution aborted"; }
};

// Hooks at the interpreter's call and probe evaluation points. Builtins are
// not reported. Every on_call_enter is matched by exactly one on_call_exit or
// on_call_unwind, in LIFO order.
class ExecutionObserver {
public:
  virtual ~ExecutionObserver() = default;
  virtual void on_call_enter(const Function& callee, const AstNode& call_site, std::span<const Value> args) = 0;
  virtual void on_call_exit(const Value& result) = 0;
  // `payload` is the thrown value, an {error, message} record for runtime
  // errors, or nil when evaluation was aborted.
  virtual void on_call_unwind(const Value& payload) = 0;
  virtual void on_probe(const AstNode& probe, const Value& value) = 0;
};

struct InterpreterOptions {
  std::uint64_t step_limit = 10'000'000;
  int max_call_depth = 2'000;
};

class Interpreter {
public:
  Interpreter(const SourceProgram& program, InterpreterOptions options = {}, ExecutionObserver* observer = nullptr);
  ~Interpreter();

  Interpreter(const Interpreter&) = delete;
  Interpreter& operator=(const Interpreter&) = delete;

  // Fresh scope whose parent is the module's top-level environment.
  std::shared_ptr<Environment> new_scope(const Module& module);

  // Executes the statements of `block` directly in `env`, so bindings stay
  // visible to later blocks run in the same scope. Returns the returned
  // value, else the value of the last top-level expression statement, else
  // nil. Throws RuntimeError.
  Value run_block(const AstNode& block, const std::shared_ptr<Environment>& env);

  // Observer for subsequent evaluation; null disables instrumentation.
  void set_observer(ExecutionObserver* observer) { observer_ = observer; }

  // Values that must stay intact after the interpreter is destroyed. All
  // other heap objects are cleared on destruction to break reference cycles.
  void retain(const Value& value) { retained_.push_back(value); }

  const std::vector<std::string>& output() const { return output_; }
  std::uint64_t steps() const { return steps_; }

private:
  struct ThrownValue {
    Value value;
    SourceSpan span;
  };
  enum class Flow { Normal, Return };

  Flow exec_statements(const AstNode& block, const std::shared_ptr<Environment>& env);
  Flow exec_block(const AstNode& block, const std::shared_ptr<Environment>& env);
  Flow exec(const AstNode& stmt, const std::shared_ptr<Environment>& env);
  Value eval(const AstNode& expr, const std::shared_ptr<Environment>& env);

  Value eval_binary(const AstNode& node, const std::shared_ptr<Environment>& env);
  Value eval_unary(const AstNode& node, const std::shared_ptr<Environment>& env);
  Value eval_call(const AstNode& node, const std::shared_ptr<Environment>& env);
  Value eval_index(const AstNode& node, const Value& object, const Value& index);
  Value eval_field(const AstNode& node, const Value& object);
  void assign(const AstNode& target, Value value, const std::shared_ptr<Environment>& env);

  Value call_function(const Function& fn, std::vector<Value>& args, const AstNode& site);
  Value call_builtin(const Function& fn, std::vector<Value>& args, const AstNode& site);

  Value error_record(const RuntimeError& error);
  ListRef new_list();
  RecordRef new_record();
  std::shared_ptr<Environment> module_environment(int index);
  void tick(const AstNode& node);
  [[noreturn]] void fail(RuntimeErrorKind kind, const AstNode& node, const std::string& message) const;

  void release_heap();

  const SourceProgram& program_;
  InterpreterOptions options_;
  ExecutionObserver* observer_;

  std::shared_ptr<Environment> builtins_;
  std::vector<std::shared_ptr<Environment>> module_envs_;
  std::vector<std::weak_ptr<List>> lists_;
  std::vector<std::weak_ptr<Record>> records_;
  std::vector<std::weak_ptr<Environment>> captured_envs_;
  std::vector<Value> retained_;

  std::vector<std::string> output_;
  Value returned_;
  std::uint64_t steps_ = 0;
  int depth_ = 0;
};

// Untraced reference semantics: runs `entry` (a block) in a fresh scope of
// its module. Throws RuntimeError.
Value evaluate(const SourceProgram& program, const AstNode& entry, InterpreterOptions options = {});

} // namespace crosscut::lang
