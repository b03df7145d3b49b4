#include "crosscut/lang/interpreter.hpp"

#include <cmath>
#include <limits>
#include <unordered_set>

namespace crosscut::lang {

std::string_view runtime_error_kind_name(RuntimeErrorKind kind) {
  switch (kind) {
  case RuntimeErrorKind::UndefinedName: return "undefined-name";
  case RuntimeErrorKind::TypeMismatch: return "type-mismatch";
  case RuntimeErrorKind::Arity: return "arity";
  case RuntimeErrorKind::DivisionByZero: return "division-by-zero";
  case RuntimeErrorKind::IntegerOverflow: return "integer-overflow";
  case RuntimeErrorKind::UncaughtThrow: return "uncaught-throw";
  case RuntimeErrorKind::StepLimit: return "step-limit";
  case RuntimeErrorKind::IndexOutOfRange: return "index-out-of-range";
  case RuntimeErrorKind::StackOverflow: return "stack-overflow";
  }
  return "?";
}

std::optional<RuntimeErrorKind> parse_runtime_error_kind(std::string_view name) {
  for (auto kind : {RuntimeErrorKind::UndefinedName, RuntimeErrorKind::TypeMismatch, RuntimeErrorKind::Arity,
                    RuntimeErrorKind::DivisionByZero, RuntimeErrorKind::IntegerOverflow,
                    RuntimeErrorKind::UncaughtThrow, RuntimeErrorKind::StepLimit,
                    RuntimeErrorKind::IndexOutOfRange, RuntimeErrorKind::StackOverflow}) {
    if (runtime_error_kind_name(kind) == name) {
      return kind;
    }
  }
  return std::nullopt;
}

namespace {

bool is_statement(NodeKind kind) {
  switch (kind) {
  case NodeKind::Let:
  case NodeKind::Assign:
  case NodeKind::If:
  case NodeKind::While:
  case NodeKind::Return:
  case NodeKind::Throw:
  case NodeKind::TryCatch: return true;
  default: return false;
  }
}

bool declares_locals(const AstNode& block) {
  for (const auto& stmt : block.children) {
    if (stmt->kind == NodeKind::Let) {
      return true;
    }
  }
  return false;
}

Value from_literal(const LiteralValue& literal) {
  return std::visit(
      [](const auto& v) -> Value {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, NilLiteral>) {
          return Nil{};
        } else {
          return v;
        }
      },
      literal);
}

bool is_number(const Value& v) {
  return std::holds_alternative<std::int64_t>(v) || std::holds_alternative<double>(v);
}

double as_double(const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) {
    return static_cast<double>(*i);
  }
  return std::get<double>(v);
}

bool values_equal(const Value& a, const Value& b) {
  if (is_number(a) && is_number(b)) {
    if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b)) {
      return std::get<std::int64_t>(a) == std::get<std::int64_t>(b);
    }
    return as_double(a) == as_double(b);
  }
  if (a.index() != b.index()) {
    return false;
  }
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b);
        if constexpr (std::is_same_v<T, Nil>) {
          return true;
        } else {
          return x == y;
        }
      },
      a);
}

bool is_identifier(const std::string& key) {
  if (key.empty() || std::isdigit(static_cast<unsigned char>(key.front()))) {
    return false;
  }
  for (char c : key) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') {
      return false;
    }
  }
  return true;
}

} // namespace

Interpreter::Interpreter(const SourceProgram& program, InterpreterOptions options, ExecutionObserver* observer)
    : program_(program), options_(options), observer_(observer) {
  builtins_ = std::make_shared<Environment>();
  builtins_->top_level = true;
  auto add_builtin = [&](const char* name, Builtin kind) {
    auto fn = std::make_shared<Function>();
    fn->builtin = kind;
    fn->method = std::make_shared<const MethodId>(MethodId{"<builtin>", name});
    builtins_->define(intern(name), FunctionRef(std::move(fn)));
  };
  add_builtin("len", Builtin::Len);
  add_builtin("push", Builtin::Push);
  add_builtin("print", Builtin::Print);
  module_envs_.resize(program_.modules().size());
}

Interpreter::~Interpreter() { release_heap(); }

std::shared_ptr<Environment> Interpreter::module_environment(int index) {
  auto& slot = module_envs_.at(static_cast<std::size_t>(index));
  if (slot) {
    return slot;
  }
  const Module& module = program_.modules()[static_cast<std::size_t>(index)];
  slot = std::make_shared<Environment>();
  slot->parent = builtins_;
  slot->top_level = true;
  for (const AstNode* decl : module.functions) {
    auto fn = std::make_shared<Function>();
    fn->decl = decl;
    fn->captured = slot;
    fn->method = program_.method_of(*decl);
    fn->module_index = index;
    slot->define(decl->symbol, FunctionRef(std::move(fn)));
  }
  for (const auto& child : module.root->children) {
    if (child->kind != NodeKind::Import) {
      continue;
    }
    const Module* target = program_.find_module(child->text);
    if (target == nullptr) {
      continue; // unresolved imports surface as undefined-name on use
    }
    auto target_env = module_environment(target->index);
    auto ns = new_record();
    for (const AstNode* decl : target->functions) {
      if (Value* fn = target_env->find_local(decl->symbol)) {
        ns->fields.emplace(decl->name, *fn);
      }
    }
    slot->define(child->symbol, std::move(ns));
  }
  return slot;
}

std::shared_ptr<Environment> Interpreter::new_scope(const Module& module) {
  auto scope = std::make_shared<Environment>();
  scope->parent = module_environment(module.index);
  return scope;
}

Value Interpreter::run_block(const AstNode& block, const std::shared_ptr<Environment>& env) {
  Value last = Nil{};
  try {
    for (const auto& stmt : block.children) {
      if (!is_statement(stmt->kind)) {
        last = eval(*stmt, env);
        continue;
      }
      if (exec(*stmt, env) == Flow::Return) {
        return std::exchange(returned_, Nil{});
      }
    }
  } catch (const ThrownValue& thrown) {
    retain(thrown.value);
    throw RuntimeError(RuntimeErrorKind::UncaughtThrow, thrown.span, "uncaught throw: " + display(thrown.value),
                       thrown.value);
  }
  return last;
}

void Interpreter::tick(const AstNode& node) {
  if (++steps_ > options_.step_limit) {
    fail(RuntimeErrorKind::StepLimit, node,
         "step limit of " + std::to_string(options_.step_limit) + " evaluation steps exceeded");
  }
}

void Interpreter::fail(RuntimeErrorKind kind, const AstNode& node, const std::string& message) const {
  throw RuntimeError(kind, node.span, message);
}

ListRef Interpreter::new_list() {
  auto list = std::make_shared<List>();
  lists_.push_back(list);
  return list;
}

RecordRef Interpreter::new_record() {
  auto record = std::make_shared<Record>();
  records_.push_back(record);
  return record;
}

Value Interpreter::error_record(const RuntimeError& error) {
  auto record = new_record();
  record->fields.emplace("error", std::string(runtime_error_kind_name(error.kind())));
  record->fields.emplace("message", std::string(error.what()));
  return record;
}

// --- statements ------------------------------------------------------------

Interpreter::Flow Interpreter::exec_statements(const AstNode& block, const std::shared_ptr<Environment>& env) {
  for (const auto& stmt : block.children) {
    if (exec(*stmt, env) == Flow::Return) {
      return Flow::Return;
    }
  }
  return Flow::Normal;
}

Interpreter::Flow Interpreter::exec_block(const AstNode& block, const std::shared_ptr<Environment>& env) {
  if (!declares_locals(block)) {
    return exec_statements(block, env);
  }
  auto scope = std::make_shared<Environment>();
  scope->parent = env;
  return exec_statements(block, scope);
}

Interpreter::Flow Interpreter::exec(const AstNode& stmt, const std::shared_ptr<Environment>& env) {
  tick(stmt);
  switch (stmt.kind) {
  case NodeKind::Let: env->define(stmt.symbol, eval(stmt.child(0), env)); return Flow::Normal;
  case NodeKind::Assign: assign(stmt.child(0), eval(stmt.child(1), env), env); return Flow::Normal;
  case NodeKind::If:
    if (is_truthy(eval(stmt.child(0), env))) {
      return exec_block(stmt.child(1), env);
    }
    if (stmt.size() > 2) {
      return exec_block(stmt.child(2), env);
    }
    return Flow::Normal;
  case NodeKind::While:
    while (is_truthy(eval(stmt.child(0), env))) {
      if (exec_block(stmt.child(1), env) == Flow::Return) {
        return Flow::Return;
      }
      tick(stmt);
    }
    return Flow::Normal;
  case NodeKind::Return:
    returned_ = stmt.size() > 0 ? eval(stmt.child(0), env) : Value(Nil{});
    return Flow::Return;
  case NodeKind::Throw: throw ThrownValue{eval(stmt.child(0), env), stmt.span};
  case NodeKind::TryCatch: {
    try {
      return exec_block(stmt.child(0), env);
    } catch (ThrownValue& thrown) {
      auto scope = std::make_shared<Environment>();
      scope->parent = env;
      scope->define(stmt.symbol, std::move(thrown.value));
      return exec_statements(stmt.child(1), scope);
    }
  }
  default: eval(stmt, env); return Flow::Normal;
  }
}

void Interpreter::assign(const AstNode& target, Value value, const std::shared_ptr<Environment>& env) {
  if (target.kind == NodeKind::Identifier) {
    for (Environment* scope = env.get(); scope != nullptr; scope = scope->parent.get()) {
      if (Value* slot = scope->find_local(target.symbol)) {
        if (scope->top_level) {
          fail(RuntimeErrorKind::TypeMismatch, target, "cannot assign to top-level name '" + target.name + "'");
        }
        *slot = std::move(value);
        return;
      }
    }
    fail(RuntimeErrorKind::UndefinedName, target, "assignment to undeclared variable '" + target.name + "'");
  }
  const Value object = eval(target.child(0), env);
  if (target.kind == NodeKind::FieldAccess) {
    const auto* record = std::get_if<RecordRef>(&object);
    if (record == nullptr) {
      fail(RuntimeErrorKind::TypeMismatch, target, "cannot set field on " + std::string(type_name(object)));
    }
    (*record)->fields[target.name] = std::move(value);
    return;
  }
  const Value index = eval(target.child(1), env);
  if (const auto* list = std::get_if<ListRef>(&object)) {
    const auto* i = std::get_if<std::int64_t>(&index);
    if (i == nullptr) {
      fail(RuntimeErrorKind::TypeMismatch, target, "list index must be an integer");
    }
    if (*i < 0 || *i >= static_cast<std::int64_t>((*list)->items.size())) {
      fail(RuntimeErrorKind::IndexOutOfRange, target, "list index " + std::to_string(*i) + " out of range");
    }
    (*list)->items[static_cast<std::size_t>(*i)] = std::move(value);
    return;
  }
  if (const auto* record = std::get_if<RecordRef>(&object)) {
    const auto* key = std::get_if<std::string>(&index);
    if (key == nullptr || !is_identifier(*key)) {
      fail(RuntimeErrorKind::TypeMismatch, target, "record keys must be identifier strings");
    }
    (*record)->fields[*key] = std::move(value);
    return;
  }
  fail(RuntimeErrorKind::TypeMismatch, target, "cannot index into " + std::string(type_name(object)));
}

// --- expressions -----------------------------------------------------------

Value Interpreter::eval(const AstNode& expr, const std::shared_ptr<Environment>& env) {
  tick(expr);
  switch (expr.kind) {
  case NodeKind::Literal: return from_literal(expr.literal);
  case NodeKind::Identifier: {
    if (Value* v = env->find(expr.symbol)) {
      return *v;
    }
    fail(RuntimeErrorKind::UndefinedName, expr, "undefined name '" + expr.name + "'");
  }
  case NodeKind::BinaryOp: return eval_binary(expr, env);
  case NodeKind::UnaryOp: return eval_unary(expr, env);
  case NodeKind::Call: return eval_call(expr, env);
  case NodeKind::Lambda: {
    auto fn = std::make_shared<Function>();
    fn->decl = &expr;
    fn->captured = env;
    fn->method = program_.method_of(expr);
    const Module* module = program_.module_of(expr);
    fn->module_index = module != nullptr ? module->index : -1;
    captured_envs_.push_back(env);
    return FunctionRef(std::move(fn));
  }
  case NodeKind::ListLiteral: {
    auto list = new_list();
    list->items.reserve(expr.size());
    for (const auto& item : expr.children) {
      list->items.push_back(eval(*item, env));
    }
    return list;
  }
  case NodeKind::RecordLiteral: {
    auto record = new_record();
    for (std::size_t i = 0; i < expr.size(); ++i) {
      record->fields[expr.keys[i]] = eval(expr.child(i), env);
    }
    return record;
  }
  case NodeKind::Index: {
    Value object = eval(expr.child(0), env);
    Value index = eval(expr.child(1), env);
    return eval_index(expr, object, index);
  }
  case NodeKind::FieldAccess: return eval_field(expr, eval(expr.child(0), env));
  case NodeKind::ProbeWrapper: {
    Value value = eval(expr.child(0), env);
    if (observer_ != nullptr) {
      observer_->on_probe(expr, value);
    }
    return value;
  }
  default:
    fail(RuntimeErrorKind::TypeMismatch, expr,
         "node kind '" + std::string(node_kind_name(expr.kind)) + "' is not an expression");
  }
}

Value Interpreter::eval_unary(const AstNode& node, const std::shared_ptr<Environment>& env) {
  Value operand = eval(node.child(0), env);
  if (node.op == Operator::Not) {
    return !is_truthy(operand);
  }
  if (const auto* i = std::get_if<std::int64_t>(&operand)) {
    if (*i == std::numeric_limits<std::int64_t>::min()) {
      fail(RuntimeErrorKind::IntegerOverflow, node, "integer overflow in negation");
    }
    return -*i;
  }
  if (const auto* d = std::get_if<double>(&operand)) {
    return -*d;
  }
  fail(RuntimeErrorKind::TypeMismatch, node, "cannot negate " + std::string(type_name(operand)));
}

Value Interpreter::eval_binary(const AstNode& node, const std::shared_ptr<Environment>& env) {
  if (node.op == Operator::And) {
    return is_truthy(eval(node.child(0), env)) && is_truthy(eval(node.child(1), env));
  }
  if (node.op == Operator::Or) {
    return is_truthy(eval(node.child(0), env)) || is_truthy(eval(node.child(1), env));
  }
  const Value lhs = eval(node.child(0), env);
  const Value rhs = eval(node.child(1), env);

  switch (node.op) {
  case Operator::Equal: return values_equal(lhs, rhs);
  case Operator::NotEqual: return !values_equal(lhs, rhs);
  case Operator::Less:
  case Operator::LessEqual:
  case Operator::Greater:
  case Operator::GreaterEqual: {
    int cmp = 0;
    if (std::holds_alternative<std::int64_t>(lhs) && std::holds_alternative<std::int64_t>(rhs)) {
      const auto a = std::get<std::int64_t>(lhs);
      const auto b = std::get<std::int64_t>(rhs);
      cmp = a < b ? -1 : (a > b ? 1 : 0);
    } else if (is_number(lhs) && is_number(rhs)) {
      const double a = as_double(lhs);
      const double b = as_double(rhs);
      cmp = a < b ? -1 : (a > b ? 1 : 0);
    } else if (std::holds_alternative<std::string>(lhs) && std::holds_alternative<std::string>(rhs)) {
      cmp = std::get<std::string>(lhs).compare(std::get<std::string>(rhs));
      cmp = cmp < 0 ? -1 : (cmp > 0 ? 1 : 0);
    } else {
      fail(RuntimeErrorKind::TypeMismatch, node,
           "cannot compare " + std::string(type_name(lhs)) + " with " + std::string(type_name(rhs)));
    }
    switch (node.op) {
    case Operator::Less: return cmp < 0;
    case Operator::LessEqual: return cmp <= 0;
    case Operator::Greater: return cmp > 0;
    default: return cmp >= 0;
    }
  }
  default: break;
  }

  if (node.op == Operator::Add &&
      (std::holds_alternative<std::string>(lhs) || std::holds_alternative<std::string>(rhs))) {
    return display(lhs) + display(rhs);
  }
  if (!is_number(lhs) || !is_number(rhs)) {
    fail(RuntimeErrorKind::TypeMismatch, node,
         "operator '" + std::string(operator_text(node.op)) + "' not defined for " + std::string(type_name(lhs)) +
             " and " + std::string(type_name(rhs)));
  }

  if (std::holds_alternative<std::int64_t>(lhs) && std::holds_alternative<std::int64_t>(rhs)) {
    const auto a = std::get<std::int64_t>(lhs);
    const auto b = std::get<std::int64_t>(rhs);
    std::int64_t out = 0;
    bool overflow = false;
    switch (node.op) {
    case Operator::Add: overflow = __builtin_add_overflow(a, b, &out); break;
    case Operator::Subtract: overflow = __builtin_sub_overflow(a, b, &out); break;
    case Operator::Multiply: overflow = __builtin_mul_overflow(a, b, &out); break;
    case Operator::Divide:
    case Operator::Modulo:
      if (b == 0) {
        fail(RuntimeErrorKind::DivisionByZero, node, "division by zero");
      }
      if (a == std::numeric_limits<std::int64_t>::min() && b == -1) {
        overflow = true;
        break;
      }
      out = node.op == Operator::Divide ? a / b : a % b;
      break;
    default: break;
    }
    if (overflow) {
      fail(RuntimeErrorKind::IntegerOverflow, node,
           "integer overflow in '" + std::string(operator_text(node.op)) + "'");
    }
    return out;
  }

  const double a = as_double(lhs);
  const double b = as_double(rhs);
  switch (node.op) {
  case Operator::Add: return a + b;
  case Operator::Subtract: return a - b;
  case Operator::Multiply: return a * b;
  case Operator::Divide:
    if (b == 0.0) {
      fail(RuntimeErrorKind::DivisionByZero, node, "division by zero");
    }
    return a / b;
  case Operator::Modulo:
    fail(RuntimeErrorKind::TypeMismatch, node, "operator '%' requires integers");
  default: break;
  }
  fail(RuntimeErrorKind::TypeMismatch, node, "unsupported operator");
}

Value Interpreter::eval_index(const AstNode& node, const Value& object, const Value& index) {
  if (const auto* list = std::get_if<ListRef>(&object)) {
    const auto* i = std::get_if<std::int64_t>(&index);
    if (i == nullptr) {
      fail(RuntimeErrorKind::TypeMismatch, node, "list index must be an integer");
    }
    if (*i < 0 || *i >= static_cast<std::int64_t>((*list)->items.size())) {
      fail(RuntimeErrorKind::IndexOutOfRange, node, "list index " + std::to_string(*i) + " out of range");
    }
    return (*list)->items[static_cast<std::size_t>(*i)];
  }
  if (const auto* text = std::get_if<std::string>(&object)) {
    const auto* i = std::get_if<std::int64_t>(&index);
    if (i == nullptr) {
      fail(RuntimeErrorKind::TypeMismatch, node, "string index must be an integer");
    }
    if (*i < 0 || *i >= static_cast<std::int64_t>(text->size())) {
      fail(RuntimeErrorKind::IndexOutOfRange, node, "string index " + std::to_string(*i) + " out of range");
    }
    return std::string(1, (*text)[static_cast<std::size_t>(*i)]);
  }
  if (const auto* record = std::get_if<RecordRef>(&object)) {
    const auto* key = std::get_if<std::string>(&index);
    if (key == nullptr) {
      fail(RuntimeErrorKind::TypeMismatch, node, "record index must be a string");
    }
    auto it = (*record)->fields.find(*key);
    if (it == (*record)->fields.end()) {
      fail(RuntimeErrorKind::UndefinedName, node, "record has no field '" + *key + "'");
    }
    return it->second;
  }
  fail(RuntimeErrorKind::TypeMismatch, node, "cannot index into " + std::string(type_name(object)));
}

Value Interpreter::eval_field(const AstNode& node, const Value& object) {
  const auto* record = std::get_if<RecordRef>(&object);
  if (record == nullptr) {
    fail(RuntimeErrorKind::TypeMismatch, node, "cannot read field '" + node.name + "' of " +
                                                   std::string(type_name(object)));
  }
  auto it = (*record)->fields.find(node.name);
  if (it == (*record)->fields.end()) {
    fail(RuntimeErrorKind::UndefinedName, node, "record has no field '" + node.name + "'");
  }
  return it->second;
}

Value Interpreter::eval_call(const AstNode& node, const std::shared_ptr<Environment>& env) {
  const Value callee = eval(node.child(0), env);
  std::vector<Value> args;
  args.reserve(node.size() - 1);
  for (std::size_t i = 1; i < node.size(); ++i) {
    args.push_back(eval(node.child(i), env));
  }
  const auto* fn = std::get_if<FunctionRef>(&callee);
  if (fn == nullptr) {
    fail(RuntimeErrorKind::TypeMismatch, node, "cannot call " + std::string(type_name(callee)));
  }
  if ((*fn)->builtin != Builtin::None) {
    return call_builtin(**fn, args, node);
  }
  return call_function(**fn, args, node);
}

Value Interpreter::call_builtin(const Function& fn, std::vector<Value>& args, const AstNode& site) {
  auto require = [&](std::size_t n) {
    if (args.size() != n) {
      fail(RuntimeErrorKind::Arity, site,
           fn.method->function_name + " expects " + std::to_string(n) + " argument(s), got " +
               std::to_string(args.size()));
    }
  };
  switch (fn.builtin) {
  case Builtin::Len: {
    require(1);
    if (const auto* list = std::get_if<ListRef>(&args[0])) {
      return static_cast<std::int64_t>((*list)->items.size());
    }
    if (const auto* text = std::get_if<std::string>(&args[0])) {
      return static_cast<std::int64_t>(text->size());
    }
    if (const auto* record = std::get_if<RecordRef>(&args[0])) {
      return static_cast<std::int64_t>((*record)->fields.size());
    }
    fail(RuntimeErrorKind::TypeMismatch, site, "len not defined for " + std::string(type_name(args[0])));
  }
  case Builtin::Push: {
    require(2);
    const auto* list = std::get_if<ListRef>(&args[0]);
    if (list == nullptr) {
      fail(RuntimeErrorKind::TypeMismatch, site, "push expects a list");
    }
    (*list)->items.push_back(std::move(args[1]));
    return args[0];
  }
  case Builtin::Print: {
    std::string line;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (i > 0) {
        line += ' ';
      }
      line += display(args[i]);
    }
    output_.push_back(std::move(line));
    return Nil{};
  }
  case Builtin::None: break;
  }
  fail(RuntimeErrorKind::TypeMismatch, site, "unknown builtin");
}

Value Interpreter::call_function(const Function& fn, std::vector<Value>& args, const AstNode& site) {
  const AstNode& params = fn.decl->child(0);
  if (args.size() != params.size()) {
    fail(RuntimeErrorKind::Arity, site,
         fn.method->function_name + " expects " + std::to_string(params.size()) + " argument(s), got " +
             std::to_string(args.size()));
  }
  if (depth_ >= options_.max_call_depth) {
    fail(RuntimeErrorKind::StackOverflow, site,
         "call depth limit of " + std::to_string(options_.max_call_depth) + " exceeded");
  }
  struct DepthGuard {
    int& depth;
    explicit DepthGuard(int& d) : depth(d) { ++depth; }
    ~DepthGuard() { --depth; }
  } guard(depth_);

  if (observer_ != nullptr) {
    observer_->on_call_enter(fn, site, args);
  }

  auto frame = std::make_shared<Environment>();
  frame->parent = fn.captured;
  frame->slots.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    frame->slots.emplace_back(params.child(i).symbol, std::move(args[i]));
  }

  Flow flow = Flow::Normal;
  try {
    flow = exec_statements(fn.decl->child(1), frame);
  } catch (const ThrownValue& thrown) {
    if (observer_ != nullptr) {
      observer_->on_call_unwind(thrown.value);
    }
    throw;
  } catch (const RuntimeError& error) {
    if (observer_ != nullptr) {
      observer_->on_call_unwind(error_record(error));
    }
    throw;
  } catch (...) {
    if (observer_ != nullptr) {
      observer_->on_call_unwind(Nil{});
    }
    throw;
  }
  Value result = flow == Flow::Return ? std::exchange(returned_, Nil{}) : Value(Nil{});
  if (observer_ != nullptr) {
    observer_->on_call_exit(result);
  }
  return result;
}

// --- heap release ----------------------------------------------------------

void Interpreter::release_heap() {
  std::unordered_set<const void*> marked;
  std::vector<Value> values = retained_;
  std::vector<Environment*> envs;

  while (!values.empty() || !envs.empty()) {
    if (!envs.empty()) {
      Environment* env = envs.back();
      envs.pop_back();
      if (env == nullptr || !marked.insert(env).second) {
        continue;
      }
      for (const auto& [symbol, value] : env->slots) {
        values.push_back(value);
      }
      envs.push_back(env->parent.get());
      continue;
    }
    Value value = std::move(values.back());
    values.pop_back();
    if (const auto* list = std::get_if<ListRef>(&value)) {
      if (marked.insert(list->get()).second) {
        values.insert(values.end(), (*list)->items.begin(), (*list)->items.end());
      }
    } else if (const auto* record = std::get_if<RecordRef>(&value)) {
      if (marked.insert(record->get()).second) {
        for (const auto& [key, field] : (*record)->fields) {
          values.push_back(field);
        }
      }
    } else if (const auto* fn = std::get_if<FunctionRef>(&value)) {
      envs.push_back((*fn)->captured.get());
    }
  }

  auto clear_env = [&](const std::shared_ptr<Environment>& env) {
    if (env && !marked.contains(env.get())) {
      env->slots.clear();
      env->parent.reset();
    }
  };
  for (const auto& weak : captured_envs_) {
    // Clear the whole captured chain: a lambda may be stored in any ancestor.
    for (auto env = weak.lock(); env && !marked.contains(env.get());) {
      auto parent = env->parent;
      clear_env(env);
      env = parent;
    }
  }
  for (const auto& env : module_envs_) {
    clear_env(env);
  }
  for (const auto& weak : lists_) {
    if (auto list = weak.lock(); list && !marked.contains(list.get())) {
      list->items.clear();
    }
  }
  for (const auto& weak : records_) {
    if (auto record = weak.lock(); record && !marked.contains(record.get())) {
      record->fields.clear();
    }
  }
}

Value evaluate(const SourceProgram& program, const AstNode& entry, InterpreterOptions options) {
  const Module* module = program.module_of(entry);
  if (module == nullptr) {
    throw std::invalid_argument("entry block does not belong to the program");
  }
  Interpreter interpreter(program, options);
  Value result = interpreter.run_block(entry, interpreter.new_scope(*module));
  interpreter.retain(result);
  return result;
}

} // namespace crosscut::lang
