#include "reference_interpreter.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <variant>

namespace crosscut::testing {

namespace {

using lang::AstNode;
using lang::NodeKind;
using lang::Operator;
using nlohmann::json;

struct RVal;
struct RFun;
struct REnv;
using RList = std::shared_ptr<std::vector<RVal>>;
using RRec = std::shared_ptr<std::map<std::string, RVal>>;
using RFunPtr = std::shared_ptr<RFun>;

struct RNil {};

struct RVal {
  std::variant<RNil, bool, long long, double, std::string, RList, RRec, RFunPtr> v;
};

struct RFun {
  const AstNode* decl = nullptr; // FunctionDecl or Lambda
  std::shared_ptr<REnv> env;
  std::string module;
  std::string name;
  std::string builtin;
};

struct REnv {
  std::map<std::string, RVal> vars;
  std::shared_ptr<REnv> parent;
  bool top = false;

  RVal* lookup(const std::string& n) {
    for (REnv* e = this; e; e = e->parent.get()) {
      auto it = e->vars.find(n);
      if (it != e->vars.end()) {
        return &it->second;
      }
    }
    return nullptr;
  }
};

struct Failure {
  std::string kind;
  RVal thrown;
  bool is_throw = false;
};
struct ReturnSignal {
  RVal value;
};

bool truthy(const RVal& v) {
  if (std::holds_alternative<RNil>(v.v)) return false;
  if (auto b = std::get_if<bool>(&v.v)) return *b;
  return true;
}

std::string render(const RVal& v);

json to_json(const RVal& v) {
  if (std::holds_alternative<RNil>(v.v)) return nullptr;
  if (auto b = std::get_if<bool>(&v.v)) return *b;
  if (auto i = std::get_if<long long>(&v.v)) return static_cast<std::int64_t>(*i);
  if (auto d = std::get_if<double>(&v.v)) return *d;
  if (auto s = std::get_if<std::string>(&v.v)) return *s;
  if (auto l = std::get_if<RList>(&v.v)) {
    json a = json::array();
    for (auto& x : **l) a.push_back(to_json(x));
    return a;
  }
  if (auto r = std::get_if<RRec>(&v.v)) {
    json o = json::object();
    for (auto& [k, x] : **r) o[k] = to_json(x);
    return o;
  }
  const auto& f = *std::get<RFunPtr>(v.v);
  if (!f.builtin.empty()) return json{{"$fn", "<builtin>." + f.builtin}};
  if (f.decl->kind == NodeKind::Lambda) {
    return json{{"$fn", "<lambda>@" + f.module + ":" + std::to_string(f.decl->span.start_line) + ":" +
                            std::to_string(f.decl->span.start_col)}};
  }
  return json{{"$fn", f.module + "." + f.name}};
}

std::string render(const RVal& v) {
  if (std::holds_alternative<RNil>(v.v)) return "nil";
  if (auto b = std::get_if<bool>(&v.v)) return *b ? "true" : "false";
  if (auto i = std::get_if<long long>(&v.v)) return std::to_string(*i);
  if (auto s = std::get_if<std::string>(&v.v)) return *s;
  return to_json(v).dump();
}

class Ref {
public:
  Ref(const lang::SourceProgram& p, const std::set<std::string>& scope, long limit)
      : program_(p), scope_(scope), limit_(limit) {}

  RefRun run(const AstNode& example) {
    const auto* module = program_.module_of(example);
    RefRun out;
    auto env = std::make_shared<REnv>();
    env->parent = module_env(module->path);
    if (example.example_setup()) {
      exec_flat(*example.example_setup(), env);
    }
    out.root = std::make_unique<RefNode>();
    out.root->type = RefNode::Type::Root;
    out.root->module = module->path;
    out.root->name = "#" + example.name;
    out.root->frame = frame_counter_++;
    out.root->enter_seq = ++seq_;
    current_ = out.root.get();
    try {
      RVal last;
      bool returned = false;
      for (auto& stmt : example.example_body()->children) {
        if (is_expression(*stmt)) {
          last = eval(*stmt, env);
        } else {
          try {
            exec(*stmt, env);
          } catch (ReturnSignal& r) {
            last = r.value;
            returned = true;
          }
          if (returned) break;
        }
      }
      out.result = to_json(last);
      out.root->result = out.result;
    } catch (Failure& f) {
      out.failed = true;
      out.error_kind = f.is_throw ? "uncaught-throw" : f.kind;
      out.root->exception = true;
      out.root->result = f.is_throw ? to_json(f.thrown) : json{{"error", f.kind}};
      out.result = out.root->result;
    }
    out.root->exit_seq = ++seq_;
    out.frames = frame_counter_ - 1;
    return out;
  }

private:
  static bool is_expression(const AstNode& n) {
    switch (n.kind) {
    case NodeKind::Let:
    case NodeKind::Assign:
    case NodeKind::If:
    case NodeKind::While:
    case NodeKind::Return:
    case NodeKind::Throw:
    case NodeKind::TryCatch: return false;
    default: return true;
    }
  }

  [[noreturn]] void fail(const std::string& kind) { throw Failure{kind, {}, false}; }

  void step() {
    if (++steps_ > limit_) fail("step-limit");
  }

  std::shared_ptr<REnv> module_env(const std::string& path) {
    auto it = modules_.find(path);
    if (it != modules_.end()) return it->second;
    auto env = std::make_shared<REnv>();
    env->top = true;
    modules_[path] = env;
    auto builtins = std::make_shared<REnv>();
    builtins->top = true;
    for (const char* b : {"len", "push", "print"}) {
      auto f = std::make_shared<RFun>();
      f->builtin = b;
      builtins->vars[b] = RVal{f};
    }
    env->parent = builtins;
    const auto* module = program_.find_module(path);
    for (auto& decl : module->root->children) {
      if (decl->kind == NodeKind::FunctionDecl) {
        auto f = std::make_shared<RFun>();
        f->decl = decl.get();
        f->env = env;
        f->module = path;
        f->name = decl->name;
        env->vars[decl->name] = RVal{f};
      }
    }
    for (auto& decl : module->root->children) {
      if (decl->kind == NodeKind::Import && program_.find_module(decl->text)) {
        auto other = module_env(decl->text);
        auto ns = std::make_shared<std::map<std::string, RVal>>();
        for (auto& [k, v] : other->vars) ns->emplace(k, v);
        env->vars[decl->name] = RVal{ns};
      }
    }
    return env;
  }

  void exec_flat(const AstNode& block, const std::shared_ptr<REnv>& env) {
    for (auto& s : block.children) exec(*s, env);
  }

  void exec_block(const AstNode& block, const std::shared_ptr<REnv>& env) {
    auto inner = std::make_shared<REnv>();
    inner->parent = env;
    exec_flat(block, inner);
  }

  void exec(const AstNode& s, const std::shared_ptr<REnv>& env) {
    step();
    switch (s.kind) {
    case NodeKind::Let: {
      RVal v = eval(s.child(0), env);
      env->vars[s.name] = v;
      return;
    }
    case NodeKind::Assign: {
      RVal v = eval(s.child(1), env);
      const AstNode& t = s.child(0);
      if (t.kind == NodeKind::Identifier) {
        for (REnv* e = env.get(); e; e = e->parent.get()) {
          auto it = e->vars.find(t.name);
          if (it != e->vars.end()) {
            if (e->top) fail("type-mismatch");
            it->second = v;
            return;
          }
        }
        fail("undefined-name");
      }
      RVal obj = eval(t.child(0), env);
      if (t.kind == NodeKind::FieldAccess) {
        auto r = std::get_if<RRec>(&obj.v);
        if (!r) fail("type-mismatch");
        (**r)[t.name] = v;
        return;
      }
      RVal idx = eval(t.child(1), env);
      if (auto l = std::get_if<RList>(&obj.v)) {
        auto i = std::get_if<long long>(&idx.v);
        if (!i) fail("type-mismatch");
        if (*i < 0 || *i >= static_cast<long long>((*l)->size())) fail("index-out-of-range");
        (**l)[static_cast<std::size_t>(*i)] = v;
        return;
      }
      if (auto r = std::get_if<RRec>(&obj.v)) {
        auto k = std::get_if<std::string>(&idx.v);
        if (!k) fail("type-mismatch");
        (**r)[*k] = v;
        return;
      }
      fail("type-mismatch");
    }
    case NodeKind::If:
      if (truthy(eval(s.child(0), env))) {
        exec_block(s.child(1), env);
      } else if (s.size() > 2) {
        exec_block(s.child(2), env);
      }
      return;
    case NodeKind::While:
      while (truthy(eval(s.child(0), env))) {
        exec_block(s.child(1), env);
        step();
      }
      return;
    case NodeKind::Return: throw ReturnSignal{s.size() ? eval(s.child(0), env) : RVal{}};
    case NodeKind::Throw: {
      RVal v = eval(s.child(0), env);
      throw Failure{"uncaught-throw", v, true};
    }
    case NodeKind::TryCatch:
      try {
        exec_block(s.child(0), env);
      } catch (Failure& f) {
        if (!f.is_throw) throw;
        auto inner = std::make_shared<REnv>();
        inner->parent = env;
        inner->vars[s.name] = f.thrown;
        exec_flat(s.child(1), inner);
      }
      return;
    default: eval(s, env); return;
    }
  }

  static bool num(const RVal& v) {
    return std::holds_alternative<long long>(v.v) || std::holds_alternative<double>(v.v);
  }
  static double dbl(const RVal& v) {
    if (auto i = std::get_if<long long>(&v.v)) return static_cast<double>(*i);
    return std::get<double>(v.v);
  }

  RVal eval(const AstNode& e, const std::shared_ptr<REnv>& env) {
    step();
    switch (e.kind) {
    case NodeKind::Literal:
      return std::visit(
          [](const auto& x) -> RVal {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, lang::NilLiteral>) return RVal{};
            else if constexpr (std::is_same_v<T, std::int64_t>) return RVal{static_cast<long long>(x)};
            else return RVal{x};
          },
          e.literal);
    case NodeKind::Identifier: {
      RVal* v = env->lookup(e.name);
      if (!v) fail("undefined-name");
      return *v;
    }
    case NodeKind::UnaryOp: {
      RVal v = eval(e.child(0), env);
      if (e.op == Operator::Not) return RVal{!truthy(v)};
      if (auto i = std::get_if<long long>(&v.v)) {
        if (*i == std::numeric_limits<long long>::min()) fail("integer-overflow");
        return RVal{-*i};
      }
      if (auto d = std::get_if<double>(&v.v)) return RVal{-*d};
      fail("type-mismatch");
    }
    case NodeKind::BinaryOp: return binary(e, env);
    case NodeKind::Call: {
      RVal callee = eval(e.child(0), env);
      std::vector<RVal> args;
      for (std::size_t i = 1; i < e.size(); ++i) args.push_back(eval(e.child(i), env));
      auto f = std::get_if<RFunPtr>(&callee.v);
      if (!f) fail("type-mismatch");
      return call(**f, std::move(args));
    }
    case NodeKind::Lambda: {
      auto f = std::make_shared<RFun>();
      f->decl = &e;
      f->env = env;
      f->module = e.span.module_path;
      f->name = "<lambda>@" + std::to_string(e.span.start_line) + ":" + std::to_string(e.span.start_col);
      return RVal{f};
    }
    case NodeKind::ListLiteral: {
      auto l = std::make_shared<std::vector<RVal>>();
      for (auto& c : e.children) l->push_back(eval(*c, env));
      return RVal{l};
    }
    case NodeKind::RecordLiteral: {
      auto r = std::make_shared<std::map<std::string, RVal>>();
      for (std::size_t i = 0; i < e.size(); ++i) (*r)[e.keys[i]] = eval(e.child(i), env);
      return RVal{r};
    }
    case NodeKind::Index: {
      RVal obj = eval(e.child(0), env);
      RVal idx = eval(e.child(1), env);
      if (auto l = std::get_if<RList>(&obj.v)) {
        auto i = std::get_if<long long>(&idx.v);
        if (!i) fail("type-mismatch");
        if (*i < 0 || *i >= static_cast<long long>((*l)->size())) fail("index-out-of-range");
        return (**l)[static_cast<std::size_t>(*i)];
      }
      if (auto r = std::get_if<RRec>(&obj.v)) {
        auto k = std::get_if<std::string>(&idx.v);
        if (!k) fail("type-mismatch");
        auto it = (*r)->find(*k);
        if (it == (*r)->end()) fail("undefined-name");
        return it->second;
      }
      fail("type-mismatch");
    }
    case NodeKind::FieldAccess: {
      RVal obj = eval(e.child(0), env);
      auto r = std::get_if<RRec>(&obj.v);
      if (!r) fail("type-mismatch");
      auto it = (*r)->find(e.name);
      if (it == (*r)->end()) fail("undefined-name");
      return it->second;
    }
    case NodeKind::ProbeWrapper: {
      RVal v = eval(e.child(0), env);
      auto node = std::make_unique<RefNode>();
      node->type = RefNode::Type::Probe;
      node->probe_id = e.span.module_path + ":" + std::to_string(e.span.start_line) + ":" +
                       std::to_string(e.span.start_col);
      node->enter_seq = node->exit_seq = ++seq_;
      node->frame = current_->frame;
      node->result = to_json(v);
      node->parent = current_;
      current_->children.push_back(std::move(node));
      return v;
    }
    default: fail("type-mismatch");
    }
  }

  RVal binary(const AstNode& e, const std::shared_ptr<REnv>& env) {
    if (e.op == Operator::And) {
      if (!truthy(eval(e.child(0), env))) return RVal{false};
      return RVal{truthy(eval(e.child(1), env))};
    }
    if (e.op == Operator::Or) {
      if (truthy(eval(e.child(0), env))) return RVal{true};
      return RVal{truthy(eval(e.child(1), env))};
    }
    RVal a = eval(e.child(0), env);
    RVal b = eval(e.child(1), env);
    auto ai = std::get_if<long long>(&a.v);
    auto bi = std::get_if<long long>(&b.v);
    switch (e.op) {
    case Operator::Equal:
    case Operator::NotEqual: {
      bool eq;
      if (num(a) && num(b)) eq = (ai && bi) ? *ai == *bi : dbl(a) == dbl(b);
      else if (a.v.index() != b.v.index()) eq = false;
      else if (std::holds_alternative<RNil>(a.v)) eq = true;
      else if (auto x = std::get_if<bool>(&a.v)) eq = *x == std::get<bool>(b.v);
      else if (auto x = std::get_if<std::string>(&a.v)) eq = *x == std::get<std::string>(b.v);
      else if (auto x = std::get_if<RList>(&a.v)) eq = *x == std::get<RList>(b.v);
      else if (auto x = std::get_if<RRec>(&a.v)) eq = *x == std::get<RRec>(b.v);
      else eq = std::get<RFunPtr>(a.v) == std::get<RFunPtr>(b.v);
      return RVal{e.op == Operator::Equal ? eq : !eq};
    }
    case Operator::Less:
    case Operator::LessEqual:
    case Operator::Greater:
    case Operator::GreaterEqual: {
      int c;
      if (ai && bi) c = (*ai > *bi) - (*ai < *bi);
      else if (num(a) && num(b)) c = (dbl(a) > dbl(b)) - (dbl(a) < dbl(b));
      else if (std::holds_alternative<std::string>(a.v) && std::holds_alternative<std::string>(b.v)) {
        int r = std::get<std::string>(a.v).compare(std::get<std::string>(b.v));
        c = (r > 0) - (r < 0);
      } else fail("type-mismatch");
      switch (e.op) {
      case Operator::Less: return RVal{c < 0};
      case Operator::LessEqual: return RVal{c <= 0};
      case Operator::Greater: return RVal{c > 0};
      default: return RVal{c >= 0};
      }
    }
    default: break;
    }
    if (e.op == Operator::Add && (std::holds_alternative<std::string>(a.v) || std::holds_alternative<std::string>(b.v))) {
      return RVal{render(a) + render(b)};
    }
    if (!num(a) || !num(b)) fail("type-mismatch");
    if (ai && bi) {
      long long r = 0;
      bool of = false;
      switch (e.op) {
      case Operator::Add: of = __builtin_add_overflow(*ai, *bi, &r); break;
      case Operator::Subtract: of = __builtin_sub_overflow(*ai, *bi, &r); break;
      case Operator::Multiply: of = __builtin_mul_overflow(*ai, *bi, &r); break;
      case Operator::Divide:
      case Operator::Modulo:
        if (*bi == 0) fail("division-by-zero");
        if (*ai == std::numeric_limits<long long>::min() && *bi == -1) fail("integer-overflow");
        r = e.op == Operator::Divide ? *ai / *bi : *ai % *bi;
        break;
      default: fail("type-mismatch");
      }
      if (of) fail("integer-overflow");
      return RVal{r};
    }
    double x = dbl(a), y = dbl(b);
    switch (e.op) {
    case Operator::Add: return RVal{x + y};
    case Operator::Subtract: return RVal{x - y};
    case Operator::Multiply: return RVal{x * y};
    case Operator::Divide:
      if (y == 0.0) fail("division-by-zero");
      return RVal{x / y};
    default: fail("type-mismatch");
    }
  }

  RVal call(const RFun& f, std::vector<RVal> args) {
    if (!f.builtin.empty()) {
      if (f.builtin == "len") {
        if (args.size() != 1) fail("arity");
        if (auto l = std::get_if<RList>(&args[0].v)) return RVal{static_cast<long long>((*l)->size())};
        if (auto s = std::get_if<std::string>(&args[0].v)) return RVal{static_cast<long long>(s->size())};
        if (auto r = std::get_if<RRec>(&args[0].v)) return RVal{static_cast<long long>((*r)->size())};
        fail("type-mismatch");
      }
      if (f.builtin == "push") {
        if (args.size() != 2) fail("arity");
        auto l = std::get_if<RList>(&args[0].v);
        if (!l) fail("type-mismatch");
        (*l)->push_back(args[1]);
        return args[0];
      }
      return RVal{};
    }
    const AstNode& params = f.decl->child(0);
    if (params.size() != args.size()) fail("arity");

    const bool traced = suppressed_ == 0 && scope_.count(f.module) > 0;
    RefNode* saved = current_;
    RefNode* mine = nullptr;
    if (!traced) {
      ++suppressed_;
    } else {
      auto node = std::make_unique<RefNode>();
      node->module = f.module;
      node->name = f.name;
      node->frame = frame_counter_++;
      node->enter_seq = ++seq_;
      for (auto& a : args) node->args.push_back(to_json(a));
      node->parent = current_;
      mine = node.get();
      current_->children.push_back(std::move(node));
      current_ = mine;
    }

    auto env = std::make_shared<REnv>();
    env->parent = f.env;
    for (std::size_t i = 0; i < args.size(); ++i) env->vars[params.child(i).name] = args[i];
    RVal result;
    try {
      exec_flat(f.decl->child(1), env);
    } catch (ReturnSignal& r) {
      result = r.value;
    } catch (Failure& failure) {
      if (traced) {
        mine->exception = true;
        mine->result = failure.is_throw ? to_json(failure.thrown) : json{{"error", failure.kind}};
        mine->exit_seq = ++seq_;
        current_ = saved;
      } else {
        --suppressed_;
      }
      throw;
    }
    if (traced) {
      mine->result = to_json(result);
      mine->exit_seq = ++seq_;
      current_ = saved;
    } else {
      --suppressed_;
    }
    return result;
  }

  const lang::SourceProgram& program_;
  std::set<std::string> scope_;
  long limit_;
  long steps_ = 0;
  long seq_ = 0;
  long frame_counter_ = 0;
  int suppressed_ = 0;
  RefNode* current_ = nullptr;
  std::map<std::string, std::shared_ptr<REnv>> modules_;
};

} // namespace

RefRun reference_run(const lang::SourceProgram& program, const lang::AstNode& example,
                     const std::set<std::string>& scope, long step_limit) {
  std::set<std::string> effective = scope;
  effective.insert(program.module_of(example)->path);
  Ref ref(program, effective, step_limit);
  return ref.run(example);
}

json canonical(const RefNode& node) {
  json out;
  if (node.type == RefNode::Type::Probe) {
    out["probe"] = node.probe_id;
    out["seq"] = node.enter_seq;
    out["frame"] = node.frame;
    out["value"] = node.result;
    return out;
  }
  out["label"] = node.module + "." + node.name;
  out["frame"] = node.frame;
  out["enter"] = node.enter_seq;
  out["exit"] = node.exit_seq;
  out["kind"] = node.exception ? "exception" : "normal";
  out["args"] = node.args;
  out["result"] = node.result;
  json children = json::array();
  for (auto& c : node.children) children.push_back(canonical(*c));
  out["children"] = std::move(children);
  return out;
}

} // namespace crosscut::testing
