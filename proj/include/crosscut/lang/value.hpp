#pragma once

#include "crosscut/lang/ast.hpp"
#include "crosscut/lang/source.hpp"
#include "crosscut/lang/symbol.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace crosscut::lang {

struct List;
struct Record;
struct Function;
struct Environment;

struct Nil {
  bool operator==(const Nil&) const = default;
};

using ListRef = std::shared_ptr<List>;
using RecordRef = std::shared_ptr<Record>;
using FunctionRef = std::shared_ptr<const Function>;

// Lists and records have reference identity; everything else is a value.
using Value = std::variant<Nil, bool, std::int64_t, double, std::string, ListRef, RecordRef, FunctionRef>;

struct List {
  std::vector<Value> items;
};

struct Record {
  std::map<std::string, Value> fields;
};

enum class Builtin { None, Len, Push, Print };

struct Function {
  // FunctionDecl or Lambda node; null for builtins.
  const AstNode* decl = nullptr;
  std::shared_ptr<Environment> captured;
  MethodRef method;
  int module_index = -1;
  Builtin builtin = Builtin::None;
};

struct Environment {
  std::shared_ptr<Environment> parent;
  std::vector<std::pair<Symbol, Value>> slots;
  // Module and builtin scopes; their bindings cannot be reassigned.
  bool top_level = false;

  Value* find_local(Symbol name) {
    for (auto& [symbol, value] : slots) {
      if (symbol == name) {
        return &value;
      }
    }
    return nullptr;
  }

  Value* find(Symbol name) {
    for (Environment* env = this; env != nullptr; env = env->parent.get()) {
      if (Value* v = env->find_local(name)) {
        return v;
      }
    }
    return nullptr;
  }

  void define(Symbol name, Value value) {
    if (Value* existing = find_local(name)) {
      *existing = std::move(value);
    } else {
      slots.emplace_back(name, std::move(value));
    }
  }
};

std::string_view type_name(const Value& value);
bool is_truthy(const Value& value);

// Human-readable rendering used by print and string concatenation.
std::string display(const Value& value);

// Shortest round-trip formatting; always contains '.', 'e', "inf" or "nan".
std::string format_float(double value);

} // namespace crosscut::lang
