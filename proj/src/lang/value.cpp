#include "crosscut/lang/value.hpp"

#include <charconv>
#include <cmath>
#include <set>

namespace crosscut::lang {

std::string_view type_name(const Value& value) {
  switch (value.index()) {
  case 0: return "nil";
  case 1: return "boolean";
  case 2: return "integer";
  case 3: return "float";
  case 4: return "string";
  case 5: return "list";
  case 6: return "record";
  case 7: return "function";
  }
  return "?";
}

bool is_truthy(const Value& value) {
  if (std::holds_alternative<Nil>(value)) {
    return false;
  }
  if (const bool* b = std::get_if<bool>(&value)) {
    return *b;
  }
  return true;
}

std::string format_float(double value) {
  if (std::isnan(value)) {
    return "nan";
  }
  if (std::isinf(value)) {
    return value > 0 ? "inf" : "-inf";
  }
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  std::string text(buffer, ptr);
  if (text.find_first_of(".e") == std::string::npos) {
    text += ".0";
  }
  return text;
}

namespace {

void render(const Value& value, std::string& out, std::set<const void*>& open) {
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Nil>) {
          out += "nil";
        } else if constexpr (std::is_same_v<T, bool>) {
          out += v ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          out += std::to_string(v);
        } else if constexpr (std::is_same_v<T, double>) {
          out += format_float(v);
        } else if constexpr (std::is_same_v<T, std::string>) {
          out += v;
        } else if constexpr (std::is_same_v<T, ListRef>) {
          if (!open.insert(v.get()).second) {
            out += "[...]";
            return;
          }
          out += "[";
          for (std::size_t i = 0; i < v->items.size(); ++i) {
            if (i > 0) {
              out += ", ";
            }
            render(v->items[i], out, open);
          }
          out += "]";
          open.erase(v.get());
        } else if constexpr (std::is_same_v<T, RecordRef>) {
          if (!open.insert(v.get()).second) {
            out += "{...}";
            return;
          }
          out += "{";
          bool first = true;
          for (const auto& [key, field] : v->fields) {
            if (!first) {
              out += ", ";
            }
            first = false;
            out += key;
            out += ": ";
            render(field, out, open);
          }
          out += "}";
          open.erase(v.get());
        } else {
          out += "<fn ";
          out += v->method ? v->method->qualified() : "builtin";
          out += ">";
        }
      },
      value);
}

} // namespace

std::string display(const Value& value) {
  std::string out;
  std::set<const void*> open;
  render(value, out, open);
  return out;
}

} // namespace crosscut::lang
