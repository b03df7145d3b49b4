#include "crosscut/trace/snapshot.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>

namespace crosscut::trace {

const SnapshotList* Snapshot::as_list() const {
  const auto* p = std::get_if<std::shared_ptr<const SnapshotList>>(&data_);
  return p ? p->get() : nullptr;
}

const SnapshotRecord* Snapshot::as_record() const {
  const auto* p = std::get_if<std::shared_ptr<const SnapshotRecord>>(&data_);
  return p ? p->get() : nullptr;
}

int Snapshot::depth() const {
  int deepest = 0;
  if (const auto* list = as_list()) {
    for (const auto& item : list->items) {
      deepest = std::max(deepest, item.depth());
    }
  } else if (const auto* record = as_record()) {
    for (const auto& [key, field] : record->fields) {
      deepest = std::max(deepest, field.depth());
    }
  }
  return deepest + 1;
}

bool operator==(const Snapshot& a, const Snapshot& b) {
  if (a.data_.index() != b.data_.index()) {
    return false;
  }
  if (const auto* la = a.as_list()) {
    const auto* lb = b.as_list();
    return la->omitted == lb->omitted && la->items == lb->items;
  }
  if (const auto* ra = a.as_record()) {
    const auto* rb = b.as_record();
    return ra->omitted == rb->omitted && ra->fields == rb->fields;
  }
  if (const auto* da = std::get_if<double>(&a.data_)) {
    const double db = std::get<double>(b.data_);
    return *da == db || (std::isnan(*da) && std::isnan(db));
  }
  return a.data_ == b.data_;
}

namespace {

class Snapshotter {
public:
  explicit Snapshotter(const SnapshotLimits& limits) : limits_(limits) {}

  Snapshot copy(const lang::Value& value, int level) {
    return std::visit(
        [&](const auto& v) -> Snapshot {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, lang::Nil>) {
            return Snapshot();
          } else if constexpr (std::is_same_v<T, bool> || std::is_same_v<T, std::int64_t> ||
                               std::is_same_v<T, double> || std::is_same_v<T, std::string>) {
            return Snapshot(Snapshot::Data(v));
          } else if constexpr (std::is_same_v<T, lang::FunctionRef>) {
            return Snapshot(FunctionName{function_name(*v)});
          } else if constexpr (std::is_same_v<T, lang::ListRef>) {
            return copy_list(*v, level);
          } else {
            return copy_record(*v, level);
          }
        },
        value);
  }

private:
  static std::string function_name(const lang::Function& fn) {
    if (fn.method == nullptr) {
      return "<anonymous>";
    }
    if (fn.decl != nullptr && fn.decl->kind == lang::NodeKind::Lambda) {
      const auto& s = fn.decl->span;
      return "<lambda>@" + s.module_path + ":" + std::to_string(s.start_line) + ":" + std::to_string(s.start_col);
    }
    return fn.method->qualified();
  }

  Snapshot copy_list(const lang::List& list, int level) {
    if (open_.contains(&list)) {
      return Snapshot(CycleMarker{});
    }
    if (level >= limits_.max_depth) {
      return Snapshot(TruncatedMarker{});
    }
    open_.insert(&list);
    auto out = std::make_shared<SnapshotList>();
    const std::size_t kept = std::min(list.items.size(), limits_.max_entries);
    out->items.reserve(kept);
    for (std::size_t i = 0; i < kept; ++i) {
      out->items.push_back(copy(list.items[i], level + 1));
    }
    out->omitted = list.items.size() - kept;
    open_.erase(&list);
    return Snapshot(std::shared_ptr<const SnapshotList>(std::move(out)));
  }

  Snapshot copy_record(const lang::Record& record, int level) {
    if (open_.contains(&record)) {
      return Snapshot(CycleMarker{});
    }
    if (level >= limits_.max_depth) {
      return Snapshot(TruncatedMarker{});
    }
    open_.insert(&record);
    auto out = std::make_shared<SnapshotRecord>();
    std::size_t kept = 0;
    for (const auto& [key, field] : record.fields) {
      if (kept == limits_.max_entries) {
        break;
      }
      out->fields.emplace_back(key, copy(field, level + 1));
      ++kept;
    }
    out->omitted = record.fields.size() - kept;
    open_.erase(&record);
    return Snapshot(std::shared_ptr<const SnapshotRecord>(std::move(out)));
  }

  const SnapshotLimits& limits_;
  std::unordered_set<const void*> open_;
};

} // namespace

// A container at the last permitted level would need children one level
// deeper, so it is replaced by a truncated marker; the tree never exceeds
// max_depth levels.
Snapshot snapshot(const lang::Value& value, const SnapshotLimits& limits) {
  Snapshotter s(limits);
  return s.copy(value, 1);
}

nlohmann::json to_json(const Snapshot& snapshot) {
  using nlohmann::json;
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::nullptr_t>) {
          return nullptr;
        } else if constexpr (std::is_same_v<T, double>) {
          if (std::isfinite(v)) {
            return v;
          }
          return json{{"$float", lang::format_float(v)}};
        } else if constexpr (std::is_same_v<T, bool> || std::is_same_v<T, std::int64_t> ||
                             std::is_same_v<T, std::string>) {
          return v;
        } else if constexpr (std::is_same_v<T, std::shared_ptr<const SnapshotList>>) {
          json out = json::array();
          for (const auto& item : v->items) {
            out.push_back(to_json(item));
          }
          if (v->omitted > 0) {
            out.push_back(json{{"$truncated", v->omitted}});
          }
          return out;
        } else if constexpr (std::is_same_v<T, std::shared_ptr<const SnapshotRecord>>) {
          json out = json::object();
          for (const auto& [key, field] : v->fields) {
            out[key] = to_json(field);
          }
          if (v->omitted > 0) {
            out["$truncated"] = v->omitted;
          }
          return out;
        } else if constexpr (std::is_same_v<T, FunctionName>) {
          return json{{"$fn", v.name}};
        } else if constexpr (std::is_same_v<T, TruncatedMarker>) {
          return json{{"$truncated", true}};
        } else {
          return json{{"$cycle", true}};
        }
      },
      snapshot.data());
}

Snapshot snapshot_from_json(const nlohmann::json& j) {
  using nlohmann::json;
  switch (j.type()) {
  case json::value_t::null: return Snapshot();
  case json::value_t::boolean: return Snapshot(Snapshot::Data(j.get<bool>()));
  case json::value_t::number_integer: return Snapshot(Snapshot::Data(j.get<std::int64_t>()));
  case json::value_t::number_unsigned: {
    const auto u = j.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
      throw std::invalid_argument("integer snapshot out of range");
    }
    return Snapshot(Snapshot::Data(static_cast<std::int64_t>(u)));
  }
  case json::value_t::number_float: return Snapshot(Snapshot::Data(j.get<double>()));
  case json::value_t::string: return Snapshot(Snapshot::Data(j.get<std::string>()));
  case json::value_t::array: {
    auto list = std::make_shared<SnapshotList>();
    for (std::size_t i = 0; i < j.size(); ++i) {
      const auto& item = j[i];
      if (i + 1 == j.size() && item.is_object() && item.size() == 1 && item.contains("$truncated") &&
          item["$truncated"].is_number_unsigned()) {
        list->omitted = item["$truncated"].get<std::size_t>();
        break;
      }
      list->items.push_back(snapshot_from_json(item));
    }
    return Snapshot(std::shared_ptr<const SnapshotList>(std::move(list)));
  }
  case json::value_t::object: {
    if (j.size() == 1) {
      if (j.contains("$fn") && j["$fn"].is_string()) {
        return Snapshot(FunctionName{j["$fn"].get<std::string>()});
      }
      if (j.contains("$truncated") && j["$truncated"].is_boolean()) {
        return Snapshot(TruncatedMarker{});
      }
      if (j.contains("$cycle")) {
        return Snapshot(CycleMarker{});
      }
      if (j.contains("$float") && j["$float"].is_string()) {
        const auto text = j["$float"].get<std::string>();
        if (text == "inf") {
          return Snapshot(Snapshot::Data(std::numeric_limits<double>::infinity()));
        }
        if (text == "-inf") {
          return Snapshot(Snapshot::Data(-std::numeric_limits<double>::infinity()));
        }
        if (text == "nan") {
          return Snapshot(Snapshot::Data(std::numeric_limits<double>::quiet_NaN()));
        }
        throw std::invalid_argument("bad $float marker");
      }
    }
    auto record = std::make_shared<SnapshotRecord>();
    for (const auto& [key, field] : j.items()) {
      if (key == "$truncated") {
        if (!field.is_number_unsigned()) {
          throw std::invalid_argument("bad $truncated count");
        }
        record->omitted = field.get<std::size_t>();
        continue;
      }
      if (!key.empty() && key.front() == '$') {
        throw std::invalid_argument("unknown snapshot marker '" + key + "'");
      }
      record->fields.emplace_back(key, snapshot_from_json(field));
    }
    return Snapshot(std::shared_ptr<const SnapshotRecord>(std::move(record)));
  }
  default: throw std::invalid_argument("unsupported JSON value in snapshot");
  }
}

} // namespace crosscut::trace
