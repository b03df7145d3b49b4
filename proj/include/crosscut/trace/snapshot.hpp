#pragma once

#include "crosscut/lang/value.hpp"

#include <json.hpp>

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace crosscut::trace {

struct SnapshotLimits {
  int max_depth = 8;           // nesting levels, the top-level value is level 1
  std::size_t max_entries = 100; // per list or record
};

struct TruncatedMarker {
  bool operator==(const TruncatedMarker&) const = default;
};
struct CycleMarker {
  bool operator==(const CycleMarker&) const = default;
};
struct FunctionName {
  std::string name;
  bool operator==(const FunctionName&) const = default;
};

struct SnapshotList;
struct SnapshotRecord;

// Immutable structural copy of a runtime value. Scalars are stored inline;
// containers are shared, never mutated after construction.
class Snapshot {
public:
  using Data = std::variant<std::nullptr_t, bool, std::int64_t, double, std::string,
                            std::shared_ptr<const SnapshotList>, std::shared_ptr<const SnapshotRecord>,
                            FunctionName, TruncatedMarker, CycleMarker>;

  Snapshot() : data_(nullptr) {}
  explicit Snapshot(Data data) : data_(std::move(data)) {}

  const Data& data() const { return data_; }

  bool is_null() const { return std::holds_alternative<std::nullptr_t>(data_); }
  const std::int64_t* as_int() const { return std::get_if<std::int64_t>(&data_); }
  const std::string* as_string() const { return std::get_if<std::string>(&data_); }
  const SnapshotList* as_list() const;
  const SnapshotRecord* as_record() const;
  bool is_truncated() const { return std::holds_alternative<TruncatedMarker>(data_); }
  bool is_cycle() const { return std::holds_alternative<CycleMarker>(data_); }

  // Nesting depth of the snapshot tree; scalars and markers count as 1.
  int depth() const;

  friend bool operator==(const Snapshot& a, const Snapshot& b);

private:
  Data data_;
};

struct SnapshotList {
  std::vector<Snapshot> items;
  std::size_t omitted = 0;
};

struct SnapshotRecord {
  std::vector<std::pair<std::string, Snapshot>> fields; // sorted by key
  std::size_t omitted = 0;
};

Snapshot snapshot(const lang::Value& value, const SnapshotLimits& limits = {});

// JSON form: scalars map to JSON scalars, lists to arrays, records to
// objects. Markers use reserved "$"-prefixed keys, which identifier-keyed
// records can never contain:
//   {"$fn": name}  {"$truncated": true}  {"$cycle": true}  {"$float": "inf"}
//   a trailing {"$truncated": n} array element / "$truncated": n record key
//   for omitted entries.
nlohmann::json to_json(const Snapshot& snapshot);
// Throws std::invalid_argument on input that no snapshot serializes to.
Snapshot snapshot_from_json(const nlohmann::json& json);

} // namespace crosscut::trace
