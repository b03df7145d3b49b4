#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>

namespace crosscut::session {

// Contents of <root>/crosscut.toml. Only three keys are understood:
//   scope = ["m.cc", "lib.cc"]
//   event_cap = 100000
//   active = ["m.cc#ex1"]
struct SessionConfig {
  std::optional<std::set<std::string>> scope;
  std::size_t event_cap = 1'000'000;
  std::optional<std::set<std::string>> active;
};

inline constexpr const char* kConfigFile = "crosscut.toml";

// Throws Error(ParseError) naming the offending line.
SessionConfig parse_config(const std::string& text);

} // namespace crosscut::session
