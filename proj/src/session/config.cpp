#include "crosscut/session/config.hpp"

#include "crosscut/error.hpp"

#include <json.hpp>

#include <sstream>

namespace crosscut::session {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// Example ids contain '#', so only a '#' outside a string starts a comment.
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

[[noreturn]] void bad(int line, const std::string& why) {
  throw Error(ErrorCode::ParseError, std::string(kConfigFile) + ":" + std::to_string(line) + ": " + why);
}

// TOML strings, integers and string arrays are valid JSON for the subset we
// accept, so values are handed to the JSON parser.
std::set<std::string> string_set(const std::string& value, int line) {
  const auto parsed = nlohmann::json::parse(value, nullptr, false);
  if (!parsed.is_array()) bad(line, "expected an array of strings");
  std::set<std::string> out;
  for (const auto& item : parsed) {
    if (!item.is_string()) bad(line, "expected an array of strings");
    out.insert(item.get<std::string>());
  }
  return out;
}

} // namespace

SessionConfig parse_config(const std::string& text) {
  SessionConfig config;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string content = trim(strip_comment(raw));
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) bad(line, "expected key = value");
    const std::string key = trim(content.substr(0, eq));
    const std::string value = trim(content.substr(eq + 1));
    if (key == "scope") {
      config.scope = string_set(value, line);
    } else if (key == "active") {
      config.active = string_set(value, line);
    } else if (key == "event_cap") {
      const auto parsed = nlohmann::json::parse(value, nullptr, false);
      if (!parsed.is_number_unsigned() || parsed.get<std::uint64_t>() < 2) bad(line, "event_cap must be an integer >= 2");
      config.event_cap = parsed.get<std::size_t>();
    } else {
      bad(line, "unknown key '" + key + "'");
    }
  }
  return config;
}

} // namespace crosscut::session
