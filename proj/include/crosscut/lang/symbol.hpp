#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace crosscut::lang {

// Process-wide identifier interning. Parsing interns names; evaluation
// compares integers.
using Symbol = std::uint32_t;

Symbol intern(std::string_view name);
const std::string& symbol_name(Symbol symbol);

} // namespace crosscut::lang
