#pragma once

#include "crosscut/trace/trace.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace crosscut::trace {

// One JSON object per line: a header, then the events in seq order.
void write_jsonl(const Trace& trace, std::ostream& out);
std::string to_jsonl(const Trace& trace);

// Parses and validates (including bracketing). Throws Error(MalformedTrace).
Trace read_jsonl(std::istream& in);
Trace from_jsonl(const std::string& text);

// Throws Error(Io) when the file cannot be written or read.
void export_trace(const Trace& trace, const std::filesystem::path& path);
Trace import_trace(const std::filesystem::path& path);

} // namespace crosscut::trace
