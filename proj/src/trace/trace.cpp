#include "crosscut/trace/trace.hpp"

#include "crosscut/error.hpp"

#include <unordered_set>

namespace crosscut::trace {

std::string_view exit_kind_name(ExitKind kind) {
  return kind == ExitKind::Normal ? "normal" : "exception";
}

std::string_view trace_status_name(TraceStatus status) {
  switch (status) {
  case TraceStatus::Completed: return "completed";
  case TraceStatus::Failed: return "failed";
  case TraceStatus::Overflowed: return "overflowed";
  }
  return "?";
}

std::optional<TraceStatus> parse_trace_status(std::string_view name) {
  for (auto status : {TraceStatus::Completed, TraceStatus::Failed, TraceStatus::Overflowed}) {
    if (trace_status_name(status) == name) {
      return status;
    }
  }
  return std::nullopt;
}

void validate_bracketing(const Trace& trace) {
  auto malformed = [](Seq seq, const std::string& why) {
    throw Error(ErrorCode::MalformedTrace, "event " + std::to_string(seq) + ": " + why);
  };
  std::vector<FrameId> open;
  std::unordered_set<FrameId> open_set;
  FrameId last_frame = kNoFrame;
  for (std::size_t i = 0; i < trace.events.size(); ++i) {
    const TraceEvent& event = trace.events[i];
    if (event.seq != static_cast<Seq>(i + 1)) {
      malformed(event.seq, "expected seq " + std::to_string(i + 1));
    }
    if (const auto* enter = event.enter()) {
      if (i == 0) {
        if (enter->frame != kRootFrame || enter->parent != kNoFrame) {
          malformed(event.seq, "trace must start by entering root frame 0");
        }
      } else if (open.empty()) {
        malformed(event.seq, "enter after the root frame was closed");
      } else if (enter->parent != open.back()) {
        malformed(event.seq, "parent " + std::to_string(enter->parent) + " is not the innermost open frame");
      }
      if (enter->frame <= last_frame) {
        malformed(event.seq, "frame ids must increase in enter order");
      }
      if (!enter->method) {
        malformed(event.seq, "enter without method");
      }
      last_frame = enter->frame;
      open.push_back(enter->frame);
      open_set.insert(enter->frame);
    } else if (const auto* exit = event.exit()) {
      if (open.empty() || open.back() != exit->frame) {
        malformed(event.seq, "exit of frame " + std::to_string(exit->frame) + " does not match innermost open frame");
      }
      open.pop_back();
      open_set.erase(exit->frame);
    } else if (const auto* hit = event.probe()) {
      if (!open_set.contains(hit->frame)) {
        malformed(event.seq, "probe hit in frame " + std::to_string(hit->frame) + " which is not open");
      }
      if (!hit->probe_id) {
        malformed(event.seq, "probe hit without probe id");
      }
    }
  }
  if (!open.empty()) {
    throw Error(ErrorCode::MalformedTrace,
                "trace ends with " + std::to_string(open.size()) + " frame(s) still open");
  }
}

} // namespace crosscut::trace
