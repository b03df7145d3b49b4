#pragma once

#include "crosscut/session/session.hpp"

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <tuple>

namespace crosscut::session {

// Polls the session root for changed, added or removed .cc files (and the
// config file) and calls notify_change once edits have been quiet for the
// debounce interval.
class FileWatcher {
public:
  using Clock = std::chrono::steady_clock;
  // Receives the outcome of each reload: new run ids, or the error message.
  using Reporter = std::function<void(const std::vector<std::string>& run_ids, const std::string& error)>;

  explicit FileWatcher(std::shared_ptr<Session> session, std::chrono::milliseconds debounce = std::chrono::milliseconds(150),
                       std::chrono::milliseconds poll = std::chrono::milliseconds(25), Reporter reporter = {});
  ~FileWatcher();

  FileWatcher(const FileWatcher&) = delete;
  FileWatcher& operator=(const FileWatcher&) = delete;

  void start();
  void stop();

  // One polling step, exposed for tests. Returns true if a reload ran.
  bool poll_once(Clock::time_point now);

private:
  // mtime and size alone miss same-size edits within one timestamp tick
  using Stamp = std::tuple<std::filesystem::file_time_type, std::uintmax_t, std::size_t>;
  std::map<std::string, Stamp> scan() const;
  void loop();

  std::shared_ptr<Session> session_;
  std::filesystem::path root_;
  std::chrono::milliseconds debounce_;
  std::chrono::milliseconds poll_;
  Reporter reporter_;

  std::map<std::string, Stamp> known_;
  std::string pending_path_;
  std::optional<Clock::time_point> last_change_;

  std::mutex mutex_;
  std::condition_variable wake_;
  bool stopping_ = false;
  std::thread thread_;
};

} // namespace crosscut::session
