#include "crosscut/session/watcher.hpp"

#include <fstream>
#include <iterator>

namespace crosscut::session {

namespace fs = std::filesystem;

FileWatcher::FileWatcher(std::shared_ptr<Session> session, std::chrono::milliseconds debounce,
                         std::chrono::milliseconds poll, Reporter reporter)
    : session_(std::move(session)), root_(session_->state()->root), debounce_(debounce), poll_(poll),
      reporter_(std::move(reporter)) {
  known_ = scan();
}

FileWatcher::~FileWatcher() { stop(); }

void FileWatcher::start() {
  if (thread_.joinable()) return;
  stopping_ = false;
  thread_ = std::thread([this] { loop(); });
}

void FileWatcher::stop() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  wake_.notify_all();
  if (thread_.joinable()) thread_.join();
}

std::map<std::string, FileWatcher::Stamp> FileWatcher::scan() const {
  std::map<std::string, Stamp> out;
  std::error_code ec;
  for (auto it = fs::recursive_directory_iterator(root_, ec); !ec && it != fs::recursive_directory_iterator();
       it.increment(ec)) {
    const auto& path = it->path();
    if (!it->is_regular_file(ec) || (path.extension() != ".cc" && path.filename() != kConfigFile)) continue;
    std::error_code stat_ec;
    const auto mtime = fs::last_write_time(path, stat_ec);
    const auto size = fs::file_size(path, stat_ec);
    std::ifstream in(path, std::ios::binary);
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (!stat_ec) out[fs::relative(path, root_).generic_string()] = {mtime, size, std::hash<std::string>{}(text)};
  }
  return out;
}

bool FileWatcher::poll_once(Clock::time_point now) {
  auto current = scan();
  if (current != known_) {
    for (const auto& [path, stamp] : current) {
      auto it = known_.find(path);
      if (it == known_.end() || it->second != stamp) pending_path_ = path;
    }
    for (const auto& [path, stamp] : known_) {
      if (current.count(path) == 0) pending_path_ = path;
    }
    known_ = std::move(current);
    last_change_ = now;
    return false;
  }
  if (!last_change_ || now - *last_change_ < debounce_) return false;
  last_change_.reset();
  try {
    const auto ids = session_->notify_change(pending_path_);
    if (reporter_) reporter_(ids, {});
  } catch (const std::exception& e) {
    if (reporter_) reporter_({}, e.what());
  }
  return true;
}

void FileWatcher::loop() {
  std::unique_lock lock(mutex_);
  while (!stopping_) {
    lock.unlock();
    poll_once(Clock::now());
    lock.lock();
    wake_.wait_for(lock, poll_, [this] { return stopping_; });
  }
}

} // namespace crosscut::session
