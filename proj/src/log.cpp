#include "nestner/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace nestner::log {
namespace {

std::mutex sink_mutex;
Sink current_sink;
std::atomic<std::size_t> warnings{0};

void default_sink(Level level, const std::string& message) {
  if (level < Level::warning) return;
  std::cerr << (level == Level::warning ? "warning: " : "error: ") << message << '\n';
}

}  // namespace

Sink set_sink(Sink sink) {
  std::lock_guard lock(sink_mutex);
  std::swap(current_sink, sink);
  return sink;
}

void write(Level level, const std::string& message) {
  if (level == Level::warning) ++warnings;
  std::lock_guard lock(sink_mutex);
  if (current_sink)
    current_sink(level, message);
  else
    default_sink(level, message);
}

std::size_t warning_count() { return warnings.load(); }
void reset_warning_count() { warnings = 0; }

}  // namespace nestner::log
