#ifndef NESTNER_LOG_HPP
#define NESTNER_LOG_HPP

#include <cstddef>
#include <functional>
#include <string>

namespace nestner::log {

enum class Level { debug, info, warning, error };

using Sink = std::function<void(Level, const std::string&)>;

/// Replaces the process-wide sink (default: stderr for warnings and above).
/// Passing an empty function restores the default. Returns the previous sink.
Sink set_sink(Sink sink);

void write(Level level, const std::string& message);
inline void info(const std::string& message) { write(Level::info, message); }
inline void warning(const std::string& message) { write(Level::warning, message); }

/// Number of warnings emitted since start (or since the last reset).
std::size_t warning_count();
void reset_warning_count();

}  // namespace nestner::log

#endif  // NESTNER_LOG_HPP
