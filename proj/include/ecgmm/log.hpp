#pragma once

#include <cstdio>
#include <utility>

#include <fmt/core.h>

namespace ecgmm {

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

// Level read once from ECGMM_LOG (debug|info|warn|error|off); default warn.
LogLevel log_level();
void set_log_level(LogLevel level);

template <class... Args>
void log_at(LogLevel level, const char* tag, fmt::format_string<Args...> f, Args&&... args) {
  if (level < log_level()) return;
  fmt::print(stderr, "[ecgmm {}] {}\n", tag, fmt::format(f, std::forward<Args>(args)...));
}

template <class... Args>
void log_debug(fmt::format_string<Args...> f, Args&&... args) {
  log_at(LogLevel::debug, "debug", f, std::forward<Args>(args)...);
}
template <class... Args>
void log_info(fmt::format_string<Args...> f, Args&&... args) {
  log_at(LogLevel::info, "info", f, std::forward<Args>(args)...);
}
template <class... Args>
void log_warn(fmt::format_string<Args...> f, Args&&... args) {
  log_at(LogLevel::warn, "warn", f, std::forward<Args>(args)...);
}
template <class... Args>
void log_error(fmt::format_string<Args...> f, Args&&... args) {
  log_at(LogLevel::error, "error", f, std::forward<Args>(args)...);
}

}  // namespace ecgmm
