#pragma once

#include <sstream>
#include <string>

namespace vair {

enum class LogLevel { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

// Level comes from VAIR_LOG (error|warn|info|debug), default info.
LogLevel log_level();
void set_log_level(LogLevel lv);
void log_line(LogLevel lv, const std::string& msg);

namespace detail {
template <typename... Args>
std::string cat(Args&&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}
}  // namespace detail

template <typename... Args>
void log_error(Args&&... args) {
  log_line(LogLevel::kError, detail::cat(std::forward<Args>(args)...));
}
template <typename... Args>
void log_warn(Args&&... args) {
  log_line(LogLevel::kWarn, detail::cat(std::forward<Args>(args)...));
}
template <typename... Args>
void log_info(Args&&... args) {
  log_line(LogLevel::kInfo, detail::cat(std::forward<Args>(args)...));
}
template <typename... Args>
void log_debug(Args&&... args) {
  log_line(LogLevel::kDebug, detail::cat(std::forward<Args>(args)...));
}

}  // namespace vair
