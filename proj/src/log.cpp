#include "vair/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace vair {

namespace {

LogLevel parse_env_level() {
  const char* env = std::getenv("VAIR_LOG");
  if (!env) return LogLevel::kInfo;
  if (std::strcmp(env, "error") == 0) return LogLevel::kError;
  if (std::strcmp(env, "warn") == 0) return LogLevel::kWarn;
  if (std::strcmp(env, "info") == 0) return LogLevel::kInfo;
  if (std::strcmp(env, "debug") == 0) return LogLevel::kDebug;
  return LogLevel::kInfo;
}

LogLevel g_level = parse_env_level();

const char* tag(LogLevel lv) {
  switch (lv) {
    case LogLevel::kError: return "error";
    case LogLevel::kWarn: return "warn";
    case LogLevel::kInfo: return "info";
    case LogLevel::kDebug: return "debug";
  }
  return "?";
}

}  // namespace

LogLevel log_level() { return g_level; }
void set_log_level(LogLevel lv) { g_level = lv; }

void log_line(LogLevel lv, const std::string& msg) {
  if (static_cast<int>(lv) > static_cast<int>(g_level)) return;
  std::fprintf(stderr, "[%s] %s\n", tag(lv), msg.c_str());
}

}  // namespace vair
