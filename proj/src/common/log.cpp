#include "common/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <string>

namespace gccnmf {

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("GCCNMF_LOG_LEVEL");
    const std::string v = env ? env : "";
    if (v == "error") return LogLevel::kError;
    if (v == "info") return LogLevel::kInfo;
    if (v == "debug") return LogLevel::kDebug;
    return LogLevel::kWarn;
  }();
  return level;
}

void log(LogLevel level, std::string_view message) {
  if (level > log_level()) return;
  static constexpr const char* kNames[] = {"error", "warn", "info", "debug"};
  static std::mutex mutex;
  std::lock_guard lock(mutex);
  std::fprintf(stderr, "[gccnmf %s] %.*s\n", kNames[static_cast<int>(level)],
               static_cast<int>(message.size()), message.data());
}

}  // namespace gccnmf
