#pragma once

#include <string_view>

namespace gccnmf {

enum class LogLevel { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

// Threshold comes from GCCNMF_LOG_LEVEL (error|warn|info|debug), default warn.
LogLevel log_level();
void log(LogLevel level, std::string_view message);

}  // namespace gccnmf
