#pragma once

#include <string>

namespace pnp {

enum class LogLevel { error = 0, info = 1, debug = 2 };

/// Level from the PNP_LOG environment variable (error|info|debug); default info.
LogLevel log_level();
void set_log_level(LogLevel level);

void log_error(const std::string& msg);
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace pnp
