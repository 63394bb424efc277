#pragma once

#include <string_view>

namespace graphlearn::log {

// Level comes from GRAPHLEARN_LOG (trace, debug, info, warn, error, off).
// Defaults to warn.
void debug(std::string_view message);
void info(std::string_view message);
void warn(std::string_view message);

}  // namespace graphlearn::log
