#include "graphlearn/logging.hpp"

#include <cstdlib>
#include <memory>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace graphlearn::log {
namespace {

std::shared_ptr<spdlog::logger> logger() {
  static const std::shared_ptr<spdlog::logger> instance = [] {
    auto l = spdlog::stderr_color_mt("graphlearn");
    l->set_pattern("[%l] %v");
    l->set_level(spdlog::level::warn);
    if (const char* env = std::getenv("GRAPHLEARN_LOG")) {
      l->set_level(spdlog::level::from_str(env));
    }
    return l;
  }();
  return instance;
}

}  // namespace

void debug(std::string_view message) { logger()->debug(message); }
void info(std::string_view message) { logger()->info(message); }
void warn(std::string_view message) { logger()->warn(message); }

}  // namespace graphlearn::log
