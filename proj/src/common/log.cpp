#include "abandon/common/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

#include <json.hpp>

namespace abandon::log {

namespace {
std::atomic<bool> g_json{false};
std::atomic<bool> g_quiet{false};
std::atomic<int> g_level{static_cast<int>(Level::Info)};
std::mutex g_mutex;

const char* level_name(Level l) {
  switch (l) {
    case Level::Debug: return "debug";
    case Level::Info: return "info";
    case Level::Warn: return "warn";
    case Level::Error: return "error";
  }
  return "info";
}
}  // namespace

void set_json(bool enabled) { g_json = enabled; }
void set_level(Level level) { g_level = static_cast<int>(level); }
void set_quiet(bool quiet) { g_quiet = quiet; }

void write(Level level, const std::string& message, const std::vector<Field>& fields) {
  if (g_quiet || static_cast<int>(level) < g_level) return;
  std::lock_guard lock(g_mutex);
  if (g_json) {
    nlohmann::ordered_json j;
    j["level"] = level_name(level);
    j["msg"] = message;
    for (const auto& f : fields) j[f.key] = f.value;
    std::cerr << j.dump() << '\n';
  } else {
    std::cerr << '[' << level_name(level) << "] " << message;
    for (const auto& f : fields) std::cerr << ' ' << f.key << '=' << f.value;
    std::cerr << '\n';
  }
}

}  // namespace abandon::log
