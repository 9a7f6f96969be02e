#pragma once

#include <string>
#include <utility>
#include <vector>

namespace abandon::log {

enum class Level { Debug, Info, Warn, Error };

struct Field {
  std::string key;
  std::string value;
};

void set_json(bool enabled);
void set_level(Level level);
// Silences all output; used by tests.
void set_quiet(bool quiet);

void write(Level level, const std::string& message, const std::vector<Field>& fields = {});
inline void info(const std::string& m, const std::vector<Field>& f = {}) { write(Level::Info, m, f); }
inline void warn(const std::string& m, const std::vector<Field>& f = {}) { write(Level::Warn, m, f); }
inline void error(const std::string& m, const std::vector<Field>& f = {}) { write(Level::Error, m, f); }
inline void debug(const std::string& m, const std::vector<Field>& f = {}) { write(Level::Debug, m, f); }

}  // namespace abandon::log
