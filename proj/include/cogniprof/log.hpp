#pragma once

#include <functional>
#include <string_view>

// Minimal process-wide logger. The default sink writes warnings to stderr;
// tests and embedders may install their own sink.
namespace cogniprof::log {

enum class Level { debug, info, warn };

using Sink = std::function<void(Level, std::string_view)>;

void set_sink(Sink sink);
void reset_sink();
void set_min_level(Level level);

void write(Level level, std::string_view message);
inline void debug(std::string_view m) { write(Level::debug, m); }
inline void info(std::string_view m) { write(Level::info, m); }
inline void warn(std::string_view m) { write(Level::warn, m); }

}  // namespace cogniprof::log
