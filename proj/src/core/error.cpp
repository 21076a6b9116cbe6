#include "cogniprof/error.hpp"
#include "cogniprof/log.hpp"

#include <iostream>
#include <mutex>

namespace cogniprof {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::io: return "io";
    case ErrorCode::parse: return "parse";
    case ErrorCode::validation: return "validation";
    case ErrorCode::lookup: return "lookup";
    case ErrorCode::argument: return "argument";
    case ErrorCode::version: return "version";
    case ErrorCode::checksum: return "checksum";
    case ErrorCode::state: return "state";
    case ErrorCode::numeric: return "numeric";
  }
  return "unknown";
}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

namespace log {
namespace {

struct LoggerState {
  std::mutex mutex;
  Sink sink;
  Level min_level = Level::warn;
};

LoggerState& state() {
  static LoggerState s;
  return s;
}

const char* level_name(Level level) {
  switch (level) {
    case Level::debug: return "debug";
    case Level::info: return "info";
    case Level::warn: return "warn";
  }
  return "?";
}

}  // namespace

void set_sink(Sink sink) {
  std::lock_guard lock(state().mutex);
  state().sink = std::move(sink);
}

void reset_sink() { set_sink(nullptr); }

void set_min_level(Level level) {
  std::lock_guard lock(state().mutex);
  state().min_level = level;
}

void write(Level level, std::string_view message) {
  auto& s = state();
  std::lock_guard lock(s.mutex);
  if (s.sink) {
    s.sink(level, message);
    return;
  }
  if (level < s.min_level) return;
  std::cerr << "[cogniprof " << level_name(level) << "] " << message << '\n';
}

}  // namespace log
}  // namespace cogniprof
