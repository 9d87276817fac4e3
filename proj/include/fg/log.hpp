#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace fg::log {

enum class Level { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

// Level comes from FORCEGRASP_LOG (debug|info|warn|error|off); default info.
inline Level threshold() {
  static Level lvl = [] {
    const char* env = std::getenv("FORCEGRASP_LOG");
    if (!env) return Level::info;
    if (!std::strcmp(env, "debug")) return Level::debug;
    if (!std::strcmp(env, "info")) return Level::info;
    if (!std::strcmp(env, "warn")) return Level::warn;
    if (!std::strcmp(env, "error")) return Level::error;
    if (!std::strcmp(env, "off")) return Level::off;
    return Level::info;
  }();
  return lvl;
}

template <typename... Args>
inline void emit(Level lvl, const char* tag, const char* fmt, Args... args) {
  if (lvl < threshold()) return;
  std::fprintf(stderr, "[%s] ", tag);
  if constexpr (sizeof...(Args) == 0) {
    std::fputs(fmt, stderr);
  } else {
    std::fprintf(stderr, fmt, args...);
  }
  std::fputc('\n', stderr);
}

template <typename... Args>
inline void debug(const char* fmt, Args... args) { emit(Level::debug, "debug", fmt, args...); }
template <typename... Args>
inline void info(const char* fmt, Args... args) { emit(Level::info, "info", fmt, args...); }
template <typename... Args>
inline void warn(const char* fmt, Args... args) { emit(Level::warn, "warn", fmt, args...); }
template <typename... Args>
inline void error(const char* fmt, Args... args) { emit(Level::error, "error", fmt, args...); }

}  // namespace fg::log
