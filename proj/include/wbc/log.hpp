#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace wbc::log {

enum Level { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

// Level comes from WBC_LOG_LEVEL (error|warn|info|debug), default info.
inline Level threshold() {
  static Level lvl = [] {
    const char* e = std::getenv("WBC_LOG_LEVEL");
    if (!e) return kInfo;
    if (!std::strcmp(e, "error")) return kError;
    if (!std::strcmp(e, "warn")) return kWarn;
    if (!std::strcmp(e, "debug")) return kDebug;
    return kInfo;
  }();
  return lvl;
}

template <typename... Args>
void emit(Level lvl, const char* tag, const char* fmt, Args... args) {
  if (lvl > threshold()) return;
  std::fprintf(stderr, "[%s] ", tag);
  std::fprintf(stderr, fmt, args...);
  std::fprintf(stderr, "\n");
}

#define WBC_LOG_ERROR(...) ::wbc::log::emit(::wbc::log::kError, "error", __VA_ARGS__)
#define WBC_LOG_WARN(...) ::wbc::log::emit(::wbc::log::kWarn, "warn", __VA_ARGS__)
#define WBC_LOG_INFO(...) ::wbc::log::emit(::wbc::log::kInfo, "info", __VA_ARGS__)
#define WBC_LOG_DEBUG(...) ::wbc::log::emit(::wbc::log::kDebug, "debug", __VA_ARGS__)

}  // namespace wbc::log
