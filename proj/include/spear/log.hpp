#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace spear::log {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

/// Log level from SPEAR_LOG (error|warn|info|debug), default warn.
inline Level level() {
    static Level lv = [] {
        const char* env = std::getenv("SPEAR_LOG");
        if (env == nullptr) return Level::Warn;
        if (std::strcmp(env, "error") == 0) return Level::Error;
        if (std::strcmp(env, "info") == 0) return Level::Info;
        if (std::strcmp(env, "debug") == 0) return Level::Debug;
        return Level::Warn;
    }();
    return lv;
}

inline void emit(Level lv, const char* tag, const std::string& msg) {
    if (lv <= level()) std::fprintf(stderr, "spear [%s] %s\n", tag, msg.c_str());
}

inline void error(const std::string& msg) { emit(Level::Error, "error", msg); }
inline void warn(const std::string& msg) { emit(Level::Warn, "warn", msg); }
inline void info(const std::string& msg) { emit(Level::Info, "info", msg); }
inline void debug(const std::string& msg) { emit(Level::Debug, "debug", msg); }

}  // namespace spear::log
