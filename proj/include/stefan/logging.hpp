#pragma once

#include <cstdlib>
#include <iostream>
#include <string>

namespace stefan {

// Leveled diagnostics on stderr, gated by STEFAN_LOG_LEVEL in
// {error, warn, info, debug}; the default is warn.  Data outputs go to
// files or stdout, so logging never contaminates machine-readable streams.

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

inline LogLevel log_threshold() {
    static const LogLevel cached = [] {
        const char* env = std::getenv("STEFAN_LOG_LEVEL");
        if (!env) return LogLevel::Warn;
        const std::string v(env);
        if (v == "error") return LogLevel::Error;
        if (v == "warn") return LogLevel::Warn;
        if (v == "info") return LogLevel::Info;
        if (v == "debug") return LogLevel::Debug;
        return LogLevel::Warn;
    }();
    return cached;
}

inline void log(LogLevel level, const std::string& msg) {
    if (level > log_threshold()) return;
    const char* tag = level == LogLevel::Error  ? "error"
                      : level == LogLevel::Warn ? "warn"
                      : level == LogLevel::Info ? "info"
                                                : "debug";
    std::cerr << "[" << tag << "] " << msg << "\n";
}

inline void log_error(const std::string& msg) { log(LogLevel::Error, msg); }
inline void log_warn(const std::string& msg) { log(LogLevel::Warn, msg); }
inline void log_info(const std::string& msg) { log(LogLevel::Info, msg); }
inline void log_debug(const std::string& msg) { log(LogLevel::Debug, msg); }

}  // namespace stefan
