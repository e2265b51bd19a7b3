#pragma once

#include <iosfwd>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace socratic {

struct LogRecord {
    std::string level;  // "info" | "warn"
    std::string code;
    std::string message;
};

/// Thread-safe sink for run-level diagnostics that are not errors: ablation
/// warnings, soft rule violations, drift flags. Optionally echoes to a stream.
class RunLog {
public:
    RunLog() = default;
    explicit RunLog(std::ostream* echo) : echo_(echo) {}

    void info(std::string code, std::string message);
    void warn(std::string code, std::string message);

    std::vector<LogRecord> records() const;
    bool contains(std::string_view code) const;

private:
    void append(LogRecord record);

    mutable std::mutex mutex_;
    std::vector<LogRecord> records_;
    std::ostream* echo_ = nullptr;
};

}  // namespace socratic
