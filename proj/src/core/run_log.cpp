#include "socratic/run_log.hpp"

#include <algorithm>
#include <ostream>

namespace socratic {

void RunLog::info(std::string code, std::string message) {
    append({"info", std::move(code), std::move(message)});
}

void RunLog::warn(std::string code, std::string message) {
    append({"warn", std::move(code), std::move(message)});
}

void RunLog::append(LogRecord record) {
    std::lock_guard lock(mutex_);
    if (echo_ != nullptr) {
        *echo_ << "[" << record.level << "] " << record.code << ": " << record.message << '\n';
    }
    records_.push_back(std::move(record));
}

std::vector<LogRecord> RunLog::records() const {
    std::lock_guard lock(mutex_);
    return records_;
}

bool RunLog::contains(std::string_view code) const {
    std::lock_guard lock(mutex_);
    return std::any_of(records_.begin(), records_.end(),
                       [&](const LogRecord& r) { return r.code == code; });
}

}  // namespace socratic
