#pragma once

#include <stdexcept>
#include <string>

namespace socratic {

/// Root of every error raised by the library. `code()` is a stable
/// machine-readable identifier used in logs and HTTP error bodies.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

#define SOCRATIC_DEFINE_ERROR(Name, Base)                                    \
    class Name : public Base {                                               \
    public:                                                                  \
        explicit Name(const std::string& message) : Base(#Name, message) {}  \
                                                                             \
    protected:                                                               \
        Name(std::string code, const std::string& message)                   \
            : Base(std::move(code), message) {}                             \
    };

SOCRATIC_DEFINE_ERROR(ValidationError, Error)
SOCRATIC_DEFINE_ERROR(TemplateError, Error)

// llm gateway
SOCRATIC_DEFINE_ERROR(BackendError, Error)
SOCRATIC_DEFINE_ERROR(BackendUnavailable, BackendError)
SOCRATIC_DEFINE_ERROR(InvalidCredential, BackendError)
SOCRATIC_DEFINE_ERROR(ScriptExhausted, BackendError)
SOCRATIC_DEFINE_ERROR(ScriptMismatch, BackendError)
SOCRATIC_DEFINE_ERROR(ResponseEmpty, BackendError)
SOCRATIC_DEFINE_ERROR(BudgetExceeded, Error)

// agent replies
SOCRATIC_DEFINE_ERROR(UnparsableReply, Error)
SOCRATIC_DEFINE_ERROR(EmptyFeedback, Error)
SOCRATIC_DEFINE_ERROR(JudgeProtocolError, Error)

// analytics
SOCRATIC_DEFINE_ERROR(EmptyCell, Error)
SOCRATIC_DEFINE_ERROR(MissingCell, Error)

// service
SOCRATIC_DEFINE_ERROR(NotFound, Error)
SOCRATIC_DEFINE_ERROR(CycleStillRunning, Error)
SOCRATIC_DEFINE_ERROR(SessionClosed, Error)
SOCRATIC_DEFINE_ERROR(StoreError, Error)

#undef SOCRATIC_DEFINE_ERROR

}  // namespace socratic
