#pragma once

#include <stdexcept>
#include <string>

namespace slelab {

// Error taxonomy shared by the C API and the CLI exit codes.
enum class ErrorCode {
    InvalidArgument = 2,  // bad parameters, schema violations
    NumericFailure  = 3,  // budget exceeded, escaped SDE, swallowed point
    Partial         = 4,  // some cells failed but partial results persisted
    Io              = 5,
};

class SlelabError : public std::runtime_error {
public:
    SlelabError(ErrorCode code, const std::string& msg)
        : std::runtime_error(msg), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail_invalid(const std::string& msg) {
    throw SlelabError(ErrorCode::InvalidArgument, msg);
}
[[noreturn]] inline void fail_numeric(const std::string& msg) {
    throw SlelabError(ErrorCode::NumericFailure, msg);
}
[[noreturn]] inline void fail_io(const std::string& msg) {
    throw SlelabError(ErrorCode::Io, msg);
}

}  // namespace slelab
