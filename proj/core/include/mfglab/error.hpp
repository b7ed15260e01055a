#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mfglab {

enum class ErrorKind {
    InvalidArgument,  // bad configuration or precondition violation
    GridMismatch,
    NonConvergence,
    NumericRange,     // overflow, blow-up, or a guard on the representable range
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class NonConvergenceError : public Error {
public:
    NonConvergenceError(const std::string& what, std::vector<double> history)
        : Error(ErrorKind::NonConvergence, what), history_(std::move(history)) {}
    const std::vector<double>& history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, const std::string& what) {
    if (!condition) fail(ErrorKind::InvalidArgument, what);
}

}  // namespace mfglab
