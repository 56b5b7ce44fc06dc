#pragma once

#include <stdexcept>
#include <string>

namespace lobq {

// Error categories map onto the CLI exit-code contract:
// parameter -> 2, convergence/truncation -> 3, io -> 4.
enum class ErrorCategory { parameter, convergence, truncation, io };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

    int exit_code() const noexcept {
        switch (category_) {
            case ErrorCategory::parameter: return 2;
            case ErrorCategory::convergence: return 3;
            case ErrorCategory::truncation: return 3;
            case ErrorCategory::io: return 4;
        }
        return 1;
    }

    const char* category_name() const noexcept {
        switch (category_) {
            case ErrorCategory::parameter: return "parameter";
            case ErrorCategory::convergence: return "convergence";
            case ErrorCategory::truncation: return "truncation";
            case ErrorCategory::io: return "io";
        }
        return "unknown";
    }

private:
    ErrorCategory category_;
};

class ParameterError : public Error {
public:
    explicit ParameterError(const std::string& what)
        : Error(ErrorCategory::parameter, what) {}
};

class ConvergenceError : public Error {
public:
    explicit ConvergenceError(const std::string& what)
        : Error(ErrorCategory::convergence, what) {}
};

class TruncationError : public Error {
public:
    explicit TruncationError(const std::string& what)
        : Error(ErrorCategory::truncation, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what)
        : Error(ErrorCategory::io, what) {}
};

// Parse failure in an input file; carries the 1-based line number.
class ParseError : public IoError {
public:
    ParseError(std::size_t line, const std::string& what)
        : IoError("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace lobq
