#pragma once

#include <stdexcept>
#include <string>

namespace wavechaos {

/// Base of every error raised by the library. `kind()` is a stable,
/// machine-readable tag that the CLI forwards in its error records.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

struct InvalidArgument : Error {
    explicit InvalidArgument(const std::string& what) : Error("invalid-argument", what) {}
};

struct OutOfRange : Error {
    explicit OutOfRange(const std::string& what) : Error("out-of-range", what) {}
};

struct NumericFailure : Error {
    explicit NumericFailure(const std::string& what) : Error("numeric-failure", what) {}
};

struct ResourceLimit : Error {
    explicit ResourceLimit(const std::string& what) : Error("resource-limit", what) {}
};

struct UndefinedStatistic : Error {
    explicit UndefinedStatistic(const std::string& what) : Error("undefined-statistic", what) {}
};

struct InvalidState : Error {
    explicit InvalidState(const std::string& what) : Error("invalid-state", what) {}
};

/// Malformed input file. Carries the offending file and 1-based line.
struct ParseError : Error {
    ParseError(const std::string& file, std::size_t line, const std::string& what)
        : Error("parse-error", file + ":" + std::to_string(line) + ": " + what),
          file_(file), line_(line) {}

    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

}  // namespace wavechaos
