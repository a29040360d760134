#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tsmeta {

/// Broad failure category; the CLI maps these onto exit codes.
enum class ErrorKind { config, data, internal };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Invalid arguments or configuration supplied by the caller.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

/// Input data violates a precondition (too short, degenerate, missing records...).
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class ParseError : public DataError {
public:
    ParseError(const std::string& file, std::size_t line, const std::string& what)
        : DataError(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class InsufficientLengthError : public DataError {
public:
    InsufficientLengthError(std::size_t have, std::size_t need)
        : DataError("series too short: length " + std::to_string(have) + ", minimum required " +
                    std::to_string(need)),
          required_(need) {}
    std::size_t required() const noexcept { return required_; }

private:
    std::size_t required_;
};

/// A numerical fit could not produce a usable model.
class FitError : public Error {
public:
    explicit FitError(const std::string& what) : Error(ErrorKind::internal, what) {}
};

} // namespace tsmeta
