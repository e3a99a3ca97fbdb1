#pragma once

#include <stdexcept>
#include <string>

namespace pat {

// Base for every error the library raises.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid parameters or inconsistent configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Array or operator dimensions that do not agree.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Filesystem failure while reading or writing.
class PersistenceError : public Error {
public:
    PersistenceError(const std::string& what, std::string path)
        : Error(what + ": " + path), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

// Malformed file contents. field() names the part that failed validation.
class FormatError : public Error {
public:
    FormatError(std::string field, const std::string& detail)
        : Error("format error (" + field + "): " + detail), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// Iterative solver failed to reach its tolerance.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace pat
