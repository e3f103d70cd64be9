#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cflevels {

/// Base class for every error raised by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input data problems: corrupt files, ratings outside the declared scale.
class data_error : public error {
public:
    using error::error;
};

/// Caller misuse: bad parameters, unknown identifiers, datasets too small for an operation.
class usage_error : public error {
public:
    using error::error;
};

class out_of_scale_rating : public data_error {
public:
    out_of_scale_rating(double value, double rmin, double rmax, std::size_t line = 0)
        : data_error(format(value, rmin, rmax, line)), line_(line) {}

    /// 1-based source line, or 0 when the rating did not come from a file.
    std::size_t line() const noexcept { return line_; }

private:
    static std::string format(double value, double rmin, double rmax, std::size_t line)
    {
        std::string msg = "rating " + std::to_string(value) + " outside scale [" +
                          std::to_string(rmin) + ", " + std::to_string(rmax) + "]";
        if (line != 0) msg = "line " + std::to_string(line) + ": " + msg;
        return msg;
    }

    std::size_t line_;
};

class malformed_line : public data_error {
public:
    malformed_line(std::size_t line, const std::string& reason)
        : data_error("line " + std::to_string(line) + ": " + reason), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class unknown_user : public usage_error {
public:
    explicit unknown_user(const std::string& id) : usage_error("unknown user '" + id + "'") {}
};

class empty_set : public usage_error {
public:
    using usage_error::usage_error;
};

class empty_input : public usage_error {
public:
    using usage_error::usage_error;
};

class too_few_users : public usage_error {
public:
    explicit too_few_users(std::size_t count)
        : usage_error("level derivation needs at least 10 users, dataset has " +
                      std::to_string(count)) {}
};

class too_few_items : public usage_error {
public:
    explicit too_few_items(std::size_t count)
        : usage_error("level derivation needs at least 2 items, dataset has " +
                      std::to_string(count)) {}
};

class fingerprint_mismatch : public usage_error {
public:
    fingerprint_mismatch(const std::string& expected, const std::string& actual)
        : usage_error("similarity cache fingerprint mismatch: expected '" + expected +
                      "', found '" + actual + "'") {}
};

class invalid_argument : public usage_error {
public:
    using usage_error::usage_error;
};

}  // namespace cflevels
