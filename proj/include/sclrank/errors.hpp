#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sclrank {

/// Malformed input; carries the 1-based line number when known (0 otherwise).
class ParseError : public std::runtime_error {
public:
    ParseError(std::string const& source, std::size_t line, std::string const& what)
        : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string{}) +
                             ": " + what),
          line_(line)
    {
    }

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Well-formed input that violates a data invariant (duplicate ids, bad ranks, ...).
class ValidationError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Out-of-range or inconsistent configuration values.
class ConfigError : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Non-finite values appearing during a forward, backward or optimizer pass.
class NumericError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when a triple cannot be augmented; callers skip the triple.
class SkipAugmentation : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace sclrank
