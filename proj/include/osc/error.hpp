#pragma once

#include <stdexcept>
#include <string>

namespace osc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter violates its documented range (negative slope, ramp longer than the vector, ...).
class InvalidParameters : public Error {
public:
    using Error::Error;
};

/// Operand sizes do not agree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Input data is malformed: non-finite values, wrong normalization, empty graph.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Equality-constrained problem has no feasible point.
class InfeasibleError : public Error {
public:
    explicit InfeasibleError(double residual)
        : Error("target is not in the column span of the design (least-squares residual "
                + std::to_string(residual) + ")"),
          residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Malformed text input; carries the 1-based row where parsing stopped.
class ParseError : public Error {
public:
    ParseError(const std::string& path, std::size_t row, const std::string& what)
        : Error(path + ":" + std::to_string(row) + ": " + what), row_(row) {}

    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace osc
