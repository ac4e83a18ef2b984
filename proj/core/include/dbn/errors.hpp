#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dbn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Elimination hit a pivot below the singularity threshold.
class SingularMatrixError : public Error {
public:
    SingularMatrixError(std::size_t pivot_index, double pivot)
        : Error("singular tridiagonal system: pivot " + std::to_string(pivot) +
                " at row " + std::to_string(pivot_index)),
          pivot_index_(pivot_index), pivot_(pivot) {}

    std::size_t pivot_index() const noexcept { return pivot_index_; }
    double pivot() const noexcept { return pivot_; }

private:
    std::size_t pivot_index_;
    double pivot_;
};

/// Sherman-Morrison denominator 1 + gamma v^T B^{-1} u vanished.
class SingularUpdateError : public Error {
public:
    explicit SingularUpdateError(double denominator)
        : Error("singular rank-one update: denominator " + std::to_string(denominator)),
          denominator_(denominator) {}

    double denominator() const noexcept { return denominator_; }

private:
    double denominator_;
};

/// Structural hypotheses of an alpha-beta matrix do not hold.
class HypothesisError : public Error {
public:
    using Error::Error;
};

/// A configuration value failed validation; carries the offending field name.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& message)
        : Error(field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace dbn
