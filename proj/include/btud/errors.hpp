#pragma once

#include <stdexcept>
#include <string>

namespace btud {

/// Invalid arguments or violated preconditions.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Non-finite values, divergence, or a solver that cannot proceed.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A Gram-Schmidt step left a row with (numerically) zero norm.
class DegenerateRowError : public NumericalError {
public:
    DegenerateRowError(long row, const std::string& what)
        : NumericalError(what), row_(row) {}
    long row() const noexcept { return row_; }

private:
    long row_;
};

/// btud_fit could not orthonormalize component `component` (0-based) of `mode` (1-based).
class DegenerateComponentError : public NumericalError {
public:
    DegenerateComponentError(int mode, long component, const std::string& what)
        : NumericalError(what), mode_(mode), component_(component) {}
    int mode() const noexcept { return mode_; }
    long component() const noexcept { return component_; }

private:
    int mode_;
    long component_;
};

/// Zero or negative posterior variance for a component used in a chi-squared statistic.
class DegenerateVarianceError : public NumericalError {
public:
    DegenerateVarianceError(long component, const std::string& what)
        : NumericalError(what), component_(component) {}
    long component() const noexcept { return component_; }

private:
    long component_;
};

class OptimizationFailedError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DivergenceError : public NumericalError {
public:
    DivergenceError(long step, const std::string& what) : NumericalError(what), step_(step) {}
    long step() const noexcept { return step_; }

private:
    long step_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace btud
