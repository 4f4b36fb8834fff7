#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

// Error taxonomy shared by every module. The command line tool maps these
// onto its stable exit-code contract: DomainError -> 1, NumericalError and
// its descendants -> 2, IoError -> 3.

namespace fracsde {

// Inputs violate a documented precondition: bad Hurst index, off-grid time,
// mismatched grids, order outside (0,1), and so on.
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// A computation started from valid inputs but could not complete.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Cholesky factorization hit a non-positive pivot; pivot() names the row.
class FactorizationError : public NumericalError {
public:
    FactorizationError(const std::string& msg, std::size_t pivot)
        : NumericalError(msg), pivot_(pivot) {}
    std::size_t pivot() const noexcept { return pivot_; }

private:
    std::size_t pivot_;
};

// A fixed-point iteration stopped contracting: the successive-difference
// ratio stayed at or above 1. Carries the offending sub-interval.
class ContractionFailureError : public NumericalError {
public:
    ContractionFailureError(const std::string& msg, double t_begin, double t_end,
                            double last_ratio)
        : NumericalError(msg), t_begin_(t_begin), t_end_(t_end), ratio_(last_ratio) {}
    double interval_begin() const noexcept { return t_begin_; }
    double interval_end() const noexcept { return t_end_; }
    double last_ratio() const noexcept { return ratio_; }

private:
    double t_begin_;
    double t_end_;
    double ratio_;
};

// The contraction step size required by the problem constants fell below one
// grid cell; the caller must refine the grid.
class ResolutionError : public NumericalError {
public:
    ResolutionError(const std::string& msg, double required_step, double grid_dt)
        : NumericalError(msg), required_step_(required_step), grid_dt_(grid_dt) {}
    double required_step() const noexcept { return required_step_; }
    double grid_dt() const noexcept { return grid_dt_; }

private:
    double required_step_;
    double grid_dt_;
};

// A path-space inversion stopped converging: the requested time lies beyond
// the horizon up to which the shift map is invertible on this sample.
class HorizonExceededError : public NumericalError {
public:
    HorizonExceededError(const std::string& msg, double time, double last_ratio)
        : NumericalError(msg), time_(time), ratio_(last_ratio) {}
    double time() const noexcept { return time_; }
    double last_ratio() const noexcept { return ratio_; }

private:
    double time_;
    double ratio_;
};

// exp() overflow inside an integrating factor or an explicit solution kernel.
class OverflowError : public NumericalError {
public:
    OverflowError(const std::string& msg, double exponent)
        : NumericalError(msg), exponent_(exponent) {}
    double exponent() const noexcept { return exponent_; }

private:
    double exponent_;
};

// File and serialization failures.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace fracsde
