#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace phiot {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidMeasure : Error { using Error::Error; };
struct InvalidCost : Error { using Error::Error; };
struct InvalidParameter : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct OracleTooLarge : Error { using Error::Error; };
struct SizeCapExceeded : Error { using Error::Error; };

using DimensionError = DimensionMismatch;

// Thrown when a matching-equation solve exhausts its iteration budget.
// `atom_index` is the failing target atom (-1 for a bare scalar solve),
// `iteration` the sweep that triggered the failure (-1 outside a solve).
struct RootSolveFailure : Error {
    RootSolveFailure(const std::string& what, double residual,
                     Eigen::Index atom = -1, int iter = -1)
        : Error(what), last_residual(residual), atom_index(atom), iteration(iter) {}

    double last_residual;
    Eigen::Index atom_index;
    int iteration;
};

}  // namespace phiot
