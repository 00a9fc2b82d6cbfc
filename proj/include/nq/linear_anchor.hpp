#pragma once

#include <utility>
#include <vector>

#include "nq/extremal.hpp"
#include "nq/symmetric_matrix.hpp"

namespace nq {

struct EigenDecomposition {
    std::vector<double> values;   // ascending
    std::vector<double> vectors;  // column k (row-major dim×dim) pairs with values[k]
    double reconstruction_error = 0;  // max |A - VΛVᵀ|
    int sweeps = 0;
};

/// Cyclic Jacobi rotations until the off-diagonal norm is below 1e-12
/// (relative to the matrix norm when that exceeds one). Throws
/// NoConvergence when the reconstruction misses by more than 1e-9.
EigenDecomposition jacobi_eigen(const SymmetricMatrix& A);

/// Eigenvalues, ascending.
std::vector<double> eig_oracle(const SymmetricMatrix& A);

/// Eight restarts: the quotient has no spurious local minima, so restarts only
/// guard against starts orthogonal to the extreme eigenvector.
ExtremalOptions anchor_options();

/// (min, max) critical values of the Rayleigh quotient from the generic
/// extremal machinery on the linear model.
std::pair<double, double> nmm_extreme_values(const SymmetricMatrix& A, const ExtremalOptions& options = anchor_options());

}  // namespace nq
