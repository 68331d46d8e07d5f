#pragma once

// Deliberately naive reference implementations used as test oracles.

#include "btud/tensor.hpp"
#include "btud/tucker_model.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

using btud::Index;
using btud::Matrix;
using btud::Tensor3;
using btud::Vector;

/// Cyclic Jacobi eigenvalues of a symmetric matrix, ascending.
Vector jacobi_eigenvalues(Matrix a, double tol = 1e-14, int max_sweeps = 100);

/// Element-by-element reconstruction by the four-fold sum.
Tensor3 naive_reconstruct(const btud::TuckerModel& model);

/// Phi[(j,k), l1] by the explicit double sum over (l2, l3).
Matrix naive_design_mode1(const btud::TuckerModel& model);

/// NMK x L1L2L3 design of the core regression, rows in tensor storage order,
/// columns in core storage order.
Matrix full_core_design(const std::array<Matrix, 3>& factors);

/// For each i in sorted order, min over j >= i of m p_(j) / j, capped at 1.
std::vector<double> brute_force_bh(const std::vector<double>& p);

/// Upper tail of chi-squared with one degree of freedom by composite Simpson
/// integration of the standard normal density.
double chi2_sf_dof1_quadrature(double x);

Tensor3 random_tensor(btud::Dims3 dims, std::mt19937_64& rng);
Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng);
/// Random model with row-orthonormal factors.
btud::TuckerModel random_model(btud::Dims3 dims, btud::Ranks ranks, std::mt19937_64& rng);

}  // namespace oracle
