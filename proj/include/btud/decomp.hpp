#pragma once

#include "btud/tensor.hpp"
#include "btud/tucker_model.hpp"

#include <array>
#include <vector>

namespace btud {

/// Posterior of the factor/core regressions at the current MAP point.
struct PosteriorStats {
    std::array<Matrix, 3> mode_means;  ///< L_a x dim_a, one column per fiber
    std::array<Matrix, 3> mode_covs;   ///< L_a x L_a
    Tensor3 core_mean;                 ///< (L1, L2, L3)
    Matrix core_cov;                   ///< (L1 L2 L3) x (L1 L2 L3), core layout order
    double alpha = 0.0;
    double beta = 1.0;
};

struct FitReport {
    int sweeps = 0;
    std::vector<double> residual_history;  ///< Frobenius reconstruction error per sweep/iteration
    bool converged = false;
    bool self_consistent = false;
    double max_mode_deviation = 0.0;
};

struct ModeStats {
    Matrix mean;  ///< L x dim
    Matrix cov;   ///< L x L
};

struct CoreStats {
    Tensor3 mean;
    Matrix cov;
};

struct HooiOptions {
    int max_iter = 500;
    double tol = 1e-8;
    /// When > 0, convergence also requires every factor entry to move less
    /// than this (up to row sign) in the last iteration.
    double factor_tol = 0.0;
};

struct BtudOptions {
    int max_sweeps = 100;
    double tol = 1e-8;
    /// Tolerance for the self-consistency flag recorded in the FitReport.
    double consistency_tol = 1e-6;
};

struct HooiResult {
    TuckerModel model;
    FitReport report;
};

struct BtudResult {
    TuckerModel model;
    PosteriorStats posterior;
    FitReport report;
};

struct SelfConsistency {
    bool self_consistent = false;
    std::array<double, 3> mode_deviation{};  ///< max |u - m_u| per mode, after sign alignment
    double core_deviation = 0.0;             ///< max |G - m_G|

    double max_mode_deviation() const;
};

/// Factors from the leading left singular vectors of each unfolding; core by projection.
TuckerModel hosvd_init(const Tensor3& t, Ranks ranks);

/// Higher-order orthogonal iteration started from hosvd_init.
///
/// Each iteration updates modes 1, 2, 3 in turn from the SVD of the tensor
/// contracted with the other two factors, then recomputes the core. Stops
/// when |e_prev - e| / ||t|| < tol (and the factor_tol test, if enabled),
/// e being the Frobenius reconstruction error, or after max_iter iterations.
/// Each rank must not exceed the product of the other two (ArgumentError).
/// Throws NumericalError on non-finite values.
HooiResult hooi(const Tensor3& t, Ranks ranks, HooiOptions options = {});

/// Regression design matrix for one mode.
///
/// Mode 1 gives the (M*K) x L1 matrix Phi[(j,k), l1] = sum G(l1,l2,l3) u2(l2,j) u3(l3,k)
/// with rows ordered like the columns of unfold(t, 1); modes 2 and 3 are analogous.
Matrix design_matrix(const TuckerModel& model, int mode);

/// Least-squares core for fixed factors.
///
/// With row-orthonormal factors (deviation <= 1e-6) this is the projection
/// t x1 u1 x2 u2 x3 u3; otherwise core_regression_general is used.
Tensor3 core_regression(const Tensor3& t, const std::array<Matrix, 3>& factors);

/// Pseudoinverse regression of vec(t) on u1 (x) u2 (x) u3, evaluated mode by
/// mode through (A (x) B)^+ = A^+ (x) B^+.
Tensor3 core_regression_general(const Tensor3& t, const std::array<Matrix, 3>& factors);

/// Posterior mean (L_a x dim_a) and covariance of the mode-`mode` factor.
///
/// alpha == 0: mean = Phi^+ x_fiber, cov = (beta Phi^T Phi)^+.
/// alpha > 0:  cov = (alpha I + beta Phi^T Phi)^-1, mean = beta cov Phi^T x_fiber.
ModeStats posterior_stats(const Tensor3& t, const TuckerModel& model, int mode, double alpha,
                          double beta);

/// Same as posterior_stats for the L1 L2 L3 core coefficients.
CoreStats posterior_core_stats(const Tensor3& t, const TuckerModel& model, double alpha,
                               double beta);

/// Cap returned by estimate_beta for an exact fit.
inline constexpr double kBetaCap = 1e12;

/// Noise precision from the residual: N M K / sum(residual^2), capped at kBetaCap.
double estimate_beta(const Tensor3& t, const TuckerModel& model);

/// Cyclic alternating regression: for each mode 1, 2, 3 and each component,
/// regress every fiber on the current design matrix, orthonormalize the
/// updated row against earlier rows, then re-solve the core. Sweeps stop
/// once the largest absolute factor change within a sweep is below tol.
BtudResult btud_fit(const Tensor3& t, const TuckerModel& init, double alpha,
                    BtudOptions options = {});

/// All three posterior factor means plus the core posterior at `model`.
PosteriorStats posterior_all(const Tensor3& t, const TuckerModel& model, double alpha,
                             double beta);

/// Compares the model with its own posterior means (m_u = u, m_G = G).
SelfConsistency self_consistency_check(const Tensor3& t, const TuckerModel& model, double alpha,
                                       double beta, double tol);

/// Frobenius norm of t - reconstruct(model).
double reconstruction_error(const Tensor3& t, const TuckerModel& model);

}  // namespace btud
