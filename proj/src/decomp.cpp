#include "btud/decomp.hpp"

#include "btud/errors.hpp"
#include "btud/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace btud {

namespace {

constexpr double kOrthonormalTol = 1e-6;
constexpr double kIdentityErrorFloor = 1e-6;

void check_ranks(const Tensor3& t, Ranks ranks) {
    const Dims3& d = t.dims();
    for (int mode = 1; mode <= 3; ++mode) {
        if (ranks[mode] < 1 || ranks[mode] > d[mode]) {
            throw ArgumentError("rank " + std::to_string(ranks[mode]) + " for mode " +
                                std::to_string(mode) + " must lie in [1, " +
                                std::to_string(d[mode]) + "]");
        }
    }
}

void check_model_matches(const Tensor3& t, const TuckerModel& model) {
    model.validate();
    if (!(model.data_dims() == t.dims())) {
        throw ArgumentError("model factor dimensions do not match the tensor");
    }
}

void check_hyper(double alpha, double beta) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ArgumentError("alpha must be >= 0");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ArgumentError("beta must be > 0");
}

Tensor3 project(const Tensor3& t, const std::array<Matrix, 3>& f) {
    return mode_product(mode_product(mode_product(t, 1, f[0]), 2, f[1]), 3, f[2]);
}

Matrix leading_rows(const Matrix& a, Index count) {
    return leading_left_vectors(a, count).transpose();
}

/// Kronecker product with the conventional block layout (b index fastest).
Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index r = 0; r < a.rows(); ++r) {
        for (Index c = 0; c < a.cols(); ++c) {
            out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
        }
    }
    return out;
}

/// Largest entrywise change between factor rows, each row compared up to sign.
double signless_change(const Matrix& now, const Matrix& before) {
    double out = 0.0;
    for (Index r = 0; r < now.rows(); ++r) {
        const double same = (now.row(r) - before.row(r)).cwiseAbs().maxCoeff();
        const double flipped = (now.row(r) + before.row(r)).cwiseAbs().maxCoeff();
        out = std::max(out, std::min(same, flipped));
    }
    return out;
}

Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

bool all_finite(const TuckerModel& m) {
    if (!m.factors[0].allFinite() || !m.factors[1].allFinite() || !m.factors[2].allFinite()) {
        return false;
    }
    for (double v : m.core.values()) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Vector as_vector(const Tensor3& t) {
    return Eigen::Map<const Vector>(t.values().data(), t.size());
}

Tensor3 as_tensor(const Vector& v, Dims3 dims) {
    return Tensor3(dims, std::vector<double>(v.data(), v.data() + v.size()));
}

}  // namespace

double SelfConsistency::max_mode_deviation() const {
    return std::max({mode_deviation[0], mode_deviation[1], mode_deviation[2]});
}

double reconstruction_error(const Tensor3& t, const TuckerModel& model) {
    const Tensor3 r = reconstruct(model);
    double acc = 0.0;
    const auto a = t.values();
    const auto b = r.values();
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

TuckerModel hosvd_init(const Tensor3& t, Ranks ranks) {
    check_ranks(t, ranks);
    TuckerModel model;
    for (int mode = 1; mode <= 3; ++mode) {
        model.factor(mode) = leading_rows(unfold(t, mode), ranks[mode]);
    }
    model.core = project(t, model.factors);
    return model;
}

HooiResult hooi(const Tensor3& t, Ranks ranks, HooiOptions options) {
    if (options.max_iter < 1) throw ArgumentError("hooi: max_iter must be >= 1");
    if (!(options.tol > 0.0)) throw ArgumentError("hooi: tol must be > 0");
    if (!(options.factor_tol >= 0.0)) throw ArgumentError("hooi: factor_tol must be >= 0");
    check_ranks(t, ranks);
    for (int mode = 1; mode <= 3; ++mode) {
        const Index others = ranks.product() / ranks[mode];
        if (ranks[mode] > others) {
            throw ArgumentError("hooi: rank " + std::to_string(ranks[mode]) + " of mode " + std::to_string(mode) +
                                " exceeds the product of the other two ranks (" + std::to_string(others) + ")");
        }
    }

    HooiResult result{hosvd_init(t, ranks), {}};
    const double norm = frobenius_norm(t);
    const double norm_sq = norm * norm;
    const double scale = norm > 0.0 ? norm : 1.0;
    double previous = reconstruction_error(t, result.model);

    auto& f = result.model.factors;
    for (int iter = 1; iter <= options.max_iter; ++iter) {
        const std::array<Matrix, 3> before = f;
        // Contraction order keeps the largest intermediate at one reduced mode.
        f[0] = leading_rows(unfold(mode_product(mode_product(t, 2, f[1]), 3, f[2]), 1), ranks.l1);
        f[1] = leading_rows(unfold(mode_product(mode_product(t, 3, f[2]), 1, f[0]), 2), ranks.l2);
        const Tensor3 partial = mode_product(mode_product(t, 2, f[1]), 1, f[0]);
        f[2] = leading_rows(unfold(partial, 3), ranks.l3);
        result.model.core = mode_product(partial, 3, f[2]);
        if (!all_finite(result.model)) {
            throw NumericalError("hooi: non-finite values at iteration " + std::to_string(iter));
        }

        // ||t - model||^2 = ||t||^2 - ||G||^2 for orthonormal factors and a
        // projected core; evaluate directly once cancellation would matter.
        const double core_norm = frobenius_norm(result.model.core);
        const double gap = norm_sq - core_norm * core_norm;
        const double err = gap > kIdentityErrorFloor * norm_sq ? std::sqrt(gap)
                                                               : reconstruction_error(t, result.model);
        result.report.residual_history.push_back(err);
        result.report.sweeps = iter;

        double change = 0.0;
        for (std::size_t a = 0; a < 3; ++a) change = std::max(change, signless_change(f[a], before[a]));
        const bool error_settled = std::abs(previous - err) / scale < options.tol;
        const bool factors_settled = options.factor_tol == 0.0 || change < options.factor_tol;
        if (error_settled && factors_settled) {
            result.report.converged = true;
            break;
        }
        previous = err;
    }
    return result;
}

Matrix design_matrix(const TuckerModel& model, int mode) {
    check_mode(mode);
    model.validate();
    const auto& f = model.factors;
    Tensor3 y;
    switch (mode) {
    case 1:
        y = mode_product(mode_product(model.core, 2, f[1].transpose()), 3, f[2].transpose());
        break;
    case 2:
        y = mode_product(mode_product(model.core, 1, f[0].transpose()), 3, f[2].transpose());
        break;
    default:
        y = mode_product(mode_product(model.core, 1, f[0].transpose()), 2, f[1].transpose());
        break;
    }
    return unfold(y, mode).transpose();
}

Tensor3 core_regression_general(const Tensor3& t, const std::array<Matrix, 3>& factors) {
    std::array<Matrix, 3> inv;
    for (std::size_t a = 0; a < 3; ++a) {
        inv[a] = pseudoinverse(factors[a].transpose());
    }
    return project(t, inv);
}

Tensor3 core_regression(const Tensor3& t, const std::array<Matrix, 3>& factors) {
    for (std::size_t a = 0; a < 3; ++a) {
        if (factors[a].cols() != t.dims()[static_cast<int>(a) + 1]) {
            throw ArgumentError("core_regression: factor " + std::to_string(a + 1) +
                                " does not match tensor dims");
        }
    }
    const bool orthonormal = std::all_of(factors.begin(), factors.end(), [](const Matrix& u) {
        return row_orthonormality_error(u) <= kOrthonormalTol;
    });
    return orthonormal ? project(t, factors) : core_regression_general(t, factors);
}

ModeStats posterior_stats(const Tensor3& t, const TuckerModel& model, int mode, double alpha,
                          double beta) {
    check_mode(mode);
    check_hyper(alpha, beta);
    check_model_matches(t, model);

    const Matrix phi = design_matrix(model, mode);
    const Matrix x = unfold(t, mode);
    const Matrix gram = phi.transpose() * phi;
    const Index l = phi.cols();

    ModeStats out;
    if (alpha == 0.0) {
        out.mean = (x * pseudoinverse(phi).transpose()).transpose();
        out.cov = symmetrized(pseudoinverse(beta * gram));
        return out;
    }
    const Matrix precision = alpha * Matrix::Identity(l, l) + beta * gram;
    Eigen::LLT<Matrix> llt(precision);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("posterior_stats: internal error, alpha I + beta Phi^T Phi not positive definite");
    }
    out.cov = symmetrized(llt.solve(Matrix::Identity(l, l)));
    out.mean = beta * out.cov * (x * phi).transpose();
    return out;
}

CoreStats posterior_core_stats(const Tensor3& t, const TuckerModel& model, double alpha,
                               double beta) {
    check_hyper(alpha, beta);
    check_model_matches(t, model);
    const auto& f = model.factors;
    const Matrix gram =
        kron(f[2] * f[2].transpose(), kron(f[1] * f[1].transpose(), f[0] * f[0].transpose()));
    const Index l = gram.rows();
    const Dims3 core_dims = model.core.dims();

    CoreStats out;
    if (alpha == 0.0) {
        out.mean = core_regression_general(t, f);
        out.cov = symmetrized(pseudoinverse(beta * gram));
        return out;
    }
    const Matrix precision = alpha * Matrix::Identity(l, l) + beta * gram;
    Eigen::LLT<Matrix> llt(precision);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("posterior_core_stats: internal error, precision not positive definite");
    }
    out.cov = symmetrized(llt.solve(Matrix::Identity(l, l)));
    const Vector phi_t_x = as_vector(project(t, f));
    out.mean = as_tensor(beta * out.cov * phi_t_x, core_dims);
    return out;
}

double estimate_beta(const Tensor3& t, const TuckerModel& model) {
    check_model_matches(t, model);
    const double err = reconstruction_error(t, model);
    const double rss = err * err;
    if (rss == 0.0) return kBetaCap;
    return std::min(kBetaCap, static_cast<double>(t.size()) / rss);
}

PosteriorStats posterior_all(const Tensor3& t, const TuckerModel& model, double alpha,
                             double beta) {
    PosteriorStats out;
    out.alpha = alpha;
    out.beta = beta;
    for (int mode = 1; mode <= 3; ++mode) {
        ModeStats ms = posterior_stats(t, model, mode, alpha, beta);
        out.mode_means[static_cast<std::size_t>(mode - 1)] = std::move(ms.mean);
        out.mode_covs[static_cast<std::size_t>(mode - 1)] = std::move(ms.cov);
    }
    CoreStats cs = posterior_core_stats(t, model, alpha, beta);
    out.core_mean = std::move(cs.mean);
    out.core_cov = std::move(cs.cov);
    return out;
}

SelfConsistency self_consistency_check(const Tensor3& t, const TuckerModel& model, double alpha,
                                       double beta, double tol) {
    SelfConsistency out;
    for (int mode = 1; mode <= 3; ++mode) {
        Matrix mean = posterior_stats(t, model, mode, alpha, beta).mean;
        const Matrix& u = model.factor(mode);
        // The decomposition is sign-indeterminate per component.
        for (Index r = 0; r < mean.rows(); ++r) {
            if (mean.row(r).dot(u.row(r)) < 0.0) mean.row(r) *= -1.0;
        }
        out.mode_deviation[static_cast<std::size_t>(mode - 1)] = (u - mean).cwiseAbs().maxCoeff();
    }
    const CoreStats cs = posterior_core_stats(t, model, alpha, beta);
    double core_dev = 0.0;
    const auto g = model.core.values();
    const auto mg = cs.mean.values();
    for (std::size_t i = 0; i < g.size(); ++i) core_dev = std::max(core_dev, std::abs(g[i] - mg[i]));
    out.core_deviation = core_dev;
    out.self_consistent = out.max_mode_deviation() <= tol && core_dev <= tol;
    return out;
}

BtudResult btud_fit(const Tensor3& t, const TuckerModel& init, double alpha, BtudOptions options) {
    if (!(alpha >= 0.0)) throw ArgumentError("btud_fit: alpha must be >= 0");
    if (options.max_sweeps < 1) throw ArgumentError("btud_fit: max_sweeps must be >= 1");
    if (!(options.tol > 0.0)) throw ArgumentError("btud_fit: tol must be > 0");
    check_model_matches(t, init);

    const std::array<Matrix, 3> unfolded{unfold(t, 1), unfold(t, 2), unfold(t, 3)};
    BtudResult result;
    result.model = init;
    TuckerModel& model = result.model;

    for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
        const std::array<Matrix, 3> before = model.factors;
        for (int mode = 1; mode <= 3; ++mode) {
            const auto a = static_cast<std::size_t>(mode - 1);
            const Matrix& x = unfolded[a];
            for (Index comp = 0; comp < model.factors[a].rows(); ++comp) {
                const Matrix phi = design_matrix(model, mode);
                Matrix solver;
                if (alpha == 0.0) {
                    solver = pseudoinverse(phi);
                } else {
                    const Matrix reg =
                        phi.transpose() * phi + alpha * Matrix::Identity(phi.cols(), phi.cols());
                    solver = pseudoinverse(reg) * phi.transpose();
                }
                // One coefficient per fiber, all sharing the same solver row.
                model.factors[a].row(comp) = (x * solver.row(comp).transpose()).transpose();
                try {
                    model.factors[a] = orthonormalize_rows(std::move(model.factors[a]), comp);
                } catch (const DegenerateRowError&) {
                    throw DegenerateComponentError(
                        mode, comp,
                        "btud_fit: component " + std::to_string(comp + 1) + " of mode " +
                            std::to_string(mode) + " became linearly dependent");
                }
                model.core = core_regression(t, model.factors);
                if (!all_finite(model)) {
                    throw NumericalError("btud_fit: non-finite values in sweep " +
                                         std::to_string(sweep));
                }
            }
        }
        double change = 0.0;
        for (std::size_t a = 0; a < 3; ++a) {
            change = std::max(change, (model.factors[a] - before[a]).cwiseAbs().maxCoeff());
        }
        result.report.sweeps = sweep;
        result.report.residual_history.push_back(reconstruction_error(t, model));
        if (change < options.tol) {
            result.report.converged = true;
            break;
        }
    }

    const double beta = estimate_beta(t, model);
    result.posterior = posterior_all(t, model, alpha, beta);
    const SelfConsistency sc = self_consistency_check(t, model, alpha, beta, options.consistency_tol);
    result.report.self_consistent = sc.self_consistent;
    result.report.max_mode_deviation = sc.max_mode_deviation();
    return result;
}

}  // namespace btud
