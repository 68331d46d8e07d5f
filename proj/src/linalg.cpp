#include "btud/linalg.hpp"

#include "btud/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace btud {

namespace {

constexpr double kGramConditionLimit = 1e-4;

void apply_sign_convention(Matrix& u, Matrix* v) {
    for (Index c = 0; c < u.cols(); ++c) {
        Index arg = 0;
        double best = -1.0;
        for (Index r = 0; r < u.rows(); ++r) {
            const double mag = std::abs(u(r, c));
            if (mag > best) {
                best = mag;
                arg = r;
            }
        }
        if (u(arg, c) < 0.0) {
            u.col(c) *= -1.0;
            if (v != nullptr) v->col(c) *= -1.0;
        }
    }
}

}  // namespace

SvdResult svd(const Matrix& a, std::optional<Index> rank) {
    if (rank && *rank <= 0) {
        throw ArgumentError("svd rank must be positive");
    }
    if (!a.allFinite()) {
        throw NumericalError("svd input contains non-finite values");
    }
    const Index full = std::min(a.rows(), a.cols());
    const Index keep = rank ? std::min(*rank, full) : full;

    Eigen::BDCSVD<Matrix> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    SvdResult out{dec.matrixU().leftCols(keep), dec.singularValues().head(keep),
                  dec.matrixV().leftCols(keep)};

    apply_sign_convention(out.u, &out.v);
    return out;
}

Matrix leading_left_vectors(const Matrix& a, Index count) {
    if (count <= 0) throw ArgumentError("leading_left_vectors: count must be positive");
    if (!a.allFinite()) throw NumericalError("leading_left_vectors: non-finite input");
    const Index keep = std::min(count, std::min(a.rows(), a.cols()));
    if (a.rows() > 2 * a.cols()) {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(a.transpose() * a);
        if (eig.info() == Eigen::Success) {
            const Index c = a.cols();
            const double top = eig.eigenvalues()(c - 1);
            const double last = eig.eigenvalues()(c - keep);
            // Squaring the singular values is harmless while they stay well separated from zero.
            if (top > 0.0 && last > kGramConditionLimit * kGramConditionLimit * top) {
                Matrix u(a.rows(), keep);
                for (Index i = 0; i < keep; ++i) {
                    u.col(i) = a * eig.eigenvectors().col(c - 1 - i) / std::sqrt(eig.eigenvalues()(c - 1 - i));
                }
                apply_sign_convention(u, nullptr);
                return u;
            }
        }
    }
    return svd(a, keep).u;
}

double pinv_rtol(Index rows, Index cols) {
    return 1e-12 * static_cast<double>(std::max(rows, cols));
}

Matrix pseudoinverse(const Matrix& a) {
    if (a.size() == 0) {
        return Matrix::Zero(a.cols(), a.rows());
    }
    const SvdResult d = svd(a);
    const double cutoff = d.s.size() > 0 ? pinv_rtol(a.rows(), a.cols()) * d.s(0) : 0.0;
    Vector inv = Vector::Zero(d.s.size());
    for (Index i = 0; i < d.s.size(); ++i) {
        if (d.s(i) > cutoff) inv(i) = 1.0 / d.s(i);
    }
    return d.v * inv.asDiagonal() * d.u.transpose();
}

Matrix orthonormalize_rows(Matrix u, Index start_row) {
    if (start_row < 0 || start_row >= u.rows()) {
        throw ArgumentError("orthonormalize_rows: start_row " + std::to_string(start_row) +
                            " out of range");
    }
    for (Index r = 0; r < start_row; ++r) {
        const double proj = u.row(start_row).dot(u.row(r));
        u.row(start_row) -= proj * u.row(r);
    }
    const double norm = u.row(start_row).norm();
    if (!(norm >= 1e-12)) {
        throw DegenerateRowError(start_row, "row " + std::to_string(start_row) +
                                                " is linearly dependent on earlier rows");
    }
    u.row(start_row) /= norm;
    return u;
}

double row_orthonormality_error(const Matrix& u) {
    const Matrix gram = u * u.transpose();
    return (gram - Matrix::Identity(u.rows(), u.rows())).cwiseAbs().maxCoeff();
}

}  // namespace btud
