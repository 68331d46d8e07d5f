#pragma once

#include "btud/tensor.hpp"

#include <optional>

namespace btud {

struct SvdResult {
    Matrix u;  ///< left singular vectors as columns
    Vector s;  ///< singular values, descending
    Matrix v;  ///< right singular vectors as columns
};

/// Thin SVD, optionally truncated to the leading `rank` triplets.
///
/// Sign convention: every left singular vector is flipped so that its
/// largest-magnitude entry is positive (ties go to the lowest index), and
/// the matching right vector is flipped with it.
SvdResult svd(const Matrix& a, std::optional<Index> rank = std::nullopt);

/// Leading `count` left singular vectors as columns, same sign convention as svd.
///
/// Tall inputs go through the eigendecomposition of a^T a when the kept
/// singular values are within 1e4 of the largest; otherwise svd is used.
Matrix leading_left_vectors(const Matrix& a, Index count);

/// Relative singular-value cutoff used by pseudoinverse: 1e-12 * max(rows, cols).
double pinv_rtol(Index rows, Index cols);

/// Moore-Penrose pseudoinverse via SVD; singular values below
/// pinv_rtol * s_max are treated as zero.
Matrix pseudoinverse(const Matrix& a);

/// Modified Gram-Schmidt on one row.
///
/// Rows [0, start_row) must already be orthonormal. Row `start_row` is
/// projected off each of them in turn and scaled to unit norm; all other
/// rows are returned unchanged. Throws DegenerateRowError when the projected
/// row norm falls below 1e-12.
Matrix orthonormalize_rows(Matrix u, Index start_row);

/// Largest |(u u^T - I)_ab|.
double row_orthonormality_error(const Matrix& u);

}  // namespace btud
