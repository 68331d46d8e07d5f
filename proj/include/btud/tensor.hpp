#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace btud {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

struct Dims3 {
    Index n = 0;
    Index m = 0;
    Index k = 0;

    Index size() const { return n * m * k; }
    /// Extent along `mode` (1, 2 or 3).
    Index operator[](int mode) const;
    bool operator==(const Dims3&) const = default;
};

/// Dense order-3 array x(i, j, k).
///
/// Storage is first-index fastest: x(i, j, k) lives at i + n * (j + m * k).
/// Every unfolding, the text format and the generators use this layout.
class Tensor3 {
public:
    Tensor3() = default;
    /// Zero-filled tensor.
    explicit Tensor3(Dims3 dims);
    /// Takes ownership of `values`; throws ArgumentError on a size mismatch
    /// or a non-finite entry.
    Tensor3(Dims3 dims, std::vector<double> values);

    const Dims3& dims() const { return dims_; }
    Index size() const { return dims_.size(); }

    double operator()(Index i, Index j, Index k) const { return values_[offset(i, j, k)]; }
    double& operator()(Index i, Index j, Index k) { return values_[offset(i, j, k)]; }

    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    bool operator==(const Tensor3&) const = default;

private:
    std::size_t offset(Index i, Index j, Index k) const {
        return static_cast<std::size_t>(i + dims_.n * (j + dims_.m * k));
    }

    Dims3 dims_{};
    std::vector<double> values_;
};

/// Mode-n matricization.
///
///   mode 1: N x (M*K), column j + M*k
///   mode 2: M x (N*K), column i + N*k
///   mode 3: K x (N*M), column i + N*j
Matrix unfold(const Tensor3& t, int mode);

/// Inverse of unfold.
Tensor3 fold(const Matrix& a, int mode, Dims3 dims);

/// n-mode product t x_mode a: `a` is P x dims[mode]; the result has extent P along `mode`.
Tensor3 mode_product(const Tensor3& t, int mode, const Matrix& a);

double frobenius_norm(const Tensor3& t);

/// Throws ArgumentError unless mode is 1, 2 or 3.
void check_mode(int mode);

}  // namespace btud
