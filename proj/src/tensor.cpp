#include "btud/tensor.hpp"

#include "btud/errors.hpp"
#include "btud/tucker_model.hpp"

#include <cmath>
#include <string>

namespace btud {

void check_mode(int mode) {
    if (mode < 1 || mode > 3) {
        throw ArgumentError("mode must be 1, 2 or 3, got " + std::to_string(mode));
    }
}

Index Dims3::operator[](int mode) const {
    check_mode(mode);
    return mode == 1 ? n : (mode == 2 ? m : k);
}

Tensor3::Tensor3(Dims3 dims) : dims_(dims) {
    if (dims.n < 0 || dims.m < 0 || dims.k < 0) {
        throw ArgumentError("tensor dimensions must be non-negative");
    }
    values_.assign(static_cast<std::size_t>(dims.size()), 0.0);
}

Tensor3::Tensor3(Dims3 dims, std::vector<double> values) : dims_(dims), values_(std::move(values)) {
    if (dims.n < 0 || dims.m < 0 || dims.k < 0) {
        throw ArgumentError("tensor dimensions must be non-negative");
    }
    if (static_cast<Index>(values_.size()) != dims.size()) {
        throw ArgumentError("tensor value count " + std::to_string(values_.size()) +
                            " does not match dims product " + std::to_string(dims.size()));
    }
    for (double v : values_) {
        if (!std::isfinite(v)) throw ArgumentError("tensor entries must be finite");
    }
}

namespace {

using ConstMap = Eigen::Map<const Matrix>;
using MutMap = Eigen::Map<Matrix>;

Dims3 with_extent(Dims3 d, int mode, Index extent) {
    if (mode == 1) d.n = extent;
    if (mode == 2) d.m = extent;
    if (mode == 3) d.k = extent;
    return d;
}

}  // namespace

Matrix unfold(const Tensor3& t, int mode) {
    check_mode(mode);
    const auto [n, m, k] = t.dims();
    const double* x = t.values().data();
    switch (mode) {
    case 1:
        return ConstMap(x, n, m * k);
    case 2: {
        Matrix out(m, n * k);
        for (Index kk = 0; kk < k; ++kk) {
            out.middleCols(kk * n, n) = ConstMap(x + kk * n * m, n, m).transpose();
        }
        return out;
    }
    default:
        return ConstMap(x, n * m, k).transpose();
    }
}

Tensor3 fold(const Matrix& a, int mode, Dims3 dims) {
    check_mode(mode);
    const auto [n, m, k] = dims;
    if (a.rows() != dims[mode] || a.rows() * a.cols() != dims.size()) {
        throw ArgumentError("fold: matrix shape does not match dims for mode " + std::to_string(mode));
    }
    Tensor3 t(dims);
    double* x = t.values().data();
    switch (mode) {
    case 1:
        MutMap(x, n, m * k) = a;
        break;
    case 2:
        for (Index kk = 0; kk < k; ++kk) {
            MutMap(x + kk * n * m, n, m) = a.middleCols(kk * n, n).transpose();
        }
        break;
    default:
        MutMap(x, n * m, k) = a.transpose();
        break;
    }
    for (double v : t.values()) {
        if (!std::isfinite(v)) throw ArgumentError("fold: entries must be finite");
    }
    return t;
}

Tensor3 mode_product(const Tensor3& t, int mode, const Matrix& a) {
    check_mode(mode);
    const auto [n, m, k] = t.dims();
    if (a.cols() != t.dims()[mode]) {
        throw ArgumentError("mode_product: operand has " + std::to_string(a.cols()) +
                            " columns, expected " + std::to_string(t.dims()[mode]));
    }
    const Index p = a.rows();
    Tensor3 out(with_extent(t.dims(), mode, p));
    const double* x = t.values().data();
    double* y = out.values().data();
    switch (mode) {
    case 1:
        MutMap(y, p, m * k).noalias() = a * ConstMap(x, n, m * k);
        break;
    case 2:
        for (Index kk = 0; kk < k; ++kk) {
            MutMap(y + kk * n * p, n, p).noalias() = ConstMap(x + kk * n * m, n, m) * a.transpose();
        }
        break;
    default:
        MutMap(y, n * m, p).noalias() = ConstMap(x, n * m, k) * a.transpose();
        break;
    }
    return out;
}

double frobenius_norm(const Tensor3& t) {
    const auto v = t.values();
    return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size())).norm();
}

Index Ranks::operator[](int mode) const {
    check_mode(mode);
    return mode == 1 ? l1 : (mode == 2 ? l2 : l3);
}

Ranks TuckerModel::ranks() const {
    return {factors[0].rows(), factors[1].rows(), factors[2].rows()};
}

Dims3 TuckerModel::data_dims() const {
    return {factors[0].cols(), factors[1].cols(), factors[2].cols()};
}

const Matrix& TuckerModel::factor(int mode) const {
    check_mode(mode);
    return factors[static_cast<std::size_t>(mode - 1)];
}

Matrix& TuckerModel::factor(int mode) {
    check_mode(mode);
    return factors[static_cast<std::size_t>(mode - 1)];
}

void TuckerModel::validate() const {
    const Ranks r = ranks();
    const Dims3 d = data_dims();
    const Dims3 core_dims = core.dims();
    if (core_dims.n != r.l1 || core_dims.m != r.l2 || core_dims.k != r.l3) {
        throw ArgumentError("core dims do not match factor ranks");
    }
    for (int mode = 1; mode <= 3; ++mode) {
        if (r[mode] < 1 || r[mode] > d[mode]) {
            throw ArgumentError("rank for mode " + std::to_string(mode) + " must lie in [1, " +
                                std::to_string(d[mode]) + "]");
        }
    }
}

Tensor3 reconstruct(const TuckerModel& model) {
    model.validate();
    Tensor3 t = mode_product(model.core, 1, model.factors[0].transpose());
    t = mode_product(t, 2, model.factors[1].transpose());
    return mode_product(t, 3, model.factors[2].transpose());
}

}  // namespace btud
