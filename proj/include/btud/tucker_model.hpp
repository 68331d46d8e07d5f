#pragma once

#include "btud/tensor.hpp"

#include <array>

namespace btud {

struct Ranks {
    Index l1 = 1;
    Index l2 = 1;
    Index l3 = 1;

    Index operator[](int mode) const;
    Index product() const { return l1 * l2 * l3; }
    bool operator==(const Ranks&) const = default;
};

/// Tucker model x(i,j,k) ~ sum G(l1,l2,l3) u1(l1,i) u2(l2,j) u3(l3,k).
///
/// Factors are stored with components as rows: factors[0] is L1 x N,
/// factors[1] is L2 x M, factors[2] is L3 x K. The core uses the Tensor3
/// layout with dims (L1, L2, L3).
struct TuckerModel {
    Tensor3 core;
    std::array<Matrix, 3> factors;

    Ranks ranks() const;
    Dims3 data_dims() const;
    const Matrix& factor(int mode) const;
    Matrix& factor(int mode);

    /// Throws ArgumentError if the core and factor shapes disagree.
    void validate() const;
};

/// Full tensor represented by the model.
Tensor3 reconstruct(const TuckerModel& model);

}  // namespace btud
