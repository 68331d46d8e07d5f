#pragma once

#include "btud/tensor.hpp"

#include <cstdint>
#include <vector>

namespace btud {

/// Planted Gaussian block: x ~ N(mu, 1) for i < n1, j < M/2, k < K/2 (0-based),
/// N(0, 1) elsewhere.
struct SyntheticBlockParams {
    Index n = 1000;
    Index m = 20;
    Index k = 20;
    Index n1 = 10;
    double mu = 1.0;
    std::uint64_t seed = 1;
};

/// Rows i < n1 are sin(2 pi j / period + eps_i), j = 1..M, eps_i ~ N(0, 1);
/// the remaining rows are i.i.d. N(0, 1).
struct SinusoidParams {
    Index n = 10000;
    Index m = 100;
    Index n1 = 1000;
    double period = 3.0;
    std::uint64_t seed = 1;
};

/// Globally coupled quadratic maps f(x, a) = 1 - a x^2.
///
/// Randomized variant (classic = false):
///   x_{i,j+1} = g_ii f(x_ij, a_i) + (1/N) sum_i' g_ii' f(x_i'j, a_i'),
///   g_ii' = (1 - c) delta_ii' + c eps_ii',  a_i = a + (1 - a) eps_i,
/// with eps uniform on [0, 1). Classic variant (classic = true) reads `c`
/// as the uniform coupling g:
///   x_{i,j+1} = (1 - g) f(x_ij, a) + (g / N) sum_i' f(x_i'j, a).
/// Initial values are uniform on [0, 1).
struct GcmParams {
    Index n = 10000;
    Index steps = 100;
    double a = 1.75;
    double c = 0.04;
    bool classic = false;
    std::uint64_t seed = 1;
};

struct LabeledTensor {
    Tensor3 data;
    std::vector<bool> truth;
};

struct LabeledMatrix {
    Matrix data;
    std::vector<bool> truth;
};

/// Storage for the N x N coupling randoms eps_ii' of the RCS-GCM.
enum class CouplingStorage {
    automatic,  ///< cached when it fits in coupling_cache_limit_bytes
    cached,     ///< regenerate once into a dense float matrix
    streaming,  ///< regenerate from the counter-based RNG at every step
};

struct GcmOptions {
    CouplingStorage storage = CouplingStorage::automatic;
    std::size_t coupling_cache_limit_bytes = std::size_t{1} << 30;
    /// 0 selects std::thread::hardware_concurrency().
    unsigned threads = 0;
};

LabeledTensor gen_synthetic_block(const SyntheticBlockParams& p);

LabeledMatrix gen_sinusoid(const SinusoidParams& p);

/// Trajectory as an N x steps matrix; column j holds the state after j + 1
/// updates. Throws DivergenceError if any |x| exceeds 1e6.
Matrix simulate_rcs_gcm(const GcmParams& p, const GcmOptions& options = {});

/// Per-map nonlinearity a_i used by simulate_rcs_gcm (all equal to a in classic mode).
std::vector<double> gcm_nonlinearities(const GcmParams& p);

}  // namespace btud
