#include "btud/datagen.hpp"

#include "btud/errors.hpp"
#include "btud/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <thread>

namespace btud {

namespace {

constexpr double kDivergenceBound = 1e6;

inline double quadratic_map(double x, double a) { return 1.0 - a * x * x; }

/// Fixed-order dot product: eight interleaved partial sums combined pairwise,
/// so the result does not depend on how rows are split across threads.
double coupled_sum(const float* eps, const double* f, Index n) {
    std::array<double, 8> acc{};
    Index i = 0;
    for (; i + 8 <= n; i += 8) {
        for (int q = 0; q < 8; ++q) acc[q] += static_cast<double>(eps[i + q]) * f[i + q];
    }
    for (int q = 0; i < n; ++i, ++q) acc[q] += static_cast<double>(eps[i]) * f[i];
    return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
}

void fill_coupling_row(std::uint64_t seed, Index row, Index n, float* out) {
    const std::uint64_t stream = stream_id(StreamKind::gcm_coupling, static_cast<std::uint64_t>(row));
    for (Index b = 0; 4 * b < n; ++b) {
        const auto block = uniform24_block(seed, stream, static_cast<std::uint64_t>(b));
        for (Index lane = 0; lane < 4 && 4 * b + lane < n; ++lane) out[4 * b + lane] = block[lane];
    }
}

template <typename Fn>
void parallel_rows(Index n, unsigned threads, Fn&& fn) {
    if (threads <= 1 || n < 2) {
        fn(Index{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    const Index chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const Index begin = static_cast<Index>(t) * chunk;
        const Index end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace

LabeledTensor gen_synthetic_block(const SyntheticBlockParams& p) {
    if (p.n < 1 || p.m < 1 || p.k < 1) throw ArgumentError("synthetic block: dims must be positive");
    if (p.n1 < 0 || p.n1 > p.n) throw ArgumentError("synthetic block: N1 must lie in [0, N]");
    if (p.m % 2 != 0 || p.k % 2 != 0) throw ArgumentError("synthetic block: M and K must be even");
    if (!std::isfinite(p.mu)) throw ArgumentError("synthetic block: mu must be finite");

    LabeledTensor out{Tensor3({p.n, p.m, p.k}), std::vector<bool>(static_cast<std::size_t>(p.n))};
    for (Index i = 0; i < p.n; ++i) {
        RngStream rng(p.seed, stream_id(StreamKind::row_values, static_cast<std::uint64_t>(i)));
        const bool planted = i < p.n1;
        out.truth[static_cast<std::size_t>(i)] = planted;
        for (Index k = 0; k < p.k; ++k) {
            for (Index j = 0; j < p.m; ++j) {
                const bool in_block = planted && j < p.m / 2 && k < p.k / 2;
                out.data(i, j, k) = (in_block ? p.mu : 0.0) + rng.normal();
            }
        }
    }
    return out;
}

LabeledMatrix gen_sinusoid(const SinusoidParams& p) {
    if (p.n < 1 || p.m < 1) throw ArgumentError("sinusoid: dims must be positive");
    if (p.n1 < 0 || p.n1 > p.n) throw ArgumentError("sinusoid: N1 must lie in [0, N]");
    if (p.period == 0.0 || !std::isfinite(p.period)) {
        throw ArgumentError("sinusoid: period must be finite and non-zero");
    }
    LabeledMatrix out{Matrix(p.n, p.m), std::vector<bool>(static_cast<std::size_t>(p.n))};
    for (Index i = 0; i < p.n; ++i) {
        RngStream rng(p.seed, stream_id(StreamKind::row_values, static_cast<std::uint64_t>(i)));
        const bool planted = i < p.n1;
        out.truth[static_cast<std::size_t>(i)] = planted;
        if (planted) {
            const double phase = rng.normal();
            for (Index j = 0; j < p.m; ++j) {
                out.data(i, j) =
                    std::sin(2.0 * std::numbers::pi * static_cast<double>(j + 1) / p.period + phase);
            }
        } else {
            for (Index j = 0; j < p.m; ++j) out.data(i, j) = rng.normal();
        }
    }
    return out;
}

std::vector<double> gcm_nonlinearities(const GcmParams& p) {
    std::vector<double> a(static_cast<std::size_t>(p.n), p.a);
    if (p.classic) return a;
    for (Index i = 0; i < p.n; ++i) {
        RngStream rng(p.seed, stream_id(StreamKind::gcm_nonlinearity, static_cast<std::uint64_t>(i)));
        a[static_cast<std::size_t>(i)] = p.a + (1.0 - p.a) * rng.uniform();
    }
    return a;
}

Matrix simulate_rcs_gcm(const GcmParams& p, const GcmOptions& options) {
    if (p.n < 1 || p.steps < 1) throw ArgumentError("gcm: N and steps must be positive");
    if (!std::isfinite(p.a) || !std::isfinite(p.c)) throw ArgumentError("gcm: a and c must be finite");

    const Index n = p.n;
    const auto un = static_cast<std::size_t>(n);
    const std::vector<double> a = gcm_nonlinearities(p);
    std::vector<double> x(un);
    for (Index i = 0; i < n; ++i) {
        RngStream rng(p.seed, stream_id(StreamKind::gcm_initial, static_cast<std::uint64_t>(i)));
        x[static_cast<std::size_t>(i)] = rng.uniform();
    }

    unsigned threads = options.threads != 0 ? options.threads : std::thread::hardware_concurrency();
    threads = std::max(1u, threads);

    const std::size_t cache_bytes = un * un * sizeof(float);
    bool cached = false;
    if (!p.classic) {
        cached = options.storage == CouplingStorage::cached ||
                 (options.storage == CouplingStorage::automatic &&
                  cache_bytes <= options.coupling_cache_limit_bytes);
    }
    std::vector<float> coupling;
    if (cached) {
        coupling.resize(un * un);
        parallel_rows(n, threads, [&](Index begin, Index end) {
            for (Index i = begin; i < end; ++i) fill_coupling_row(p.seed, i, n, coupling.data() + i * n);
        });
    }

    Matrix traj(n, p.steps);
    std::vector<double> f(un);
    std::vector<double> next(un);
    for (Index step = 0; step < p.steps; ++step) {
        for (std::size_t i = 0; i < un; ++i) f[i] = quadratic_map(x[i], a[i]);

        if (p.classic) {
            double mean_field = 0.0;
            for (double v : f) mean_field += v;
            const double g = p.c;
            for (std::size_t i = 0; i < un; ++i) {
                next[i] = (1.0 - g) * f[i] + (g / static_cast<double>(n)) * mean_field;
            }
        } else {
            parallel_rows(n, threads, [&](Index begin, Index end) {
                std::vector<float> row_buffer(cached ? 0 : un);
                for (Index i = begin; i < end; ++i) {
                    const float* eps = coupling.data() + (cached ? i * n : 0);
                    if (!cached) {
                        fill_coupling_row(p.seed, i, n, row_buffer.data());
                        eps = row_buffer.data();
                    }
                    const auto ui = static_cast<std::size_t>(i);
                    const double g_self = (1.0 - p.c) + p.c * static_cast<double>(eps[i]);
                    const double s = coupled_sum(eps, f.data(), n);
                    const double sum_g_f = (1.0 - p.c) * f[ui] + p.c * s;
                    next[ui] = g_self * f[ui] + sum_g_f / static_cast<double>(n);
                }
            });
        }

        for (std::size_t i = 0; i < un; ++i) {
            if (!(std::abs(next[i]) <= kDivergenceBound)) {
                throw DivergenceError(step + 1, "gcm: trajectory diverged at step " +
                                                    std::to_string(step + 1) + ", map " +
                                                    std::to_string(i));
            }
            traj(static_cast<Index>(i), step) = next[i];
        }
        x.swap(next);
    }
    return traj;
}

}  // namespace btud
