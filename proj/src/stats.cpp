#include "btud/stats.hpp"

#include "btud/errors.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace btud {

namespace {

struct Moments {
    double mean = 0.0;
    double var = 0.0;  // unbiased
};

Moments moments(std::span<const double> v) {
    Moments m;
    for (double x : v) m.mean += x;
    m.mean /= static_cast<double>(v.size());
    for (double x : v) m.var += (x - m.mean) * (x - m.mean);
    m.var /= static_cast<double>(v.size() - 1);
    return m;
}

std::vector<double> mid_ranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> rank(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t q = i; q <= j; ++q) rank[order[q]] = r;
        i = j + 1;
    }
    return rank;
}

}  // namespace

TTestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw ArgumentError("welch_t_test: need >= 2 values per group");
    const Moments ma = moments(a);
    const Moments mb = moments(b);
    const double va = ma.var / static_cast<double>(a.size());
    const double vb = mb.var / static_cast<double>(b.size());
    TTestResult r;
    const double se2 = va + vb;
    if (!(se2 > 0.0)) {
        r.t = ma.mean == mb.mean ? 0.0 : std::copysign(INFINITY, ma.mean - mb.mean);
        r.df = static_cast<double>(a.size() + b.size() - 2);
        r.p_value = ma.mean == mb.mean ? 1.0 : 0.0;
        return r;
    }
    r.t = (ma.mean - mb.mean) / std::sqrt(se2);
    r.df = se2 * se2 /
           (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
    boost::math::students_t dist(r.df);
    r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
    return r;
}

double pearson_correlation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) throw ArgumentError("pearson_correlation: size mismatch");
    const Moments ma = moments(a);
    const Moments mb = moments(b);
    double cov = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) cov += (a[i] - ma.mean) * (b[i] - mb.mean);
    cov /= static_cast<double>(a.size() - 1);
    const double denom = std::sqrt(ma.var * mb.var);
    return denom > 0.0 ? cov / denom : 0.0;
}

double spearman_correlation(std::span<const double> a, std::span<const double> b) {
    const std::vector<double> ra = mid_ranks(a);
    const std::vector<double> rb = mid_ranks(b);
    return pearson_correlation(ra, rb);
}

}  // namespace btud
