#include "btud/select.hpp"

#include "btud/decomp.hpp"
#include "btud/errors.hpp"
#include "btud/linalg.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace btud {

namespace {

void check_components(const ComponentSet& components, Index count, const char* who) {
    if (components.empty()) throw ArgumentError(std::string(who) + ": component set is empty");
    for (Index c : components) {
        if (c < 0 || c >= count) {
            throw ArgumentError(std::string(who) + ": component " + std::to_string(c + 1) +
                                " outside 1.." + std::to_string(count));
        }
    }
}

FeatureStatistics with_pvalues(std::vector<double> statistic, int dof) {
    FeatureStatistics out;
    out.dof = dof;
    out.p_raw.reserve(statistic.size());
    for (double s : statistic) out.p_raw.push_back(chi2_sf(s, dof));
    out.statistic = std::move(statistic);
    return out;
}

double pooled_sd(const Matrix& u, const ComponentSet& components) {
    double sum = 0.0;
    double sum_sq = 0.0;
    const auto count = static_cast<double>(components.size()) * static_cast<double>(u.cols());
    for (Index c : components) {
        sum += u.row(c).sum();
        sum_sq += u.row(c).squaredNorm();
    }
    if (count < 2) return 0.0;
    const double mean = sum / count;
    const double var = (sum_sq - count * mean * mean) / (count - 1.0);
    return var > 0.0 ? std::sqrt(var) : 0.0;
}

/// Grid search for one shared sigma over `components`.
std::pair<double, double> scan_sigma(const Matrix& u, const ComponentSet& components,
                                     const SigmaOptions& opt) {
    const double s = pooled_sd(u, components);
    if (!(s > 0.0) || !std::isfinite(s)) {
        throw OptimizationFailedError("optimize_sigma: loadings have zero spread");
    }
    double best_sigma = 0.0;
    double best_h = -1.0;
    const double ratio = opt.grid_high / opt.grid_low;
    for (int g = 0; g < opt.grid_points; ++g) {
        const double frac = opt.grid_points > 1 ? static_cast<double>(g) / (opt.grid_points - 1) : 0.0;
        const double sigma = opt.grid_low * s * std::pow(ratio, frac);
        const std::vector<double> sig(components.size(), sigma);
        const double h = histogram_flatness(u, sig, components, opt.bins, opt.exclusion_threshold);
        if (h < 0.0) continue;
        if (best_h < 0.0 || h < best_h) {
            best_h = h;
            best_sigma = sigma;
        }
    }
    if (best_h < 0.0) {
        throw OptimizationFailedError("optimize_sigma: every candidate sigma excluded all features");
    }
    return {best_sigma, best_h};
}

}  // namespace

std::size_t SelectionResult::selected_count() const {
    return static_cast<std::size_t>(std::count(selected.begin(), selected.end(), true));
}

double chi2_sf(double x, int dof) {
    if (dof < 1) throw ArgumentError("chi2_sf: dof must be >= 1");
    if (!(x >= 0.0)) throw ArgumentError("chi2_sf: x must be >= 0");
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

std::vector<double> bh_adjust(const std::vector<double>& p) {
    const std::size_t m = p.size();
    for (double v : p) {
        if (!(v >= 0.0 && v <= 1.0)) throw ArgumentError("bh_adjust: P-values must lie in [0, 1]");
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });

    std::vector<double> q(m);
    double running = 1.0;
    for (std::size_t r = m; r-- > 0;) {
        const double candidate = static_cast<double>(m) * p[order[r]] / static_cast<double>(r + 1);
        running = std::min(running, candidate);
        q[order[r]] = running;
    }
    return q;
}

FeatureStatistics btud_pvalues(const Matrix& means, const Matrix& cov, const ComponentSet& components) {
    check_components(components, means.rows(), "btud_pvalues");
    if (cov.rows() != means.rows() || cov.cols() != means.rows()) {
        throw ArgumentError("btud_pvalues: covariance must be L x L");
    }
    for (Index c : components) {
        if (!(cov(c, c) > 0.0)) {
            throw DegenerateVarianceError(c, "posterior variance of component " + std::to_string(c + 1) +
                                                 " is not positive");
        }
    }
    std::vector<double> stat(static_cast<std::size_t>(means.cols()), 0.0);
    for (Index d = 0; d < means.cols(); ++d) {
        double s = 0.0;
        for (Index c : components) s += means(c, d) * means(c, d) / cov(c, c);
        stat[static_cast<std::size_t>(d)] = s;
    }
    return with_pvalues(std::move(stat), static_cast<int>(components.size()));
}

FeatureStatistics td_pvalues(const Matrix& u, const std::vector<double>& sigma,
                             const ComponentSet& components) {
    check_components(components, u.rows(), "td_pvalues");
    if (sigma.size() != components.size()) {
        throw ArgumentError("td_pvalues: one sigma per component required");
    }
    for (double s : sigma) {
        if (!(s > 0.0)) throw ArgumentError("td_pvalues: sigma must be > 0");
    }
    std::vector<double> stat(static_cast<std::size_t>(u.cols()), 0.0);
    for (Index d = 0; d < u.cols(); ++d) {
        double s = 0.0;
        for (std::size_t c = 0; c < components.size(); ++c) {
            const double z = u(components[c], d) / sigma[c];
            s += z * z;
        }
        stat[static_cast<std::size_t>(d)] = s;
    }
    return with_pvalues(std::move(stat), static_cast<int>(components.size()));
}

double histogram_flatness(const Matrix& u, const std::vector<double>& sigma,
                          const ComponentSet& components, int bins, double exclusion_threshold) {
    if (bins < 2) throw ArgumentError("histogram_flatness: bins must be >= 2");
    const FeatureStatistics st = td_pvalues(u, sigma, components);
    const std::vector<double> q = bh_adjust(st.p_raw);
    std::vector<double> hist(static_cast<std::size_t>(bins), 0.0);
    std::size_t kept = 0;
    for (std::size_t d = 0; d < q.size(); ++d) {
        if (q[d] <= exclusion_threshold) continue;
        const double v = 1.0 - st.p_raw[d];
        const auto s = std::min(bins - 1, static_cast<int>(std::floor(v * bins)));
        hist[static_cast<std::size_t>(std::max(0, s))] += 1.0;
        ++kept;
    }
    if (kept == 0) return -1.0;
    const double mean = static_cast<double>(kept) / bins;
    double acc = 0.0;
    for (double h : hist) acc += (h - mean) * (h - mean);
    return std::sqrt(acc / bins);
}

SigmaFit optimize_sigma(const Matrix& u, const ComponentSet& components, SigmaOptions options) {
    check_components(components, u.rows(), "optimize_sigma");
    if (options.bins < 2) throw ArgumentError("optimize_sigma: bins must be >= 2");
    if (options.grid_points < 1 || !(options.grid_low > 0.0) || !(options.grid_high >= options.grid_low)) {
        throw ArgumentError("optimize_sigma: invalid sigma grid");
    }
    SigmaFit fit;
    fit.bins = options.bins;
    fit.exclusion_threshold = options.exclusion_threshold;
    if (options.sharing == SigmaSharing::shared) {
        const auto [sigma, h] = scan_sigma(u, components, options);
        fit.sigma.assign(components.size(), sigma);
        fit.sigma_h = h;
        return fit;
    }
    for (Index c : components) {
        fit.sigma.push_back(scan_sigma(u, ComponentSet{c}, options).first);
    }
    fit.sigma_h = histogram_flatness(u, fit.sigma, components, options.bins, options.exclusion_threshold);
    if (fit.sigma_h < 0.0) {
        throw OptimizationFailedError("optimize_sigma: per-component sigmas exclude every feature");
    }
    return fit;
}

std::vector<std::pair<Index, double>> rank_components_by_core(const Tensor3& core,
                                                              const ComponentSet& fixed_l2,
                                                              const ComponentSet& fixed_l3) {
    const Dims3& d = core.dims();
    auto expand = [](const ComponentSet& s, Index extent, const char* name) {
        if (s.empty()) {
            ComponentSet all(static_cast<std::size_t>(extent));
            std::iota(all.begin(), all.end(), Index{0});
            return all;
        }
        for (Index v : s) {
            if (v < 0 || v >= extent) {
                throw ArgumentError(std::string("rank_components_by_core: ") + name + " index " +
                                    std::to_string(v + 1) + " out of range");
            }
        }
        return s;
    };
    const ComponentSet l2 = expand(fixed_l2, d.m, "l2");
    const ComponentSet l3 = expand(fixed_l3, d.k, "l3");

    std::vector<std::pair<Index, double>> out;
    for (Index l1 = 0; l1 < d.n; ++l1) {
        double w = 0.0;
        for (Index b : l2) {
            for (Index c : l3) w = std::max(w, std::abs(core(l1, b, c)));
        }
        out.emplace_back(l1, w);
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    return out;
}

SelectionResult select_features(const FeatureStatistics& stats, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw ArgumentError("select_features: threshold must lie in (0, 1)");
    }
    SelectionResult out;
    out.statistic = stats.statistic;
    out.p_raw = stats.p_raw;
    out.p_adjusted = bh_adjust(stats.p_raw);
    out.dof = stats.dof;
    out.threshold = threshold;
    out.selected.reserve(out.p_adjusted.size());
    for (double q : out.p_adjusted) out.selected.push_back(q <= threshold);
    return out;
}

SelectionResult select_features(const std::vector<double>& p_raw, double threshold) {
    FeatureStatistics stats;
    stats.p_raw = p_raw;
    stats.statistic.assign(p_raw.size(), std::nan(""));
    return select_features(stats, threshold);
}

SvdSelectResult svd_select(const Matrix& x, const ComponentSet& components, SelectionMethod method,
                           double threshold, const SvdSelectOptions& options) {
    const Index full = std::min(x.rows(), x.cols());
    check_components(components, full, "svd_select");
    const Index max_comp = *std::max_element(components.begin(), components.end());
    const Index rank = options.model_rank > 0 ? options.model_rank : max_comp + 1;
    if (rank <= max_comp || rank > full) {
        throw ArgumentError("svd_select: model rank must cover the components and be <= min(N, M)");
    }

    const SvdResult dec = svd(x, rank);
    SvdSelectResult out;
    out.feature_loadings = dec.u.transpose();
    out.sample_loadings = dec.v.transpose();
    out.singular_values = dec.s;

    if (method == SelectionMethod::td) {
        const SigmaFit fit = optimize_sigma(out.feature_loadings, components, options.sigma);
        out.sigma = fit.sigma;
        out.selection = select_features(td_pvalues(out.feature_loadings, fit.sigma, components), threshold);
        return out;
    }

    // Matrix as an N x M x 1 tensor with a diagonal core; the sample loadings
    // scaled by the singular values form the regression design.
    const Tensor3 t({x.rows(), x.cols(), 1}, std::vector<double>(x.data(), x.data() + x.size()));
    TuckerModel model;
    model.factors[0] = out.feature_loadings;
    model.factors[1] = out.sample_loadings;
    model.factors[2] = Matrix::Ones(1, 1);
    model.core = Tensor3({rank, rank, 1});
    for (Index l = 0; l < rank; ++l) model.core(l, l, 0) = dec.s(l);

    out.beta = estimate_beta(t, model);
    const ModeStats post = posterior_stats(t, model, 1, 0.0, out.beta);
    out.selection = select_features(btud_pvalues(post.mean, post.cov, components), threshold);
    return out;
}

}  // namespace btud
