#pragma once

#include "btud/tensor.hpp"

#include <utility>
#include <vector>

namespace btud {

/// Component indices are 0-based throughout this header (component 0 is l = 1).
using ComponentSet = std::vector<Index>;

struct FeatureStatistics {
    std::vector<double> statistic;
    std::vector<double> p_raw;
    int dof = 1;
};

struct SelectionResult {
    std::vector<double> statistic;
    std::vector<double> p_raw;
    std::vector<double> p_adjusted;
    std::vector<bool> selected;
    int dof = 1;
    double threshold = 0.05;

    std::size_t selected_count() const;
};

struct SigmaFit {
    std::vector<double> sigma;  ///< one entry per requested component
    double sigma_h = 0.0;
    int bins = 100;
    double exclusion_threshold = 0.01;
};

enum class SigmaSharing {
    shared,         ///< one sigma for all components, one flatness objective
    per_component,  ///< each component optimized on its own statistic
};

struct SigmaOptions {
    int bins = 100;
    double exclusion_threshold = 0.01;
    SigmaSharing sharing = SigmaSharing::shared;
    int grid_points = 101;
    double grid_low = 0.2;   ///< grid spans [grid_low * s, grid_high * s]
    double grid_high = 5.0;  ///< s = pooled sample SD of the selected rows
};

/// Upper tail of the chi-squared distribution, Q(dof/2, x/2).
double chi2_sf(double x, int dof);

/// Benjamini-Hochberg step-up adjusted P-values, in the input order.
std::vector<double> bh_adjust(const std::vector<double>& p);

/// statistic_d = sum_{l in components} means(l, d)^2 / cov(l, l); dof = |components|.
FeatureStatistics btud_pvalues(const Matrix& means, const Matrix& cov, const ComponentSet& components);

/// statistic_d = sum_{l in components} (u(l, d) / sigma_l)^2; `sigma` is aligned with `components`.
FeatureStatistics td_pvalues(const Matrix& u, const std::vector<double>& sigma,
                             const ComponentSet& components);

/// Histogram-flatness standard deviation sigma_h for one sigma vector, or
/// a negative value when every feature is excluded.
double histogram_flatness(const Matrix& u, const std::vector<double>& sigma,
                          const ComponentSet& components, int bins, double exclusion_threshold);

/// Picks sigma minimizing the spread of the 1 - P histogram of non-excluded features.
SigmaFit optimize_sigma(const Matrix& u, const ComponentSet& components, SigmaOptions options = {});

/// l1 candidates ordered by max |G(l1, l2, l3)| over the fixed l2 and l3 sets
/// (empty set = all), descending; ties go to the smaller l1.
std::vector<std::pair<Index, double>> rank_components_by_core(const Tensor3& core,
                                                              const ComponentSet& fixed_l2,
                                                              const ComponentSet& fixed_l3);

/// BH-adjusts and thresholds.
SelectionResult select_features(const FeatureStatistics& stats, double threshold = 0.05);
SelectionResult select_features(const std::vector<double>& p_raw, double threshold = 0.05);

enum class SelectionMethod { td, btud };

struct SvdSelectOptions {
    /// Rank of the fitted matrix model; 0 means max(components) + 1.
    Index model_rank = 0;
    SigmaOptions sigma{};
};

struct SvdSelectResult {
    SelectionResult selection;
    Matrix feature_loadings;  ///< R x N, u_{l i}
    Matrix sample_loadings;   ///< R x M, u_{l j}
    Vector singular_values;   ///< R
    double beta = 0.0;        ///< btud only
    std::vector<double> sigma;  ///< td only
};

/// Feature selection on an N x M matrix (features are rows) through its SVD.
SvdSelectResult svd_select(const Matrix& x, const ComponentSet& components, SelectionMethod method,
                           double threshold = 0.05, const SvdSelectOptions& options = {});

}  // namespace btud
