#include "btud/datagen.hpp"
#include "btud/errors.hpp"
#include "btud/select.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace btud;

TEST(Chi2Sf, ClosedForms) {
    for (int dof : {1, 2, 3, 7}) EXPECT_EQ(chi2_sf(0.0, dof), 1.0);
    EXPECT_NEAR(chi2_sf(2.0 * std::log(2.0), 2), 0.5, 1e-15);
    for (int i = 0; i < 100; ++i) {
        const double x = 0.25 * i;
        EXPECT_NEAR(chi2_sf(x, 2), std::exp(-x / 2.0), 1e-12);
    }
    EXPECT_THROW(chi2_sf(-1.0, 1), ArgumentError);
    EXPECT_THROW(chi2_sf(1.0, 0), ArgumentError);
}

TEST(Chi2Sf, OneDofMatchesNormalTailAndQuadrature) {
    for (double x : {0.01, 0.5, 1.0, 3.841458820694124, 9.0, 25.0}) {
        const double q = oracle::chi2_sf_dof1_quadrature(x);
        EXPECT_NEAR(chi2_sf(x, 1), q, 1e-10 * std::max(q, 1e-300) + 1e-14) << x;
        EXPECT_NEAR(chi2_sf(x, 1), std::erfc(std::sqrt(x / 2.0)), 1e-14) << x;
    }
    EXPECT_NEAR(chi2_sf(3.841458820694124, 1), 0.05, 1e-12);
}

TEST(BhAdjust, HandCases) {
    EXPECT_EQ(bh_adjust({0.03}), std::vector<double>{0.03});
    const std::vector<double> q = bh_adjust({0.01, 0.02, 0.03, 0.04});
    for (double v : q) EXPECT_NEAR(v, 0.04, 1e-15);
    EXPECT_EQ(bh_adjust({1.0, 1.0}), (std::vector<double>{1.0, 1.0}));
    EXPECT_TRUE(bh_adjust({}).empty());
    EXPECT_THROW(bh_adjust({0.5, 1.5}), ArgumentError);
}

TEST(BhAdjust, EqualsBruteForceOnRandomVectors) {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u01;
    std::uniform_int_distribution<int> len(1, 60);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> p(static_cast<std::size_t>(len(rng)));
        for (double& v : p) v = (trial % 3 == 0) ? std::round(u01(rng) * 10.0) / 10.0 : std::pow(u01(rng), 3);
        EXPECT_EQ(bh_adjust(p), oracle::brute_force_bh(p)) << "trial " << trial;
    }
}

TEST(BtudPvalues, HandCases) {
    Matrix m(1, 2);
    m << 0.0, 2.0;
    const FeatureStatistics s = btud_pvalues(m, Matrix::Identity(1, 1), {0});
    EXPECT_EQ(s.statistic[0], 0.0);
    EXPECT_EQ(s.p_raw[0], 1.0);
    EXPECT_EQ(s.statistic[1], 4.0);
    EXPECT_NEAR(s.p_raw[1], 0.04550026389635842, 1e-14);
    EXPECT_EQ(s.dof, 1);

    const FeatureStatistics two = btud_pvalues(Matrix::Ones(2, 1), Matrix::Identity(2, 2), {0, 1});
    EXPECT_EQ(two.statistic[0], 2.0);
    EXPECT_NEAR(two.p_raw[0], std::exp(-1.0), 1e-14);
    EXPECT_EQ(two.dof, 2);
}

TEST(BtudPvalues, UsesDiagonalOfSelectedComponents) {
    Matrix m(3, 1);
    m << 1.0, 3.0, 100.0;
    Matrix cov = Matrix::Identity(3, 3);
    cov(1, 1) = 9.0;
    cov(2, 2) = 0.0;
    const FeatureStatistics s = btud_pvalues(m, cov, {1});
    EXPECT_NEAR(s.statistic[0], 1.0, 1e-15);
    try {
        btud_pvalues(m, cov, {0, 2});
        FAIL() << "expected DegenerateVarianceError";
    } catch (const DegenerateVarianceError& e) {
        EXPECT_EQ(e.component(), 2);
    }
    EXPECT_THROW(btud_pvalues(m, cov, {}), ArgumentError);
    EXPECT_THROW(btud_pvalues(m, cov, {3}), ArgumentError);
}

TEST(TdPvalues, HandCasesAndScaling) {
    Matrix u(1, 2);
    u << 0.0, 3.0;
    const FeatureStatistics s1 = td_pvalues(u, {1.0}, {0});
    EXPECT_EQ(s1.p_raw[0], 1.0);
    EXPECT_EQ(s1.statistic[1], 9.0);
    EXPECT_NEAR(s1.p_raw[1], 0.0026997960632601866, 1e-15);
    const FeatureStatistics s2 = td_pvalues(u, {2.0}, {0});
    EXPECT_EQ(s2.statistic[1], s1.statistic[1] / 4.0);
    EXPECT_THROW(td_pvalues(u, {0.0}, {0}), ArgumentError);
    EXPECT_THROW(td_pvalues(u, {1.0, 1.0}, {0}), ArgumentError);
}

TEST(OptimizeSigma, RecoversUnitScaleOnGaussianLoadings) {
    std::mt19937_64 rng(103);
    const Matrix u = oracle::random_matrix(1, 20000, rng);
    const SigmaFit fit = optimize_sigma(u, {0});
    ASSERT_EQ(fit.sigma.size(), 1u);
    const double s = std::sqrt(u.squaredNorm() / (u.cols() - 1));
    const double step = (5.0 - 0.2) * s / 100.0;
    EXPECT_LE(std::abs(fit.sigma[0] - 1.0), step) << fit.sigma[0];
    EXPECT_GT(fit.sigma_h, 0.0);
    EXPECT_LE(fit.sigma_h, 2.0 * std::sqrt(20000.0 / fit.bins));
}

TEST(OptimizeSigma, ScaleEquivariant) {
    std::mt19937_64 rng(107);
    const Matrix u = oracle::random_matrix(2, 5000, rng);
    const SigmaFit a = optimize_sigma(u, {0, 1});
    const SigmaFit b = optimize_sigma(u * 7.5, {0, 1});
    ASSERT_EQ(a.sigma.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(b.sigma[i], 7.5 * a.sigma[i], 1e-9 * b.sigma[i]);
    SigmaOptions per;
    per.sharing = SigmaSharing::per_component;
    const SigmaFit c = optimize_sigma(u, {0, 1}, per);
    EXPECT_EQ(c.sigma.size(), 2u);
}

TEST(OptimizeSigma, ConstantLoadingsFail) {
    const Matrix u = Matrix::Zero(1, 100);
    EXPECT_THROW(optimize_sigma(u, {0}), OptimizationFailedError);
}

TEST(RankComponentsByCore, SingleNonzeroEntry) {
    Tensor3 g({3, 2, 2});
    g(1, 0, 0) = 5.0;
    const auto r = rank_components_by_core(g, {0}, {0});
    ASSERT_EQ(r.size(), 3u);
    EXPECT_EQ(r[0].first, 1);
    EXPECT_EQ(r[0].second, 5.0);
    EXPECT_EQ(r[1].first, 0);
    EXPECT_EQ(r[2].first, 2);
    EXPECT_EQ(r[1].second, 0.0);
}

TEST(RankComponentsByCore, TiesGoToSmallerIndex) {
    const Tensor3 g({4, 1, 1}, {-2.0, 2.0, 2.0, -2.0});
    const auto r = rank_components_by_core(g, {}, {});
    for (Index i = 0; i < 4; ++i) EXPECT_EQ(r[static_cast<std::size_t>(i)].first, i);
}

TEST(RankComponentsByCore, MatchesBruteForceScan) {
    std::mt19937_64 rng(109);
    const Tensor3 g = oracle::random_tensor({6, 3, 4}, rng);
    const ComponentSet l2{0, 2}, l3{1, 3};
    const auto r = rank_components_by_core(g, l2, l3);
    std::vector<std::pair<Index, double>> expected;
    for (Index a = 0; a < 6; ++a) {
        double best = 0.0;
        for (Index b : l2)
            for (Index c : l3) best = std::max(best, std::abs(g(a, b, c)));
        expected.emplace_back(a, best);
    }
    std::stable_sort(expected.begin(), expected.end(), [](auto x, auto y) { return x.second > y.second; });
    EXPECT_EQ(r, expected);
    EXPECT_THROW(rank_components_by_core(g, {3}, {}), ArgumentError);
}

TEST(SelectFeatures, HandCases) {
    const SelectionResult none = select_features(std::vector<double>{1.0, 1.0, 1.0});
    EXPECT_EQ(none.selected_count(), 0u);

    const SelectionResult r = select_features(std::vector<double>{1e-6, 0.5, 0.9}, 0.05);
    EXPECT_EQ(r.selected, (std::vector<bool>{true, false, false}));
    EXPECT_NEAR(r.p_adjusted[0], 3e-6, 1e-20);

    std::mt19937_64 rng(113);
    std::uniform_real_distribution<double> u01;
    std::vector<double> p(500);
    for (double& v : p) v = std::pow(u01(rng), 4);
    const SelectionResult loose = select_features(p, 0.05), strict = select_features(p, 0.01);
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (strict.selected[i]) {
            EXPECT_TRUE(loose.selected[i]);
        }
    }
    EXPECT_THROW(select_features(p, 0.0), ArgumentError);
    EXPECT_THROW(select_features(p, 1.0), ArgumentError);
}

TEST(SvdSelect, DominantPlantedRowIsSelected) {
    std::mt19937_64 rng(127);
    Matrix x = oracle::random_matrix(300, 20, rng);
    x.row(17).setConstant(50.0);
    for (SelectionMethod m : {SelectionMethod::btud, SelectionMethod::td}) {
        const SvdSelectResult r = svd_select(x, {0}, m);
        EXPECT_TRUE(r.selection.selected[17]);
        EXPECT_EQ(r.feature_loadings.rows(), 1);
        EXPECT_EQ(r.sample_loadings.cols(), 20);
    }
}

TEST(SvdSelect, PureNoiseFalseSelectionsStayWithinFdrScale) {
    std::mt19937_64 rng(131);
    double total = 0.0;
    const int ensembles = 10;
    for (int e = 0; e < ensembles; ++e) {
        const Matrix x = oracle::random_matrix(1000, 30, rng);
        total += static_cast<double>(svd_select(x, {0}, SelectionMethod::btud).selection.selected_count());
    }
    EXPECT_LE(total / ensembles, 0.05 * 1000);
}

TEST(SvdSelect, SinusoidBenchmark) {
    SinusoidParams p;
    p.seed = 3;
    const LabeledMatrix d = gen_sinusoid(p);
    const SvdSelectResult r = svd_select(d.data, {0, 1}, SelectionMethod::btud, 0.05, {2, {}});
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < d.truth.size(); ++i) {
        if (!r.selection.selected[i]) continue;
        (d.truth[i] ? tp : fp) += 1;
    }
    EXPECT_GE(tp, 990u);
    EXPECT_LE(fp, 5u);
    EXPECT_EQ(r.selection.dof, 2);
}

TEST(SvdSelect, RejectsBadRank) {
    std::mt19937_64 rng(137);
    const Matrix x = oracle::random_matrix(10, 4, rng);
    EXPECT_THROW(svd_select(x, {1}, SelectionMethod::btud, 0.05, {1, {}}), ArgumentError);
    EXPECT_THROW(svd_select(x, {4}, SelectionMethod::btud), ArgumentError);
}
