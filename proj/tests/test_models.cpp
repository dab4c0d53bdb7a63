#include <gtest/gtest.h>

#include <cmath>

#include "rlhd/error.hpp"
#include "rlhd/models.hpp"

using namespace rlhd;

namespace {

// First-order and total indices of a 3-input model by two-point Gauss quadrature on cells whose
// boundaries include 1/2. Squares of piecewise-linear factors are piecewise quadratic, so every
// integral below is exact up to rounding. m is the node count per axis (two per cell).
struct GridIndices {
    double s[3];
    double st[3];
};

double node(int k, int m) {
    const double cell = 2.0 / m, offset = (k % 2 == 0 ? -0.5 : 0.5) / std::sqrt(3.0);
    return (k / 2 + 0.5 + offset) * cell;
}

GridIndices grid_indices(const Evaluator& f, int m) {
    std::vector<double> y(static_cast<std::size_t>(m) * m * m);
    auto at = [&](int a, int b, int c) -> double& { return y[(static_cast<std::size_t>(a) * m + b) * m + c]; };
    double sum = 0.0, sumsq = 0.0;
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c) {
                const double x[3] = {node(a, m), node(b, m), node(c, m)};
                const double v = f(x);
                at(a, b, c) = v;
                sum += v;
                sumsq += v * v;
            }
    const double n = static_cast<double>(y.size());
    const double mean = sum / n, var = sumsq / n - mean * mean;
    GridIndices g{};
    for (int i = 0; i < 3; ++i) {
        double vcond = 0.0, evar = 0.0;
        for (int u = 0; u < m; ++u) {
            double s = 0.0;
            for (int p = 0; p < m; ++p)
                for (int q = 0; q < m; ++q) s += i == 0 ? at(u, p, q) : i == 1 ? at(p, u, q) : at(p, q, u);
            const double cm = s / (static_cast<double>(m) * m);
            vcond += (cm - mean) * (cm - mean) / m;
        }
        for (int p = 0; p < m; ++p)
            for (int q = 0; q < m; ++q) {
                double s = 0.0, ss = 0.0;
                for (int u = 0; u < m; ++u) {
                    const double v = i == 0 ? at(u, p, q) : i == 1 ? at(p, u, q) : at(p, q, u);
                    s += v;
                    ss += v * v;
                }
                evar += (ss / m - (s / m) * (s / m)) / (static_cast<double>(m) * m);
            }
        g.s[i] = vcond / var;
        g.st[i] = evar / var;
    }
    return g;
}

}  // namespace

TEST(Models, ModifiedGAgreesWithGridQuadrature) {
    const BuiltinModel m = resolve_model("mod-g-19-9-4");
    const AnalyticIndices a = analytic_indices(m);
    const GridIndices g = grid_indices(m.evaluate, 120);
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(a.first_order[i], g.s[i], 1e-9);
        EXPECT_NEAR(a.total_order[i], g.st[i], 1e-9);
    }
}

TEST(Models, StandardGAgreesWithGridQuadrature) {
    const GFamily f = GFamily::standard({0.0, 1.0, 4.5});
    const AnalyticIndices a = analytic_indices(f);
    const GridIndices g = grid_indices([&](std::span<const double> x) { return f(x); }, 120);
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(a.first_order[i], g.s[i], 1e-9);
        EXPECT_NEAR(a.total_order[i], g.st[i], 1e-9);
    }
}

TEST(Models, PrintedReferenceValues) {
    const auto a = analytic_indices(resolve_model("mod-g-19-9-4"));
    EXPECT_NEAR(a.first_order[0], 0.0476, 5e-5);
    EXPECT_NEAR(a.first_order[1], 0.1904, 5e-5);
    EXPECT_NEAR(a.first_order[2], 0.7616, 5e-5);

    const auto lin = analytic_indices(resolve_model("mod-g-lin-eps0.10"));
    ASSERT_EQ(lin.first_order.size(), 10u);
    EXPECT_NEAR(lin.first_order[0], 0.0474, 5e-5);
    EXPECT_NEAR(lin.first_order[1], 0.1896, 5e-5);
    EXPECT_NEAR(lin.first_order[2], 0.7585, 5e-5);
    for (std::size_t j = 3; j < 10; ++j) EXPECT_NEAR(lin.first_order[j], 5.9e-4, 5e-6);

    const auto b = analytic_indices(resolve_model("mod-g-10-10-4"));
    EXPECT_NEAR(b.first_order[0], 0.1456, 5e-5);
    EXPECT_NEAR(b.first_order[1], 0.1456, 5e-5);
    EXPECT_NEAR(b.first_order[2], 0.7046, 5e-5);
    for (std::size_t j = 3; j < 10; ++j) EXPECT_NEAR(b.first_order[j], 5.4e-4, 5e-6);

    const auto g = analytic_indices(resolve_model("g-sobol-d10-a0"));
    for (double s : g.first_order) EXPECT_NEAR(s, 0.01989, 5e-6);
    // Closed form v prod_{j != i}(1 + v) / D with v = 1/3.
    const double v = 1.0 / 3.0, D = std::pow(1.0 + v, 10) - 1.0;
    for (double st : g.total_order) EXPECT_NEAR(st, v * std::pow(1.0 + v, 9) / D, 1e-12);
}

TEST(Models, AdditiveModelsHaveNoInteractions) {
    const auto a = analytic_indices(resolve_model("additive-d4"));
    double sum = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_DOUBLE_EQ(a.first_order[i], a.total_order[i]);
        sum += a.first_order[i];
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Models, BruteForceAgreesWithClosedForm) {
    const BuiltinModel m = resolve_model("mod-g-10-10-4");
    const auto a = analytic_indices(m);
    const auto b = brute_force_indices(m.evaluate, m.dimension, 40000, 3);
    for (std::size_t i = 0; i < m.dimension; ++i) {
        EXPECT_NEAR(b.first_order[i], a.first_order[i], 5.0 * b.first_order_se[i] + 1e-3) << i;
        EXPECT_NEAR(b.total_order[i], a.total_order[i], 5.0 * b.total_order_se[i] + 1e-3) << i;
    }
    EXPECT_NEAR(b.total_variance, a.total_variance, 0.05 * a.total_variance);
}

TEST(Models, BruteForceGuardsSampleSize) {
    const BuiltinModel m = resolve_model("additive-d2");
    EXPECT_THROW(brute_force_indices(m.evaluate, 2, 100, 0), DomainError);
    EXPECT_NO_THROW(brute_force_indices(m.evaluate, 2, 100, 0, true));
}

TEST(Models, ResolveAndEvaluate) {
    const BuiltinModel m = resolve_model("mod-g-19-9-4");
    EXPECT_EQ(m.dimension, 3u);
    // At x = 1/2 every |4x - 2| vanishes, leaving prod c_j / (1 + a_j) with c = 2 + 3a.
    const double half[3] = {0.5, 0.5, 0.5};
    EXPECT_NEAR(m.evaluate(half), (59.0 / 20.0) * (29.0 / 10.0) * (14.0 / 5.0), 1e-12);
    const double xs[2] = {0.3, 0.5};
    EXPECT_DOUBLE_EQ(resolve_model("product-d2").evaluate(xs), 0.15);
    EXPECT_THROW(resolve_model("ishigami"), UsageError);
    EXPECT_THROW(analytic_indices(resolve_model("product-d2")), UnsupportedError);
    EXPECT_THROW(GFamily::modified({-1.0}), DomainError);
    for (const auto& id : builtin_model_ids()) EXPECT_NO_THROW(resolve_model(id)) << id;
}
