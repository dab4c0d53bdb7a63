#include <gtest/gtest.h>

#include <cmath>

#include "rlhd/distributions.hpp"
#include "rlhd/error.hpp"

using namespace rlhd;

namespace {

// Standard normal CDF by composite Simpson integration of the density from 0.
double simpson_cdf(double x) {
    const int steps = 20000;
    const double h = x / steps;
    auto pdf = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI); };
    double s = pdf(0.0) + pdf(x);
    for (int k = 1; k < steps; ++k) s += (k % 2 ? 4.0 : 2.0) * pdf(k * h);
    return 0.5 + s * h / 3.0;
}

// Quantile by bisection on the integrated CDF.
double bisect_quantile(double u) {
    double lo = -9.0, hi = 9.0;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (simpson_cdf(mid) < u ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST(Normal, CdfMatchesNumericIntegration) {
    for (double x : {-4.0, -2.5, -1.0, -0.3, 0.0, 0.7, 1.96, 3.3})
        EXPECT_NEAR(standard_normal_cdf(x), simpson_cdf(x), 1e-12) << x;
}

TEST(Normal, QuantileMatchesBisectionOracle) {
    for (double u : {1e-6, 0.001, 0.025, 0.2, 0.5, 0.61, 0.975, 0.999, 1 - 1e-6})
        EXPECT_NEAR(standard_normal_quantile(u), bisect_quantile(u), 1e-9) << u;
}

TEST(Normal, QuantileInvertsCdf) {
    for (double u = 0.0005; u < 1.0; u += 0.0137)
        EXPECT_NEAR(standard_normal_cdf(standard_normal_quantile(u)), u, 1e-14);
    EXPECT_TRUE(std::isinf(standard_normal_quantile(0.0)));
    EXPECT_LT(standard_normal_quantile(0.0), 0.0);
}

TEST(Marginal, UniformMapsAffinely) {
    const auto m = MarginalDistribution::uniform(2.0, 6.0);
    EXPECT_DOUBLE_EQ(m.inverse_cdf(0.25), 3.0);
    EXPECT_DOUBLE_EQ(m.cdf(3.0), 0.25);
}

TEST(Marginal, LogKindsUseTheLawOfTheLog) {
    const auto lu = MarginalDistribution::log_uniform(0.0, std::log(100.0));
    EXPECT_NEAR(lu.inverse_cdf(0.5), 10.0, 1e-12);
    const auto ln = MarginalDistribution::log_normal(1.0, 0.5);
    EXPECT_NEAR(ln.inverse_cdf(0.5), std::exp(1.0), 1e-12);
    EXPECT_NEAR(ln.cdf(ln.inverse_cdf(0.3)), 0.3, 1e-12);
}

TEST(Marginal, TruncationRescalesAndStaysInside) {
    const auto t = MarginalDistribution::normal(0.0, 1.0).truncated(-1.0, 2.0);
    for (double u = 0.0; u < 1.0; u += 0.01) {
        const double v = t.inverse_cdf(u);
        EXPECT_GE(v, -1.0);
        EXPECT_LE(v, 2.0);
        EXPECT_NEAR(t.cdf(v), u, 1e-10);
    }
    EXPECT_THROW(MarginalDistribution::uniform(0.0, 1.0).truncated(2.0, 3.0), ConfigurationError);
}

TEST(Marginal, RejectsBadParametersAndArguments) {
    EXPECT_THROW(MarginalDistribution::uniform(1.0, 1.0), ConfigurationError);
    EXPECT_THROW(MarginalDistribution::normal(0.0, 0.0), ConfigurationError);
    EXPECT_THROW(MarginalDistribution::make(DistributionKind::normal, {0.0}), ConfigurationError);
    EXPECT_THROW(MarginalDistribution::uniform(0.0, 1.0).inverse_cdf(1.0), DomainError);
    EXPECT_THROW(MarginalDistribution::uniform(0.0, 1.0).inverse_cdf(-0.1), DomainError);
    EXPECT_THROW(parse_distribution_kind("cauchy"), Error);
    EXPECT_EQ(parse_distribution_kind("log_normal"), DistributionKind::log_normal);
}

TEST(Marginal, TransformDesignKeepsStrataOrder) {
    RlhdFamily f = RlhdFamily::make_pair(30, 2, 3);
    const DesignMatrix p =
        transform_design(f.x(), {MarginalDistribution::normal(5.0, 2.0), MarginalDistribution::log_uniform(0.0, 1.0)});
    EXPECT_EQ(p.space, Space::physical);
    for (std::size_t a = 0; a < 30; ++a)
        for (std::size_t b = 0; b < 30; ++b)
            if (f.x().points(a, 0) < f.x().points(b, 0)) {
                EXPECT_LT(p.points(a, 0), p.points(b, 0));
            }
    EXPECT_THROW(transform_design(f.x(), {MarginalDistribution::normal(0.0, 1.0)}), ConfigurationError);
}
