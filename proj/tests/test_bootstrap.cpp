#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "rlhd/bootstrap.hpp"
#include "rlhd/distributions.hpp"
#include "rlhd/error.hpp"
#include "rlhd/rng.hpp"

using namespace rlhd;

namespace {

double column_mean(const AlignedColumns& c, std::vector<double>*) {
    return std::accumulate(c[0].begin(), c[0].end(), 0.0) / static_cast<double>(c[0].size());
}

AlignedColumns normal_sample(std::size_t n, std::uint64_t seed) {
    RandomStream s(seed);
    std::vector<double> v(n);
    for (double& x : v) x = standard_normal_quantile(s.uniform01() * 0.999998 + 0.000001);
    return {v};
}

BootstrapConfig config(std::size_t b, double level, std::uint64_t seed) {
    BootstrapConfig c;
    c.replicates = b;
    c.level = level;
    c.seed = seed;
    return c;
}

}  // namespace

TEST(Quantile, Type7Interpolation) {
    std::vector<double> v(10);
    std::iota(v.begin(), v.end(), 1.0);
    EXPECT_DOUBLE_EQ(quantile_sorted(v, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(quantile_sorted(v, 0.1), 1.9);
    EXPECT_DOUBLE_EQ(quantile_sorted(v, 0.25), 3.25);
    EXPECT_DOUBLE_EQ(quantile_sorted(v, 0.5), 5.5);
    EXPECT_DOUBLE_EQ(quantile_sorted(v, 1.0), 10.0);
    EXPECT_THROW(quantile_sorted({}, 0.5), DomainError);
}

TEST(Bootstrap, ResamplesRowsJointly) {
    std::vector<double> a(50);
    std::iota(a.begin(), a.end(), 0.0);
    std::vector<double> b = a;
    for (double& x : b) x = 2.0 * x + 1.0;
    int checked = 0;
    const Statistic stat = [&](const AlignedColumns& c, std::vector<double>*) {
        for (std::size_t k = 0; k < c[0].size(); ++k)
            if (c[1][k] != 2.0 * c[0][k] + 1.0) ADD_FAILURE() << "row split across columns";
        ++checked;
        return c[0][0];
    };
    bootstrap_replicates(stat, {a, b}, config(40, 0.95, 1));
    EXPECT_EQ(checked, 40);
}

TEST(Bootstrap, DeterministicPerSeed) {
    const AlignedColumns data = normal_sample(100, 3);
    const auto a = bootstrap_ci(column_mean, data, config(300, 0.9, 5));
    const auto b = bootstrap_ci(column_mean, data, config(300, 0.9, 5));
    const auto c = bootstrap_ci(column_mean, data, config(300, 0.9, 6));
    EXPECT_EQ(a.lower, b.lower);
    EXPECT_EQ(a.upper, b.upper);
    EXPECT_NE(a.lower, c.lower);
    EXPECT_EQ(a.replicates, 300u);
    EXPECT_EQ(a.level, 0.9);
}

TEST(Bootstrap, IntervalsNestByLevel) {
    const AlignedColumns data = normal_sample(80, 4);
    const auto narrow = bootstrap_ci(column_mean, data, config(500, 0.80, 9));
    const auto mid = bootstrap_ci(column_mean, data, config(500, 0.95, 9));
    const auto wide = bootstrap_ci(column_mean, data, config(500, 0.99, 9));
    EXPECT_LE(wide.lower, mid.lower);
    EXPECT_LE(mid.lower, narrow.lower);
    EXPECT_GE(wide.upper, mid.upper);
    EXPECT_GE(mid.upper, narrow.upper);
}

TEST(Bootstrap, MeanIntervalWidthMatchesNormalTheory) {
    // For the mean of n standard normals the 95% width is close to 2 * 1.96 / sqrt(n).
    const AlignedColumns data = normal_sample(400, 8);
    const auto ci = bootstrap_ci(column_mean, data, config(4000, 0.95, 2));
    EXPECT_NEAR(ci.upper - ci.lower, 2.0 * 1.959964 / 20.0, 0.02);
}

TEST(Bootstrap, RetriesFailedReplicates) {
    std::vector<double> v{1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
    const Statistic spread = [](const AlignedColumns& c, std::vector<double>*) {
        const auto [lo, hi] = std::minmax_element(c[0].begin(), c[0].end());
        if (*lo == *hi) throw DegenerateModelError("constant resample");
        return *hi - *lo;
    };
    // The first attempt of every replicate draws a constant sample.
    const Resampler flaky = [](std::size_t n, std::size_t r, std::size_t attempt) {
        std::vector<std::size_t> idx(n, 0);
        if (attempt > 0)
            for (std::size_t k = 0; k < n; ++k) idx[k] = (k + r) % n;
        return idx;
    };
    const auto values = bootstrap_replicates(spread, {v}, config(5, 0.95, 1), flaky);
    for (double x : values) EXPECT_EQ(x, 5.0);

    const Resampler stuck = [](std::size_t n, std::size_t, std::size_t) { return std::vector<std::size_t>(n, 0); };
    EXPECT_THROW(bootstrap_replicates(spread, {v}, config(5, 0.95, 1), stuck), DegenerateModelError);
}

TEST(Bootstrap, ConfigValidation) {
    EXPECT_THROW(config(0, 0.95, 0).validate(), ConfigurationError);
    EXPECT_THROW(config(10, 1.0, 0).validate(), ConfigurationError);
    BootstrapConfig bca = config(10, 0.95, 0);
    bca.method = "bca";
    EXPECT_THROW(bca.validate(), ConfigurationError);
    EXPECT_THROW(bootstrap_replicates(column_mean, {{1.0, 2.0}, {1.0}}, config(5, 0.9, 0)), DomainError);
}
