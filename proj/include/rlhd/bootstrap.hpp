#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace rlhd {

/// Output vectors sharing one row index: row k of every column belongs to the same pick-freeze tuple.
using AlignedColumns = std::vector<std::vector<double>>;

/// Estimator closure over aligned columns. When `components` is non-null the
/// statistic also reports its per-component values.
using Statistic = std::function<double(const AlignedColumns&, std::vector<double>* components)>;

/// Row index vector for (N, replicate, attempt).
using Resampler = std::function<std::vector<std::size_t>(std::size_t n, std::size_t replicate, std::size_t attempt)>;

struct BootstrapConfig {
    std::size_t replicates = 1000;
    double level = 0.95;
    std::string method = "percentile";
    std::uint64_t seed = 0;
    std::string stream = "bootstrap";
    std::size_t max_retries = 10;

    /// Throws ConfigurationError on B < 1, level outside (0, 1) or an unknown method.
    void validate() const;
};

struct ConfidenceInterval {
    double lower = 0.0;
    double upper = 0.0;
    double level = 0.0;
    std::size_t replicates = 0;
};

/// Sample quantile with linear interpolation between order statistics (type 7).
double quantile_sorted(const std::vector<double>& sorted, double q);

/// Resampler drawing N indices with replacement from per-replicate substreams of cfg.seed.
Resampler default_resampler(const BootstrapConfig& cfg);

/// Re-estimates under joint row resampling. A replicate whose statistic throws a
/// library error is redrawn up to cfg.max_retries times; afterwards the error is raised.
std::vector<double> bootstrap_replicates(const Statistic& statistic, const AlignedColumns& columns,
                                         const BootstrapConfig& cfg, const Resampler& resampler = {});

/// Percentile interval of the bootstrap replicates.
ConfidenceInterval bootstrap_ci(const Statistic& statistic, const AlignedColumns& columns,
                                const BootstrapConfig& cfg, const Resampler& resampler = {});

}  // namespace rlhd
