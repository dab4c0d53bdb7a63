#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rlhd/design.hpp"

namespace rlhd {

enum class DistributionKind { uniform, normal, log_uniform, log_normal };

const char* to_string(DistributionKind kind) noexcept;
/// Accepts "uniform", "normal", "log_uniform"/"log-uniform", "log_normal"/"log-normal".
DistributionKind parse_distribution_kind(const std::string& text);

/// Bounds in physical units.
struct Truncation {
    double lower;
    double upper;
};

/// Standard normal CDF from erfc; accurate in both tails.
double standard_normal_cdf(double x);
/// Acklam's rational approximation refined by one Halley step; |error| in u below 1e-12.
double standard_normal_quantile(double u);

// One-dimensional input law. Log kinds are parameterised by the law of ln X:
// log_uniform(a, b) means ln X ~ U(a, b); log_normal(m, s) means ln X ~ N(m, s).
class MarginalDistribution {
public:
    static MarginalDistribution uniform(double lower, double upper);
    static MarginalDistribution normal(double mean, double std_dev);
    static MarginalDistribution log_uniform(double log_lower, double log_upper);
    static MarginalDistribution log_normal(double log_mean, double log_std_dev);
    /// Generic factory with validation; params follow the kind-specific order above.
    static MarginalDistribution make(DistributionKind kind, const std::vector<double>& params,
                                     std::optional<Truncation> truncation = std::nullopt);

    /// Copy restricted to [lower, upper]; throws ConfigurationError if the interval has no mass.
    MarginalDistribution truncated(double lower, double upper) const;

    DistributionKind kind() const noexcept { return kind_; }
    const std::vector<double>& params() const noexcept { return params_; }
    const std::optional<Truncation>& truncation() const noexcept { return truncation_; }

    /// CDF of the (possibly truncated) law.
    double cdf(double x) const;
    /// Quantile; u must lie in [0, 1). Throws DomainError otherwise.
    double inverse_cdf(double u) const;

private:
    MarginalDistribution(DistributionKind kind, std::vector<double> params)
        : kind_(kind), params_(std::move(params)) {}

    double base_cdf(double x) const;
    double base_quantile(double u) const;

    DistributionKind kind_;
    std::vector<double> params_;
    std::optional<Truncation> truncation_;
    double mass_lower_ = 0.0;
    double mass_upper_ = 1.0;
};

/// Applies the marginal quantiles column by column. Identity, family and
/// permutations are carried over; the result is tagged as physical space.
DesignMatrix transform_design(const DesignMatrix& unit, const std::vector<MarginalDistribution>& marginals);

}  // namespace rlhd
