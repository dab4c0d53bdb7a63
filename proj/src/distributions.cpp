#include "rlhd/distributions.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "rlhd/error.hpp"

namespace rlhd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double acklam(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                               1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                               6.680131188771972e+01,  -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                               -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                               3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - p_low) {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

void require_finite(const std::vector<double>& params) {
    for (double v : params)
        if (!std::isfinite(v)) throw ConfigurationError("distribution parameter is not finite");
}

}  // namespace

const char* to_string(DistributionKind kind) noexcept {
    switch (kind) {
    case DistributionKind::uniform: return "uniform";
    case DistributionKind::normal: return "normal";
    case DistributionKind::log_uniform: return "log_uniform";
    case DistributionKind::log_normal: return "log_normal";
    }
    return "unknown";
}

DistributionKind parse_distribution_kind(const std::string& text) {
    if (text == "uniform") return DistributionKind::uniform;
    if (text == "normal") return DistributionKind::normal;
    if (text == "log_uniform" || text == "log-uniform") return DistributionKind::log_uniform;
    if (text == "log_normal" || text == "log-normal") return DistributionKind::log_normal;
    throw ConfigurationError("unknown distribution kind '" + text + "'");
}

double standard_normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double standard_normal_quantile(double u) {
    if (std::isnan(u) || u < 0.0 || u > 1.0) throw DomainError("normal quantile needs u in [0, 1]");
    if (u == 0.0) return -kInf;
    if (u == 1.0) return kInf;
    double x = acklam(u);
    // Halley refinement against the erfc-based CDF.
    const double e = standard_normal_cdf(x) - u;
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    if (pdf > 0.0) {
        const double step = e / pdf;
        x = x - step / (1.0 + 0.5 * x * step);
    }
    return x;
}

MarginalDistribution MarginalDistribution::uniform(double lower, double upper) {
    return make(DistributionKind::uniform, {lower, upper});
}
MarginalDistribution MarginalDistribution::normal(double mean, double std_dev) {
    return make(DistributionKind::normal, {mean, std_dev});
}
MarginalDistribution MarginalDistribution::log_uniform(double log_lower, double log_upper) {
    return make(DistributionKind::log_uniform, {log_lower, log_upper});
}
MarginalDistribution MarginalDistribution::log_normal(double log_mean, double log_std_dev) {
    return make(DistributionKind::log_normal, {log_mean, log_std_dev});
}

MarginalDistribution MarginalDistribution::make(DistributionKind kind, const std::vector<double>& params,
                                                std::optional<Truncation> truncation) {
    if (params.size() != 2)
        throw ConfigurationError(std::string(to_string(kind)) + " needs exactly 2 parameters");
    require_finite(params);
    switch (kind) {
    case DistributionKind::uniform:
    case DistributionKind::log_uniform:
        if (!(params[0] < params[1]))
            throw ConfigurationError(std::string(to_string(kind)) + " needs lower < upper");
        break;
    case DistributionKind::normal:
    case DistributionKind::log_normal:
        if (!(params[1] > 0.0))
            throw ConfigurationError(std::string(to_string(kind)) + " needs a positive standard deviation");
        break;
    }
    MarginalDistribution m(kind, params);
    if (truncation) return m.truncated(truncation->lower, truncation->upper);
    return m;
}

MarginalDistribution MarginalDistribution::truncated(double lower, double upper) const {
    if (!(lower < upper)) throw ConfigurationError("truncation needs lower < upper");
    MarginalDistribution m(kind_, params_);
    m.truncation_ = Truncation{lower, upper};
    m.mass_lower_ = base_cdf(lower);
    m.mass_upper_ = base_cdf(upper);
    if (!(m.mass_upper_ - m.mass_lower_ > 0.0))
        throw ConfigurationError("truncation interval carries no probability mass");
    return m;
}

double MarginalDistribution::base_cdf(double x) const {
    const double p0 = params_[0];
    const double p1 = params_[1];
    switch (kind_) {
    case DistributionKind::uniform:
        if (x <= p0) return 0.0;
        if (x >= p1) return 1.0;
        return (x - p0) / (p1 - p0);
    case DistributionKind::normal:
        return standard_normal_cdf((x - p0) / p1);
    case DistributionKind::log_uniform: {
        if (x <= 0.0) return 0.0;
        const double l = std::log(x);
        if (l <= p0) return 0.0;
        if (l >= p1) return 1.0;
        return (l - p0) / (p1 - p0);
    }
    case DistributionKind::log_normal:
        if (x <= 0.0) return 0.0;
        return standard_normal_cdf((std::log(x) - p0) / p1);
    }
    return 0.0;
}

double MarginalDistribution::base_quantile(double u) const {
    const double p0 = params_[0];
    const double p1 = params_[1];
    switch (kind_) {
    case DistributionKind::uniform: return p0 + u * (p1 - p0);
    case DistributionKind::normal: return p0 + p1 * standard_normal_quantile(u);
    case DistributionKind::log_uniform: return std::exp(p0 + u * (p1 - p0));
    case DistributionKind::log_normal: return std::exp(p0 + p1 * standard_normal_quantile(u));
    }
    return 0.0;
}

double MarginalDistribution::cdf(double x) const {
    const double f = base_cdf(x);
    if (!truncation_) return f;
    if (x <= truncation_->lower) return 0.0;
    if (x >= truncation_->upper) return 1.0;
    return (f - mass_lower_) / (mass_upper_ - mass_lower_);
}

double MarginalDistribution::inverse_cdf(double u) const {
    if (std::isnan(u) || u < 0.0 || u >= 1.0)
        throw DomainError("inverse_cdf needs u in [0, 1), got " + std::to_string(u));
    if (!truncation_) return base_quantile(u);
    const double v = base_quantile(mass_lower_ + u * (mass_upper_ - mass_lower_));
    if (v < truncation_->lower) return truncation_->lower;
    if (v > truncation_->upper) return truncation_->upper;
    return v;
}

DesignMatrix transform_design(const DesignMatrix& unit, const std::vector<MarginalDistribution>& marginals) {
    if (marginals.size() != unit.cols())
        throw ConfigurationError("transform_design: " + std::to_string(marginals.size()) +
                                 " marginals for a design with " + std::to_string(unit.cols()) + " columns");
    DesignMatrix out = unit;
    out.space = Space::physical;
    for (std::size_t k = 0; k < unit.rows(); ++k)
        for (std::size_t c = 0; c < unit.cols(); ++c)
            out.points(k, c) = marginals[c].inverse_cdf(unit.points(k, c));
    return out;
}

}  // namespace rlhd
