#include "rlhd/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rlhd/error.hpp"
#include "rlhd/rng.hpp"

namespace rlhd {

void BootstrapConfig::validate() const {
    if (replicates < 1) throw ConfigurationError("bootstrap needs at least one replicate");
    if (!(level > 0.0 && level < 1.0)) throw ConfigurationError("bootstrap level must lie in (0, 1)");
    if (method != "percentile") throw ConfigurationError("unsupported bootstrap method '" + method + "'");
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw DomainError("quantile of an empty sample");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - static_cast<double>(lo);
    if (frac == 0.0) return sorted[lo];
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Resampler default_resampler(const BootstrapConfig& cfg) {
    const std::uint64_t base = derive_seed(cfg.seed, cfg.stream);
    return [base](std::size_t n, std::size_t replicate, std::size_t attempt) {
        RandomStream stream(derive_seed(derive_seed(base, replicate), attempt));
        std::vector<std::size_t> idx(n);
        for (std::size_t& v : idx) v = stream.below(n);
        return idx;
    };
}

std::vector<double> bootstrap_replicates(const Statistic& statistic, const AlignedColumns& columns,
                                         const BootstrapConfig& cfg, const Resampler& resampler) {
    cfg.validate();
    if (columns.empty()) throw DomainError("bootstrap needs at least one column");
    const std::size_t n = columns.front().size();
    for (const auto& c : columns)
        if (c.size() != n) throw DomainError("bootstrap columns are not aligned");
    const Resampler draw = resampler ? resampler : default_resampler(cfg);

    std::vector<double> values(cfg.replicates);
    AlignedColumns sample(columns.size(), std::vector<double>(n));
    for (std::size_t r = 0; r < cfg.replicates; ++r) {
        for (std::size_t attempt = 0;; ++attempt) {
            const std::vector<std::size_t> idx = draw(n, r, attempt);
            if (idx.size() != n) throw DomainError("resampler returned the wrong number of rows");
            for (std::size_t c = 0; c < columns.size(); ++c)
                for (std::size_t k = 0; k < n; ++k) sample[c][k] = columns[c][idx[k]];
            try {
                values[r] = statistic(sample, nullptr);
                break;
            } catch (const Error& e) {
                if (attempt >= cfg.max_retries)
                    throw DegenerateModelError("bootstrap replicate " + std::to_string(r) + " failed after " +
                                               std::to_string(cfg.max_retries) + " retries: " + e.what());
            }
        }
    }
    return values;
}

ConfidenceInterval bootstrap_ci(const Statistic& statistic, const AlignedColumns& columns,
                                const BootstrapConfig& cfg, const Resampler& resampler) {
    std::vector<double> values = bootstrap_replicates(statistic, columns, cfg, resampler);
    std::sort(values.begin(), values.end());
    const double alpha = 1.0 - cfg.level;
    return ConfidenceInterval{quantile_sorted(values, alpha / 2.0), quantile_sorted(values, 1.0 - alpha / 2.0),
                              cfg.level, cfg.replicates};
}

}  // namespace rlhd
