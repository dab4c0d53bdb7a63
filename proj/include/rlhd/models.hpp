#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rlhd {

struct AnalyticIndices {
    std::vector<double> first_order;
    std::vector<double> total_order;
    double total_variance = 0.0;
    double mean = 0.0;
};

/// Approximate indices with Monte Carlo standard errors.
struct IndexEstimates {
    std::vector<double> first_order;
    std::vector<double> total_order;
    std::vector<double> first_order_se;
    std::vector<double> total_order_se;
    double total_variance = 0.0;
};

// Product of factors (|4 x_j - 2| + c_j) / (1 + a_j) over the leading inputs,
// plus a linear tail sum_j eps_j x_{p+j} over the remaining inputs.
struct GFamily {
    std::vector<double> a;
    std::vector<double> c;
    std::vector<double> tail;

    std::size_t dimension() const noexcept { return a.size() + tail.size(); }
    double operator()(std::span<const double> x) const;

    /// c_j = 2 + 3 a_j.
    static GFamily modified(std::vector<double> a, std::vector<double> tail = {});
    /// c_j = a_j.
    static GFamily standard(std::vector<double> a, std::vector<double> tail = {});
};

using Evaluator = std::function<double(std::span<const double>)>;

struct BuiltinModel {
    std::string id;
    std::size_t dimension = 0;
    Evaluator evaluate;
    std::optional<GFamily> structure;
};

/// Three-input modified g-function. Throws DomainError if some a_j == -1.
double modified_g(std::span<const double> x, std::span<const double> a);
/// Modified g-function on x_1..x_3 plus eps * (x_4 + ... + x_10).
double modified_g_linear(std::span<const double> x, std::span<const double> a, double eps);
/// Standard g-function.
double g_sobol(std::span<const double> x, std::span<const double> a);

/// Resolves a model id. Fixed ids: "mod-g-19-9-4", "mod-g-lin-eps0.10",
/// "g-sobol-d10-a0", "mod-g-10-10-4". Parametric ids: "mod-g-<a1>-<a2>-<a3>",
/// "mod-g-lin-eps<e>", "g-sobol-d<k>-a<v>", "additive-d<k>", "product-d2".
/// Throws UsageError for unknown ids.
BuiltinModel resolve_model(const std::string& id);
/// The four registered benchmark ids.
std::vector<std::string> builtin_model_ids();

/// Closed-form indices for the g-family. Throws UnsupportedError otherwise.
AnalyticIndices analytic_indices(const BuiltinModel& model);
AnalyticIndices analytic_indices(const GFamily& structure);

/// First-order (Saltelli 2010 form) and total (Jansen form) indices from two
/// i.i.d. uniform sample matrices. Requires n_mc >= 10^4 unless `allow_small` is set.
IndexEstimates brute_force_indices(const Evaluator& model, std::size_t d, std::size_t n_mc, std::uint64_t seed,
                                   bool allow_small = false);

}  // namespace rlhd
