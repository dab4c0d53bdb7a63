#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rlhd/bootstrap.hpp"
#include "rlhd/design.hpp"

namespace rlhd {

enum class EstimatorKind {
    oracle2_pooled,
    oracle2_pearson,
    oracle1,
    oracle1_triple,
    oracle2_averaged,
    oracle2_triple,
    total_order,
};

const char* to_string(EstimatorKind kind) noexcept;
/// Accepts the canonical names plus the CLI spellings oracle2, triple-oracle1 and total.
EstimatorKind parse_estimator_kind(const std::string& text);

struct PooledMoments {
    double mean = 0.0;
    double variance = 0.0;
    std::size_t pool_size = 0;
};

/// Grand mean and biased grand variance over all pooled values. Requires N >= 2.
/// Zero variance is reported, not rejected; the estimators reject it.
PooledMoments pooled_moments(const std::vector<std::span<const double>>& batches);
PooledMoments pooled_moments(const std::vector<SimulationBatch>& batches);

// Value kernels. Every pooled kernel throws DegenerateModelError on zero variance.
double oracle2_value(std::span<const double> x, std::span<const double> wmi);
double oracle2_pearson_value(std::span<const double> x, std::span<const double> wmi);
double oracle1_value(std::span<const double> x, std::span<const double> w, std::span<const double> wmi);
double total_order_value(std::span<const double> w, std::span<const double> wmi);

// Forms with the output mean and variance supplied instead of estimated.
double oracle2_known_moments(std::span<const double> x, std::span<const double> wmi, double mean, double variance);
double oracle1_known_moments(std::span<const double> x, std::span<const double> w, std::span<const double> wmi,
                             double mean, double variance);

struct SobolEstimate {
    std::size_t input = 0;
    EstimatorKind kind = EstimatorKind::oracle2_pooled;
    double value = 0.0;
    std::optional<ConfidenceInterval> ci;
    std::vector<double> components;
    std::vector<std::string> batches_used;
    std::size_t evaluations_charged = 0;
    bool clamped = false;
};

/// Everything needed to evaluate (and bootstrap) one estimate.
struct EstimatorPlan {
    EstimatorKind kind = EstimatorKind::oracle2_pooled;
    std::size_t input = 0;
    AlignedColumns columns;
    std::vector<std::string> batches_used;
    std::vector<std::string> sources;
    Statistic statistic;
};

struct EstimateOptions {
    std::optional<BootstrapConfig> bootstrap;
    /// Clip the reported value (not the CI) to [0, 1].
    bool clamp = false;
};

SobolEstimate run_plan(const EstimatorPlan& plan, const EstimateOptions& options = {});

// Plans over batches that are already row-aligned for input i.
EstimatorPlan plan_oracle2(const SimulationBatch& x, const SimulationBatch& wmi, std::size_t i);
EstimatorPlan plan_oracle2_pearson(const SimulationBatch& x, const SimulationBatch& wmi, std::size_t i);
EstimatorPlan plan_oracle1(const SimulationBatch& x, const SimulationBatch& w, const SimulationBatch& wmi,
                           std::size_t i);
EstimatorPlan plan_total_order(const SimulationBatch& w, const SimulationBatch& wmi, std::size_t i);

SobolEstimate oracle2(const SimulationBatch& x, const SimulationBatch& wmi, std::size_t i,
                      const EstimateOptions& options = {});
SobolEstimate oracle2_pearson(const SimulationBatch& x, const SimulationBatch& wmi, std::size_t i,
                              const EstimateOptions& options = {});
SobolEstimate oracle1(const SimulationBatch& x, const SimulationBatch& w, const SimulationBatch& wmi,
                      std::size_t i, const EstimateOptions& options = {});
SobolEstimate total_order(const SimulationBatch& w, const SimulationBatch& wmi, std::size_t i,
                          const EstimateOptions& options = {});

/// Outputs of the simulated members of a family; z is keyed by input index.
struct FamilyOutputs {
    SimulationBatch x;
    SimulationBatch w;
    std::map<std::size_t, SimulationBatch> z;

    const SimulationBatch& z_at(std::size_t i) const;
};

// Family plans. Derived batches (W_{-i}, X~, W~_{-i}) come from reorder_outputs only.

/// Oracle 2 on X and W_{-i}.
EstimatorPlan plan_family_oracle2(const RlhdFamily& family, const FamilyOutputs& out, std::size_t i);
/// Pearson Oracle 2 on X and W_{-i}.
EstimatorPlan plan_family_oracle2_pearson(const RlhdFamily& family, const FamilyOutputs& out, std::size_t i);
/// Oracle 1 on X, Z_i and W_{-i}.
EstimatorPlan plan_family_oracle1(const RlhdFamily& family, const FamilyOutputs& out, std::size_t i);
/// Mean of Oracle 1 on (X, Z_i, W_{-i}), (X~, W_{-i}, Z_i) and (W~_{-i}, W_{-i}, Z_i).
EstimatorPlan plan_triple_oracle1(const RlhdFamily& family, const FamilyOutputs& out, std::size_t i);
/// Mean of Oracle 2 between X and each partner reordered on column i. Partners are
/// design ids of W or Z_k members; X itself, duplicates, a reference other than X
/// or a design outside the family raise InvariantError.
EstimatorPlan plan_averaged_oracle2(const RlhdFamily& family, const FamilyOutputs& out, std::size_t i,
                                    const std::vector<std::string>& partner_ids,
                                    const std::string& reference_id = {});
/// Mean of Oracle 2 on (X, W_{-i}), (X, Z_i') and (W_{-i}, Z_i'), where Z_i' is Z_i
/// reordered so that column i coincides with X's.
EstimatorPlan plan_triple_oracle2(const RlhdFamily& family, const FamilyOutputs& out, std::size_t i);
/// Total-order estimate from Z_i and W_{-i}, which differ only in column i.
EstimatorPlan plan_family_total_order(const RlhdFamily& family, const FamilyOutputs& out, std::size_t i);

}  // namespace rlhd
