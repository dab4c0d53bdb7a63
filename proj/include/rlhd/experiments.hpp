#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rlhd/design.hpp"
#include "rlhd/estimators.hpp"
#include "rlhd/models.hpp"

namespace rlhd {

/// Evaluates a builtin model on every row of a unit-space design.
SimulationBatch evaluate_builtin(const BuiltinModel& model, const DesignMatrix& design);

/// Outputs of X, W and every Z_i present in the family.
FamilyOutputs evaluate_family(const BuiltinModel& model, const RlhdFamily& family);

/// Evaluation cost per index in units of N (2 for the Oracle 2 forms, 3 otherwise).
std::size_t runs_per_index(EstimatorKind kind);

struct RmseRow {
    EstimatorKind kind;
    std::size_t input = 0;
    std::size_t n_runs = 0;
    std::size_t n = 0;
    double rmse = 0.0;
    double truth = 0.0;
};

struct RmseStudyConfig {
    std::string model_id;
    std::vector<EstimatorKind> kinds;
    std::vector<std::size_t> n_runs_grid;
    std::size_t n_reps = 200;
    std::uint64_t seed = 0;
};

/// RMSE against the analytic indices at design size N = N_runs / runs_per_index(kind).
/// Kinds sharing a cost use the same families in each replication.
std::vector<RmseRow> rmse_study(const RmseStudyConfig& cfg);

/// RMSE of each column of `samples` (replications x inputs) against `truth`.
std::vector<double> rmse_per_index(const std::vector<std::vector<double>>& samples, const std::vector<double>& truth);

struct BoxplotStrategy {
    enum class Kind { one_shot, adaptive };
    Kind kind = Kind::one_shot;
    std::size_t n = 200;
    std::size_t steps = 0;

    static BoxplotStrategy one_shot(std::size_t n) { return {Kind::one_shot, n, 0}; }
    static BoxplotStrategy adaptive(std::size_t n, std::size_t steps) { return {Kind::adaptive, n, steps}; }
};

struct BoxplotConfig {
    std::string model_id;
    BoxplotStrategy strategy;
    std::size_t n_reps = 1000;
    std::uint64_t seed = 0;
    double flag_cutoff = 0.10;
    /// Inputs checked for flagging; defaults to those with analytic index below 0.01.
    std::optional<std::vector<std::size_t>> negligible;
};

struct BoxplotResult {
    std::vector<std::vector<double>> estimates;
    std::vector<bool> flagged;
    std::vector<std::size_t> negligible;
    double flagged_fraction = 0.0;
};

/// One-shot: Oracle 2 on an rLHD pair. Adaptive: the campaign state machine with
/// bootstrap disabled, forced through `steps` steps regardless of the exit hint.
BoxplotResult boxplot_study(const BoxplotConfig& cfg);

struct CrossoverRow {
    double target = 0.0;
    double alpha = 0.0;
    double mean_oracle1 = 0.0;
    double mean_oracle2 = 0.0;
    double var_oracle1 = 0.0;
    double var_oracle2 = 0.0;
    double ratio = 0.0;
    double var_oracle1_pooled = 0.0;
    double var_oracle2_pooled = 0.0;
};

struct CrossoverResult {
    std::vector<CrossoverRow> rows;
    /// S_1 where var(oracle1) / var(oracle2) crosses 1, by linear interpolation.
    std::optional<double> crossover;
};

// Additive model y = alpha * |4 x1 - 2| + sum_{j=2..4} |4 xj - 2| with alpha chosen so
// that S_1 hits each target. Oracle 1 uses X, Z_1 and W_{-1}; Oracle 2 uses X and W_{-1};
// both with the exact output mean and variance. Pooled-moment variances are reported alongside.
CrossoverResult crossover_study(const std::vector<double>& s_grid, std::size_t n, std::size_t n_reps,
                                std::uint64_t seed);

std::string rmse_csv(const std::vector<RmseRow>& rows, const RmseStudyConfig& cfg);
std::string boxplot_csv(const BoxplotResult& result, const BoxplotConfig& cfg);
std::string crossover_csv(const CrossoverResult& result, std::size_t n, std::size_t n_reps, std::uint64_t seed);

}  // namespace rlhd
