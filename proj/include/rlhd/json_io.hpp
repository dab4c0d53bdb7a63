#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "rlhd/design.hpp"
#include "rlhd/estimators.hpp"
#include "rlhd/runner.hpp"

namespace rlhd {

using json = nlohmann::json;

// Wire formats. Input indices are 1-based on the wire; permutation arrays in design
// sidecars are 0-based and carry an explicit "base" field, and readers honour any base.

json to_json(const ConfidenceInterval& ci);
ConfidenceInterval ci_from_json(const json& j);

/// {input, kind, value, ci, components, batches_used, evaluations_charged}.
json to_json(const SobolEstimate& e);
SobolEstimate estimate_from_json(const json& j);

json to_json(const MarginalDistribution& m);
MarginalDistribution marginal_from_json(const json& j);

/// Problem file: {name, inputs:[{name, kind, params, truncation?}], model, N, seed}.
/// `model` is a builtin id string, {"builtin": id} or {"command": template}.
/// Inputs may be omitted for builtins (uniform(0, 1) each).
json to_json(const ProblemSpec& spec);
ProblemSpec problem_spec_from_json(const json& j);
ProblemSpec load_problem_spec(const std::filesystem::path& path);

json to_json(const BudgetLedger& ledger);
BudgetLedger ledger_from_json(const json& j);

json to_json(const BootstrapConfig& cfg);
BootstrapConfig bootstrap_config_from_json(const json& j, BootstrapConfig defaults = {});

/// Sidecar describing a design: {id, family, space, seed, base, N, d, column_perms,
/// jitter: {family, seed, N, d}, parent, permutation}.
json design_sidecar(const DesignMatrix& design, std::uint64_t seed);

/// Writes <dir>/<stem>.csv and <dir>/<stem>.json.
void export_design(const std::filesystem::path& dir, const std::string& stem, const DesignMatrix& design,
                   const std::vector<std::string>& names, std::uint64_t seed);

/// Reads a design written by export_design. The jitter array is not restored.
DesignMatrix import_design(const std::filesystem::path& csv, const std::filesystem::path& sidecar);

json read_json_file(const std::filesystem::path& path);

}  // namespace rlhd
