#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "rlhd/design.hpp"
#include "rlhd/distributions.hpp"
#include "rlhd/models.hpp"

namespace rlhd {

struct InputSpec {
    std::string name;
    MarginalDistribution marginal;
};

struct ModelBinding {
    enum class Kind { builtin, external };
    Kind kind = Kind::builtin;
    /// Model id for builtins, command template for external models.
    std::string target;

    /// Stable text used in cache keys.
    std::string identity() const;
};

struct ProblemSpec {
    std::string name;
    std::vector<InputSpec> inputs;
    ModelBinding model;
    std::size_t n = 200;
    std::uint64_t seed = 0;

    std::size_t dimension() const noexcept { return inputs.size(); }
    std::vector<MarginalDistribution> marginals() const;
    std::vector<std::string> input_names() const;
    /// Throws ConfigurationError on d < 1, N < 2, duplicate names or a builtin
    /// whose dimension differs from the input count.
    void validate() const;
};

/// Builds a spec for a builtin model with uniform(0, 1) inputs named x1..xd.
ProblemSpec builtin_problem(const std::string& model_id, std::size_t n, std::uint64_t seed);

struct LedgerEntry {
    std::string design_id;
    std::size_t evaluations = 0;
    std::string timestamp;
    std::string reason;
};

/// Append-only record of model evaluations.
class BudgetLedger {
public:
    void charge(std::string design_id, std::size_t evaluations, std::string reason);
    std::size_t total() const noexcept { return total_; }
    const std::vector<LedgerEntry>& entries() const noexcept { return entries_; }
    void restore(std::vector<LedgerEntry> entries);

private:
    std::vector<LedgerEntry> entries_;
    std::size_t total_ = 0;
};

class BatchCache {
public:
    virtual ~BatchCache() = default;
    virtual std::optional<std::vector<double>> get(const std::string& key) = 0;
    virtual void put(const std::string& key, const std::vector<double>& outputs) = 0;
};

class MemoryCache : public BatchCache {
public:
    std::optional<std::vector<double>> get(const std::string& key) override;
    void put(const std::string& key, const std::vector<double>& outputs) override;

private:
    std::mutex mutex_;
    std::map<std::string, std::vector<double>> store_;
};

/// One file per batch; writes go through a temporary file and an atomic rename.
class DirectoryCache : public BatchCache {
public:
    explicit DirectoryCache(std::filesystem::path dir);
    std::optional<std::vector<double>> get(const std::string& key) override;
    void put(const std::string& key, const std::vector<double>& outputs) override;

private:
    std::filesystem::path dir_;
};

/// Writes `path` by writing a sibling temporary file and renaming it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// Design rows as CSV with the given header; full double precision.
std::string design_to_csv(const Matrix& points, const std::vector<std::string>& names);

/// Runs `command_template` with {input} and {output} replaced by the paths, after
/// writing the design CSV to `input_csv`. Returns one value per row.
/// Nonzero exit or an unparsable value raises EvaluationError; a row-count
/// mismatch raises ProtocolError.
std::vector<double> external_bridge(const std::string& command_template, const std::filesystem::path& input_csv,
                                    const std::filesystem::path& output_path, const Matrix& physical_points,
                                    const std::vector<std::string>& names);

/// Evaluates designs for one problem, consulting the cache and charging the ledger.
class Runner {
public:
    explicit Runner(ProblemSpec spec, std::shared_ptr<BatchCache> cache = nullptr,
                    std::filesystem::path scratch_dir = {});

    const ProblemSpec& spec() const noexcept { return spec_; }
    BudgetLedger& ledger() noexcept { return ledger_; }
    const BudgetLedger& ledger() const noexcept { return ledger_; }

    /// Outputs for a design. Views resolve to their root design: the root is
    /// looked up (or evaluated and charged once) and its outputs reordered.
    SimulationBatch evaluate_design(const DesignMatrix& design, const std::string& reason = {});

    /// Cache key of a root design for this problem.
    std::string cache_key(const DesignMatrix& root) const;

private:
    std::vector<double> simulate(const DesignMatrix& root);

    ProblemSpec spec_;
    std::shared_ptr<BatchCache> cache_;
    std::filesystem::path scratch_dir_;
    BudgetLedger ledger_;
    std::optional<BuiltinModel> builtin_;
};

}  // namespace rlhd
