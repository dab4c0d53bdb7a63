#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rlhd/design.hpp"
#include "rlhd/estimators.hpp"
#include "rlhd/json_io.hpp"
#include "rlhd/runner.hpp"

namespace rlhd {

enum class Stage { fresh, stage1_done, stage2_active, closed };
const char* to_string(Stage stage) noexcept;
Stage parse_stage(const std::string& text);

struct CampaignConfig {
    double large_cutoff = 0.5;
    double flag_cutoff = 0.10;
    /// Half-width of the band around 1 in which the exit hint fires.
    double exit_band = 0.05;
    /// Upper bound on the CI half-width of the summed estimates.
    double accuracy_bound = 0.05;
    bool bootstrap_enabled = true;
    BootstrapConfig bootstrap;
};

json to_json(const CampaignConfig& cfg);
CampaignConfig campaign_config_from_json(const json& j);

struct IndexRecord {
    SobolEstimate current;
    std::vector<SobolEstimate> history;
    std::optional<SobolEstimate> total;
};

struct DecisionEntry {
    std::size_t seq = 0;
    std::string actor;
    std::string action;
    json detail;
    std::string timestamp;
};

struct ExitHint {
    double sum_of_estimates = 0.0;
    std::optional<double> half_width;
    std::vector<std::size_t> contributing;
    bool within_band = false;
    bool accurate = false;
    bool suggests_exit = false;
};

struct CampaignState {
    Stage stage = Stage::fresh;
    ProblemSpec spec;
    CampaignConfig config;
    std::string family_id;
    std::vector<IndexRecord> indices;
    std::vector<std::size_t> reestimated;
    std::vector<std::pair<std::size_t, Permutation>> z_levels;
    BudgetLedger ledger;
    std::vector<DecisionEntry> decisions;
    /// Number of committed transitions.
    std::size_t seq = 0;
    /// Number of events emitted, transitions included.
    std::size_t event_count = 0;
};

/// Candidate rule: not reestimated, current estimate below the cutoff, sorted by
/// estimate descending with ties broken by ascending index.
std::vector<std::size_t> candidate_order(const std::vector<double>& estimates,
                                         const std::vector<std::size_t>& reestimated, double large_cutoff);

/// Band rule on the sum of the large and reestimated estimates. The accuracy test
/// uses the root-sum-square of the CI half-widths and passes when CIs are absent.
ExitHint compute_exit_hint(const CampaignState& state);

struct CampaignEvent {
    std::size_t seq = 0;
    std::string type;
    json payload;
    std::string timestamp;
    /// True for committed transitions, whose payload carries the full state.
    bool transition = false;
};

using EventObserver = std::function<void(const CampaignEvent&)>;

// Two-stage adaptive state machine. Stage one estimates every first-order index by
// Oracle 2 on an rLHD pair; each stage-two step adds Z_i, replaces S_i by the triple
// Oracle 1 estimate, adds a total-order estimate for i and refreshes the remaining
// indices by averaged Oracle 2 over all independent partners of X.
class Campaign {
public:
    Campaign(ProblemSpec spec, CampaignConfig config, std::shared_ptr<BatchCache> cache = nullptr,
             std::filesystem::path scratch_dir = {});

    /// Rebuilds a campaign from a committed state; batches come from `cache`
    /// (or are recomputed) and the ledger is restored from the state.
    static Campaign resume(const CampaignState& state, std::shared_ptr<BatchCache> cache = nullptr,
                           std::filesystem::path scratch_dir = {});

    const CampaignState& state() const noexcept { return state_; }
    const RlhdFamily& family() const noexcept { return family_; }
    const FamilyOutputs& outputs() const noexcept { return outputs_; }

    void set_observer(EventObserver observer) { observer_ = std::move(observer); }

    /// Fresh -> stage1_done. Charges 2N.
    void stage_one(const std::string& actor = "auto");
    std::vector<std::size_t> candidates() const;
    /// Requires i to be a candidate; throws PreconditionError otherwise. Charges N.
    void stage_two_step(std::size_t i, const std::string& actor = "auto");
    ExitHint exit_hint() const;
    void close(const std::string& actor = "auto", const std::string& reason = {});

private:
    std::optional<EstimateOptions> options_for(const std::string& label) const;
    SobolEstimate run(const EstimatorPlan& plan, const std::string& label) const;
    void record(const std::string& actor, const std::string& action, json detail);
    void emit(const std::string& type, json payload, bool transition);
    void sync_ledger();
    void require_open() const;

    CampaignState state_;
    RlhdFamily family_;
    FamilyOutputs outputs_;
    Runner runner_;
    EventObserver observer_;
};

json to_json(const CampaignState& state);
CampaignState campaign_state_from_json(const json& j);
json to_json(const ExitHint& hint);
/// {seq, type, transition, timestamp, payload}; transition payloads carry "state".
json event_to_json(const CampaignEvent& event);

struct AutoPolicy {
    std::size_t max_steps = 0;
    /// Stop as soon as the exit hint fires.
    bool honor_exit_hint = true;
};

/// Steps the campaign (running stage one first if fresh) until no candidates
/// remain, max_steps steps were taken in this call, or the exit hint fires.
void auto_policy_run(Campaign& campaign, const AutoPolicy& policy);
Campaign auto_policy_run(const ProblemSpec& spec, const CampaignConfig& config, const AutoPolicy& policy);

/// Campaign persisted as a directory: spec.json, config.json, state.json,
/// events.jsonl, designs/, batches/ and an advisory .lock file.
class CampaignStore {
public:
    /// Creates the directory and runs stage one. Fails if a state already exists.
    static void init(const std::filesystem::path& dir, const ProblemSpec& spec, const CampaignConfig& config);

    /// Takes the advisory lock. Throws PreconditionError if another writer holds it.
    explicit CampaignStore(std::filesystem::path dir);
    ~CampaignStore();
    CampaignStore(const CampaignStore&) = delete;
    CampaignStore& operator=(const CampaignStore&) = delete;

    Campaign& campaign() { return *campaign_; }
    const std::filesystem::path& dir() const noexcept { return dir_; }

    /// Writes state.json atomically and exports designs. Events are appended as they happen.
    void commit();

    /// Extra observer called after each event has been appended to events.jsonl.
    void add_listener(EventObserver listener) { listeners_.push_back(std::move(listener)); }

    static json read_state(const std::filesystem::path& dir);
    static std::vector<json> read_events(const std::filesystem::path& dir, std::size_t after_seq = 0);

private:
    void attach_observer();

    std::filesystem::path dir_;
    std::filesystem::path lock_path_;
    std::unique_ptr<Campaign> campaign_;
    std::vector<EventObserver> listeners_;
};

}  // namespace rlhd
