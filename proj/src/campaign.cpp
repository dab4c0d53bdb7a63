#include "rlhd/campaign.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fcntl.h>
#include <fstream>
#include <unistd.h>

#include "rlhd/error.hpp"
#include "rlhd/rng.hpp"

namespace rlhd {

namespace fs = std::filesystem;

namespace {

std::string now_utc() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::vector<double> current_values(const CampaignState& s) {
    std::vector<double> v;
    for (const auto& r : s.indices) v.push_back(r.current.value);
    return v;
}

bool contains(const std::vector<std::size_t>& v, std::size_t x) {
    return std::find(v.begin(), v.end(), x) != v.end();
}

std::vector<std::size_t> one_based(const std::vector<std::size_t>& v) {
    std::vector<std::size_t> out;
    for (std::size_t x : v) out.push_back(x + 1);
    return out;
}

}  // namespace

const char* to_string(Stage stage) noexcept {
    switch (stage) {
    case Stage::fresh: return "fresh";
    case Stage::stage1_done: return "stage1_done";
    case Stage::stage2_active: return "stage2_active";
    case Stage::closed: return "closed";
    }
    return "unknown";
}

Stage parse_stage(const std::string& text) {
    if (text == "fresh") return Stage::fresh;
    if (text == "stage1_done") return Stage::stage1_done;
    if (text == "stage2_active") return Stage::stage2_active;
    if (text == "closed") return Stage::closed;
    throw ConfigurationError("unknown campaign stage '" + text + "'");
}

json to_json(const CampaignConfig& cfg) {
    return json{{"large_cutoff", cfg.large_cutoff},
                {"flag_cutoff", cfg.flag_cutoff},
                {"exit_band", cfg.exit_band},
                {"accuracy_bound", cfg.accuracy_bound},
                {"bootstrap_enabled", cfg.bootstrap_enabled},
                {"bootstrap", to_json(cfg.bootstrap)}};
}

CampaignConfig campaign_config_from_json(const json& j) {
    CampaignConfig cfg;
    if (!j.is_object()) return cfg;
    cfg.large_cutoff = j.value("large_cutoff", cfg.large_cutoff);
    cfg.flag_cutoff = j.value("flag_cutoff", cfg.flag_cutoff);
    cfg.exit_band = j.value("exit_band", cfg.exit_band);
    cfg.accuracy_bound = j.value("accuracy_bound", cfg.accuracy_bound);
    cfg.bootstrap_enabled = j.value("bootstrap_enabled", cfg.bootstrap_enabled);
    if (j.contains("bootstrap")) cfg.bootstrap = bootstrap_config_from_json(j["bootstrap"], cfg.bootstrap);
    if (!(cfg.exit_band >= 0.0) || !(cfg.accuracy_bound >= 0.0))
        throw ConfigurationError("exit band and accuracy bound must be non-negative");
    return cfg;
}

std::vector<std::size_t> candidate_order(const std::vector<double>& estimates,
                                         const std::vector<std::size_t>& reestimated, double large_cutoff) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < estimates.size(); ++i)
        if (!contains(reestimated, i) && estimates[i] < large_cutoff) out.push_back(i);
    std::stable_sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) {
        if (estimates[a] != estimates[b]) return estimates[a] > estimates[b];
        return a < b;
    });
    return out;
}

ExitHint compute_exit_hint(const CampaignState& state) {
    ExitHint h;
    double sq = 0.0;
    bool all_ci = true;
    for (std::size_t i = 0; i < state.indices.size(); ++i) {
        const SobolEstimate& e = state.indices[i].current;
        if (!(contains(state.reestimated, i) || e.value >= state.config.large_cutoff)) continue;
        h.contributing.push_back(i);
        h.sum_of_estimates += e.value;
        if (e.ci) {
            const double hw = 0.5 * (e.ci->upper - e.ci->lower);
            sq += hw * hw;
        } else {
            all_ci = false;
        }
    }
    h.within_band = !h.contributing.empty() && std::fabs(h.sum_of_estimates - 1.0) <= state.config.exit_band;
    if (all_ci && !h.contributing.empty()) {
        h.half_width = std::sqrt(sq);
        h.accurate = *h.half_width <= state.config.accuracy_bound;
    } else {
        h.accurate = true;
    }
    h.suggests_exit = h.within_band && h.accurate;
    return h;
}

Campaign::Campaign(ProblemSpec spec, CampaignConfig config, std::shared_ptr<BatchCache> cache, fs::path scratch_dir)
    : runner_(spec, std::move(cache), std::move(scratch_dir)) {
    if (config.bootstrap_enabled) config.bootstrap.validate();
    state_.spec = runner_.spec();
    state_.config = std::move(config);
    family_ = RlhdFamily::make_pair(state_.spec.n, state_.spec.dimension(), state_.spec.seed);
    state_.family_id = family_.id();
}

Campaign Campaign::resume(const CampaignState& state, std::shared_ptr<BatchCache> cache, fs::path scratch_dir) {
    Campaign c(state.spec, state.config, std::move(cache), std::move(scratch_dir));
    if (c.family_.id() != state.family_id)
        throw InvariantError("stored family id '" + state.family_id + "' does not match the regenerated family");
    if (state.stage != Stage::fresh) {
        c.outputs_.x = c.runner_.evaluate_design(c.family_.x());
        c.outputs_.w = c.runner_.evaluate_design(c.family_.w());
    }
    for (const auto& [i, levels] : state.z_levels) {
        const DesignMatrix& z = c.family_.add_z(i);
        if (!(z.column_levels[i] == levels))
            throw InvariantError("stored permutation of Z" + std::to_string(i + 1) + " does not match its substream");
        c.outputs_.z[i] = c.runner_.evaluate_design(z);
    }
    c.runner_.ledger().restore(state.ledger.entries());
    c.state_ = state;
    return c;
}

std::optional<EstimateOptions> Campaign::options_for(const std::string& label) const {
    if (!state_.config.bootstrap_enabled) return std::nullopt;
    EstimateOptions o;
    BootstrapConfig cfg = state_.config.bootstrap;
    cfg.seed = derive_seed(state_.spec.seed, "bootstrap/" + std::to_string(state_.config.bootstrap.seed));
    cfg.stream = label;
    o.bootstrap = cfg;
    return o;
}

SobolEstimate Campaign::run(const EstimatorPlan& plan, const std::string& label) const {
    const auto o = options_for(label);
    return run_plan(plan, o ? *o : EstimateOptions{});
}

void Campaign::emit(const std::string& type, json payload, bool transition) {
    CampaignEvent e;
    e.seq = ++state_.event_count;
    e.type = type;
    e.timestamp = now_utc();
    e.transition = transition;
    if (transition) payload["state"] = to_json(state_);
    e.payload = std::move(payload);
    if (observer_) observer_(e);
}

void Campaign::record(const std::string& actor, const std::string& action, json detail) {
    ++state_.seq;
    state_.decisions.push_back(DecisionEntry{state_.seq, actor, action, std::move(detail), now_utc()});
}

void Campaign::sync_ledger() { state_.ledger = runner_.ledger(); }

void Campaign::require_open() const {
    if (state_.stage == Stage::closed) throw PreconditionError("campaign is closed");
}

void Campaign::stage_one(const std::string& actor) {
    require_open();
    if (state_.stage != Stage::fresh) throw PreconditionError("stage one already ran");
    const std::size_t d = state_.spec.dimension();
    emit("evaluation_started", {{"design", family_.x().id}, {"rows", state_.spec.n}}, false);
    outputs_.x = runner_.evaluate_design(family_.x(), "stage one: X");
    sync_ledger();
    emit("evaluation_finished", {{"design", family_.x().id}, {"ledger_total", state_.ledger.total()}}, false);
    emit("evaluation_started", {{"design", family_.w().id}, {"rows", state_.spec.n}}, false);
    outputs_.w = runner_.evaluate_design(family_.w(), "stage one: W");
    sync_ledger();
    emit("evaluation_finished", {{"design", family_.w().id}, {"ledger_total", state_.ledger.total()}}, false);

    state_.indices.assign(d, IndexRecord{});
    for (std::size_t i = 0; i < d; ++i) {
        SobolEstimate e = run(plan_family_oracle2(family_, outputs_, i), "s1/" + std::to_string(i + 1));
        state_.indices[i].current = e;
        state_.indices[i].history.push_back(std::move(e));
    }
    state_.stage = Stage::stage1_done;
    json detail{{"N", state_.spec.n}, {"ledger_total", state_.ledger.total()}};
    if (state_.spec.n < 200 || state_.spec.n > 400) detail["guidance"] = "a design size between 200 and 400 is typical";
    record(actor, "stage_one", detail);
    emit("stage_one", detail, true);
}

std::vector<std::size_t> Campaign::candidates() const {
    if (state_.stage == Stage::fresh || state_.stage == Stage::closed) return {};
    return candidate_order(current_values(state_), state_.reestimated, state_.config.large_cutoff);
}

void Campaign::stage_two_step(std::size_t i, const std::string& actor) {
    require_open();
    if (state_.stage == Stage::fresh) throw PreconditionError("stage one has not run");
    if (i >= state_.spec.dimension())
        throw PreconditionError("input index " + std::to_string(i + 1) + " out of range");
    if (contains(state_.reestimated, i))
        throw PreconditionError("input " + std::to_string(i + 1) + " was already reestimated");
    const auto cands = candidates();
    if (!contains(cands, i))
        throw PreconditionError("input " + std::to_string(i + 1) + " is not a candidate (estimate at or above " +
                                std::to_string(state_.config.large_cutoff) + ")");

    const std::size_t step = state_.reestimated.size() + 1;
    const DesignMatrix& z = family_.add_z(i);
    emit("evaluation_started", {{"design", z.id}, {"rows", state_.spec.n}, {"input", i + 1}}, false);
    outputs_.z[i] = runner_.evaluate_design(z, "stage two: Z" + std::to_string(i + 1));
    sync_ledger();
    emit("evaluation_finished", {{"design", z.id}, {"ledger_total", state_.ledger.total()}}, false);

    const std::string tag = "s2." + std::to_string(step) + "/";
    state_.reestimated.push_back(i);
    state_.z_levels.emplace_back(i, z.column_levels[i]);

    SobolEstimate tri = run(plan_triple_oracle1(family_, outputs_, i), tag + "t1/" + std::to_string(i + 1));
    state_.indices[i].current = tri;
    state_.indices[i].history.push_back(std::move(tri));
    state_.indices[i].total = run(plan_family_total_order(family_, outputs_, i), tag + "st/" + std::to_string(i + 1));

    std::vector<std::string> partners{family_.w().id};
    for (std::size_t k : state_.reestimated) partners.push_back(family_.z(k).id);
    for (std::size_t j = 0; j < state_.spec.dimension(); ++j) {
        if (contains(state_.reestimated, j)) continue;
        SobolEstimate e = run(plan_averaged_oracle2(family_, outputs_, j, partners, family_.x().id),
                              tag + "a2/" + std::to_string(j + 1));
        state_.indices[j].current = e;
        state_.indices[j].history.push_back(std::move(e));
    }
    state_.stage = Stage::stage2_active;
    json detail{{"input", i + 1},
                {"value", state_.indices[i].current.value},
                {"total_order", state_.indices[i].total->value},
                {"ledger_total", state_.ledger.total()}};
    record(actor, "stage_two_step", detail);
    emit("stage_two_step", detail, true);
}

ExitHint Campaign::exit_hint() const { return compute_exit_hint(state_); }

void Campaign::close(const std::string& actor, const std::string& reason) {
    require_open();
    const ExitHint hint = exit_hint();
    state_.stage = Stage::closed;
    json detail{{"reason", reason}, {"sum_of_estimates", hint.sum_of_estimates}, {"suggests_exit", hint.suggests_exit}};
    record(actor, "close", detail);
    emit("closed", detail, true);
}

json event_to_json(const CampaignEvent& e) {
    return json{{"seq", e.seq},
                {"type", e.type},
                {"transition", e.transition},
                {"timestamp", e.timestamp},
                {"payload", e.payload}};
}

json to_json(const ExitHint& h) {
    return json{{"sum_of_estimates", h.sum_of_estimates},
                {"half_width", h.half_width ? json(*h.half_width) : json(nullptr)},
                {"contributing", one_based(h.contributing)},
                {"within_band", h.within_band},
                {"accurate", h.accurate},
                {"suggests_exit", h.suggests_exit}};
}

json to_json(const CampaignState& s) {
    json estimates = json::array();
    for (std::size_t i = 0; i < s.indices.size(); ++i) {
        const IndexRecord& r = s.indices[i];
        json history = json::array();
        for (const auto& e : r.history) history.push_back(to_json(e));
        const double v = r.current.value;
        estimates.push_back({{"input", i + 1},
                             {"name", i < s.spec.inputs.size() ? s.spec.inputs[i].name : std::string{}},
                             {"current", to_json(r.current)},
                             {"history", history},
                             {"total", r.total ? to_json(*r.total) : json(nullptr)},
                             {"reestimated", contains(s.reestimated, i)},
                             {"large", v >= s.config.large_cutoff},
                             {"flagged", v >= s.config.flag_cutoff},
                             {"negative", v < 0.0}});
    }
    json decisions = json::array();
    for (const auto& d : s.decisions)
        decisions.push_back(
            {{"seq", d.seq}, {"actor", d.actor}, {"action", d.action}, {"detail", d.detail}, {"timestamp", d.timestamp}});
    json z = json::array();
    for (const auto& [i, p] : s.z_levels) z.push_back({{"input", i + 1}, {"base", 1}, {"levels", p.to_one_based()}});

    std::vector<std::size_t> cands;
    if (s.stage == Stage::stage1_done || s.stage == Stage::stage2_active)
        cands = candidate_order(current_values(s), s.reestimated, s.config.large_cutoff);
    const std::size_t n = s.spec.n, d = s.spec.dimension(), m = s.reestimated.size();
    json projection = json::array();
    for (std::size_t k = 1; k <= cands.size(); ++k) projection.push_back(n * (m + k + 2));

    json j{{"version", 1},
           {"stage", to_string(s.stage)},
           {"seq", s.seq},
           {"event_count", s.event_count},
           {"spec", to_json(s.spec)},
           {"config", to_json(s.config)},
           {"family", {{"id", s.family_id}, {"N", n}, {"d", d}, {"seed", s.spec.seed}, {"z", z}}},
           {"estimates", estimates},
           {"reestimated", one_based(s.reestimated)},
           {"candidates", one_based(cands)},
           {"ledger", to_json(s.ledger)},
           {"budget",
            {{"N", n},
             {"spent", s.ledger.total()},
             {"steps", m},
             {"projection", projection},
             {"saltelli_bound", n * (d + 2)}}},
           {"decision_log", decisions}};
    j["exit_hint"] = s.stage == Stage::fresh ? json(nullptr) : to_json(compute_exit_hint(s));
    return j;
}

CampaignState campaign_state_from_json(const json& j) {
    try {
        CampaignState s;
        s.stage = parse_stage(j.at("stage").get<std::string>());
        s.seq = j.at("seq").get<std::size_t>();
        s.event_count = j.value("event_count", std::size_t{0});
        s.spec = problem_spec_from_json(j.at("spec"));
        s.config = campaign_config_from_json(j.at("config"));
        s.family_id = j.at("family").at("id").get<std::string>();
        for (const json& e : j.at("estimates")) {
            IndexRecord r;
            r.current = estimate_from_json(e.at("current"));
            for (const json& h : e.at("history")) r.history.push_back(estimate_from_json(h));
            if (!e.at("total").is_null()) r.total = estimate_from_json(e["total"]);
            s.indices.push_back(std::move(r));
        }
        for (const json& i : j.at("reestimated")) s.reestimated.push_back(i.get<std::size_t>() - 1);
        for (const json& z : j.at("family").at("z")) {
            auto levels = z.at("levels").get<std::vector<long long>>();
            const long long base = z.value("base", 1LL);
            for (auto& v : levels) v += 1 - base;
            s.z_levels.emplace_back(z.at("input").get<std::size_t>() - 1, Permutation::from_one_based(levels));
        }
        s.ledger = ledger_from_json(j.at("ledger"));
        for (const json& d : j.at("decision_log"))
            s.decisions.push_back(DecisionEntry{d.at("seq").get<std::size_t>(), d.at("actor").get<std::string>(),
                                                d.at("action").get<std::string>(), d.value("detail", json::object()),
                                                d.value("timestamp", std::string{})});
        return s;
    } catch (const json::exception& e) {
        throw ConfigurationError(std::string("malformed campaign state: ") + e.what());
    }
}

void auto_policy_run(Campaign& campaign, const AutoPolicy& policy) {
    if (campaign.state().stage == Stage::fresh) campaign.stage_one("auto");
    for (std::size_t step = 0; step < policy.max_steps; ++step) {
        if (campaign.state().stage == Stage::closed) break;
        const auto cands = campaign.candidates();
        if (cands.empty()) break;
        if (policy.honor_exit_hint && campaign.exit_hint().suggests_exit) break;
        campaign.stage_two_step(cands.front(), "auto");
    }
}

Campaign auto_policy_run(const ProblemSpec& spec, const CampaignConfig& config, const AutoPolicy& policy) {
    Campaign c(spec, config);
    auto_policy_run(c, policy);
    return c;
}

void CampaignStore::init(const fs::path& dir, const ProblemSpec& spec, const CampaignConfig& config) {
    if (fs::exists(dir / "state.json")) throw UsageError("campaign already initialised in " + dir.string());
    fs::create_directories(dir);
    write_file_atomic(dir / "spec.json", to_json(spec).dump(2) + "\n");
    write_file_atomic(dir / "config.json", to_json(config).dump(2) + "\n");
    {
        Campaign fresh(spec, config);
        write_file_atomic(dir / "state.json", to_json(fresh.state()).dump(2) + "\n");
    }
    CampaignStore store(dir);
    try {
        store.campaign().stage_one("cli");
    } catch (...) {
        store.commit();
        throw;
    }
    store.commit();
}

CampaignStore::CampaignStore(fs::path dir) : dir_(std::move(dir)), lock_path_(dir_ / ".lock") {
    if (!fs::exists(dir_ / "state.json")) throw UsageError("no campaign in " + dir_.string());
    const int fd = ::open(lock_path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) throw PreconditionError("campaign " + dir_.string() + " is locked by another writer");
    const std::string pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] auto written = ::write(fd, pid.data(), pid.size());
    ::close(fd);
    try {
        const CampaignState state = campaign_state_from_json(read_state(dir_));
        auto cache = std::make_shared<DirectoryCache>(dir_ / "batches");
        campaign_ = std::make_unique<Campaign>(Campaign::resume(state, cache, dir_ / "scratch"));
        attach_observer();
    } catch (...) {
        std::error_code ec;
        fs::remove(lock_path_, ec);
        throw;
    }
}

CampaignStore::~CampaignStore() {
    std::error_code ec;
    fs::remove(lock_path_, ec);
}

void CampaignStore::attach_observer() {
    const fs::path events = dir_ / "events.jsonl";
    campaign_->set_observer([this, events](const CampaignEvent& e) {
        {
            std::ofstream out(events, std::ios::app);
            out << event_to_json(e).dump() << "\n";
        }
        for (const auto& l : listeners_) l(e);
    });
}

void CampaignStore::commit() {
    const Campaign& c = *campaign_;
    const auto names = c.state().spec.input_names();
    if (c.state().stage != Stage::fresh) {
        export_design(dir_ / "designs", "X", c.family().x(), names, c.state().spec.seed);
        export_design(dir_ / "designs", "W", c.family().w(), names, c.state().spec.seed);
    }
    for (const auto& [i, z] : c.family().z_designs())
        export_design(dir_ / "designs", "Z" + std::to_string(i + 1), z, names, c.state().spec.seed);
    write_file_atomic(dir_ / "ledger.json", to_json(c.state().ledger).dump(2) + "\n");
    write_file_atomic(dir_ / "state.json", to_json(c.state()).dump(2) + "\n");
}

json CampaignStore::read_state(const fs::path& dir) { return read_json_file(dir / "state.json"); }

std::vector<json> CampaignStore::read_events(const fs::path& dir, std::size_t after_seq) {
    std::vector<json> out;
    std::ifstream in(dir / "events.jsonl");
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json e = json::parse(line, nullptr, false);
        if (e.is_discarded()) continue;
        if (e.value("seq", std::size_t{0}) > after_seq) out.push_back(std::move(e));
    }
    return out;
}

}  // namespace rlhd
