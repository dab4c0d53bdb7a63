#include <gtest/gtest.h>

#include <thread>

#include "rlhd/campaign.hpp"
#include "rlhd/error.hpp"
#include "support.hpp"

using namespace rlhd;
using rlhd::testing::TempDir;

namespace {

CampaignConfig quiet_config() {
    CampaignConfig c;
    c.bootstrap_enabled = false;
    return c;
}

CampaignConfig small_bootstrap_config() {
    CampaignConfig c;
    c.bootstrap.replicates = 60;
    return c;
}

}  // namespace

TEST(CandidateOrder, DescendingBelowCutoffWithIndexTieBreak) {
    const std::vector<double> est{0.6, 0.1, 0.3, 0.1, -0.02, 0.5};
    EXPECT_EQ(candidate_order(est, {}, 0.5), (std::vector<std::size_t>{2, 1, 3, 4}));
    EXPECT_EQ(candidate_order(est, {2, 3}, 0.5), (std::vector<std::size_t>{1, 4}));
}

TEST(ExitHint, BandAndAccuracyRules) {
    CampaignState s;
    s.config = CampaignConfig{};
    auto rec = [](double v, std::optional<double> hw) {
        IndexRecord r;
        r.current.value = v;
        if (hw) r.current.ci = ConfidenceInterval{v - *hw, v + *hw, 0.95, 100};
        return r;
    };
    s.indices = {rec(0.7, 0.02), rec(0.2, 0.02), rec(0.05, 0.5)};
    s.reestimated = {1};
    ExitHint h = compute_exit_hint(s);
    EXPECT_EQ(h.contributing, (std::vector<std::size_t>{0, 1}));
    EXPECT_NEAR(h.sum_of_estimates, 0.9, 1e-12);
    EXPECT_FALSE(h.within_band);
    s.indices[1].current.value = 0.27;
    h = compute_exit_hint(s);
    EXPECT_TRUE(h.within_band);
    ASSERT_TRUE(h.half_width);
    EXPECT_NEAR(*h.half_width, std::sqrt(2.0) * 0.02, 1e-9);
    EXPECT_TRUE(h.accurate);
    EXPECT_TRUE(h.suggests_exit);
    s.indices[0].current.ci = ConfidenceInterval{0.6, 0.8, 0.95, 100};
    EXPECT_FALSE(compute_exit_hint(s).suggests_exit);
    s.indices[0].current.ci.reset();
    h = compute_exit_hint(s);
    EXPECT_FALSE(h.half_width);
    EXPECT_TRUE(h.suggests_exit);
}

TEST(Campaign, BudgetLawHoldsAtEveryStep) {
    for (std::size_t n : {40u, 75u}) {
        Campaign c(builtin_problem("mod-g-lin-eps0.10", n, 3), quiet_config());
        c.stage_one();
        EXPECT_EQ(c.state().ledger.total(), 2 * n);
        std::size_t m = 0;
        while (!c.candidates().empty()) {
            c.stage_two_step(c.candidates().front());
            ++m;
            EXPECT_EQ(c.state().ledger.total(), n * (m + 2));
        }
        EXPECT_EQ(m, 9u);
    }
}

TEST(Campaign, StepReplacesEstimatesByTheRightEstimators) {
    Campaign c(builtin_problem("mod-g-10-10-4", 120, 5), quiet_config());
    c.stage_one();
    for (const auto& r : c.state().indices) EXPECT_EQ(r.current.kind, EstimatorKind::oracle2_pooled);
    const std::size_t first = c.candidates().front();
    c.stage_two_step(first);
    const std::size_t second = c.candidates().front();
    c.stage_two_step(second);
    const auto& s = c.state();
    EXPECT_EQ(s.indices[first].current.kind, EstimatorKind::oracle1_triple);
    ASSERT_TRUE(s.indices[first].total);
    EXPECT_EQ(s.indices[first].total->kind, EstimatorKind::total_order);
    for (std::size_t j = 0; j < 10; ++j) {
        if (j == first || j == second) continue;
        EXPECT_EQ(s.indices[j].current.kind, EstimatorKind::oracle2_averaged);
        // W plus one Z per reestimated index.
        EXPECT_EQ(s.indices[j].current.components.size(), 3u);
        EXPECT_EQ(s.indices[j].history.size(), 3u);
    }
    EXPECT_EQ(s.reestimated, (std::vector<std::size_t>{first, second}));
    EXPECT_EQ(s.stage, Stage::stage2_active);
}

TEST(Campaign, PreconditionsAreEnforced) {
    Campaign c(builtin_problem("mod-g-10-10-4", 60, 1), quiet_config());
    EXPECT_THROW(c.stage_two_step(4), PreconditionError);
    c.stage_one();
    EXPECT_THROW(c.stage_one(), PreconditionError);
    std::size_t large = 99;
    for (std::size_t i = 0; i < 10; ++i)
        if (c.state().indices[i].current.value >= 0.5) large = i;
    ASSERT_NE(large, 99u);
    EXPECT_THROW(c.stage_two_step(large), PreconditionError);
    const std::size_t i = c.candidates().front();
    c.stage_two_step(i);
    EXPECT_THROW(c.stage_two_step(i), PreconditionError);
    EXPECT_THROW(c.stage_two_step(10), PreconditionError);
    c.close("test", "done");
    EXPECT_EQ(c.state().stage, Stage::closed);
    EXPECT_TRUE(c.candidates().empty());
    EXPECT_THROW(c.stage_two_step(c.state().indices.size() - 1), PreconditionError);
    EXPECT_THROW(c.close(), PreconditionError);
}

TEST(Campaign, ResumeContinuesIdentically) {
    const ProblemSpec spec = builtin_problem("mod-g-lin-eps0.10", 80, 11);
    Campaign straight(spec, small_bootstrap_config());
    auto_policy_run(straight, AutoPolicy{3, false});

    Campaign first(spec, small_bootstrap_config());
    auto_policy_run(first, AutoPolicy{1, false});
    const json saved = to_json(first.state());
    Campaign resumed = Campaign::resume(campaign_state_from_json(saved), nullptr);
    EXPECT_EQ(to_json(resumed.state()), saved);
    auto_policy_run(resumed, AutoPolicy{2, false});

    json a = to_json(straight.state()), b = to_json(resumed.state());
    for (json* j : {&a, &b}) {
        j->erase("decision_log");
        j->erase("ledger");
    }
    EXPECT_EQ(a, b);
    EXPECT_EQ(straight.state().ledger.total(), resumed.state().ledger.total());
}

TEST(Campaign, ResumeRejectsTamperedState) {
    Campaign c(builtin_problem("mod-g-19-9-4", 40, 2), quiet_config());
    c.stage_one();
    c.stage_two_step(c.candidates().front());
    CampaignState s = c.state();
    s.family_id = "other";
    EXPECT_THROW(Campaign::resume(s), InvariantError);
    s = c.state();
    std::vector<std::size_t> swapped = s.z_levels[0].second.values();
    std::swap(swapped[0], swapped[1]);
    s.z_levels[0].second = Permutation(swapped);
    EXPECT_THROW(Campaign::resume(s), InvariantError);
}

TEST(Campaign, ObserverSeesOrderedEvents) {
    Campaign c(builtin_problem("mod-g-19-9-4", 40, 2), quiet_config());
    std::vector<CampaignEvent> seen;
    c.set_observer([&](const CampaignEvent& e) { seen.push_back(e); });
    c.stage_one();
    c.stage_two_step(c.candidates().front());
    ASSERT_FALSE(seen.empty());
    for (std::size_t k = 0; k < seen.size(); ++k) EXPECT_EQ(seen[k].seq, k + 1);
    EXPECT_EQ(seen.back().type, "stage_two_step");
    EXPECT_TRUE(seen.back().transition);
    EXPECT_TRUE(seen.back().payload.contains("state"));
}

TEST(Campaign, StateDocumentShape) {
    Campaign c(builtin_problem("mod-g-19-9-4", 200, 2), small_bootstrap_config());
    c.stage_one();
    const json s = to_json(c.state());
    EXPECT_EQ(s["stage"], "stage1_done");
    EXPECT_EQ(s["estimates"].size(), 3u);
    EXPECT_EQ(s["estimates"][0]["input"], 1);
    EXPECT_FALSE(s["estimates"][0]["current"]["ci"].is_null());
    EXPECT_EQ(s["budget"]["spent"], 400);
    EXPECT_EQ(s["budget"]["saltelli_bound"], 1000);
    ASSERT_FALSE(s["candidates"].empty());
    EXPECT_EQ(s["budget"]["projection"][0], 600);
    EXPECT_TRUE(s["exit_hint"].is_object());
}

TEST(Campaign, ConfigRoundTrip) {
    CampaignConfig c;
    c.large_cutoff = 0.4;
    c.bootstrap.replicates = 77;
    const CampaignConfig back = campaign_config_from_json(to_json(c));
    EXPECT_EQ(back.large_cutoff, 0.4);
    EXPECT_EQ(back.bootstrap.replicates, 77u);
    EXPECT_THROW(campaign_config_from_json(json{{"exit_band", -1.0}}), ConfigurationError);
}

TEST(CampaignStore, PersistsAcrossProcessesAndLocks) {
    TempDir dir;
    const auto cdir = dir / "c";
    CampaignStore::init(cdir, builtin_problem("mod-g-19-9-4", 50, 1), quiet_config());
    EXPECT_THROW(CampaignStore::init(cdir, builtin_problem("mod-g-19-9-4", 50, 1), quiet_config()), UsageError);
    {
        CampaignStore store(cdir);
        EXPECT_THROW(CampaignStore second(cdir), PreconditionError);
        store.campaign().stage_two_step(store.campaign().candidates().front());
        store.commit();
    }
    const json state = CampaignStore::read_state(cdir);
    EXPECT_EQ(state["stage"], "stage2_active");
    EXPECT_EQ(state["ledger"]["total"], 150);
    EXPECT_TRUE(std::filesystem::exists(cdir / "designs" / "X.csv"));
    EXPECT_TRUE(std::filesystem::exists(cdir / "ledger.json"));
    {
        // Reopening replays cached batches without new charges.
        CampaignStore store(cdir);
        EXPECT_EQ(store.campaign().state().ledger.total(), 150u);
        store.campaign().stage_two_step(store.campaign().candidates().front());
        EXPECT_EQ(store.campaign().state().ledger.total(), 200u);
        store.commit();
    }
    const auto events = CampaignStore::read_events(cdir);
    ASSERT_FALSE(events.empty());
    std::size_t prev = 0;
    for (const json& e : events) {
        EXPECT_GT(e["seq"].get<std::size_t>(), prev);
        prev = e["seq"];
    }
    EXPECT_EQ(CampaignStore::read_events(cdir, prev - 1).size(), 1u);
    EXPECT_TRUE(CampaignStore::read_events(cdir, prev).empty());
}

TEST(CampaignStore, MissingDirectoryIsAUsageError) {
    TempDir dir;
    EXPECT_THROW(CampaignStore store(dir / "nope"), UsageError);
}
