#include <gtest/gtest.h>

#include <future>
#include <set>

#include "httplib.h"
#include "rlhd/campaign.hpp"
#include "rlhd/error.hpp"
#include "rlhd/service.hpp"
#include "support.hpp"

using namespace rlhd;
using rlhd::testing::TempDir;

namespace {

// y = 3 x1 + x2 + x3: input 1 is large, inputs 2 and 3 are candidates.
ProblemSpec linear_spec(const std::string& command_prefix) {
    ProblemSpec s;
    s.name = "linear";
    for (const char* n : {"a", "b", "c"}) s.inputs.push_back({n, MarginalDistribution::uniform(0.0, 1.0)});
    s.model = ModelBinding{ModelBinding::Kind::external,
                           command_prefix + "awk -F, 'NR>1{printf \"%.17g\\n\", 3*$1+$2+$3}' {input} > {output}"};
    s.n = 64;
    s.seed = 3;
    return s;
}

CampaignConfig quick_config() {
    CampaignConfig c;
    c.bootstrap.replicates = 50;
    return c;
}

class ServiceTest : public ::testing::Test {
protected:
    void start(const std::string& prefix = "") {
        dir_ = std::make_unique<TempDir>();
        CampaignStore::init(dir_->path() / "c", linear_spec(prefix), quick_config());
        service_ = std::make_unique<CampaignService>(dir_->path() / "c");
        port_ = service_->start();
        client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
        client_->set_read_timeout(30, 0);
    }
    void TearDown() override {
        client_.reset();
        if (service_) service_->stop();
        service_.reset();
    }
    json get(const std::string& path) {
        auto r = client_->Get(path);
        EXPECT_TRUE(r);
        return r ? json::parse(r->body) : json();
    }
    httplib::Result post(const std::string& path, const std::string& body) {
        return client_->Post(path, body, "application/json");
    }

    std::unique_ptr<TempDir> dir_;
    std::unique_ptr<CampaignService> service_;
    std::unique_ptr<httplib::Client> client_;
    int port_ = 0;
};

}  // namespace

TEST_F(ServiceTest, StateAfterStageOne) {
    start();
    const json s = get("/state");
    EXPECT_EQ(s["stage"], "stage1_done");
    EXPECT_EQ(s["estimates"].size(), 3u);
    EXPECT_EQ(s["ledger"]["total"], 128);
    // Inputs 2 and 3 share a true index, so their order follows the sampled estimates.
    const auto c = s["candidates"].get<std::vector<int>>();
    ASSERT_EQ(c.size(), 2u);
    EXPECT_EQ(std::set<int>(c.begin(), c.end()), std::set<int>({2, 3}));
    EXPECT_GE(s["estimates"][c[0] - 1]["current"]["value"].get<double>(),
              s["estimates"][c[1] - 1]["current"]["value"].get<double>());
    EXPECT_FALSE(s["estimates"][0]["current"]["ci"].is_null());
}

TEST_F(ServiceTest, StepChargesExactlyNAndReturnsState) {
    start();
    auto r = post("/step", R"({"index": 2})");
    ASSERT_TRUE(r);
    ASSERT_EQ(r->status, 200) << r->body;
    const json s = json::parse(r->body);
    EXPECT_EQ(s["ledger"]["total"], 192);
    EXPECT_EQ(s["reestimated"], json({2}));
    EXPECT_EQ(s["estimates"][1]["current"]["kind"], "oracle1_triple");
    EXPECT_FALSE(s["estimates"][1]["total"].is_null());
    EXPECT_EQ(get("/state"), s);
}

TEST_F(ServiceTest, RejectsBadRequests) {
    start();
    auto bad = post("/step", "{nope");
    ASSERT_TRUE(bad);
    EXPECT_EQ(bad->status, 400);
    EXPECT_EQ(post("/step", R"({"idx": 2})")->status, 400);
    EXPECT_EQ(post("/step", R"({"index": "2"})")->status, 400);
    auto large = post("/step", R"({"index": 1})");
    EXPECT_EQ(large->status, 422);
    EXPECT_EQ(json::parse(large->body)["error"], "not_a_candidate");
    EXPECT_EQ(post("/step", R"({"index": 9})")->status, 422);
    EXPECT_EQ(post("/step", R"({"index": 0})")->status, 422);
    EXPECT_EQ(get("/state")["ledger"]["total"], 128);
}

TEST_F(ServiceTest, ExitClosesAndLaterCallsConflict) {
    start();
    auto r = post("/exit", R"({"reason": "enough"})");
    ASSERT_EQ(r->status, 200);
    EXPECT_EQ(json::parse(r->body)["stage"], "closed");
    EXPECT_EQ(post("/step", R"({"index": 2})")->status, 409);
    EXPECT_EQ(post("/exit", "")->status, 409);
    const json log = get("/state")["decision_log"];
    EXPECT_EQ(log.back()["action"], "close");
    EXPECT_EQ(log.back()["detail"]["reason"], "enough");
}

TEST_F(ServiceTest, CorsHeadersAndPreflight) {
    start();
    auto r = client_->Get("/state");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->get_header_value("Access-Control-Allow-Origin"), "*");
    auto pre = client_->Options("/step");
    ASSERT_TRUE(pre);
    EXPECT_EQ(pre->status, 204);
    EXPECT_EQ(pre->get_header_value("Access-Control-Allow-Origin"), "*");
}

TEST_F(ServiceTest, EventsStreamIsOrderedAndFilterable) {
    start();
    const json all = get("/events");
    ASSERT_FALSE(all["events"].empty());
    const std::size_t last = all["last_seq"];
    EXPECT_EQ(all["events"].back()["seq"], last);
    EXPECT_TRUE(get("/events?after=" + std::to_string(last))["events"].empty());
    post("/step", R"({"index": 3})");
    const json fresh = get("/events?after=" + std::to_string(last));
    ASSERT_FALSE(fresh["events"].empty());
    EXPECT_EQ(fresh["events"][0]["seq"], last + 1);
    EXPECT_EQ(fresh["events"].back()["type"], "stage_two_step");
    EXPECT_EQ(get("/events?after=x")["error"], "bad_request");
}

TEST_F(ServiceTest, ConcurrentStepIsRejectedWhileInFlight) {
    start("sleep 1; ");
    const std::size_t last = get("/events")["last_seq"];
    auto first = std::async(std::launch::async, [&] {
        httplib::Client c("127.0.0.1", port_);
        c.set_read_timeout(30, 0);
        auto r = c.Post("/step", R"({"index": 2})", "application/json");
        return r ? r->status : -1;
    });
    // Wait until the first step has started evaluating Z_2.
    const json started = get("/events?after=" + std::to_string(last) + "&wait=10");
    ASSERT_FALSE(started["events"].empty());
    EXPECT_EQ(started["events"][0]["type"], "evaluation_started");
    auto second = post("/step", R"({"index": 3})");
    ASSERT_TRUE(second);
    EXPECT_EQ(second->status, 409);
    EXPECT_EQ(json::parse(second->body)["error"], "step_in_flight");
    // The snapshot stays readable during the step.
    EXPECT_EQ(get("/state")["ledger"]["total"], 128);
    EXPECT_EQ(first.get(), 200);
    EXPECT_EQ(get("/state")["ledger"]["total"], 192);
}

TEST(Service, HoldsTheWriterLock) {
    TempDir dir;
    CampaignStore::init(dir / "c", linear_spec(""), quick_config());
    CampaignService service(dir / "c");
    EXPECT_THROW({ CampaignStore store(dir / "c"); }, rlhd::PreconditionError);
}
