#include <gtest/gtest.h>

#include <fstream>

#include "rlhd/error.hpp"
#include "rlhd/experiments.hpp"
#include "rlhd/runner.hpp"
#include "support.hpp"

using namespace rlhd;
using rlhd::testing::TempDir;

namespace {

ProblemSpec external_spec(const std::string& command, std::size_t d = 2) {
    ProblemSpec s;
    s.name = "external";
    for (std::size_t j = 0; j < d; ++j)
        s.inputs.push_back({"x" + std::to_string(j + 1), MarginalDistribution::uniform(0.0, 2.0)});
    s.model = ModelBinding{ModelBinding::Kind::external, command};
    s.n = 16;
    return s;
}

}  // namespace

TEST(Runner, ChargesOnlyRootMisses) {
    Runner r(builtin_problem("mod-g-19-9-4", 50, 1));
    RlhdFamily f = RlhdFamily::make_pair(50, 3, 1);
    r.evaluate_design(f.x());
    EXPECT_EQ(r.ledger().total(), 50u);
    r.evaluate_design(f.x());
    EXPECT_EQ(r.ledger().total(), 50u);
    const SimulationBatch wm = r.evaluate_design(f.w_minus(1));
    EXPECT_EQ(r.ledger().total(), 100u);
    r.evaluate_design(f.w());
    r.evaluate_design(f.w_minus(2));
    EXPECT_EQ(r.ledger().total(), 100u);
    EXPECT_EQ(r.ledger().entries().size(), 2u);
    EXPECT_EQ(wm.source_id, f.w().id);
    EXPECT_EQ(wm.design_id, f.w().id + "-2");
    // A view's outputs are the model at the view's rows.
    EXPECT_EQ(wm.outputs, evaluate_builtin(resolve_model("mod-g-19-9-4"), f.w_minus(1)).outputs);
}

TEST(Runner, DirectoryCacheSurvivesRestart) {
    TempDir dir;
    RlhdFamily f = RlhdFamily::make_pair(20, 3, 2);
    std::vector<double> first;
    {
        Runner r(builtin_problem("mod-g-19-9-4", 20, 2), std::make_shared<DirectoryCache>(dir.path()));
        first = r.evaluate_design(f.x()).outputs;
        EXPECT_EQ(r.ledger().total(), 20u);
    }
    Runner again(builtin_problem("mod-g-19-9-4", 20, 2), std::make_shared<DirectoryCache>(dir.path()));
    EXPECT_EQ(again.evaluate_design(f.x()).outputs, first);
    EXPECT_EQ(again.ledger().total(), 0u);
}

TEST(Runner, CacheKeyTracksMarginalsAndPoints) {
    RlhdFamily f = RlhdFamily::make_pair(20, 3, 2);
    ProblemSpec a = builtin_problem("mod-g-19-9-4", 20, 2);
    ProblemSpec b = a;
    b.inputs[0].marginal = MarginalDistribution::uniform(0.0, 0.5);
    EXPECT_NE(Runner(a).cache_key(f.x()), Runner(b).cache_key(f.x()));
    EXPECT_NE(Runner(a).cache_key(f.x()), Runner(a).cache_key(f.w()));
    EXPECT_EQ(Runner(a).cache_key(f.x()), Runner(a).cache_key(f.x()));
}

TEST(ExternalBridge, EvaluatesInPhysicalSpace) {
    TempDir dir;
    Runner r(external_spec("awk -F, 'NR>1{printf \"%.17g\\n\", $1+$2}' {input} > {output}"), nullptr, dir.path());
    RlhdFamily f = RlhdFamily::make_pair(16, 2, 3);
    const SimulationBatch b = r.evaluate_design(f.x());
    ASSERT_EQ(b.size(), 16u);
    for (std::size_t k = 0; k < 16; ++k)
        EXPECT_NEAR(b.outputs[k], 2.0 * (f.x().points(k, 0) + f.x().points(k, 1)), 1e-12);
    EXPECT_EQ(r.ledger().total(), 16u);
}

TEST(ExternalBridge, SkipsHeaderLine) {
    TempDir dir;
    Runner r(external_spec("(echo y; awk -F, 'NR>1{print $1}' {input}) > {output}"), nullptr, dir.path());
    EXPECT_EQ(r.evaluate_design(RlhdFamily::make_pair(16, 2, 4).x()).size(), 16u);
}

TEST(ExternalBridge, FailuresMapToErrorKinds) {
    TempDir dir;
    RlhdFamily f = RlhdFamily::make_pair(16, 2, 5);
    EXPECT_THROW(Runner(external_spec("exit 3 # {input} {output}"), nullptr, dir.path()).evaluate_design(f.x()),
                 EvaluationError);
    EXPECT_THROW(Runner(external_spec("awk -F, 'NR>1&&NR<5{print $1}' {input} > {output}"), nullptr, dir.path())
                     .evaluate_design(f.x()),
                 ProtocolError);
    EXPECT_THROW(Runner(external_spec("(echo y; echo 1; echo oops) > {output} # {input}"), nullptr, dir.path())
                     .evaluate_design(f.x()),
                 EvaluationError);
    EXPECT_THROW(Runner(external_spec("true # {input}"), nullptr, dir.path()), ConfigurationError);
}

TEST(ExternalBridge, HandlesPathsWithSpaces) {
    TempDir dir;
    const auto scratch = dir / "with space";
    Runner r(external_spec("awk -F, 'NR>1{print $2}' {input} > {output}"), nullptr, scratch);
    EXPECT_EQ(r.evaluate_design(RlhdFamily::make_pair(16, 2, 6).x()).size(), 16u);
}

TEST(Ledger, RestoreRecomputesTotal) {
    BudgetLedger l;
    l.charge("a", 10, "x");
    l.charge("b", 5, "y");
    BudgetLedger m;
    m.restore(l.entries());
    EXPECT_EQ(m.total(), 15u);
    EXPECT_EQ(m.entries().size(), 2u);
}

TEST(ProblemSpec, Validation) {
    ProblemSpec s = builtin_problem("mod-g-19-9-4", 10, 0);
    s.inputs.pop_back();
    EXPECT_THROW(s.validate(), ConfigurationError);
    EXPECT_THROW(builtin_problem("nope", 10, 0), UsageError);
}
