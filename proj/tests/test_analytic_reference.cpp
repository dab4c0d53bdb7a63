#include <gtest/gtest.h>

#include "rlhd/analytic_reference.hpp"
#include "rlhd/error.hpp"

using namespace rlhd;

// y = x1 x2 on the unit square: D = 1/9 - 1/16 = 7/144, V1 = V2 = 1/48, V12 = 1/144.
TEST(ClosedIndex, ProductOfTwoUniforms) {
    const BuiltinModel m = resolve_model("product-d2");
    const auto s1 = closed_index_bruteforce(m.evaluate, 2, IndexSet({0}, 2), 200000, 1);
    EXPECT_NEAR(s1.value, 3.0 / 7.0, 4.0 * s1.standard_error + 2e-3);
    const auto both = closed_index_bruteforce(m.evaluate, 2, IndexSet({1, 0}, 2), 200000, 2);
    EXPECT_NEAR(both.value, 1.0, 4.0 * both.standard_error + 2e-3);
}

TEST(InteractionIndex, ProductOfTwoUniforms) {
    const BuiltinModel m = resolve_model("product-d2");
    const auto s12 = interaction_index_bruteforce(m.evaluate, 2, IndexSet({0, 1}, 2), 200000, 3);
    EXPECT_NEAR(s12.value, 1.0 / 7.0, 4.0 * s12.standard_error + 2e-3);
}

TEST(InteractionIndex, AdditiveModelHasNone) {
    const BuiltinModel m = resolve_model("additive-d3");
    const auto s = interaction_index_bruteforce(m.evaluate, 3, IndexSet({0, 2}, 3), 50000, 4);
    EXPECT_NEAR(s.value, 0.0, 1e-12);
    const auto c = closed_index_bruteforce(m.evaluate, 3, IndexSet({0, 2}, 3), 100000, 5);
    EXPECT_NEAR(c.value, 2.0 / 3.0, 4.0 * c.standard_error + 2e-3);
}

TEST(IndexSet, Validation) {
    EXPECT_THROW(IndexSet({}, 3), DomainError);
    EXPECT_THROW(IndexSet({1, 1}, 3), DomainError);
    EXPECT_THROW(IndexSet({3}, 3), DomainError);
    const IndexSet u({2, 0}, 3);
    EXPECT_EQ(u.members(), (std::vector<std::size_t>{0, 2}));
    EXPECT_TRUE(u.contains(2));
    EXPECT_FALSE(u.contains(1));
    const BuiltinModel m = resolve_model("additive-d4");
    EXPECT_THROW(closed_index_bruteforce(m.evaluate, 4, IndexSet({0, 1, 2, 3}, 4), 100, 0), UnsupportedError);
    EXPECT_THROW(interaction_index_bruteforce(m.evaluate, 4, IndexSet({0, 1, 2}, 4), 100, 0), UnsupportedError);
}
