#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rlhd/models.hpp"

namespace rlhd {

/// Non-empty, sorted, duplicate-free set of 0-based input indices below d.
class IndexSet {
public:
    IndexSet(std::vector<std::size_t> members, std::size_t d);

    const std::vector<std::size_t>& members() const noexcept { return members_; }
    std::size_t size() const noexcept { return members_.size(); }
    bool contains(std::size_t i) const;

private:
    std::vector<std::size_t> members_;
};

struct MonteCarloValue {
    double value = 0.0;
    double standard_error = 0.0;
};

/// Closed index V[E(Y | X_u)] / V[Y] by i.i.d. pick-freeze sampling. Requires |u| <= 3.
MonteCarloValue closed_index_bruteforce(const Evaluator& model, std::size_t d, const IndexSet& u,
                                        std::size_t n_mc, std::uint64_t seed);

/// Pairwise interaction index S_u - S_i - S_j, estimated on one shared sample. Requires |u| = 2.
MonteCarloValue interaction_index_bruteforce(const Evaluator& model, std::size_t d, const IndexSet& u,
                                             std::size_t n_mc, std::uint64_t seed);

}  // namespace rlhd
