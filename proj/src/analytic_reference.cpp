#include "rlhd/analytic_reference.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rlhd/error.hpp"
#include "rlhd/rng.hpp"

namespace rlhd {

namespace {

// Samples A, B and for each group g the matrix C_g (B with the columns of g taken
// from A). Accumulates t = sum_g weight_g * f_A * (f_{C_g} - f_B) and the pooled variance.
MonteCarloValue pick_freeze(const Evaluator& model, std::size_t d, const std::vector<std::vector<std::size_t>>& groups,
                            const std::vector<double>& weights, std::size_t n_mc, std::uint64_t seed) {
    if (n_mc < 2) throw DomainError("Monte Carlo reference needs n_mc >= 2");
    RandomStream stream(seed, "closed-index");
    std::vector<double> a(d), b(d), c(d);
    double sum = 0.0, sum_sq = 0.0;
    double mean = 0.0, m2 = 0.0;
    std::size_t count = 0;
    auto push = [&](double y) {
        ++count;
        const double delta = y - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (y - mean);
    };
    for (std::size_t k = 0; k < n_mc; ++k) {
        for (double& v : a) v = stream.uniform01();
        for (double& v : b) v = stream.uniform01();
        const double fa = model(a);
        const double fb = model(b);
        push(fa);
        push(fb);
        double t = 0.0;
        for (std::size_t g = 0; g < groups.size(); ++g) {
            c = b;
            for (std::size_t i : groups[g]) c[i] = a[i];
            t += weights[g] * fa * (model(c) - fb);
        }
        sum += t;
        sum_sq += t * t;
    }
    const double n = static_cast<double>(n_mc);
    const double var = m2 / static_cast<double>(count - 1);
    if (!(var > 0.0)) throw DegenerateModelError("model has zero variance on the sample");
    const double m = sum / n;
    const double v = std::max(0.0, sum_sq / n - m * m);
    return MonteCarloValue{m / var, std::sqrt(v / n) / var};
}

}  // namespace

IndexSet::IndexSet(std::vector<std::size_t> members, std::size_t d) : members_(std::move(members)) {
    if (members_.empty()) throw DomainError("index set must be non-empty");
    std::sort(members_.begin(), members_.end());
    if (std::adjacent_find(members_.begin(), members_.end()) != members_.end())
        throw DomainError("index set has duplicate members");
    if (members_.back() >= d)
        throw DomainError("index " + std::to_string(members_.back() + 1) + " exceeds d = " + std::to_string(d));
}

bool IndexSet::contains(std::size_t i) const {
    return std::binary_search(members_.begin(), members_.end(), i);
}

MonteCarloValue closed_index_bruteforce(const Evaluator& model, std::size_t d, const IndexSet& u,
                                        std::size_t n_mc, std::uint64_t seed) {
    if (u.size() > 3) throw UnsupportedError("closed index brute force is limited to |u| <= 3");
    return pick_freeze(model, d, {u.members()}, {1.0}, n_mc, seed);
}

MonteCarloValue interaction_index_bruteforce(const Evaluator& model, std::size_t d, const IndexSet& u,
                                             std::size_t n_mc, std::uint64_t seed) {
    if (u.size() != 2) throw UnsupportedError("interaction brute force is limited to pairs");
    const std::size_t i = u.members()[0], j = u.members()[1];
    return pick_freeze(model, d, {{i, j}, {i}, {j}}, {1.0, -1.0, -1.0}, n_mc, seed);
}

}  // namespace rlhd
