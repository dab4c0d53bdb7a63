#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rlhd/rng.hpp"

namespace rlhd {

/// Bijection on {0, ..., n-1}. External surfaces convert to 1-based.
class Permutation {
public:
    Permutation() = default;
    /// Validates that the map is a bijection; throws DomainError otherwise.
    explicit Permutation(std::vector<std::size_t> zero_based);

    static Permutation identity(std::size_t n);
    static Permutation from_one_based(const std::vector<long long>& one_based);

    std::size_t size() const noexcept { return map_.size(); }
    std::size_t operator[](std::size_t k) const { return map_[k]; }
    const std::vector<std::size_t>& values() const noexcept { return map_; }

    std::vector<long long> to_one_based() const;
    Permutation inverse() const;
    bool is_identity() const noexcept;

    /// Disjoint-cycle form in 1-based labels with fixed points omitted, e.g. "(238756)".
    /// Labels are space-separated when n > 9.
    std::string cycle_notation() const;

    friend bool operator==(const Permutation&, const Permutation&) = default;

private:
    std::vector<std::size_t> map_;
};

/// (outer o inner)(k) = outer(inner(k)).
Permutation compose(const Permutation& outer, const Permutation& inner);

/// Uniform draw by Fisher-Yates.
Permutation sample_permutation(std::size_t n, RandomStream& stream);

/// Row-gather map p with source[p[k]] == target[k], i.e. p = source^-1 o target.
/// Gathering the rows of a design whose column has levels `source` by p yields
/// a column with levels `target`.
Permutation match_permutation(const Permutation& target, const Permutation& source);

/// out[k] = in[p[k]].
template <typename T>
std::vector<T> gather(std::span<const T> in, const Permutation& p);

extern template std::vector<double> gather(std::span<const double>, const Permutation&);
extern template std::vector<std::size_t> gather(std::span<const std::size_t>, const Permutation&);

}  // namespace rlhd
