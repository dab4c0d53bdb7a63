#include "rlhd/permutation.hpp"

#include <string>
#include <utility>

#include "rlhd/error.hpp"

namespace rlhd {

Permutation::Permutation(std::vector<std::size_t> zero_based) : map_(std::move(zero_based)) {
    std::vector<char> seen(map_.size(), 0);
    for (std::size_t v : map_) {
        if (v >= map_.size() || seen[v])
            throw DomainError("not a permutation of 0.." + std::to_string(map_.size()) + "-1");
        seen[v] = 1;
    }
}

Permutation Permutation::identity(std::size_t n) {
    std::vector<std::size_t> m(n);
    for (std::size_t k = 0; k < n; ++k) m[k] = k;
    Permutation p;
    p.map_ = std::move(m);
    return p;
}

Permutation Permutation::from_one_based(const std::vector<long long>& one_based) {
    std::vector<std::size_t> m;
    m.reserve(one_based.size());
    for (long long v : one_based) {
        if (v < 1) throw DomainError("1-based permutation entry below 1");
        m.push_back(static_cast<std::size_t>(v - 1));
    }
    return Permutation(std::move(m));
}

std::vector<long long> Permutation::to_one_based() const {
    std::vector<long long> out(map_.size());
    for (std::size_t k = 0; k < map_.size(); ++k) out[k] = static_cast<long long>(map_[k]) + 1;
    return out;
}

Permutation Permutation::inverse() const {
    std::vector<std::size_t> inv(map_.size());
    for (std::size_t k = 0; k < map_.size(); ++k) inv[map_[k]] = k;
    Permutation p;
    p.map_ = std::move(inv);
    return p;
}

bool Permutation::is_identity() const noexcept {
    for (std::size_t k = 0; k < map_.size(); ++k)
        if (map_[k] != k) return false;
    return true;
}

std::string Permutation::cycle_notation() const {
    const bool spaced = map_.size() > 9;
    std::vector<char> visited(map_.size(), 0);
    std::string out;
    for (std::size_t start = 0; start < map_.size(); ++start) {
        if (visited[start] || map_[start] == start) continue;
        out += '(';
        std::size_t k = start;
        bool first = true;
        while (!visited[k]) {
            visited[k] = 1;
            if (spaced && !first) out += ' ';
            out += std::to_string(k + 1);
            first = false;
            k = map_[k];
        }
        out += ')';
    }
    return out.empty() ? "()" : out;
}

Permutation compose(const Permutation& outer, const Permutation& inner) {
    if (outer.size() != inner.size()) throw DomainError("compose: permutation lengths differ");
    std::vector<std::size_t> m(inner.size());
    for (std::size_t k = 0; k < inner.size(); ++k) m[k] = outer[inner[k]];
    return Permutation(std::move(m));
}

Permutation sample_permutation(std::size_t n, RandomStream& stream) {
    if (n == 0) throw DomainError("sample_permutation requires n >= 1");
    std::vector<std::size_t> m(n);
    for (std::size_t k = 0; k < n; ++k) m[k] = k;
    for (std::size_t k = n - 1; k > 0; --k) std::swap(m[k], m[stream.below(k + 1)]);
    return Permutation(std::move(m));
}

Permutation match_permutation(const Permutation& target, const Permutation& source) {
    if (target.size() != source.size())
        throw DomainError("match_permutation: lengths differ (" + std::to_string(target.size()) +
                          " vs " + std::to_string(source.size()) + ")");
    return compose(source.inverse(), target);
}

template <typename T>
std::vector<T> gather(std::span<const T> in, const Permutation& p) {
    if (in.size() != p.size())
        throw DomainError("gather: length " + std::to_string(in.size()) +
                          " does not match permutation length " + std::to_string(p.size()));
    std::vector<T> out(in.size());
    for (std::size_t k = 0; k < in.size(); ++k) out[k] = in[p[k]];
    return out;
}

template std::vector<double> gather(std::span<const double>, const Permutation&);
template std::vector<std::size_t> gather(std::span<const std::size_t>, const Permutation&);

}  // namespace rlhd
