#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rlhd/matrix.hpp"
#include "rlhd/permutation.hpp"

namespace rlhd {

/// Largest design size for which jittered points stay strictly inside their stratum.
inline constexpr std::size_t kMaxDesignSize = std::size_t{1} << 19;

/// Stratum offsets U(column, level) in (-1/2, 1/2), shared by every member of a family.
class JitterArray {
public:
    /// Draws on a 2^-32 grid from the substream "jitter" of `seed`.
    static JitterArray sample(std::size_t n, std::size_t d, std::uint64_t seed);
    /// values[column * n + level]; every value must lie in (-1/2, 1/2).
    static JitterArray from_values(std::size_t n, std::size_t d, std::vector<double> values,
                                   std::uint64_t seed = 0);

    std::size_t n() const noexcept { return n_; }
    std::size_t d() const noexcept { return d_; }
    std::uint64_t seed() const noexcept { return seed_; }
    double operator()(std::size_t column, std::size_t level) const {
        return values_[column * n_ + level];
    }
    const std::vector<double>& values() const noexcept { return values_; }

    friend bool operator==(const JitterArray&, const JitterArray&) = default;

private:
    std::size_t n_ = 0;
    std::size_t d_ = 0;
    std::uint64_t seed_ = 0;
    std::vector<double> values_;
};

enum class Space { unit, physical };
const char* to_string(Space space) noexcept;

/// Rows of a derived view: row k of the view is row rows[k] of the root design.
struct Derivation {
    std::string parent_id;
    Permutation rows;
};

/// N x d design. column_levels[c][k] is the stratum of row k in column c.
struct DesignMatrix {
    std::string id;
    std::string family_id;
    Space space = Space::unit;
    Matrix points;
    std::vector<Permutation> column_levels;
    std::shared_ptr<const JitterArray> jitter;
    std::optional<Derivation> derivation;

    std::size_t rows() const noexcept { return points.rows(); }
    std::size_t cols() const noexcept { return points.cols(); }
    bool is_view() const noexcept { return derivation.has_value(); }
    /// Id of the design that was (or will be) actually simulated.
    const std::string& root_id() const noexcept { return derivation ? derivation->parent_id : id; }
};

/// Model outputs attached to one design. source_id names the simulated root design.
struct SimulationBatch {
    std::string design_id;
    std::string source_id;
    std::string model_id;
    std::vector<double> outputs;

    std::size_t size() const noexcept { return outputs.size(); }
};

/// Entry (k, c) = (levels[c][k] + 1/2 + U(c, levels[c][k])) / N.
DesignMatrix build_randomized_lhd(const std::vector<Permutation>& column_levels,
                                  std::shared_ptr<const JitterArray> jitter, std::string id,
                                  std::string family_id = {});

/// Per column: true iff some row permutation maps B's column onto A's exactly.
std::vector<bool> is_replicated(const DesignMatrix& a, const DesignMatrix& b);

/// Per column: true iff every stratum [l/N, (l+1)/N) holds exactly one point.
std::vector<bool> latin_columns(const DesignMatrix& design);

/// View of `design` with its rows gathered by p. Views of views resolve to the root.
DesignMatrix reorder_rows(const DesignMatrix& design, const Permutation& p, std::string id);

/// W reordered so that column i coincides with X's column i. Throws InvariantError
/// when the designs do not share a jitter array.
DesignMatrix reorder_to_match(const DesignMatrix& w, const DesignMatrix& x, std::size_t column);

/// Batch whose output k is the parent output p[k]; no evaluations involved.
SimulationBatch reorder_outputs(const SimulationBatch& batch, const Permutation& p,
                                std::string design_id = {});

/// Pair X, W plus optional Z designs sharing one jitter array.
class RlhdFamily {
public:
    /// Requires N >= 2 and d >= 1. Permutations for X and W come from the
    /// substreams "X/<c>" and "W/<c>" of `seed`.
    static RlhdFamily make_pair(std::size_t n, std::size_t d, std::uint64_t seed,
                                std::string id = {});
    /// Builds a family from explicit permutations (used for the worked example and replays).
    static RlhdFamily from_parts(std::shared_ptr<const JitterArray> jitter,
                                 std::vector<Permutation> x_levels,
                                 std::vector<Permutation> w_levels, std::string id,
                                 std::uint64_t seed = 0);

    const std::string& id() const noexcept { return id_; }
    std::size_t n() const noexcept { return n_; }
    std::size_t d() const noexcept { return d_; }
    std::uint64_t seed() const noexcept { return seed_; }
    const std::shared_ptr<const JitterArray>& jitter() const noexcept { return jitter_; }

    const DesignMatrix& x() const noexcept { return x_; }
    const DesignMatrix& w() const noexcept { return w_; }

    bool has_z(std::size_t i) const { return z_.count(i) != 0; }
    /// Throws PreconditionError if Z_i was not added.
    const DesignMatrix& z(std::size_t i) const;
    const std::map<std::size_t, DesignMatrix>& z_designs() const noexcept { return z_; }

    /// Adds Z_i with column i drawn from the substream "Z/<i>"; idempotent.
    const DesignMatrix& add_z(std::size_t i);
    /// Adds Z_i with an injected column-i permutation.
    const DesignMatrix& add_z(std::size_t i, const Permutation& column_levels);

    /// Rows of W that form W_{-i}.
    Permutation w_minus_rows(std::size_t i) const;
    /// Rows of X that form X~ (column i matching Z_i).
    Permutation x_tilde_rows(std::size_t i) const;
    /// Rows of W_{-i} that form W~_{-i} (column i matching Z_i).
    Permutation w_minus_tilde_rows(std::size_t i) const;
    /// Rows of Z_i that align its column i with X's column i.
    Permutation z_to_x_rows(std::size_t i) const;

    DesignMatrix w_minus(std::size_t i) const;
    DesignMatrix x_tilde(std::size_t i) const;
    DesignMatrix w_minus_tilde(std::size_t i) const;

    /// Id of every member: "<family>/X", "<family>/W", "<family>/Z<i+1>".
    static std::string member_id(const std::string& family, const std::string& role);

private:
    void check_index(std::size_t i) const;

    std::string id_;
    std::size_t n_ = 0;
    std::size_t d_ = 0;
    std::uint64_t seed_ = 0;
    std::shared_ptr<const JitterArray> jitter_;
    DesignMatrix x_;
    DesignMatrix w_;
    std::map<std::size_t, DesignMatrix> z_;
};

/// Z_i: the columns of W_{-i} except column i, which is built from `column_levels`.
DesignMatrix make_z_design(const RlhdFamily& family, std::size_t i, const Permutation& column_levels);
DesignMatrix make_z_design(const RlhdFamily& family, std::size_t i, RandomStream& stream);

}  // namespace rlhd
