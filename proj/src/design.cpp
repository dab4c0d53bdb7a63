#include "rlhd/design.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "rlhd/error.hpp"

namespace rlhd {

namespace {

std::string column_label(const std::string& role, std::size_t column) {
    return role + "/" + std::to_string(column);
}

bool same_jitter(const DesignMatrix& a, const DesignMatrix& b) {
    if (!a.jitter || !b.jitter) return false;
    return a.jitter == b.jitter || *a.jitter == *b.jitter;
}

}  // namespace

JitterArray JitterArray::sample(std::size_t n, std::size_t d, std::uint64_t seed) {
    if (n > kMaxDesignSize)
        throw ConfigurationError("design size " + std::to_string(n) + " exceeds the supported maximum " +
                                 std::to_string(kMaxDesignSize));
    RandomStream stream(seed, "jitter");
    JitterArray j;
    j.n_ = n;
    j.d_ = d;
    j.seed_ = seed;
    j.values_.resize(n * d);
    for (double& v : j.values_) v = (static_cast<double>(stream.next32()) + 0.5) * 0x1.0p-32 - 0.5;
    return j;
}

JitterArray JitterArray::from_values(std::size_t n, std::size_t d, std::vector<double> values,
                                     std::uint64_t seed) {
    if (values.size() != n * d)
        throw ConfigurationError("jitter array needs " + std::to_string(n * d) + " values, got " +
                                 std::to_string(values.size()));
    for (double v : values)
        if (!(v > -0.5 && v < 0.5)) throw DomainError("jitter value outside (-1/2, 1/2)");
    JitterArray j;
    j.n_ = n;
    j.d_ = d;
    j.seed_ = seed;
    j.values_ = std::move(values);
    return j;
}

const char* to_string(Space space) noexcept {
    return space == Space::unit ? "unit" : "physical";
}

DesignMatrix build_randomized_lhd(const std::vector<Permutation>& column_levels,
                                  std::shared_ptr<const JitterArray> jitter, std::string id,
                                  std::string family_id) {
    if (!jitter) throw ConfigurationError("build_randomized_lhd: missing jitter array");
    const std::size_t d = column_levels.size();
    const std::size_t n = jitter->n();
    if (d != jitter->d())
        throw ConfigurationError("build_randomized_lhd: " + std::to_string(d) +
                                 " permutations for a jitter array with " +
                                 std::to_string(jitter->d()) + " columns");
    for (const Permutation& p : column_levels)
        if (p.size() != n)
            throw ConfigurationError("build_randomized_lhd: permutation length " +
                                     std::to_string(p.size()) + " != N = " + std::to_string(n));
    DesignMatrix m;
    m.id = std::move(id);
    m.family_id = std::move(family_id);
    m.space = Space::unit;
    m.points = Matrix(n, d);
    const double nd = static_cast<double>(n);
    for (std::size_t c = 0; c < d; ++c) {
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t level = column_levels[c][k];
            m.points(k, c) = (static_cast<double>(level) + 0.5 + (*jitter)(c, level)) / nd;
        }
    }
    m.column_levels = column_levels;
    m.jitter = std::move(jitter);
    return m;
}

std::vector<bool> is_replicated(const DesignMatrix& a, const DesignMatrix& b) {
    std::vector<bool> out(a.cols(), false);
    if (a.rows() != b.rows() || a.cols() != b.cols()) return out;
    for (std::size_t c = 0; c < a.cols(); ++c) {
        std::vector<double> ca = a.points.column(c);
        std::vector<double> cb = b.points.column(c);
        std::sort(ca.begin(), ca.end());
        std::sort(cb.begin(), cb.end());
        out[c] = ca == cb;
    }
    return out;
}

std::vector<bool> latin_columns(const DesignMatrix& design) {
    const std::size_t n = design.rows();
    std::vector<bool> out(design.cols(), true);
    for (std::size_t c = 0; c < design.cols(); ++c) {
        std::vector<char> hit(n, 0);
        for (std::size_t k = 0; k < n; ++k) {
            const double v = design.points(k, c) * static_cast<double>(n);
            if (!(v >= 0.0 && v < static_cast<double>(n))) {
                out[c] = false;
                break;
            }
            const auto stratum = static_cast<std::size_t>(std::floor(v));
            if (hit[stratum]) {
                out[c] = false;
                break;
            }
            hit[stratum] = 1;
        }
    }
    return out;
}

DesignMatrix reorder_rows(const DesignMatrix& design, const Permutation& p, std::string id) {
    if (p.size() != design.rows())
        throw DomainError("reorder_rows: permutation length " + std::to_string(p.size()) +
                          " != N = " + std::to_string(design.rows()));
    DesignMatrix out;
    out.id = std::move(id);
    out.family_id = design.family_id;
    out.space = design.space;
    out.points = Matrix(design.rows(), design.cols());
    for (std::size_t k = 0; k < design.rows(); ++k)
        for (std::size_t c = 0; c < design.cols(); ++c) out.points(k, c) = design.points(p[k], c);
    out.column_levels.reserve(design.column_levels.size());
    for (const Permutation& levels : design.column_levels) out.column_levels.push_back(compose(levels, p));
    out.jitter = design.jitter;
    if (design.derivation)
        out.derivation = Derivation{design.derivation->parent_id, compose(design.derivation->rows, p)};
    else
        out.derivation = Derivation{design.id, p};
    return out;
}

DesignMatrix reorder_to_match(const DesignMatrix& w, const DesignMatrix& x, std::size_t column) {
    if (!same_jitter(w, x) || w.family_id != x.family_id)
        throw InvariantError("reorder_to_match: designs '" + w.id + "' and '" + x.id +
                             "' do not belong to the same replicated family");
    if (column >= x.cols() || w.cols() != x.cols() || w.rows() != x.rows())
        throw DomainError("reorder_to_match: column index or shape mismatch");
    const Permutation p = match_permutation(x.column_levels[column], w.column_levels[column]);
    return reorder_rows(w, p, w.id + "-" + std::to_string(column + 1));
}

SimulationBatch reorder_outputs(const SimulationBatch& batch, const Permutation& p, std::string design_id) {
    SimulationBatch out;
    out.outputs = gather<double>(batch.outputs, p);
    out.design_id = design_id.empty() ? batch.design_id + "*" : std::move(design_id);
    out.source_id = batch.source_id.empty() ? batch.design_id : batch.source_id;
    out.model_id = batch.model_id;
    return out;
}

std::string RlhdFamily::member_id(const std::string& family, const std::string& role) {
    return family + "/" + role;
}

RlhdFamily RlhdFamily::make_pair(std::size_t n, std::size_t d, std::uint64_t seed, std::string id) {
    if (n < 2) throw DomainError("an rLHD pair needs N >= 2");
    if (d < 1) throw DomainError("an rLHD pair needs d >= 1");
    auto jitter = std::make_shared<const JitterArray>(JitterArray::sample(n, d, seed));
    std::vector<Permutation> xl, wl;
    for (std::size_t c = 0; c < d; ++c) {
        RandomStream sx(seed, column_label("X", c));
        xl.push_back(sample_permutation(n, sx));
        RandomStream sw(seed, column_label("W", c));
        wl.push_back(sample_permutation(n, sw));
    }
    if (id.empty()) id = "rlhd-" + std::to_string(seed) + "-" + std::to_string(n) + "x" + std::to_string(d);
    return from_parts(std::move(jitter), std::move(xl), std::move(wl), std::move(id), seed);
}

RlhdFamily RlhdFamily::from_parts(std::shared_ptr<const JitterArray> jitter, std::vector<Permutation> x_levels,
                                  std::vector<Permutation> w_levels, std::string id, std::uint64_t seed) {
    if (!jitter) throw ConfigurationError("RlhdFamily: missing jitter array");
    if (x_levels.size() != w_levels.size())
        throw ConfigurationError("RlhdFamily: X and W have different column counts");
    RlhdFamily f;
    f.id_ = std::move(id);
    f.n_ = jitter->n();
    f.d_ = jitter->d();
    f.seed_ = seed;
    f.jitter_ = jitter;
    f.x_ = build_randomized_lhd(x_levels, jitter, member_id(f.id_, "X"), f.id_);
    f.w_ = build_randomized_lhd(w_levels, jitter, member_id(f.id_, "W"), f.id_);
    return f;
}

void RlhdFamily::check_index(std::size_t i) const {
    if (i >= d_)
        throw DomainError("input index " + std::to_string(i + 1) + " out of range 1.." + std::to_string(d_));
}

const DesignMatrix& RlhdFamily::z(std::size_t i) const {
    check_index(i);
    auto it = z_.find(i);
    if (it == z_.end())
        throw PreconditionError("design Z" + std::to_string(i + 1) + " has not been generated");
    return it->second;
}

const DesignMatrix& RlhdFamily::add_z(std::size_t i) {
    check_index(i);
    if (auto it = z_.find(i); it != z_.end()) return it->second;
    RandomStream stream(seed_, column_label("Z", i));
    return add_z(i, sample_permutation(n_, stream));
}

const DesignMatrix& RlhdFamily::add_z(std::size_t i, const Permutation& column_levels) {
    check_index(i);
    DesignMatrix z = make_z_design(*this, i, column_levels);
    return z_.insert_or_assign(i, std::move(z)).first->second;
}

Permutation RlhdFamily::w_minus_rows(std::size_t i) const {
    check_index(i);
    return match_permutation(x_.column_levels[i], w_.column_levels[i]);
}

Permutation RlhdFamily::x_tilde_rows(std::size_t i) const {
    return match_permutation(z(i).column_levels[i], x_.column_levels[i]);
}

Permutation RlhdFamily::w_minus_tilde_rows(std::size_t i) const {
    // Column i of W_{-i} carries X's levels, so the same gather as for X~ applies.
    return x_tilde_rows(i);
}

Permutation RlhdFamily::z_to_x_rows(std::size_t i) const {
    return match_permutation(x_.column_levels[i], z(i).column_levels[i]);
}

DesignMatrix RlhdFamily::w_minus(std::size_t i) const {
    check_index(i);
    return reorder_to_match(w_, x_, i);
}

DesignMatrix RlhdFamily::x_tilde(std::size_t i) const {
    return reorder_rows(x_, x_tilde_rows(i), x_.id + "~" + std::to_string(i + 1));
}

DesignMatrix RlhdFamily::w_minus_tilde(std::size_t i) const {
    return reorder_rows(w_minus(i), w_minus_tilde_rows(i), w_.id + "~-" + std::to_string(i + 1));
}

DesignMatrix make_z_design(const RlhdFamily& family, std::size_t i, const Permutation& column_levels) {
    if (i >= family.d())
        throw DomainError("input index " + std::to_string(i + 1) + " out of range 1.." + std::to_string(family.d()));
    if (column_levels.size() != family.n())
        throw ConfigurationError("make_z_design: permutation length does not match N");
    const DesignMatrix wmi = family.w_minus(i);
    std::vector<Permutation> levels = wmi.column_levels;
    levels[i] = column_levels;
    return build_randomized_lhd(levels, family.jitter(),
                                RlhdFamily::member_id(family.id(), "Z" + std::to_string(i + 1)), family.id());
}

DesignMatrix make_z_design(const RlhdFamily& family, std::size_t i, RandomStream& stream) {
    return make_z_design(family, i, sample_permutation(family.n(), stream));
}

}  // namespace rlhd
