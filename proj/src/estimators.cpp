#include "rlhd/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>

#include "rlhd/error.hpp"

namespace rlhd {

namespace {

void check_lengths(std::initializer_list<std::span<const double>> spans) {
    const std::size_t n = spans.begin()->size();
    for (const auto& s : spans)
        if (s.size() != n)
            throw DomainError("estimator batches differ in length (" + std::to_string(n) + " vs " +
                              std::to_string(s.size()) + ")");
    if (n < 2) throw DomainError("estimators need N >= 2");
}

double checked_variance(const PooledMoments& m) {
    if (!(m.variance > 0.0))
        throw DegenerateModelError("pooled output variance is zero; the model looks constant on this design");
    return m.variance;
}

std::span<const double> as_span(const std::vector<double>& v) { return {v.data(), v.size()}; }

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

SimulationBatch derived(const SimulationBatch& batch, const Permutation& p, std::string id) {
    return reorder_outputs(batch, p, std::move(id));
}

EstimatorPlan make_plan(EstimatorKind kind, std::size_t i, std::vector<const SimulationBatch*> batches,
                        Statistic statistic) {
    EstimatorPlan plan;
    plan.kind = kind;
    plan.input = i;
    for (const SimulationBatch* b : batches) {
        plan.columns.push_back(b->outputs);
        plan.batches_used.push_back(b->design_id);
        const std::string& src = b->source_id.empty() ? b->design_id : b->source_id;
        if (std::find(plan.sources.begin(), plan.sources.end(), src) == plan.sources.end())
            plan.sources.push_back(src);
    }
    plan.statistic = std::move(statistic);
    return plan;
}

void check_family_outputs(const RlhdFamily& family, const FamilyOutputs& out, std::size_t i) {
    if (i >= family.d())
        throw DomainError("input index " + std::to_string(i + 1) + " out of range 1.." + std::to_string(family.d()));
    if (out.x.size() != family.n() || out.w.size() != family.n())
        throw DomainError("family outputs do not match the design size");
}

}  // namespace

const char* to_string(EstimatorKind kind) noexcept {
    switch (kind) {
    case EstimatorKind::oracle2_pooled: return "oracle2_pooled";
    case EstimatorKind::oracle2_pearson: return "oracle2_pearson";
    case EstimatorKind::oracle1: return "oracle1";
    case EstimatorKind::oracle1_triple: return "oracle1_triple";
    case EstimatorKind::oracle2_averaged: return "oracle2_averaged";
    case EstimatorKind::oracle2_triple: return "oracle2_triple";
    case EstimatorKind::total_order: return "total_order";
    }
    return "unknown";
}

EstimatorKind parse_estimator_kind(const std::string& text) {
    if (text == "oracle2_pooled" || text == "oracle2") return EstimatorKind::oracle2_pooled;
    if (text == "oracle2_pearson" || text == "oracle2-pearson") return EstimatorKind::oracle2_pearson;
    if (text == "oracle1") return EstimatorKind::oracle1;
    if (text == "oracle1_triple" || text == "triple-oracle1") return EstimatorKind::oracle1_triple;
    if (text == "oracle2_averaged" || text == "averaged-oracle2") return EstimatorKind::oracle2_averaged;
    if (text == "oracle2_triple" || text == "triple-oracle2") return EstimatorKind::oracle2_triple;
    if (text == "total_order" || text == "total") return EstimatorKind::total_order;
    throw UsageError("unknown estimator kind '" + text + "'");
}

PooledMoments pooled_moments(const std::vector<std::span<const double>>& batches) {
    if (batches.empty()) throw DomainError("pooled_moments needs at least one batch");
    const std::size_t n = batches.front().size();
    for (const auto& b : batches)
        if (b.size() != n) throw DomainError("pooled batches differ in length");
    if (n < 2) throw DomainError("pooled_moments needs N >= 2");
    double sum = 0.0;
    for (const auto& b : batches) {
        double s = 0.0;
        for (double v : b) s += v;
        sum += s;
    }
    const double count = static_cast<double>(n * batches.size());
    const double mean = sum / count;
    double ss = 0.0;
    for (const auto& b : batches) {
        double s = 0.0;
        for (double v : b) s += (v - mean) * (v - mean);
        ss += s;
    }
    return PooledMoments{mean, ss / count, batches.size()};
}

PooledMoments pooled_moments(const std::vector<SimulationBatch>& batches) {
    std::vector<std::span<const double>> spans;
    for (const auto& b : batches) spans.push_back(as_span(b.outputs));
    return pooled_moments(spans);
}

double oracle2_value(std::span<const double> x, std::span<const double> wmi) {
    check_lengths({x, wmi});
    const PooledMoments m = pooled_moments({x, wmi});
    const double var = checked_variance(m);
    double num = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) num += (x[k] - m.mean) * (wmi[k] - m.mean);
    return (num / static_cast<double>(x.size())) / var;
}

double oracle2_pearson_value(std::span<const double> x, std::span<const double> wmi) {
    check_lengths({x, wmi});
    const double n = static_cast<double>(x.size());
    double mx = 0.0, mw = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        mx += x[k];
        mw += wmi[k];
    }
    mx /= n;
    mw /= n;
    double sxx = 0.0, sww = 0.0, sxw = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double a = x[k] - mx;
        const double b = wmi[k] - mw;
        sxx += a * a;
        sww += b * b;
        sxw += a * b;
    }
    if (!(sxx > 0.0) || !(sww > 0.0))
        throw DegenerateModelError("a batch has zero variance; the Pearson form is undefined");
    return sxw / std::sqrt(sxx * sww);
}

double oracle1_value(std::span<const double> x, std::span<const double> w, std::span<const double> wmi) {
    check_lengths({x, w, wmi});
    const PooledMoments m = pooled_moments({x, w, wmi});
    const double var = checked_variance(m);
    double num = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) num += (x[k] - m.mean) * (wmi[k] - w[k]);
    return (num / static_cast<double>(x.size())) / var;
}

double total_order_value(std::span<const double> w, std::span<const double> wmi) {
    return 1.0 - oracle2_value(w, wmi);
}

double oracle2_known_moments(std::span<const double> x, std::span<const double> wmi, double mean, double variance) {
    check_lengths({x, wmi});
    if (!(variance > 0.0)) throw DomainError("known variance must be positive");
    double num = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) num += (x[k] - mean) * (wmi[k] - mean);
    return (num / static_cast<double>(x.size())) / variance;
}

double oracle1_known_moments(std::span<const double> x, std::span<const double> w, std::span<const double> wmi,
                             double mean, double variance) {
    check_lengths({x, w, wmi});
    if (!(variance > 0.0)) throw DomainError("known variance must be positive");
    double num = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) num += (x[k] - mean) * (wmi[k] - w[k]);
    return (num / static_cast<double>(x.size())) / variance;
}

SobolEstimate run_plan(const EstimatorPlan& plan, const EstimateOptions& options) {
    SobolEstimate e;
    e.input = plan.input;
    e.kind = plan.kind;
    e.value = plan.statistic(plan.columns, &e.components);
    e.batches_used = plan.batches_used;
    e.evaluations_charged = plan.columns.empty() ? 0 : plan.columns.front().size() * plan.sources.size();
    if (options.bootstrap) e.ci = bootstrap_ci(plan.statistic, plan.columns, *options.bootstrap);
    if (options.clamp) {
        const double c = std::clamp(e.value, 0.0, 1.0);
        e.clamped = c != e.value;
        e.value = c;
    }
    return e;
}

EstimatorPlan plan_oracle2(const SimulationBatch& x, const SimulationBatch& wmi, std::size_t i) {
    return make_plan(EstimatorKind::oracle2_pooled, i, {&x, &wmi},
                     [](const AlignedColumns& c, std::vector<double>*) { return oracle2_value(c[0], c[1]); });
}

EstimatorPlan plan_oracle2_pearson(const SimulationBatch& x, const SimulationBatch& wmi, std::size_t i) {
    return make_plan(EstimatorKind::oracle2_pearson, i, {&x, &wmi}, [](const AlignedColumns& c, std::vector<double>*) {
        return oracle2_pearson_value(c[0], c[1]);
    });
}

EstimatorPlan plan_oracle1(const SimulationBatch& x, const SimulationBatch& w, const SimulationBatch& wmi,
                           std::size_t i) {
    return make_plan(EstimatorKind::oracle1, i, {&x, &w, &wmi}, [](const AlignedColumns& c, std::vector<double>*) {
        return oracle1_value(c[0], c[1], c[2]);
    });
}

EstimatorPlan plan_total_order(const SimulationBatch& w, const SimulationBatch& wmi, std::size_t i) {
    return make_plan(EstimatorKind::total_order, i, {&w, &wmi},
                     [](const AlignedColumns& c, std::vector<double>*) { return total_order_value(c[0], c[1]); });
}

SobolEstimate oracle2(const SimulationBatch& x, const SimulationBatch& wmi, std::size_t i,
                      const EstimateOptions& options) {
    return run_plan(plan_oracle2(x, wmi, i), options);
}

SobolEstimate oracle2_pearson(const SimulationBatch& x, const SimulationBatch& wmi, std::size_t i,
                              const EstimateOptions& options) {
    return run_plan(plan_oracle2_pearson(x, wmi, i), options);
}

SobolEstimate oracle1(const SimulationBatch& x, const SimulationBatch& w, const SimulationBatch& wmi,
                      std::size_t i, const EstimateOptions& options) {
    return run_plan(plan_oracle1(x, w, wmi, i), options);
}

SobolEstimate total_order(const SimulationBatch& w, const SimulationBatch& wmi, std::size_t i,
                          const EstimateOptions& options) {
    return run_plan(plan_total_order(w, wmi, i), options);
}

const SimulationBatch& FamilyOutputs::z_at(std::size_t i) const {
    auto it = z.find(i);
    if (it == z.end())
        throw PreconditionError("no outputs for design Z" + std::to_string(i + 1));
    return it->second;
}

EstimatorPlan plan_family_oracle2(const RlhdFamily& family, const FamilyOutputs& out, std::size_t i) {
    check_family_outputs(family, out, i);
    const SimulationBatch wmi = derived(out.w, family.w_minus_rows(i), family.w().id + "-" + std::to_string(i + 1));
    return plan_oracle2(out.x, wmi, i);
}

EstimatorPlan plan_family_oracle2_pearson(const RlhdFamily& family, const FamilyOutputs& out, std::size_t i) {
    check_family_outputs(family, out, i);
    const SimulationBatch wmi = derived(out.w, family.w_minus_rows(i), family.w().id + "-" + std::to_string(i + 1));
    return plan_oracle2_pearson(out.x, wmi, i);
}

EstimatorPlan plan_family_oracle1(const RlhdFamily& family, const FamilyOutputs& out, std::size_t i) {
    check_family_outputs(family, out, i);
    family.z(i);
    const SimulationBatch& z = out.z_at(i);
    const SimulationBatch wmi = derived(out.w, family.w_minus_rows(i), family.w().id + "-" + std::to_string(i + 1));
    return plan_oracle1(out.x, z, wmi, i);
}

EstimatorPlan plan_triple_oracle1(const RlhdFamily& family, const FamilyOutputs& out, std::size_t i) {
    check_family_outputs(family, out, i);
    family.z(i);
    const SimulationBatch& z = out.z_at(i);
    const std::string tag = std::to_string(i + 1);
    const SimulationBatch wmi = derived(out.w, family.w_minus_rows(i), family.w().id + "-" + tag);
    const SimulationBatch xt = derived(out.x, family.x_tilde_rows(i), family.x().id + "~" + tag);
    const SimulationBatch wt = derived(wmi, family.w_minus_tilde_rows(i), family.w().id + "~-" + tag);
    // Frame columns: 0 x, 1 w_{-i}, 2 z_i, 3 x~, 4 w~_{-i}.
    return make_plan(EstimatorKind::oracle1_triple, i, {&out.x, &wmi, &z, &xt, &wt},
                     [](const AlignedColumns& c, std::vector<double>* components) {
                         const double a = oracle1_value(c[0], c[2], c[1]);
                         const double b = oracle1_value(c[3], c[1], c[2]);
                         const double d = oracle1_value(c[4], c[1], c[2]);
                         if (components) *components = {a, b, d};
                         return (a + b + d) / 3.0;
                     });
}

EstimatorPlan plan_averaged_oracle2(const RlhdFamily& family, const FamilyOutputs& out, std::size_t i,
                                    const std::vector<std::string>& partner_ids, const std::string& reference_id) {
    check_family_outputs(family, out, i);
    if (!reference_id.empty() && reference_id != family.x().id)
        throw InvariantError("averaged Oracle 2 must use X as the reference design, got '" + reference_id + "'");
    if (partner_ids.empty()) throw InvariantError("averaged Oracle 2 needs at least one partner design");

    std::set<std::string> seen;
    std::vector<SimulationBatch> partners;
    for (const std::string& id : partner_ids) {
        if (!seen.insert(id).second) throw InvariantError("partner design '" + id + "' listed twice");
        const DesignMatrix* design = nullptr;
        const SimulationBatch* batch = nullptr;
        if (id == family.w().id) {
            design = &family.w();
            batch = &out.w;
        } else {
            for (const auto& [k, z] : family.z_designs()) {
                if (z.id == id) {
                    design = &z;
                    batch = &out.z_at(k);
                    break;
                }
            }
        }
        if (!design)
            throw InvariantError("design '" + id + "' is not an independent partner of X in family '" +
                                 family.id() + "'");
        const Permutation p = match_permutation(family.x().column_levels[i], design->column_levels[i]);
        partners.push_back(derived(*batch, p, id + "@" + std::to_string(i + 1)));
    }

    std::vector<const SimulationBatch*> frame{&out.x};
    for (const auto& p : partners) frame.push_back(&p);
    return make_plan(EstimatorKind::oracle2_averaged, i, frame,
                     [](const AlignedColumns& c, std::vector<double>* components) {
                         std::vector<double> vals;
                         for (std::size_t k = 1; k < c.size(); ++k) vals.push_back(oracle2_value(c[0], c[k]));
                         const double v = mean_of(vals);
                         if (components) *components = std::move(vals);
                         return v;
                     });
}

EstimatorPlan plan_triple_oracle2(const RlhdFamily& family, const FamilyOutputs& out, std::size_t i) {
    check_family_outputs(family, out, i);
    family.z(i);
    const SimulationBatch& z = out.z_at(i);
    const std::string tag = std::to_string(i + 1);
    const SimulationBatch wmi = derived(out.w, family.w_minus_rows(i), family.w().id + "-" + tag);
    const SimulationBatch zx = derived(z, family.z_to_x_rows(i), family.z(i).id + "@" + tag);
    return make_plan(EstimatorKind::oracle2_triple, i, {&out.x, &wmi, &zx},
                     [](const AlignedColumns& c, std::vector<double>* components) {
                         const double a = oracle2_value(c[0], c[1]);
                         const double b = oracle2_value(c[0], c[2]);
                         const double d = oracle2_value(c[1], c[2]);
                         if (components) *components = {a, b, d};
                         return (a + b + d) / 3.0;
                     });
}

EstimatorPlan plan_family_total_order(const RlhdFamily& family, const FamilyOutputs& out, std::size_t i) {
    check_family_outputs(family, out, i);
    family.z(i);
    const SimulationBatch& z = out.z_at(i);
    const SimulationBatch wmi = derived(out.w, family.w_minus_rows(i), family.w().id + "-" + std::to_string(i + 1));
    return plan_total_order(z, wmi, i);
}

}  // namespace rlhd
