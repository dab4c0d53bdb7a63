#include "rlhd/experiments.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "rlhd/campaign.hpp"
#include "rlhd/error.hpp"
#include "rlhd/rng.hpp"
#include "rlhd/runner.hpp"

namespace rlhd {

namespace {

double sample_variance(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

double mean_of(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    return m / static_cast<double>(v.size());
}

std::uint64_t rep_seed(std::uint64_t seed, const std::string& label, std::size_t a, std::size_t b) {
    return derive_seed(derive_seed(derive_seed(seed, label), a), b);
}

EstimatorPlan family_plan(EstimatorKind kind, const RlhdFamily& f, const FamilyOutputs& out, std::size_t i) {
    switch (kind) {
    case EstimatorKind::oracle2_pooled: return plan_family_oracle2(f, out, i);
    case EstimatorKind::oracle2_pearson: return plan_family_oracle2_pearson(f, out, i);
    case EstimatorKind::oracle1: return plan_family_oracle1(f, out, i);
    case EstimatorKind::oracle1_triple: return plan_triple_oracle1(f, out, i);
    case EstimatorKind::oracle2_triple: return plan_triple_oracle2(f, out, i);
    default: throw UnsupportedError(std::string("rmse_study does not support ") + to_string(kind));
    }
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(10);
    s << v;
    return s.str();
}

}  // namespace

SimulationBatch evaluate_builtin(const BuiltinModel& model, const DesignMatrix& design) {
    if (design.cols() != model.dimension)
        throw ConfigurationError("model '" + model.id + "' takes " + std::to_string(model.dimension) + " inputs");
    SimulationBatch b;
    b.design_id = design.root_id();
    b.source_id = design.root_id();
    b.model_id = model.id;
    b.outputs.resize(design.rows());
    for (std::size_t k = 0; k < design.rows(); ++k) b.outputs[k] = model.evaluate(design.points.row(k));
    if (design.is_view()) b.design_id = design.id;
    return b;
}

FamilyOutputs evaluate_family(const BuiltinModel& model, const RlhdFamily& family) {
    FamilyOutputs out;
    out.x = evaluate_builtin(model, family.x());
    out.w = evaluate_builtin(model, family.w());
    for (const auto& [i, z] : family.z_designs()) out.z[i] = evaluate_builtin(model, z);
    return out;
}

std::size_t runs_per_index(EstimatorKind kind) {
    switch (kind) {
    case EstimatorKind::oracle2_pooled:
    case EstimatorKind::oracle2_pearson: return 2;
    default: return 3;
    }
}

std::vector<double> rmse_per_index(const std::vector<std::vector<double>>& samples, const std::vector<double>& truth) {
    std::vector<double> out(truth.size(), 0.0);
    if (samples.empty()) return out;
    for (const auto& row : samples) {
        if (row.size() != truth.size()) throw DomainError("sample row length differs from the truth vector");
        for (std::size_t i = 0; i < truth.size(); ++i) out[i] += (row[i] - truth[i]) * (row[i] - truth[i]);
    }
    for (double& v : out) v = std::sqrt(v / static_cast<double>(samples.size()));
    return out;
}

std::vector<RmseRow> rmse_study(const RmseStudyConfig& cfg) {
    const BuiltinModel model = resolve_model(cfg.model_id);
    const AnalyticIndices truth = analytic_indices(model);
    const std::size_t d = model.dimension;
    std::vector<RmseRow> rows;
    for (std::size_t g = 0; g < cfg.n_runs_grid.size(); ++g) {
        const std::size_t n_runs = cfg.n_runs_grid[g];
        // Squared errors per (kind, input).
        std::map<EstimatorKind, std::vector<double>> sq;
        for (EstimatorKind k : cfg.kinds) sq[k].assign(d, 0.0);
        for (std::size_t r = 0; r < cfg.n_reps; ++r) {
            for (std::size_t cost : {std::size_t{2}, std::size_t{3}}) {
                bool needed = false;
                for (EstimatorKind k : cfg.kinds) needed = needed || runs_per_index(k) == cost;
                if (!needed) continue;
                const std::size_t n = n_runs / cost;
                RlhdFamily f = RlhdFamily::make_pair(n, d, rep_seed(cfg.seed, "rmse", n_runs * 10 + cost, r));
                if (cost == 3)
                    for (std::size_t i = 0; i < d; ++i) f.add_z(i);
                const FamilyOutputs out = evaluate_family(model, f);
                for (EstimatorKind k : cfg.kinds) {
                    if (runs_per_index(k) != cost) continue;
                    for (std::size_t i = 0; i < d; ++i) {
                        const EstimatorPlan plan = family_plan(k, f, out, i);
                        const double e = plan.statistic(plan.columns, nullptr) - truth.first_order[i];
                        sq[k][i] += e * e;
                    }
                }
            }
        }
        for (EstimatorKind k : cfg.kinds)
            for (std::size_t i = 0; i < d; ++i)
                rows.push_back(RmseRow{k, i, n_runs, n_runs / runs_per_index(k),
                                       std::sqrt(sq[k][i] / static_cast<double>(cfg.n_reps)), truth.first_order[i]});
    }
    return rows;
}

BoxplotResult boxplot_study(const BoxplotConfig& cfg) {
    const BuiltinModel model = resolve_model(cfg.model_id);
    const std::size_t d = model.dimension;
    BoxplotResult res;
    if (cfg.negligible) {
        res.negligible = *cfg.negligible;
    } else {
        const AnalyticIndices truth = analytic_indices(model);
        for (std::size_t i = 0; i < d; ++i)
            if (truth.first_order[i] < 0.01) res.negligible.push_back(i);
    }
    CampaignConfig ccfg;
    ccfg.bootstrap_enabled = false;
    ccfg.flag_cutoff = cfg.flag_cutoff;
    std::size_t flagged = 0;
    for (std::size_t r = 0; r < cfg.n_reps; ++r) {
        const std::uint64_t seed = rep_seed(cfg.seed, "boxplot", cfg.strategy.n, r);
        std::vector<double> est(d);
        if (cfg.strategy.kind == BoxplotStrategy::Kind::one_shot) {
            const RlhdFamily f = RlhdFamily::make_pair(cfg.strategy.n, d, seed);
            const FamilyOutputs out = evaluate_family(model, f);
            for (std::size_t i = 0; i < d; ++i) {
                const EstimatorPlan plan = plan_family_oracle2(f, out, i);
                est[i] = plan.statistic(plan.columns, nullptr);
            }
        } else {
            Campaign c(builtin_problem(cfg.model_id, cfg.strategy.n, seed), ccfg);
            auto_policy_run(c, AutoPolicy{cfg.strategy.steps, false});
            for (std::size_t i = 0; i < d; ++i) est[i] = c.state().indices[i].current.value;
        }
        bool flag = false;
        for (std::size_t i : res.negligible) flag = flag || est[i] > cfg.flag_cutoff;
        res.flagged.push_back(flag);
        flagged += flag ? 1 : 0;
        res.estimates.push_back(std::move(est));
    }
    res.flagged_fraction = cfg.n_reps ? static_cast<double>(flagged) / static_cast<double>(cfg.n_reps) : 0.0;
    return res;
}

CrossoverResult crossover_study(const std::vector<double>& s_grid, std::size_t n, std::size_t n_reps,
                                std::uint64_t seed) {
    if (n_reps < 2) throw DomainError("crossover_study needs at least two replications");
    constexpr std::size_t d = 4;
    CrossoverResult res;
    for (std::size_t g = 0; g < s_grid.size(); ++g) {
        const double s = s_grid[g];
        if (!(s > 0.0 && s < 1.0)) throw DomainError("crossover targets must lie in (0, 1)");
        // |4U - 2| has mean 1 and variance 1/3.
        const double alpha = std::sqrt(3.0 * s / (1.0 - s));
        const double mean = alpha + 3.0;
        const double var = (alpha * alpha + 3.0) / 3.0;
        const Evaluator y = [alpha](std::span<const double> x) {
            double v = alpha * std::fabs(4.0 * x[0] - 2.0);
            for (std::size_t j = 1; j < d; ++j) v += std::fabs(4.0 * x[j] - 2.0);
            return v;
        };
        const BuiltinModel model{"crossover", d, y, std::nullopt};
        std::vector<double> o1, o2, o1p, o2p;
        for (std::size_t r = 0; r < n_reps; ++r) {
            RlhdFamily f = RlhdFamily::make_pair(n, d, rep_seed(seed, "crossover", g, r));
            f.add_z(0);
            const FamilyOutputs out = evaluate_family(model, f);
            const std::vector<double> wmi = gather<double>(out.w.outputs, f.w_minus_rows(0));
            const std::vector<double>& x = out.x.outputs;
            const std::vector<double>& z = out.z.at(0).outputs;
            o1.push_back(oracle1_known_moments(x, z, wmi, mean, var));
            o2.push_back(oracle2_known_moments(x, wmi, mean, var));
            o1p.push_back(oracle1_value(x, z, wmi));
            o2p.push_back(oracle2_value(x, wmi));
        }
        CrossoverRow row;
        row.target = s;
        row.alpha = alpha;
        row.mean_oracle1 = mean_of(o1);
        row.mean_oracle2 = mean_of(o2);
        row.var_oracle1 = sample_variance(o1);
        row.var_oracle2 = sample_variance(o2);
        row.ratio = row.var_oracle1 / row.var_oracle2;
        row.var_oracle1_pooled = sample_variance(o1p);
        row.var_oracle2_pooled = sample_variance(o2p);
        res.rows.push_back(row);
    }
    for (std::size_t g = 1; g < res.rows.size(); ++g) {
        const double a = std::log(res.rows[g - 1].ratio), b = std::log(res.rows[g].ratio);
        if ((a < 0.0) != (b < 0.0)) {
            const double t = a / (a - b);
            res.crossover = res.rows[g - 1].target + t * (res.rows[g].target - res.rows[g - 1].target);
            break;
        }
    }
    return res;
}

std::string rmse_csv(const std::vector<RmseRow>& rows, const RmseStudyConfig& cfg) {
    std::ostringstream out;
    out << "# model=" << cfg.model_id << " n_reps=" << cfg.n_reps << " seed=" << cfg.seed << "\n";
    out << "kind,input,N_runs,N,rmse,truth\n";
    for (const auto& r : rows)
        out << to_string(r.kind) << "," << r.input + 1 << "," << r.n_runs << "," << r.n << "," << fmt(r.rmse) << ","
            << fmt(r.truth) << "\n";
    return out.str();
}

std::string boxplot_csv(const BoxplotResult& result, const BoxplotConfig& cfg) {
    std::ostringstream out;
    out << "# model=" << cfg.model_id << " strategy="
        << (cfg.strategy.kind == BoxplotStrategy::Kind::one_shot ? "one_shot" : "adaptive") << " N=" << cfg.strategy.n
        << " steps=" << cfg.strategy.steps << " n_reps=" << cfg.n_reps << " seed=" << cfg.seed
        << " flag_cutoff=" << cfg.flag_cutoff << " flagged_fraction=" << fmt(result.flagged_fraction) << "\n";
    out << "rep";
    const std::size_t d = result.estimates.empty() ? 0 : result.estimates.front().size();
    for (std::size_t i = 0; i < d; ++i) out << ",S" << i + 1;
    out << ",flagged\n";
    for (std::size_t r = 0; r < result.estimates.size(); ++r) {
        out << r + 1;
        for (double v : result.estimates[r]) out << "," << fmt(v);
        out << "," << (result.flagged[r] ? 1 : 0) << "\n";
    }
    return out.str();
}

std::string crossover_csv(const CrossoverResult& result, std::size_t n, std::size_t n_reps, std::uint64_t seed) {
    std::ostringstream out;
    out << "# N=" << n << " n_reps=" << n_reps << " seed=" << seed
        << " crossover=" << (result.crossover ? fmt(*result.crossover) : std::string("none")) << "\n";
    out << "target_S1,alpha,mean_oracle1,mean_oracle2,var_oracle1,var_oracle2,ratio,var_oracle1_pooled,var_oracle2_pooled\n";
    for (const auto& r : result.rows)
        out << fmt(r.target) << "," << fmt(r.alpha) << "," << fmt(r.mean_oracle1) << "," << fmt(r.mean_oracle2) << ","
            << fmt(r.var_oracle1) << "," << fmt(r.var_oracle2) << "," << fmt(r.ratio) << ","
            << fmt(r.var_oracle1_pooled) << "," << fmt(r.var_oracle2_pooled) << "\n";
    return out.str();
}

}  // namespace rlhd
