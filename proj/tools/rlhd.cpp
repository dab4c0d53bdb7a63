// Command-line entry point: designs, estimates, campaigns, benchmarks and the HTTP service.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "rlhd/campaign.hpp"
#include "rlhd/error.hpp"
#include "rlhd/experiments.hpp"
#include "rlhd/json_io.hpp"
#include "rlhd/service.hpp"

namespace fs = std::filesystem;
using rlhd::json;

namespace {

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    rlhd::write_file_atomic(path, text);
}

std::vector<long long> parse_list(const std::string& text) {
    std::vector<long long> out;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        if (cell.empty()) continue;
        try {
            out.push_back(std::stoll(cell));
        } catch (const std::exception&) {
            throw rlhd::UsageError("bad integer '" + cell + "' in list");
        }
    }
    return out;
}

std::vector<rlhd::Permutation> perms_from_json(const json& j, long long base, std::size_t n, std::size_t d) {
    std::vector<rlhd::Permutation> out;
    for (const json& col : j) {
        auto v = col.get<std::vector<long long>>();
        for (auto& x : v) x += 1 - base;
        out.push_back(rlhd::Permutation::from_one_based(v));
    }
    if (out.size() != d) throw rlhd::UsageError("expected " + std::to_string(d) + " permutations");
    for (const auto& p : out)
        if (p.size() != n) throw rlhd::UsageError("permutation length differs from --n");
    return out;
}

json jitter_json(const rlhd::JitterArray& j) {
    json cols = json::array();
    for (std::size_t c = 0; c < j.d(); ++c) {
        std::vector<double> v(j.values().begin() + static_cast<long>(c * j.n()),
                              j.values().begin() + static_cast<long>((c + 1) * j.n()));
        cols.push_back(v);
    }
    return json{{"seed", j.seed()}, {"N", j.n()}, {"d", j.d()}, {"columns", cols}};
}

rlhd::JitterArray jitter_from_json(const json& j, std::size_t n, std::size_t d) {
    std::vector<double> values;
    const json& cols = j.contains("columns") ? j["columns"] : j;
    for (const json& c : cols)
        for (double v : c.get<std::vector<double>>()) values.push_back(v);
    return rlhd::JitterArray::from_values(n, d, std::move(values), j.is_object() ? j.value("seed", 0ULL) : 0ULL);
}

std::vector<std::string> default_names(std::size_t d) {
    std::vector<std::string> names;
    for (std::size_t k = 0; k < d; ++k) names.push_back("x" + std::to_string(k + 1));
    return names;
}

// Family stored in a design directory: family.json, jitter.json and the X/W sidecars.
rlhd::RlhdFamily load_family(const fs::path& dir) {
    const json fam = rlhd::read_json_file(dir / "family.json");
    const std::size_t n = fam.at("N"), d = fam.at("d");
    auto jitter = std::make_shared<const rlhd::JitterArray>(jitter_from_json(rlhd::read_json_file(dir / "jitter.json"), n, d));
    const json x = rlhd::read_json_file(dir / "X.json"), w = rlhd::read_json_file(dir / "W.json");
    return rlhd::RlhdFamily::from_parts(jitter, perms_from_json(x.at("column_perms"), x.value("base", 1LL), n, d),
                                        perms_from_json(w.at("column_perms"), w.value("base", 1LL), n, d),
                                        fam.at("id"), fam.value("seed", 0ULL));
}

void print_state_summary(const rlhd::Campaign& c) {
    const json s = rlhd::to_json(c.state());
    json brief{{"stage", s["stage"]},
               {"ledger_total", s["ledger"]["total"]},
               {"reestimated", s["reestimated"]},
               {"candidates", s["candidates"]},
               {"exit_hint", s["exit_hint"]}};
    json est = json::array();
    for (const json& e : s["estimates"]) {
        json row{{"input", e["input"]}, {"kind", e["current"]["kind"]}, {"value", e["current"]["value"]},
                 {"ci", e["current"]["ci"]}};
        if (!e["total"].is_null()) row["total"] = {{"value", e["total"]["value"]}, {"ci", e["total"]["ci"]}};
        est.push_back(row);
    }
    brief["estimates"] = est;
    std::cout << brief.dump(2) << "\n";
}

rlhd::CampaignConfig load_config(const std::string& path, std::size_t replicates, double level, bool no_bootstrap) {
    rlhd::CampaignConfig cfg = path.empty() ? rlhd::CampaignConfig{} : rlhd::campaign_config_from_json(rlhd::read_json_file(path));
    if (replicates) cfg.bootstrap.replicates = replicates;
    if (level > 0.0) cfg.bootstrap.level = level;
    if (no_bootstrap) cfg.bootstrap_enabled = false;
    cfg.bootstrap.validate();
    return cfg;
}

rlhd::ProblemSpec load_spec(const std::string& path, std::size_t n, long long seed) {
    rlhd::json j;
    if (fs::exists(path)) {
        j = rlhd::read_json_file(path);
    } else {
        // A bare builtin id is accepted in place of a spec file.
        rlhd::resolve_model(path);
        j = json{{"model", path}};
    }
    if (n) j["N"] = n;
    if (seed >= 0) j["seed"] = seed;
    return rlhd::problem_spec_from_json(j);
}

rlhd::CampaignService* g_service = nullptr;

void handle_signal(int) {
    if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Replicated Latin hypercube Sobol' index toolkit"};
    app.require_subcommand(1);

    // design
    auto* design = app.add_subcommand("design", "Generate rLHD designs");
    design->require_subcommand(1);
    std::size_t dn = 0, dd = 0;
    std::uint64_t dseed = 0;
    std::string dout = ".", dperms, djitter, dfam;
    auto* dnew = design->add_subcommand("new", "Write an rLHD pair X, W");
    dnew->add_option("--n", dn, "Design size N")->required();
    dnew->add_option("--d", dd, "Number of inputs")->required();
    dnew->add_option("--seed", dseed, "Seed");
    dnew->add_option("--out", dout, "Output directory");
    dnew->add_option("--perms", dperms, "JSON file {base, X:[...], W:[...]} with injected column permutations");
    dnew->add_option("--jitter", djitter, "JSON file with injected jitter columns");
    dnew->add_option("--id", dfam, "Family id");
    std::size_t zindex = 0;
    std::string zperm;
    auto* dz = design->add_subcommand("z", "Add Z_i to a design directory");
    dz->add_option("--index", zindex, "Input index (1-based)")->required();
    dz->add_option("--dir,--out", dout, "Design directory");
    dz->add_option("--perm", zperm, "Injected 1-based column permutation, comma-separated");

    // estimate
    auto* estimate = app.add_subcommand("estimate", "One index estimate with a bootstrap CI");
    std::string espec, ekind = "oracle2", eout;
    std::size_t eindex = 0, en = 0, eB = 1000;
    long long eseed = -1;
    double elevel = 0.95;
    estimate->add_option("--spec", espec, "Problem spec file or builtin model id")->required();
    estimate->add_option("--kind", ekind, "oracle1|oracle2|triple-oracle1|total")->required();
    estimate->add_option("--index", eindex, "Input index (1-based)")->required();
    estimate->add_option("--n", en, "Override N");
    estimate->add_option("--seed", eseed, "Override seed");
    estimate->add_option("--B", eB, "Bootstrap replicates (0 disables)");
    estimate->add_option("--level", elevel, "CI level");
    estimate->add_option("--out", eout, "Write JSON here instead of stdout");

    // campaign
    auto* campaign = app.add_subcommand("campaign", "Two-stage adaptive campaign in a directory");
    campaign->require_subcommand(1);
    std::string cdir = ".", cspec, cconfig, creason = "exit requested";
    std::size_t cn = 0, cB = 0, cindex = 0, csteps = 0;
    long long cseed = -1;
    double clevel = 0.0;
    bool cno_boot = false, cignore_hint = false;
    auto* cinit = campaign->add_subcommand("init", "Create the campaign and run stage one");
    cinit->add_option("--dir", cdir, "Campaign directory");
    cinit->add_option("--spec", cspec, "Problem spec file or builtin model id")->required();
    cinit->add_option("--n", cn, "Override N");
    cinit->add_option("--seed", cseed, "Override seed");
    cinit->add_option("--config", cconfig, "Campaign config JSON");
    cinit->add_option("--B", cB, "Bootstrap replicates");
    cinit->add_option("--level", clevel, "CI level");
    cinit->add_flag("--no-bootstrap", cno_boot, "Skip confidence intervals");
    auto* cstatus = campaign->add_subcommand("status", "Print the campaign state");
    cstatus->add_option("--dir", cdir, "Campaign directory");
    bool cfull = false;
    cstatus->add_flag("--full", cfull, "Print the full state document");
    auto* cstep = campaign->add_subcommand("step", "Reestimate one candidate");
    cstep->add_option("--dir", cdir, "Campaign directory");
    cstep->add_option("--index", cindex, "Input index (1-based)")->required();
    auto* cauto = campaign->add_subcommand("auto", "Step through candidates in order");
    cauto->add_option("--dir", cdir, "Campaign directory");
    cauto->add_option("--max-steps", csteps, "Maximum number of steps")->required();
    cauto->add_flag("--ignore-exit-hint", cignore_hint, "Keep stepping when the exit hint fires");
    auto* cexit = campaign->add_subcommand("exit", "Close the campaign");
    cexit->add_option("--dir", cdir, "Campaign directory");
    cexit->add_option("--reason", creason, "Reason recorded in the decision log");

    // bench
    auto* bench = app.add_subcommand("bench", "Replication studies");
    bench->require_subcommand(1);
    std::string bmodel = "mod-g-19-9-4", bout, bkinds = "oracle2,oracle1,triple-oracle1,triple-oracle2",
                bgrid = "600,1200,2400", bsgrid = "0.05,0.1,0.2,0.3,0.4,0.45,0.5,0.55,0.6,0.7,0.8,0.9,0.95";
    std::size_t breps = 200, bn = 200, bsteps = 0;
    std::uint64_t bseed = 0;
    double bflag = 0.10;
    auto* brmse = bench->add_subcommand("rmse", "RMSE against analytic indices");
    auto* bbox = bench->add_subcommand("boxplot", "Raw estimate samples and flagged fraction");
    auto* bcross = bench->add_subcommand("crossover", "Oracle 1 / Oracle 2 variance ratio against S_1");
    for (auto* sc : {brmse, bbox, bcross}) {
        sc->add_option("--reps", breps, "Replications");
        sc->add_option("--seed", bseed, "Seed");
        sc->add_option("--out", bout, "CSV output path (stdout if omitted)");
    }
    for (auto* sc : {brmse, bbox}) sc->add_option("--model", bmodel, "Builtin model id");
    bcross->add_option("--model", bmodel, "Ignored; the crossover model is fixed");
    brmse->add_option("--kinds", bkinds, "Comma-separated estimator kinds");
    brmse->add_option("--grid", bgrid, "Comma-separated N_runs values");
    bbox->add_option("--n", bn, "Design size");
    bbox->add_option("--steps", bsteps, "Adaptive steps (0 = one-shot Oracle 2)");
    bbox->add_option("--flag-cutoff", bflag, "Flag threshold");
    bcross->add_option("--n", bn, "Design size");
    bcross->add_option("--grid", bsgrid, "Comma-separated S_1 targets");

    // serve
    auto* serve = app.add_subcommand("serve", "HTTP service over a campaign directory");
    std::string sdir = ".", shost = "127.0.0.1";
    int sport = 8080;
    serve->add_option("--dir", sdir, "Campaign directory");
    serve->add_option("--port", sport, "Port");
    serve->add_option("--host", shost, "Bind address");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*dnew) {
            std::shared_ptr<const rlhd::JitterArray> jitter =
                djitter.empty() ? std::make_shared<const rlhd::JitterArray>(rlhd::JitterArray::sample(dn, dd, dseed))
                                : std::make_shared<const rlhd::JitterArray>(
                                      jitter_from_json(rlhd::read_json_file(djitter), dn, dd));
            rlhd::RlhdFamily fam = rlhd::RlhdFamily::make_pair(dn, dd, dseed, dfam);
            if (!dperms.empty() || !djitter.empty()) {
                std::vector<rlhd::Permutation> xl = fam.x().column_levels, wl = fam.w().column_levels;
                if (!dperms.empty()) {
                    const json p = rlhd::read_json_file(dperms);
                    const long long base = p.value("base", 1LL);
                    xl = perms_from_json(p.at("X"), base, dn, dd);
                    wl = perms_from_json(p.at("W"), base, dn, dd);
                }
                fam = rlhd::RlhdFamily::from_parts(jitter, std::move(xl), std::move(wl), fam.id(), dseed);
            }
            const auto names = default_names(dd);
            rlhd::write_file_atomic(fs::path(dout) / "family.json",
                                    json{{"id", fam.id()}, {"N", dn}, {"d", dd}, {"seed", dseed}}.dump(2) + "\n");
            rlhd::write_file_atomic(fs::path(dout) / "jitter.json", jitter_json(*fam.jitter()).dump() + "\n");
            rlhd::export_design(dout, "X", fam.x(), names, dseed);
            rlhd::export_design(dout, "W", fam.w(), names, dseed);
            std::cout << json{{"family", fam.id()}, {"dir", dout}, {"designs", {"X", "W"}}}.dump() << "\n";
            return 0;
        }
        if (*dz) {
            rlhd::RlhdFamily fam = load_family(dout);
            if (zindex < 1 || zindex > fam.d()) throw rlhd::UsageError("--index out of range");
            const std::size_t i = zindex - 1;
            const rlhd::DesignMatrix& z =
                zperm.empty() ? fam.add_z(i) : fam.add_z(i, rlhd::Permutation::from_one_based(parse_list(zperm)));
            const std::string stem = "Z" + std::to_string(zindex);
            rlhd::export_design(dout, stem, z, default_names(fam.d()), fam.seed());
            rlhd::export_design(dout, "W-" + std::to_string(zindex), fam.w_minus(i), default_names(fam.d()), fam.seed());
            std::cout << json{{"design", z.id}, {"dir", dout}}.dump() << "\n";
            return 0;
        }
        if (*estimate) {
            const rlhd::ProblemSpec spec = load_spec(espec, en, eseed);
            if (eindex < 1 || eindex > spec.dimension()) throw rlhd::UsageError("--index out of range");
            const std::size_t i = eindex - 1;
            const rlhd::EstimatorKind kind = rlhd::parse_estimator_kind(ekind);
            rlhd::Runner runner(spec);
            rlhd::RlhdFamily fam = rlhd::RlhdFamily::make_pair(spec.n, spec.dimension(), spec.seed);
            rlhd::FamilyOutputs out;
            out.x = runner.evaluate_design(fam.x());
            out.w = runner.evaluate_design(fam.w());
            rlhd::EstimatorPlan plan;
            switch (kind) {
            case rlhd::EstimatorKind::oracle2_pooled: plan = rlhd::plan_family_oracle2(fam, out, i); break;
            case rlhd::EstimatorKind::oracle2_pearson: plan = rlhd::plan_family_oracle2_pearson(fam, out, i); break;
            case rlhd::EstimatorKind::oracle1:
            case rlhd::EstimatorKind::oracle1_triple:
            case rlhd::EstimatorKind::oracle2_triple:
            case rlhd::EstimatorKind::total_order: {
                out.z[i] = runner.evaluate_design(fam.add_z(i));
                if (kind == rlhd::EstimatorKind::oracle1) plan = rlhd::plan_family_oracle1(fam, out, i);
                else if (kind == rlhd::EstimatorKind::oracle1_triple) plan = rlhd::plan_triple_oracle1(fam, out, i);
                else if (kind == rlhd::EstimatorKind::oracle2_triple) plan = rlhd::plan_triple_oracle2(fam, out, i);
                else plan = rlhd::plan_family_total_order(fam, out, i);
                break;
            }
            default: throw rlhd::UsageError("estimate does not support kind '" + ekind + "'");
            }
            rlhd::EstimateOptions opts;
            if (eB > 0) {
                rlhd::BootstrapConfig cfg;
                cfg.replicates = eB;
                cfg.level = elevel;
                cfg.seed = rlhd::derive_seed(spec.seed, "bootstrap");
                opts.bootstrap = cfg;
            }
            json rec = rlhd::to_json(rlhd::run_plan(plan, opts));
            rec["ledger_total"] = runner.ledger().total();
            write_text(eout, rec.dump(2) + "\n");
            return 0;
        }
        if (*cinit) {
            const rlhd::ProblemSpec spec = load_spec(cspec, cn, cseed);
            rlhd::CampaignStore::init(cdir, spec, load_config(cconfig, cB, clevel, cno_boot));
            rlhd::CampaignStore store(cdir);
            print_state_summary(store.campaign());
            return 0;
        }
        if (*cstatus) {
            const json s = rlhd::CampaignStore::read_state(cdir);
            if (cfull) {
                std::cout << s.dump(2) << "\n";
            } else {
                const rlhd::CampaignState st = rlhd::campaign_state_from_json(s);
                json brief{{"stage", s["stage"]},
                           {"ledger_total", s["ledger"]["total"]},
                           {"reestimated", s["reestimated"]},
                           {"candidates", s["candidates"]},
                           {"exit_hint", s["exit_hint"]}};
                json est = json::array();
                for (const json& e : s["estimates"])
                    est.push_back({{"input", e["input"]}, {"kind", e["current"]["kind"]}, {"value", e["current"]["value"]},
                                   {"ci", e["current"]["ci"]}, {"total", e["total"].is_null() ? json(nullptr) : e["total"]["value"]}});
                brief["estimates"] = est;
                std::cout << brief.dump(2) << "\n";
            }
            return 0;
        }
        if (*cstep || *cauto || *cexit) {
            rlhd::CampaignStore store(cdir);
            rlhd::Campaign& c = store.campaign();
            try {
                if (*cstep) {
                    if (cindex < 1) throw rlhd::UsageError("--index is 1-based");
                    c.stage_two_step(cindex - 1, "cli");
                } else if (*cauto) {
                    rlhd::auto_policy_run(c, rlhd::AutoPolicy{csteps, !cignore_hint});
                } else {
                    c.close("cli", creason);
                }
            } catch (...) {
                store.commit();
                throw;
            }
            store.commit();
            print_state_summary(c);
            return 0;
        }
        if (*brmse) {
            rlhd::RmseStudyConfig cfg;
            cfg.model_id = bmodel;
            std::stringstream ss(bkinds);
            std::string k;
            while (std::getline(ss, k, ',')) cfg.kinds.push_back(rlhd::parse_estimator_kind(k));
            for (long long v : parse_list(bgrid)) cfg.n_runs_grid.push_back(static_cast<std::size_t>(v));
            cfg.n_reps = breps;
            cfg.seed = bseed;
            write_text(bout, rlhd::rmse_csv(rlhd::rmse_study(cfg), cfg));
            return 0;
        }
        if (*bbox) {
            rlhd::BoxplotConfig cfg;
            cfg.model_id = bmodel;
            cfg.strategy = bsteps ? rlhd::BoxplotStrategy::adaptive(bn, bsteps) : rlhd::BoxplotStrategy::one_shot(bn);
            cfg.n_reps = breps;
            cfg.seed = bseed;
            cfg.flag_cutoff = bflag;
            const rlhd::BoxplotResult r = rlhd::boxplot_study(cfg);
            write_text(bout, rlhd::boxplot_csv(r, cfg));
            std::cerr << "flagged fraction: " << r.flagged_fraction << "\n";
            return 0;
        }
        if (*bcross) {
            std::vector<double> grid;
            std::stringstream ss(bsgrid);
            std::string v;
            while (std::getline(ss, v, ',')) grid.push_back(std::stod(v));
            const rlhd::CrossoverResult r = rlhd::crossover_study(grid, bn, breps, bseed);
            write_text(bout, rlhd::crossover_csv(r, bn, breps, bseed));
            return 0;
        }
        if (*serve) {
            rlhd::ServiceOptions opts;
            opts.host = shost;
            opts.port = sport;
            rlhd::CampaignService service(sdir, opts);
            const int port = service.bind();
            g_service = &service;
            std::signal(SIGINT, handle_signal);
            std::signal(SIGTERM, handle_signal);
            std::cerr << "serving " << sdir << " on http://" << shost << ":" << port << "\n";
            service.listen();
            g_service = nullptr;
            return 0;
        }
    } catch (const rlhd::Error& e) {
        std::cerr << "error (" << rlhd::to_string(e.kind()) << "): " << e.what() << "\n";
        return rlhd::exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
