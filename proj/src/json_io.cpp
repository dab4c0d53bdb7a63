#include "rlhd/json_io.hpp"

#include <fstream>
#include <sstream>

#include "rlhd/error.hpp"

namespace rlhd {

namespace fs = std::filesystem;

namespace {

template <typename T>
T field(const json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigurationError(std::string("field '") + key + "': " + e.what());
    }
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

}  // namespace

json to_json(const ConfidenceInterval& ci) {
    return json{{"lower", ci.lower}, {"upper", ci.upper}, {"level", ci.level}, {"B", ci.replicates}};
}

ConfidenceInterval ci_from_json(const json& j) {
    return ConfidenceInterval{field<double>(j, "lower"), field<double>(j, "upper"), field<double>(j, "level"),
                              field<std::size_t>(j, "B")};
}

json to_json(const SobolEstimate& e) {
    json j{{"input", e.input + 1},
           {"kind", to_string(e.kind)},
           {"value", e.value},
           {"ci", e.ci ? to_json(*e.ci) : json(nullptr)},
           {"components", e.components},
           {"batches_used", e.batches_used},
           {"evaluations_charged", e.evaluations_charged}};
    if (e.clamped) j["clamped"] = true;
    return j;
}

SobolEstimate estimate_from_json(const json& j) {
    SobolEstimate e;
    const auto input = field<long long>(j, "input");
    if (input < 1) throw ConfigurationError("estimate input must be 1-based");
    e.input = static_cast<std::size_t>(input - 1);
    e.kind = parse_estimator_kind(field<std::string>(j, "kind"));
    e.value = field<double>(j, "value");
    if (j.contains("ci") && !j["ci"].is_null()) e.ci = ci_from_json(j["ci"]);
    e.components = j.value("components", std::vector<double>{});
    e.batches_used = j.value("batches_used", std::vector<std::string>{});
    e.evaluations_charged = j.value("evaluations_charged", std::size_t{0});
    e.clamped = j.value("clamped", false);
    return e;
}

json to_json(const MarginalDistribution& m) {
    json j{{"kind", to_string(m.kind())}, {"params", m.params()}};
    if (m.truncation()) j["truncation"] = {m.truncation()->lower, m.truncation()->upper};
    return j;
}

MarginalDistribution marginal_from_json(const json& j) {
    const DistributionKind kind = parse_distribution_kind(field<std::string>(j, "kind"));
    const auto params = field<std::vector<double>>(j, "params");
    std::optional<Truncation> trunc;
    if (j.contains("truncation") && !j["truncation"].is_null()) {
        const auto t = field<std::vector<double>>(j, "truncation");
        if (t.size() != 2) throw ConfigurationError("truncation needs [lower, upper]");
        trunc = Truncation{t[0], t[1]};
    }
    return MarginalDistribution::make(kind, params, trunc);
}

json to_json(const ProblemSpec& spec) {
    json inputs = json::array();
    for (const auto& in : spec.inputs) {
        json e = to_json(in.marginal);
        e["name"] = in.name;
        inputs.push_back(e);
    }
    json model = spec.model.kind == ModelBinding::Kind::builtin ? json{{"builtin", spec.model.target}}
                                                                : json{{"command", spec.model.target}};
    return json{{"name", spec.name}, {"inputs", inputs}, {"model", model}, {"N", spec.n}, {"seed", spec.seed}};
}

ProblemSpec problem_spec_from_json(const json& j) {
    if (!j.is_object()) throw ConfigurationError("problem spec must be a JSON object");
    ProblemSpec spec;
    spec.name = j.value("name", std::string{});
    if (!j.contains("model")) throw ConfigurationError("problem spec lacks 'model'");
    const json& model = j["model"];
    if (model.is_string()) {
        spec.model = ModelBinding{ModelBinding::Kind::builtin, model.get<std::string>()};
    } else if (model.is_object() && model.contains("builtin")) {
        spec.model = ModelBinding{ModelBinding::Kind::builtin, field<std::string>(model, "builtin")};
    } else if (model.is_object() && model.contains("command")) {
        spec.model = ModelBinding{ModelBinding::Kind::external, field<std::string>(model, "command")};
    } else {
        throw ConfigurationError("'model' must be a builtin id, {builtin} or {command}");
    }
    if (j.contains("inputs")) {
        for (const json& in : j["inputs"]) {
            InputSpec s{field<std::string>(in, "name"),
                        in.contains("kind") ? marginal_from_json(in) : MarginalDistribution::uniform(0.0, 1.0)};
            spec.inputs.push_back(std::move(s));
        }
    } else if (spec.model.kind == ModelBinding::Kind::builtin) {
        const BuiltinModel m = resolve_model(spec.model.target);
        for (std::size_t k = 0; k < m.dimension; ++k)
            spec.inputs.push_back(InputSpec{"x" + std::to_string(k + 1), MarginalDistribution::uniform(0.0, 1.0)});
    }
    if (spec.name.empty()) spec.name = spec.model.target;
    spec.n = j.value("N", j.value("n", std::size_t{200}));
    spec.seed = j.value("seed", std::uint64_t{0});
    spec.validate();
    return spec;
}

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigurationError("invalid JSON in " + path.string() + ": " + e.what());
    }
}

ProblemSpec load_problem_spec(const fs::path& path) {
    return problem_spec_from_json(read_json_file(path));
}

json to_json(const BudgetLedger& ledger) {
    json entries = json::array();
    for (const auto& e : ledger.entries())
        entries.push_back(
            {{"design_id", e.design_id}, {"evaluations", e.evaluations}, {"timestamp", e.timestamp}, {"reason", e.reason}});
    return json{{"total", ledger.total()}, {"entries", entries}};
}

BudgetLedger ledger_from_json(const json& j) {
    std::vector<LedgerEntry> entries;
    for (const json& e : j.at("entries"))
        entries.push_back(LedgerEntry{field<std::string>(e, "design_id"), field<std::size_t>(e, "evaluations"),
                                      e.value("timestamp", std::string{}), e.value("reason", std::string{})});
    BudgetLedger ledger;
    ledger.restore(std::move(entries));
    if (j.contains("total") && j["total"].get<std::size_t>() != ledger.total())
        throw InvariantError("ledger total does not equal the sum of its entries");
    return ledger;
}

json to_json(const BootstrapConfig& cfg) {
    return json{{"replicates", cfg.replicates}, {"level", cfg.level},   {"method", cfg.method},
                {"seed", cfg.seed},             {"stream", cfg.stream}, {"max_retries", cfg.max_retries}};
}

BootstrapConfig bootstrap_config_from_json(const json& j, BootstrapConfig cfg) {
    cfg.replicates = j.value("replicates", j.value("B", cfg.replicates));
    cfg.level = j.value("level", cfg.level);
    cfg.method = j.value("method", cfg.method);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.stream = j.value("stream", cfg.stream);
    cfg.max_retries = j.value("max_retries", cfg.max_retries);
    cfg.validate();
    return cfg;
}

json design_sidecar(const DesignMatrix& design, std::uint64_t seed) {
    json perms = json::array();
    for (const auto& p : design.column_levels) perms.push_back(p.values());
    json j{{"id", design.id},
           {"family", design.family_id},
           {"space", to_string(design.space)},
           {"seed", seed},
           {"base", 0},
           {"N", design.rows()},
           {"d", design.cols()},
           {"column_perms", perms}};
    if (design.jitter)
        j["jitter"] = {{"family", design.family_id},
                       {"seed", design.jitter->seed()},
                       {"N", design.jitter->n()},
                       {"d", design.jitter->d()}};
    else
        j["jitter"] = nullptr;
    if (design.derivation) {
        j["parent"] = design.derivation->parent_id;
        j["permutation"] = design.derivation->rows.values();
    } else {
        j["parent"] = nullptr;
        j["permutation"] = nullptr;
    }
    return j;
}

void export_design(const fs::path& dir, const std::string& stem, const DesignMatrix& design,
                   const std::vector<std::string>& names, std::uint64_t seed) {
    fs::create_directories(dir);
    write_file_atomic(dir / (stem + ".csv"), design_to_csv(design.points, names));
    write_file_atomic(dir / (stem + ".json"), design_sidecar(design, seed).dump(2) + "\n");
}

DesignMatrix import_design(const fs::path& csv, const fs::path& sidecar) {
    const json meta = read_json_file(sidecar);
    std::ifstream in(csv);
    if (!in) throw UsageError("cannot open " + csv.string());
    std::string line;
    std::getline(in, line);
    const std::size_t d = split_csv_line(line).size();
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != d) throw ConfigurationError("ragged design CSV " + csv.string());
        std::vector<double> r;
        for (const auto& c : cells) r.push_back(std::stod(c));
        rows.push_back(std::move(r));
    }
    DesignMatrix m;
    m.id = field<std::string>(meta, "id");
    m.family_id = meta.value("family", std::string{});
    m.space = meta.value("space", std::string{"unit"}) == "unit" ? Space::unit : Space::physical;
    m.points = Matrix(rows.size(), d);
    for (std::size_t k = 0; k < rows.size(); ++k)
        for (std::size_t c = 0; c < d; ++c) m.points(k, c) = rows[k][c];
    const long long base = meta.value("base", 1LL);
    for (const json& p : meta.at("column_perms")) {
        auto v = p.get<std::vector<long long>>();
        for (auto& x : v) x += 1 - base;
        m.column_levels.push_back(Permutation::from_one_based(v));
    }
    if (!meta["parent"].is_null()) {
        auto v = meta.at("permutation").get<std::vector<long long>>();
        for (auto& x : v) x += 1 - base;
        m.derivation = Derivation{meta["parent"].get<std::string>(), Permutation::from_one_based(v)};
    }
    return m;
}

}  // namespace rlhd
