#include "rlhd/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "rlhd/error.hpp"
#include "rlhd/rng.hpp"

namespace rlhd {

namespace fs = std::filesystem;

namespace {

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
    std::size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
    return text;
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out += c;
    }
    return out + "'";
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Rebuilds the root design of a view from the view's points.
DesignMatrix root_of(const DesignMatrix& view) {
    const Derivation& der = *view.derivation;
    DesignMatrix root;
    root.id = der.parent_id;
    root.family_id = view.family_id;
    root.space = view.space;
    root.points = Matrix(view.rows(), view.cols());
    for (std::size_t k = 0; k < view.rows(); ++k)
        for (std::size_t c = 0; c < view.cols(); ++c) root.points(der.rows[k], c) = view.points(k, c);
    const Permutation inv = der.rows.inverse();
    for (const Permutation& levels : view.column_levels) root.column_levels.push_back(compose(levels, inv));
    root.jitter = view.jitter;
    return root;
}

}  // namespace

std::string ModelBinding::identity() const {
    return (kind == Kind::builtin ? "builtin:" : "external:") + target;
}

std::vector<MarginalDistribution> ProblemSpec::marginals() const {
    std::vector<MarginalDistribution> out;
    for (const auto& in : inputs) out.push_back(in.marginal);
    return out;
}

std::vector<std::string> ProblemSpec::input_names() const {
    std::vector<std::string> out;
    for (const auto& in : inputs) out.push_back(in.name);
    return out;
}

void ProblemSpec::validate() const {
    if (inputs.empty()) throw ConfigurationError("problem needs at least one input");
    if (n < 2) throw ConfigurationError("problem needs N >= 2");
    if (n > kMaxDesignSize) throw ConfigurationError("design size exceeds " + std::to_string(kMaxDesignSize));
    std::set<std::string> names;
    for (const auto& in : inputs) {
        if (in.name.empty()) throw ConfigurationError("input names must be non-empty");
        if (!names.insert(in.name).second) throw ConfigurationError("duplicate input name '" + in.name + "'");
    }
    if (model.target.empty()) throw ConfigurationError("problem has no model binding");
    if (model.kind == ModelBinding::Kind::builtin) {
        const BuiltinModel m = resolve_model(model.target);
        if (m.dimension != inputs.size())
            throw ConfigurationError("model '" + m.id + "' takes " + std::to_string(m.dimension) + " inputs, spec lists " +
                                     std::to_string(inputs.size()));
    } else if (model.target.find("{input}") == std::string::npos || model.target.find("{output}") == std::string::npos) {
        throw ConfigurationError("external command template needs {input} and {output} placeholders");
    }
}

ProblemSpec builtin_problem(const std::string& model_id, std::size_t n, std::uint64_t seed) {
    const BuiltinModel m = resolve_model(model_id);
    ProblemSpec spec;
    spec.name = model_id;
    for (std::size_t j = 0; j < m.dimension; ++j)
        spec.inputs.push_back(InputSpec{"x" + std::to_string(j + 1), MarginalDistribution::uniform(0.0, 1.0)});
    spec.model = ModelBinding{ModelBinding::Kind::builtin, model_id};
    spec.n = n;
    spec.seed = seed;
    spec.validate();
    return spec;
}

void BudgetLedger::charge(std::string design_id, std::size_t evaluations, std::string reason) {
    entries_.push_back(LedgerEntry{std::move(design_id), evaluations, utc_timestamp(), std::move(reason)});
    total_ += evaluations;
}

void BudgetLedger::restore(std::vector<LedgerEntry> entries) {
    entries_ = std::move(entries);
    total_ = 0;
    for (const auto& e : entries_) total_ += e.evaluations;
}

std::optional<std::vector<double>> MemoryCache::get(const std::string& key) {
    std::lock_guard lock(mutex_);
    auto it = store_.find(key);
    if (it == store_.end()) return std::nullopt;
    return it->second;
}

void MemoryCache::put(const std::string& key, const std::vector<double>& outputs) {
    std::lock_guard lock(mutex_);
    store_[key] = outputs;
}

DirectoryCache::DirectoryCache(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

std::optional<std::vector<double>> DirectoryCache::get(const std::string& key) {
    const fs::path path = dir_ / (key + ".json");
    std::ifstream in(path);
    if (!in) return std::nullopt;
    try {
        const nlohmann::json j = nlohmann::json::parse(in);
        return j.at("outputs").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigurationError("corrupt cached batch " + path.string() + ": " + e.what());
    }
}

void DirectoryCache::put(const std::string& key, const std::vector<double>& outputs) {
    nlohmann::json j{{"key", key}, {"outputs", outputs}};
    write_file_atomic(dir_ / (key + ".json"), j.dump() + "\n");
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigurationError("cannot write " + tmp.string());
        out << contents;
        if (!out) throw ConfigurationError("failed writing " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string design_to_csv(const Matrix& points, const std::vector<std::string>& names) {
    std::ostringstream out;
    for (std::size_t c = 0; c < names.size(); ++c) out << (c ? "," : "") << names[c];
    out << "\n";
    for (std::size_t k = 0; k < points.rows(); ++k) {
        for (std::size_t c = 0; c < points.cols(); ++c) out << (c ? "," : "") << format_double(points(k, c));
        out << "\n";
    }
    return out.str();
}

std::vector<double> external_bridge(const std::string& command_template, const fs::path& input_csv,
                                    const fs::path& output_path, const Matrix& physical_points,
                                    const std::vector<std::string>& names) {
    write_file_atomic(input_csv, design_to_csv(physical_points, names));
    std::error_code ec;
    fs::remove(output_path, ec);
    std::string command = replace_all(command_template, "{input}", shell_quote(input_csv.string()));
    command = replace_all(command, "{output}", shell_quote(output_path.string()));
    const int status = std::system(command.c_str());
    if (status != 0)
        throw EvaluationError("external command failed with status " + std::to_string(status) + ": " + command);
    std::ifstream in(output_path);
    if (!in) throw EvaluationError("external command produced no output file " + output_path.string());

    std::vector<double> outputs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        char* end = nullptr;
        const double v = std::strtod(line.c_str(), &end);
        if (end == line.c_str() || line.find_first_not_of(" \t", end - line.c_str()) != std::string::npos) {
            if (outputs.empty() && line_no == 1) continue;  // header line
            throw EvaluationError("unparsable output at row " + std::to_string(outputs.size() + 1) + ": '" + line + "'");
        }
        if (!std::isfinite(v))
            throw EvaluationError("non-finite output at row " + std::to_string(outputs.size() + 1));
        outputs.push_back(v);
    }
    if (outputs.size() != physical_points.rows())
        throw ProtocolError("external command returned " + std::to_string(outputs.size()) + " rows, expected " +
                            std::to_string(physical_points.rows()));
    return outputs;
}

Runner::Runner(ProblemSpec spec, std::shared_ptr<BatchCache> cache, fs::path scratch_dir)
    : spec_(std::move(spec)), cache_(std::move(cache)), scratch_dir_(std::move(scratch_dir)) {
    spec_.validate();
    if (!cache_) cache_ = std::make_shared<MemoryCache>();
    if (spec_.model.kind == ModelBinding::Kind::builtin) builtin_ = resolve_model(spec_.model.target);
    if (scratch_dir_.empty()) scratch_dir_ = fs::temp_directory_path() / "rlhd-runner";
}

std::string Runner::cache_key(const DesignMatrix& root) const {
    std::uint64_t h = fnv1a(root.id.data(), root.id.size());
    const std::string binding = spec_.model.identity();
    h = fnv1a(binding.data(), binding.size(), h);
    for (const auto& in : spec_.inputs) {
        const std::string kind = to_string(in.marginal.kind());
        h = fnv1a(kind.data(), kind.size(), h);
        h = fnv1a(in.marginal.params().data(), in.marginal.params().size() * sizeof(double), h);
        if (in.marginal.truncation()) h = fnv1a(&*in.marginal.truncation(), sizeof(Truncation), h);
    }
    const std::vector<double>& pts = root.points.data();
    h = fnv1a(pts.data(), pts.size() * sizeof(double), h);
    const std::uint8_t space = root.space == Space::unit ? 0 : 1;
    h = fnv1a(&space, 1, h);
    return hex64(h);
}

std::vector<double> Runner::simulate(const DesignMatrix& root) {
    if (root.cols() != spec_.dimension())
        throw ConfigurationError("design has " + std::to_string(root.cols()) + " columns, problem has " +
                                 std::to_string(spec_.dimension()) + " inputs");
    const DesignMatrix physical = root.space == Space::unit ? transform_design(root, spec_.marginals()) : root;
    std::vector<double> outputs(root.rows());
    if (builtin_) {
        for (std::size_t k = 0; k < root.rows(); ++k) {
            const double y = builtin_->evaluate(physical.points.row(k));
            if (!std::isfinite(y))
                throw EvaluationError("model '" + builtin_->id + "' returned a non-finite value at row " +
                                      std::to_string(k + 1));
            outputs[k] = y;
        }
        return outputs;
    }
    fs::create_directories(scratch_dir_);
    const std::string stem = hex64(fnv1a(root.id.data(), root.id.size()));
    return external_bridge(spec_.model.target, scratch_dir_ / (stem + "-in.csv"), scratch_dir_ / (stem + "-out.txt"),
                           physical.points, spec_.input_names());
}

SimulationBatch Runner::evaluate_design(const DesignMatrix& design, const std::string& reason) {
    const DesignMatrix root = design.is_view() ? root_of(design) : design;
    const std::string key = cache_key(root);
    std::vector<double> outputs;
    if (auto hit = cache_->get(key)) {
        outputs = std::move(*hit);
        if (outputs.size() != root.rows())
            throw InvariantError("cached batch for '" + root.id + "' has the wrong length");
    } else {
        outputs = simulate(root);
        cache_->put(key, outputs);
        ledger_.charge(root.id, outputs.size(), reason.empty() ? "evaluate " + root.id : reason);
    }
    SimulationBatch batch{root.id, root.id, spec_.model.identity(), std::move(outputs)};
    if (design.is_view()) return reorder_outputs(batch, design.derivation->rows, design.id);
    return batch;
}

}  // namespace rlhd
