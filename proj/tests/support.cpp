#include "support.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <unistd.h>

namespace rlhd::testing {

json load_golden(const std::string& name) {
    return read_json_file(std::filesystem::path(RLHD_GOLDEN_DIR) / name);
}

JitterArray labelled_jitter(std::size_t n, std::size_t d) {
    std::vector<double> values(n * d);
    for (std::size_t c = 0; c < d; ++c)
        for (std::size_t l = 0; l < n; ++l)
            values[c * n + l] = -0.45 + 0.9 * static_cast<double>(c * n + l + 1) / static_cast<double>(n * d + 1);
    return JitterArray::from_values(n, d, std::move(values), 7);
}

RlhdFamily worked_example_family() {
    const json g = load_golden("worked_example.json");
    auto perms = [&](const char* key) {
        std::vector<Permutation> out;
        for (const json& p : g.at(key)) out.push_back(Permutation::from_one_based(p.get<std::vector<long long>>()));
        return out;
    };
    auto jitter = std::make_shared<const JitterArray>(labelled_jitter(8, 2));
    return RlhdFamily::from_parts(jitter, perms("x_perms"), perms("w_perms"), "worked", 7);
}

std::string symbolic_cell(double value, std::size_t column, const JitterArray& jitter) {
    const double n = static_cast<double>(jitter.n());
    const double scaled = value * n;
    if (!(scaled > 0.0 && scaled < n)) return "?";
    const auto level = static_cast<std::size_t>(std::floor(scaled));
    const double centre = (static_cast<double>(level) + 0.5) / n;
    if (std::abs(value - centre - jitter(column, level) / n) > 1e-14) return "?";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f+U'_{%zu,%zu}", centre, column + 1, level + 1);
    return buf;
}

std::vector<std::vector<std::string>> symbolic(const DesignMatrix& design) {
    std::vector<std::vector<std::string>> out(design.rows());
    for (std::size_t k = 0; k < design.rows(); ++k)
        for (std::size_t c = 0; c < design.cols(); ++c)
            out[k].push_back(symbolic_cell(design.points(k, c), c, *design.jitter));
    return out;
}

std::vector<std::vector<std::string>> golden_matrix(const json& golden, const std::string& key) {
    return golden.at(key).get<std::vector<std::vector<std::string>>>();
}

TempDir::TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("rlhd-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

}  // namespace rlhd::testing
