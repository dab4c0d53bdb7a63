#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rlhd/design.hpp"
#include "rlhd/json_io.hpp"

namespace rlhd::testing {

json load_golden(const std::string& name);

/// Jitter with a distinct, recognisable value per (column, level).
JitterArray labelled_jitter(std::size_t n, std::size_t d);

/// The 8 x 2 family with the worked-example permutations and labelled jitter.
RlhdFamily worked_example_family();

/// Decodes a numeric cell back to "<centre>+U'_{c,L}" (1-based labels), or "?" when the
/// value is not a stratum centre plus that stratum's own jitter.
std::string symbolic_cell(double value, std::size_t column, const JitterArray& jitter);
std::vector<std::vector<std::string>> symbolic(const DesignMatrix& design);
std::vector<std::vector<std::string>> golden_matrix(const json& golden, const std::string& key);

class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

private:
    std::filesystem::path path_;
};

}  // namespace rlhd::testing
