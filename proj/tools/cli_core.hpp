#pragma once

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bispec/coordspace.hpp"
#include "bispec/funcspaces.hpp"
#include "bispec/hardy.hpp"

namespace bispec::cli {

struct Tolerances {
    double markov = 1e-8;       // |heat kernel mass - 1|
    double kernel_mass = 1e-8;  // |kernel mass - F(0, 0)|
    double calderon = 1e-10;    // reproducing-formula residual
};

struct RunConfig {
    std::array<ModelRecipe, 2> factors;
    std::vector<std::string> cutoffs{"partition", "orthogonal"};
    std::vector<SpaceParams> spaces;
    MaximalParams maximal = MaximalParams::defaults();
    std::map<std::string, bool> suites;  // toggles for "all"
    Tolerances tol;
    std::string out_dir = "bispec_out";
    unsigned seed = 20240611;
    int test_set_size = 20;
    int hardy_test_set_size = 4;

    RunConfig();
};

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"geometry", "calculus", "lp", "spaces", "hardy", "multipliers"};
    return names;
}

/// Parses one JSON document; unknown keys and bad values raise ConfigError
/// (parse errors carry line and column).
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

ProductSpacePtr build_space(const RunConfig& cfg);
CutoffSystem make_cutoffs(const std::string& name);

/// "mode k l", "random SEED N" (N fields) or "file PATH" (CSV grid values).
std::vector<std::pair<std::string, CoefField>> parse_function(const std::string& spec, const ProductSpacePtr& ps);

/// Model dimensions, doubling fits and band radii.
nlohmann::json describe(const RunConfig& cfg);

/// Reports of one suite; extra tables (name -> CSV text) go to `tables`.
std::vector<VerificationReport> run_suite(const std::string& suite, const RunConfig& cfg,
                                          std::map<std::string, std::string>& tables);

}  // namespace bispec::cli
