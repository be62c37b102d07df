#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "bispec/lpdecomp.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path& scratch() {
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / "bispec_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(const std::string& args, const std::string& tag) {
    const fs::path out = scratch() / (tag + ".out"), err = scratch() / (tag + ".err");
    const std::string cmd = std::string(BISPEC_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return {code, slurp(out), slurp(err)};
}

fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path p = scratch() / name;
    std::ofstream(p) << text;
    return p;
}

}  // namespace

TEST_CASE("describe") {
    const Run r = run("describe", "describe");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("1,circle,32,128,1,63,31,") != std::string::npos);
    CHECK(r.out.find("2,jacobi,32,64,2,32,31.49") != std::string::npos);
    const Run j = run("--format json describe", "describe_json");
    REQUIRE(j.code == 0);
    const auto doc = nlohmann::json::parse(j.out);
    CHECK(doc["factors"].size() == 2);
    CHECK(doc["factors"][0]["band_radius"].get<double>() == 31.0);
}

TEST_CASE("config errors exit with 2") {
    const Run bad = run("--config " + write_config("bad.json", "{\n  \"seed\": 3,\n  \"factors\": [1,\n").string() + " describe",
                        "bad");
    CHECK(bad.code == 2);
    CHECK(bad.err.find("line 3") != std::string::npos);
    const Run unknown = run("--config " + write_config("unknown.json", R"({"sede": 3})").string() + " describe", "unknown");
    CHECK(unknown.code == 2);
    CHECK(unknown.err.find("unknown key 'sede'") != std::string::npos);
    const Run tol = run("--config " + write_config("tol.json", R"({"tolerances": {"markov": 0}})").string() + " describe",
                        "tol");
    CHECK(tol.code == 2);
    CHECK(run("--config /nonexistent.json describe", "missing").code == 2);
    CHECK(run("frobnicate", "badcmd").code == 2);
    CHECK(run("--help", "help").code == 0);
}

TEST_CASE("norm of a single mode") {
    const Run r = run("norm \"mode 3 5\"", "mode35");
    REQUIRE(r.code == 0);
    // Brute force: the block weights of e_3 (x) e_5 summed in l2.
    const auto c = bispec::make_circle(32, 128);
    const auto j = bispec::make_jacobi(32, 0.0, 0.0, 64);
    const bispec::CutoffSystem cs = bispec::make_partition_cutoffs();
    const double l1 = c.sqrt_eigenvalues()(3), l2 = j.sqrt_eigenvalues()(5);
    double brute = 0.0;
    for (int j1 = 0; j1 <= 6; ++j1)
        for (int j2 = 0; j2 <= 6; ++j2) brute += std::pow(cs.level(0, j1, l1) * cs.level(1, j2, l2), 2);
    std::istringstream lines(r.out);
    std::string header, row;
    std::getline(lines, header);
    std::getline(lines, row);
    CHECK(header == "function_id,family,kind,flavor,s1,s2,p,q,J1,J2,value");
    const double value = std::stod(row.substr(row.rfind(',') + 1));
    CHECK(value == doctest::Approx(std::sqrt(brute)).epsilon(1e-10));

    CHECK(run("norm \"mode 3 5\"", "mode35_again").out == r.out);
    const Run over = run("norm \"mode 99 0\"", "mode99");
    CHECK(over.code == 2);
    CHECK(over.err.find("band overflow") != std::string::npos);
    CHECK(run("norm \"wave 1\"", "badspec").code == 2);
    CHECK(run("norm \"mode 1 1\" --p 0", "badp").code == 2);
}

TEST_CASE("random norms are deterministic and honour flags") {
    const Run a = run("--seed 7 norm \"random 11 3\" --family F --s 1,-1 --p 1 --q inf", "rand_a");
    const Run b = run("--seed 7 norm \"random 11 3\" --family F --s 1,-1 --p 1 --q inf", "rand_b");
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(std::count(a.out.begin(), a.out.end(), '\n') == 4);
    CHECK(a.out.find("random:11:2,F,classical,mixed,1,-1,1,inf,") != std::string::npos);
}

TEST_CASE("verify writes byte-identical reports") {
    const std::string cfg = R"({
  "factors": [{"model": "circle", "n_modes": 16, "n_nodes": 64}, {"model": "circle", "n_modes": 16, "n_nodes": 64}],
  "suites": {"hardy": false, "multipliers": false},
  "test_set_size": 6
})";
    const fs::path c = write_config("small.json", cfg);
    const fs::path o1 = scratch() / "v1", o2 = scratch() / "v2";
    const Run r1 = run("--config " + c.string() + " --out " + o1.string() + " verify", "verify1");
    const Run r2 = run("--config " + c.string() + " --out " + o2.string() + " verify", "verify2");
    CHECK(r1.code == 0);
    CHECK(r1.out.find("ALL PASS") != std::string::npos);
    for (const char* f : {"geometry.csv", "calculus.csv", "lp.csv", "spaces.csv", "norms.csv", "summary.json"}) {
        REQUIRE(fs::exists(o1 / f));
        CHECK(slurp(o1 / f) == slurp(o2 / f));
    }
    CHECK(!fs::exists(o1 / "hardy.csv"));
    const auto summary = nlohmann::json::parse(slurp(o1 / "summary.json"));
    CHECK(summary["pass"].get<bool>());
    CHECK(run("--out " + (scratch() / "v3").string() + " verify --suite nope", "badsuite").code == 2);
}
