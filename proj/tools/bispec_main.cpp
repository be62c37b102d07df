#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "cli_core.hpp"

using namespace bispec;
using namespace bispec::cli;
using nlohmann::json;

namespace {

Pair parse_pair(const std::string& text) {
    std::istringstream is(text);
    std::string a, b;
    if (!std::getline(is, a, ',') || !std::getline(is, b)) {
        const double v = std::stod(text);
        return {v, v};
    }
    return {std::stod(a), std::stod(b)};
}

double parse_exponent(const std::string& text) {
    if (text == "inf" || text == "infinity") return INFINITY;
    return std::stod(text);
}

struct NormOptions {
    std::string function;
    std::string cutoffs = "partition";
    std::optional<std::string> family, kind, flavor, s, p, q, J;
};

std::vector<SpaceParams> norm_spaces(const RunConfig& cfg, const NormOptions& o) {
    if (!o.family && !o.kind && !o.flavor && !o.s && !o.p && !o.q && !o.J) return cfg.spaces;
    SpaceParams sp;
    try {
        if (o.family) {
            if (*o.family == "F") sp.family = Family::F;
            else if (*o.family != "B") throw ConfigError("--family: expected B or F");
        }
        if (o.kind) {
            if (*o.kind == "nonclassical") sp.kind = SpaceKind::Nonclassical;
            else if (*o.kind != "classical") throw ConfigError("--kind: expected classical or nonclassical");
        }
        if (o.flavor) {
            if (*o.flavor == "ordinary") sp.flavor = Flavor::Ordinary;
            else if (*o.flavor != "mixed") throw ConfigError("--flavor: expected mixed or ordinary");
        }
        if (o.s) sp.s = parse_pair(*o.s);
        if (o.p) sp.p = parse_exponent(*o.p);
        if (o.q) sp.q = parse_exponent(*o.q);
        if (o.J) {
            const Pair j = parse_pair(*o.J);
            sp.J = {int(j[0]), int(j[1])};
        }
    } catch (const std::invalid_argument& e) {
        if (dynamic_cast<const ConfigError*>(&e)) throw;
        throw ConfigError(std::string("bad numeric option: ") + e.what());
    }
    sp.validate();
    return {sp};
}

int cmd_describe(const RunConfig& cfg, const std::string& format) {
    const json j = describe(cfg);
    if (format == "json") {
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    std::cout << "factor,name,n_modes,n_nodes,d,band_size,band_radius,doubling_c0,d_est\n";
    for (std::size_t i = 0; i < j["factors"].size(); ++i) {
        const json& f = j["factors"][i];
        std::cout << i + 1 << ',' << f["name"].get<std::string>() << ',' << f["n_modes"].get<int>() << ','
                  << f["n_nodes"].get<int>() << ',' << fmt_double(f["d"].get<double>()) << ','
                  << f["band_size"].get<int>() << ',' << fmt_double(f["band_radius"].get<double>()) << ','
                  << fmt_double(f["doubling_c0"].get<double>()) << ',' << fmt_double(f["d_est"].get<double>()) << "\n";
    }
    return 0;
}

int cmd_norm(const RunConfig& cfg, const NormOptions& o, const std::string& format) {
    const ProductSpacePtr ps = build_space(cfg);
    const CutoffSystem cs = make_cutoffs(o.cutoffs);
    const auto functions = parse_function(o.function, ps);
    const auto spaces = norm_spaces(cfg, o);
    std::vector<NormRow> rows;
    for (const auto& [id, f] : functions)
        for (SpaceParams sp : spaces) {
            sp.J = resolve_levels(*ps, sp);
            rows.push_back({id, sp, space_norm(cs, f, sp)});
        }
    if (format == "json") {
        json out = json::array();
        for (const NormRow& r : rows)
            out.push_back({{"function_id", r.function_id}, {"space", r.params.label()}, {"value", fmt_double(r.value)}});
        std::cout << out.dump(2) << "\n";
    } else {
        write_norm_table(rows, std::cout);
    }
    return 0;
}

int cmd_verify(const RunConfig& cfg, const std::string& suite, const std::string& format) {
    std::vector<std::string> suites;
    if (suite == "all") {
        for (const std::string& s : suite_names())
            if (cfg.suites.at(s)) suites.push_back(s);
    } else {
        if (std::find(suite_names().begin(), suite_names().end(), suite) == suite_names().end())
            throw ConfigError("unknown suite '" + suite + "'");
        suites.push_back(suite);
    }
    std::filesystem::create_directories(cfg.out_dir);
    json summary;
    summary["config"] = {{"seed", cfg.seed}};
    summary["suites"] = json::object();
    bool all_pass = true;
    for (const std::string& s : suites) {
        std::map<std::string, std::string> tables;
        std::vector<VerificationReport> reports;
        try {
            reports = run_suite(s, cfg, tables);
        } catch (const ConfigError& e) {
            throw ConfigError("suite " + s + ": " + e.what());
        }
        std::ofstream csv(std::filesystem::path(cfg.out_dir) / (s + ".csv"));
        csv << VerificationReport::csv_header() << "\n";
        json js = json::array();
        bool suite_pass = true;
        for (const VerificationReport& r : reports) {
            csv << r.csv_row() << "\n";
            js.push_back(r.to_json());
            const bool ok = r.informational || r.pass();
            suite_pass = suite_pass && ok;
            const char* tag = r.informational ? "INFO" : (r.pass() ? "PASS" : "FAIL");
            std::cout << tag << "  " << s << "  " << r.check_name << " [" << r.anchor
                      << "] c=" << fmt_double(r.measured_constant) << "\n";
            std::cerr << "  " << r.check_name << " " << r.runtime_s << " s\n";
        }
        for (const auto& [name, text] : tables) std::ofstream(std::filesystem::path(cfg.out_dir) / (name + ".csv")) << text;
        if (format == "json") std::ofstream(std::filesystem::path(cfg.out_dir) / (s + ".json")) << js.dump(2) << "\n";
        summary["suites"][s] = {{"pass", suite_pass}, {"reports", js}};
        all_pass = all_pass && suite_pass;
    }
    summary["pass"] = all_pass;
    std::ofstream(std::filesystem::path(cfg.out_dir) / "summary.json") << summary.dump(2) << "\n";
    std::cout << (all_pass ? "ALL PASS" : "FAILURES") << "\n";
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral analysis on products of doubling spaces: function-space norms and verification suites"};
    app.require_subcommand(1);
    std::string config_path, out_dir, format = "csv";
    std::optional<unsigned> seed;
    int threads = 0;
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--out", out_dir, "output directory (overrides the config)");
    app.add_option("--seed", seed, "random seed (overrides the config)");
    app.add_option("--threads", threads, "worker threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
    app.add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));

    CLI::App* describe_cmd = app.add_subcommand("describe", "model dimensions, doubling fits and band radii");
    CLI::App* norm_cmd = app.add_subcommand("norm", "Besov / Triebel-Lizorkin norms of a function");
    NormOptions no;
    norm_cmd->add_option("function", no.function, "\"mode k l\", \"random SEED N\" or \"file PATH\"")->required();
    norm_cmd->add_option("--cutoffs", no.cutoffs, "partition | orthogonal");
    norm_cmd->add_option("--family", no.family, "B | F");
    norm_cmd->add_option("--kind", no.kind, "classical | nonclassical");
    norm_cmd->add_option("--flavor", no.flavor, "mixed | ordinary");
    norm_cmd->add_option("--s", no.s, "smoothness s1,s2");
    norm_cmd->add_option("--p", no.p, "integrability (inf allowed)");
    norm_cmd->add_option("--q", no.q, "summability (inf allowed)");
    norm_cmd->add_option("--J", no.J, "levels J1,J2 (default: covering levels)");
    CLI::App* verify_cmd = app.add_subcommand("verify", "run verification suites");
    std::string suite = "all";
    verify_cmd->add_option("--suite", suite, "geometry | calculus | lp | spaces | hardy | multipliers | all");
    for (CLI::App* sub : {describe_cmd, norm_cmd, verify_cmd}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (seed) cfg.seed = *seed;
        if (threads > 0) set_num_threads(threads);
        if (*describe_cmd) return cmd_describe(cfg, format);
        if (*norm_cmd) return cmd_norm(cfg, no, format);
        return cmd_verify(cfg, suite, format);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const BandOverflow& e) {
        std::cerr << "band overflow: " << e.what() << "\n";
        return 2;
    }
}
