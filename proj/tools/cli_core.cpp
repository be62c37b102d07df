#include "cli_core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "bispec/multipliers.hpp"
#include "bispec/product.hpp"
#include "checks.hpp"

namespace bispec::cli {

using nlohmann::json;

RunConfig::RunConfig() {
    factors[0] = {ModelKind::Circle, 32, 128, 0.0, 0.0};
    factors[1] = {ModelKind::Jacobi, 32, 64, 0.0, 0.0};
    spaces.push_back(SpaceParams{});
    for (const std::string& s : suite_names()) suites[s] = true;
}

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

double number(const json& v, const std::string& where) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "inf" || s == "infinity") return INFINITY;
    }
    throw ConfigError(where + ": expected a number or \"inf\"");
}

int integer(const json& v, const std::string& where) {
    if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
    return v.get<int>();
}

Pair pair(const json& v, const std::string& where) {
    if (v.is_array() && v.size() == 2) return {number(v[0], where), number(v[1], where)};
    throw ConfigError(where + ": expected a two-element array");
}

ModelRecipe parse_factor(const json& j, int index) {
    const std::string where = "factors[" + std::to_string(index) + "]";
    reject_unknown(j, {"model", "n_modes", "n_nodes", "alpha", "beta"}, where);
    ModelRecipe r;
    const std::string model = j.value("model", "circle");
    if (model == "circle") {
        r.kind = ModelKind::Circle;
        r.n_modes = 32;
        r.n_nodes = 128;
    } else if (model == "jacobi") {
        r.kind = ModelKind::Jacobi;
        r.n_modes = 32;
        r.n_nodes = 64;
    } else {
        throw ConfigError(where + ": model must be \"circle\" or \"jacobi\"");
    }
    if (j.contains("n_modes")) r.n_modes = integer(j["n_modes"], where + ".n_modes");
    if (j.contains("n_nodes")) r.n_nodes = integer(j["n_nodes"], where + ".n_nodes");
    if (j.contains("alpha")) r.alpha = number(j["alpha"], where + ".alpha");
    if (j.contains("beta")) r.beta = number(j["beta"], where + ".beta");
    if (r.kind == ModelKind::Circle && (j.contains("alpha") || j.contains("beta")))
        throw ConfigError(where + ": alpha/beta apply to jacobi models only");
    return r;
}

SpaceParams parse_space(const json& j, int index) {
    const std::string where = "spaces[" + std::to_string(index) + "]";
    reject_unknown(j, {"family", "kind", "flavor", "s", "p", "q", "J"}, where);
    SpaceParams sp;
    const std::string fam = j.value("family", "B");
    if (fam == "B")
        sp.family = Family::B;
    else if (fam == "F")
        sp.family = Family::F;
    else
        throw ConfigError(where + ".family: expected \"B\" or \"F\"");
    const std::string kind = j.value("kind", "classical");
    if (kind == "classical")
        sp.kind = SpaceKind::Classical;
    else if (kind == "nonclassical")
        sp.kind = SpaceKind::Nonclassical;
    else
        throw ConfigError(where + ".kind: expected \"classical\" or \"nonclassical\"");
    const std::string flavor = j.value("flavor", "mixed");
    if (flavor == "mixed")
        sp.flavor = Flavor::Mixed;
    else if (flavor == "ordinary")
        sp.flavor = Flavor::Ordinary;
    else
        throw ConfigError(where + ".flavor: expected \"mixed\" or \"ordinary\"");
    if (j.contains("s")) {
        if (j["s"].is_array()) {
            sp.s = pair(j["s"], where + ".s");
        } else {
            const double s = number(j["s"], where + ".s");
            sp.s = {s, s};
        }
    }
    if (j.contains("p")) sp.p = number(j["p"], where + ".p");
    if (j.contains("q")) sp.q = number(j["q"], where + ".q");
    if (j.contains("J")) {
        if (!j["J"].is_array() || j["J"].size() != 2) throw ConfigError(where + ".J: expected [J1, J2]");
        sp.J = {integer(j["J"][0], where + ".J"), integer(j["J"][1], where + ".J")};
    }
    try {
        sp.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(where + ": " + e.what());
    }
    return sp;
}

std::string line_context(const std::string& text, std::size_t byte) {
    byte = std::min(byte, text.size());
    std::size_t line = 1, start = 0;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            start = i + 1;
        }
    }
    const std::size_t end = text.find('\n', start);
    std::ostringstream os;
    os << "line " << line << ", column " << (byte >= start ? byte - start : 0) << ": "
       << text.substr(start, end == std::string::npos ? std::string::npos : end - start);
    return os.str();
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error at " + line_context(text, e.byte) + "\n  " + e.what());
    }
    RunConfig cfg;
    reject_unknown(j, {"factors", "cutoffs", "spaces", "maximal", "suites", "tolerances", "out", "seed",
                       "test_set_size", "hardy_test_set_size"},
                   "config");
    if (j.contains("factors")) {
        const json& f = j["factors"];
        if (!f.is_array() || f.size() != 2) throw ConfigError("factors: expected two factor objects");
        for (int i = 0; i < 2; ++i) cfg.factors[i] = parse_factor(f[i], i);
    }
    if (j.contains("cutoffs")) {
        const json& c = j["cutoffs"];
        if (!c.is_array() || c.size() != 2) throw ConfigError("cutoffs: expected two system names");
        cfg.cutoffs.clear();
        for (const json& n : c) {
            if (!n.is_string()) throw ConfigError("cutoffs: expected strings");
            cfg.cutoffs.push_back(n.get<std::string>());
            make_cutoffs(cfg.cutoffs.back());
        }
    }
    if (j.contains("spaces")) {
        if (!j["spaces"].is_array() || j["spaces"].empty()) throw ConfigError("spaces: expected a nonempty array");
        cfg.spaces.clear();
        for (std::size_t i = 0; i < j["spaces"].size(); ++i) cfg.spaces.push_back(parse_space(j["spaces"][i], int(i)));
    }
    if (j.contains("maximal")) {
        const json& m = j["maximal"];
        reject_unknown(m, {"t_axis", "a", "gamma"}, "maximal");
        if (m.contains("t_axis")) {
            if (!m["t_axis"].is_array()) throw ConfigError("maximal.t_axis: expected an array");
            cfg.maximal.t_axis.clear();
            for (const json& t : m["t_axis"]) cfg.maximal.t_axis.push_back(number(t, "maximal.t_axis"));
        }
        if (m.contains("a")) cfg.maximal.a = pair(m["a"], "maximal.a");
        if (m.contains("gamma")) cfg.maximal.gamma = pair(m["gamma"], "maximal.gamma");
        cfg.maximal.validate();
    }
    if (j.contains("suites")) {
        std::set<std::string> names(suite_names().begin(), suite_names().end());
        reject_unknown(j["suites"], names, "suites");
        for (const auto& [k, v] : j["suites"].items()) {
            if (!v.is_boolean()) throw ConfigError("suites." + k + ": expected true or false");
            cfg.suites[k] = v.get<bool>();
        }
    }
    if (j.contains("tolerances")) {
        const json& t = j["tolerances"];
        reject_unknown(t, {"markov", "kernel_mass", "calderon"}, "tolerances");
        if (t.contains("markov")) cfg.tol.markov = number(t["markov"], "tolerances.markov");
        if (t.contains("kernel_mass")) cfg.tol.kernel_mass = number(t["kernel_mass"], "tolerances.kernel_mass");
        if (t.contains("calderon")) cfg.tol.calderon = number(t["calderon"], "tolerances.calderon");
        for (double v : {cfg.tol.markov, cfg.tol.kernel_mass, cfg.tol.calderon})
            if (!(v > 0.0) || std::isinf(v)) throw ConfigError("tolerances: must be positive and finite");
    }
    if (j.contains("out")) {
        if (!j["out"].is_string()) throw ConfigError("out: expected a path string");
        cfg.out_dir = j["out"].get<std::string>();
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw ConfigError("seed: expected a nonnegative integer");
        cfg.seed = j["seed"].get<unsigned>();
    }
    if (j.contains("test_set_size")) cfg.test_set_size = integer(j["test_set_size"], "test_set_size");
    if (j.contains("hardy_test_set_size"))
        cfg.hardy_test_set_size = integer(j["hardy_test_set_size"], "hardy_test_set_size");
    if (cfg.test_set_size < 1 || cfg.hardy_test_set_size < 1) throw ConfigError("test set sizes must be positive");
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

ProductSpacePtr build_space(const RunConfig& cfg) {
    return make_product(make_model(cfg.factors[0]), make_model(cfg.factors[1]));
}

CutoffSystem make_cutoffs(const std::string& name) {
    if (name == "partition") return make_partition_cutoffs();
    if (name == "orthogonal") return make_orthogonal_cutoffs();
    throw ConfigError("unknown cutoff system '" + name + "' (partition | orthogonal)");
}

std::vector<std::pair<std::string, CoefField>> parse_function(const std::string& spec, const ProductSpacePtr& ps) {
    std::istringstream is(spec);
    std::string kind;
    is >> kind;
    std::vector<std::pair<std::string, CoefField>> out;
    if (kind == "mode") {
        int k = -1, l = -1;
        if (!(is >> k >> l) || k < 0 || l < 0) throw ConfigError("function: expected \"mode k l\" with k, l >= 0");
        out.emplace_back("mode:" + std::to_string(k) + ":" + std::to_string(l), mode_field(ps, k, l));
    } else if (kind == "random") {
        long long seed = -1;
        int n = 0;
        if (!(is >> seed >> n) || seed < 0 || n < 1) throw ConfigError("function: expected \"random SEED N\"");
        const auto fields = random_test_set(ps, n, static_cast<unsigned>(seed));
        for (int i = 0; i < n; ++i)
            out.emplace_back("random:" + std::to_string(seed) + ":" + std::to_string(i), fields[i]);
    } else if (kind == "file") {
        std::string path;
        std::getline(is >> std::ws, path);
        std::ifstream in(path);
        if (!in) throw ConfigError("function: cannot read " + path);
        GridValues g(ps->rows(), ps->cols());
        std::string line;
        int row = 0;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            if (row >= ps->rows()) throw ConfigError("function file: too many rows");
            std::istringstream ls(line);
            std::string cell;
            int col = 0;
            while (std::getline(ls, cell, ',')) {
                if (col >= ps->cols()) throw ConfigError("function file: too many columns in row " + std::to_string(row));
                try {
                    g(row, col++) = std::stod(cell);
                } catch (const std::exception&) {
                    throw ConfigError("function file: bad number '" + cell + "'");
                }
            }
            if (col != ps->cols()) throw ConfigError("function file: row " + std::to_string(row) + " is short");
            ++row;
        }
        if (row != ps->rows()) throw ConfigError("function file: expected " + std::to_string(ps->rows()) + " rows");
        out.emplace_back("file:" + path, analyze(ps, g));
    } else {
        throw ConfigError("function: expected \"mode k l\", \"random SEED N\" or \"file PATH\"");
    }
    return out;
}

json describe(const RunConfig& cfg) {
    const ProductSpacePtr ps = build_space(cfg);
    json j;
    j["factors"] = json::array();
    for (int i = 0; i < 2; ++i) {
        const SpectralModel& m = ps->factor(i);
        const DoublingFit fit = doubling_fit(m);
        j["factors"].push_back({{"name", m.name()},
                                {"n_modes", m.recipe().n_modes},
                                {"n_nodes", m.node_count()},
                                {"d", m.dim_d()},
                                {"band_size", m.band_size()},
                                {"band_radius", m.band_radius()},
                                {"doubling_c0", fit.c0},
                                {"d_est", fit.d_est}});
    }
    j["d"] = {ps->d_pair()[0], ps->d_pair()[1]};
    j["grid"] = {ps->rows(), ps->cols()};
    const IPair J = covering_levels(*ps);
    j["covering_levels"] = {J[0], J[1]};
    return j;
}

namespace {

SpaceParams sp_of(Family f, Pair s, double p, double q, SpaceKind k = SpaceKind::Classical) {
    SpaceParams sp;
    sp.family = f;
    sp.s = s;
    sp.p = p;
    sp.q = q;
    sp.kind = k;
    return sp;
}

std::vector<VerificationReport> geometry_suite(const ProductSpace& ps) {
    std::vector<VerificationReport> out;
    for (int i = 0; i < 2; ++i) out.push_back(doubling_report(ps.factor(i)));
    DKernelParams dk;
    dk.delta = {0.5, 0.5};
    dk.sigma = {2 * ps.d_pair()[0] + 1, 2 * ps.d_pair()[1] + 1};
    for (VerificationReport& r : verify_integral_estimates(ps, dk)) out.push_back(std::move(r));
    out.push_back(verify_rect_doubling(ps));
    out.push_back(verify_center_change(ps));
    return out;
}

std::vector<VerificationReport> calculus_suite(const ProductSpace& ps, const RunConfig& cfg) {
    std::vector<VerificationReport> out;
    out.push_back(markov_report(ps, cfg.tol.markov));
    out.push_back(kernel_mass_report(ps, cfg.tol.kernel_mass));
    out.push_back(projector_algebra_report(ps, 200, cfg.seed));
    const int n = ps.m1().recipe().n_modes;
    out.push_back(localization_fit(ps, bump_symbol(std::max(1.0, n / 4.0)), {1.0, 1.0}, {3, 3}));
    if (ps.m1().recipe().kind == ModelKind::Circle) {
        // The kernel tail beyond the propagation radius is a band-truncation
        // effect; narrow circle bands are widened to 96 modes for this check.
        const ModelRecipe& r = ps.m1().recipe();
        if (r.n_modes >= 96) {
            out.push_back(finite_speed_check(ps, fejer_symbol(1.0), {0.3, 1.0}));
        } else {
            const auto wide = make_product(make_circle(96, 384), ps.m2());
            VerificationReport rep = finite_speed_check(*wide, fejer_symbol(1.0), {0.3, 1.0});
            rep.note("first factor widened to circle(96, 384)");
            out.push_back(std::move(rep));
        }
    }
    return out;
}

std::vector<VerificationReport> lp_suite(const ProductSpacePtr& ps, const RunConfig& cfg, const CutoffSystem& cs) {
    std::vector<VerificationReport> out;
    out.push_back(calderon_report(cs, random_test_set(ps, cfg.test_set_size, cfg.seed), cfg.tol.calderon));
    for (auto [p, q] : {std::pair<double, double>{1.0, INFINITY}, {1.0, 2.0}, {2.0, INFINITY}})
        for (IPair nu : {IPair{0, 0}, IPair{1, 1}}) out.push_back(nikolski_sweep(ps, NikolskiParams{p, q, {0, 0}, nu}));
    const Pair t{4.0, 8.0};
    const auto tests = nikolski_test_set(ps, t);
    const Pair tau{2 * ps->d_pair()[0] + 1, 2 * ps->d_pair()[1] + 1};
    for (double r : {0.5, 1.0}) out.push_back(peetre_check(tests, t, PeetreParams{{0, 0}, tau, r, {0, 0}}));
    return out;
}

std::vector<VerificationReport> spaces_suite(const ProductSpacePtr& ps, const RunConfig& cfg, const CutoffSystem& a,
                                             const CutoffSystem& b, std::map<std::string, std::string>& tables) {
    std::vector<VerificationReport> out;
    const auto tests = random_test_set(ps, cfg.test_set_size, cfg.seed);
    for (Family f : {Family::B, Family::F})
        for (const SpaceParams& sp : {sp_of(f, {0, 0}, 2, 2), sp_of(f, {1, 1}, 2, 1), sp_of(f, {1, -1}, 1, INFINITY)})
            out.push_back(cutoff_independence_check(a, b, tests, sp));
    // s_i = d_i balances s_i / d_i - 1 / p against the target (0, inf).
    out.push_back(embedding_check(a, tests, sp_of(Family::B, ps->d_pair(), 1, 1, SpaceKind::Nonclassical),
                                  sp_of(Family::B, {0, 0}, INFINITY, 2, SpaceKind::Nonclassical)));
    out.push_back(embedding_check(a, tests, sp_of(Family::B, {1, 1}, 2, 2), std::nullopt));

    std::vector<NormRow> rows;
    for (std::size_t i = 0; i < tests.size(); ++i) {
        for (SpaceParams sp : cfg.spaces) {
            sp.J = resolve_levels(*ps, sp);
            rows.push_back({"random:" + std::to_string(cfg.seed) + ":" + std::to_string(i), sp, space_norm(a, tests[i], sp)});
        }
    }
    std::ostringstream os;
    write_norm_table(rows, os);
    tables["norms"] = os.str();
    return out;
}

std::vector<VerificationReport> hardy_suite(const ProductSpacePtr& ps, const RunConfig& cfg) {
    std::vector<VerificationReport> out;
    const auto tests = random_test_set(ps, cfg.hardy_test_set_size, cfg.seed);
    out.push_back(maximal_ordering_report(tests, cfg.maximal));
    out.push_back(hp_lebesgue_report(tests, cfg.maximal));
    for (double p : {1.0, 2.0}) out.push_back(hp_equivalence_report(tests, p, cfg.maximal));
    std::vector<std::vector<GridValues>> families;
    const auto pool = random_test_set(ps, 40, cfg.seed + 1);
    for (int f = 0; f < 10; ++f) {
        std::vector<GridValues> fam;
        for (int j = 0; j < 4; ++j) fam.push_back(synthesize(pool[4 * f + j]));
        families.push_back(std::move(fam));
    }
    out.push_back(fefferman_stein_report(*ps, families, 2.0, 1.0));
    return out;
}

std::vector<VerificationReport> multipliers_suite(const ProductSpacePtr& ps, const RunConfig& cfg,
                                                  const CutoffSystem& cs) {
    std::vector<VerificationReport> out;
    const Pair range{2.0 * ps->m1().band_radius(), 2.0 * ps->m2().band_radius()};
    out.push_back(multiplier_admissible_check(m_tau_symbol({1, -1}), {1, -1}, {3, 3}, range));
    const auto tests = random_test_set(ps, cfg.test_set_size, cfg.seed);
    // Smallest integer kappa above the boundedness threshold of the target.
    auto kappa_for = [&](const SpaceParams& target) {
        const Pair k = kappa_threshold(*ps, target);
        return IPair{int(std::floor(k[0])) + 1, int(std::floor(k[1])) + 1};
    };
    for (Family f : {Family::B, Family::F}) {
        const SpaceParams target = sp_of(f, {0, 0}, 2, 2);
        const MultiplierSpec mt = make_multiplier(m_tau_symbol({1, 1}), {1, 1}, kappa_for(target), *ps);
        out.push_back(multiplier_boundedness_harness(mt, cs, tests, target));
    }
    const SpaceParams nc = sp_of(Family::B, {1, 0}, 2, 2, SpaceKind::Nonclassical);
    const MultiplierSpec bump = make_multiplier(bump_symbol(4.0), {0, 0}, kappa_for(nc), *ps);
    out.push_back(multiplier_boundedness_harness(bump, cs, tests, nc));
    out.push_back(lifting_inverse_report(tests, {1, -1}));
    for (Family f : {Family::B, Family::F}) out.push_back(lifting_equivalence_report(cs, tests, {1, -1}, sp_of(f, {0.5, 0.5}, 2, 2)));
    return out;
}

}  // namespace

std::vector<VerificationReport> run_suite(const std::string& suite, const RunConfig& cfg,
                                          std::map<std::string, std::string>& tables) {
    const ProductSpacePtr ps = build_space(cfg);
    const CutoffSystem a = make_cutoffs(cfg.cutoffs[0]);
    const CutoffSystem b = make_cutoffs(cfg.cutoffs[1]);
    if (suite == "geometry") return geometry_suite(*ps);
    if (suite == "calculus") return calculus_suite(*ps, cfg);
    if (suite == "lp") return lp_suite(ps, cfg, a.kind == CutoffKind::Partition ? a : b);
    if (suite == "spaces") return spaces_suite(ps, cfg, a, b, tables);
    if (suite == "hardy") return hardy_suite(ps, cfg);
    if (suite == "multipliers") return multipliers_suite(ps, cfg, a.kind == CutoffKind::Partition ? a : b);
    throw ConfigError("unknown suite '" + suite + "'");
}

}  // namespace bispec::cli
