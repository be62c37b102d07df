#include "bispec/lpdecomp.hpp"

#include <algorithm>
#include <memory>

#include "bispec/hardy.hpp"
#include "bispec/smooth.hpp"

namespace bispec {

double CutoffSystem::level(int axis, int j, double t) const {
    return j == 0 ? phi0[axis](t) : phi[axis](std::ldexp(t, -j));
}

CutoffSystem make_partition_cutoffs() {
    CutoffSystem cs;
    cs.name = "partition";
    cs.kind = CutoffKind::Partition;
    auto p0 = [](double t) { return plateau(t); };
    auto p = [](double t) { return plateau(t) - plateau(2.0 * t); };
    cs.phi0 = {p0, p0};
    cs.phi = {p, p};
    cs.c_hat = admissibility_bound(cs);
    return cs;
}

CutoffSystem make_orthogonal_cutoffs() {
    CutoffSystem cs;
    cs.name = "orthogonal";
    cs.kind = CutoffKind::OrthogonalPartition;
    // cos^2 a(t) - cos^2 a(2t) is sin^2 a(2t) on [0, 1] and cos^2 a(t) on [1, 2].
    // cos(pi/2 s) is written as sin(pi/2 (1 - s)) so it vanishes exactly at s = 1.
    auto qcos = [](double s) { return std::sin(0.5 * kPi * (1.0 - s)); };
    auto p0 = [qcos](double t) { return qcos(smooth_step(std::abs(t) - 1.0)); };
    auto p = [qcos](double t) {
        const double u = std::abs(t);
        return u <= 1.0 ? std::sin(0.5 * kPi * smooth_step(2.0 * u - 1.0)) : qcos(smooth_step(u - 1.0));
    };
    cs.phi0 = {p0, p0};
    cs.phi = {p, p};
    cs.c_hat = admissibility_bound(cs);
    return cs;
}

double admissibility_bound(const CutoffSystem& cs) {
    constexpr int kGrid = 2000;
    double c = INFINITY;
    for (int axis = 0; axis < 2; ++axis) {
        for (int i = 0; i <= kGrid; ++i) {
            const double t0 = 5.0 / 3.0 * i / kGrid;
            const double t1 = 0.6 + (5.0 / 3.0 - 0.6) * i / kGrid;
            c = std::min({c, std::abs(cs.phi0[axis](t0)), std::abs(cs.phi[axis](t1))});
        }
    }
    return c;
}

double partition_defect(const CutoffSystem& cs, int levels, double t_max) {
    constexpr int kGrid = 4000;
    const bool squares = cs.kind == CutoffKind::OrthogonalPartition;
    double defect = 0.0;
    for (int axis = 0; axis < 2; ++axis) {
        for (int i = 0; i <= kGrid; ++i) {
            const double t = t_max * i / kGrid;
            double s = 0.0;
            for (int j = 0; j <= levels; ++j) {
                const double v = cs.level(axis, j, t);
                s += squares ? v * v : v;
            }
            defect = std::max(defect, std::abs(1.0 - s));
        }
    }
    return defect;
}

Symbol block_symbol(const CutoffSystem& cs, const IPair& j, Flavor flavor) {
    Symbol s;
    s.smoothness = {kSmoothOrder, kSmoothOrder};
    if (flavor == Flavor::Mixed) {
        s.name = cs.name + "_block_" + std::to_string(j[0]) + "_" + std::to_string(j[1]);
        s.eval = [cs, j](double l1, double l2) { return cs.level(0, j[0], l1) * cs.level(1, j[1], l2); };
        s.factors = {{[cs, j](double l) { return cs.level(0, j[0], l); }, [cs, j](double l) { return cs.level(1, j[1], l); }}};
        s.support_box = Pair{std::ldexp(2.0, j[0]), std::ldexp(2.0, j[1])};
    } else {
        s.name = cs.name + "_radial_" + std::to_string(j[0]);
        s.eval = [cs, j](double l1, double l2) { return cs.level(0, j[0], std::hypot(l1, l2)); };
        s.support_box = Pair{std::ldexp(2.0, j[0]), std::ldexp(2.0, j[0])};
    }
    return s;
}

std::vector<LPBlock> lp_blocks(const CutoffSystem& cs, const CoefField& cf, const IPair& J, Flavor flavor) {
    if (J[0] < 0 || J[1] < 0) throw ConfigError("lp_blocks: J must be nonnegative");
    std::vector<LPBlock> out;
    if (flavor == Flavor::Mixed) {
        for (int j1 = 0; j1 <= J[0]; ++j1)
            for (int j2 = 0; j2 <= J[1]; ++j2) {
                const IPair j{j1, j2};
                out.push_back({j, apply_symbol(block_symbol(cs, j, flavor), cf)});
            }
    } else {
        for (int j = 0; j <= std::max(J[0], J[1]); ++j) {
            out.push_back({{j, j}, apply_symbol(block_symbol(cs, {j, j}, flavor), cf)});
        }
    }
    return out;
}

GridValues synthesize_block(const CoefField& block) {
    const Eigen::MatrixXd& c = block.coefs();
    std::vector<int> rows, cols;
    for (Eigen::Index k = 0; k < c.rows(); ++k)
        if (c.row(k).cwiseAbs().maxCoeff() > 0.0) rows.push_back(static_cast<int>(k));
    for (Eigen::Index l = 0; l < c.cols(); ++l)
        if (c.col(l).cwiseAbs().maxCoeff() > 0.0) cols.push_back(static_cast<int>(l));
    const ProductSpace& ps = block.space();
    if (rows.empty()) return GridValues::Zero(ps.rows(), ps.cols());
    const Eigen::MatrixXd e1 = ps.m1().eigenfunctions()(rows, Eigen::all);
    const Eigen::MatrixXd e2 = ps.m2().eigenfunctions()(cols, Eigen::all);
    const Eigen::MatrixXd sub = c(rows, cols);
    return e1.transpose() * sub * e2;
}

double calderon_residual(const CutoffSystem& cs, const CoefField& cf, const IPair& J) {
    if (cs.kind != CutoffKind::Partition) throw ConfigError("calderon_residual: needs a partition cutoff system");
    const double norm = cf.l2_norm();
    if (norm == 0.0) return 0.0;
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(cf.coefs().rows(), cf.coefs().cols());
    for (const LPBlock& b : lp_blocks(cs, cf, J)) sum += b.field.coefs();
    return (cf.coefs() - sum).norm() / norm;
}

IPair covering_levels(const ProductSpace& ps) {
    IPair J{0, 0};
    for (int i = 0; i < 2; ++i) {
        const double R = ps.factor(i).band_radius();
        while (std::ldexp(1.0, J[i] - 1) < R) ++J[i];
    }
    return J;
}

void write_block_energies(const std::vector<LPBlock>& blocks, std::ostream& os) {
    os << "j1,j2,l2_norm\n";
    os.precision(15);
    for (const LPBlock& b : blocks) os << b.j[0] << ',' << b.j[1] << ',' << b.field.l2_norm() << '\n';
}

CoefField band_project(const CoefField& cf, const Pair& t) {
    if (!positive(t)) throw ConfigError("band_project: t must be positive componentwise");
    const Eigen::VectorXd& r1 = cf.space().m1().sqrt_eigenvalues();
    const Eigen::VectorXd& r2 = cf.space().m2().sqrt_eigenvalues();
    Eigen::MatrixXd c = cf.coefs();
    for (Eigen::Index k = 0; k < c.rows(); ++k)
        for (Eigen::Index l = 0; l < c.cols(); ++l)
            if (r1(k) > t[0] || r2(l) > t[1]) c(k, l) = 0.0;
    return cf.with_coefs(std::move(c));
}

bool in_spectral_space(const CoefField& cf, const Pair& t) { return band_project(cf, t).coefs() == cf.coefs(); }

double grid_norm(const ProductSpace& ps, const GridValues& f, double p) {
    if (std::isinf(p)) return f.cwiseAbs().maxCoeff();
    if (!(p > 0.0)) throw ConfigError("grid_norm: p must be positive");
    return std::pow(ps.product_weights().cwiseProduct(f.cwiseAbs().array().pow(p).matrix()).sum(), 1.0 / p);
}

Eigen::VectorXd volume_power(const SpectralModel& m, double r, double gamma) {
    Eigen::VectorXd v(m.node_count());
    for (int i = 0; i < m.node_count(); ++i) v(i) = std::pow(m.ball_volume(m.nodes()(i), r), gamma);
    return v;
}

void NikolskiParams::validate() const {
    if (!(p > 0.0) || !(q > 0.0)) throw ConfigError("nikolski: p and q must be positive");
    if (p > q) throw ConfigError("nikolski: requires p <= q");
    if (nu[0] < 0 || nu[1] < 0) throw ConfigError("nikolski: nu must be nonnegative");
}

namespace {

double inv(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }

void require_t_at_least_one(const Pair& t, const char* who) {
    if (t[0] < 1.0 || t[1] < 1.0) throw ConfigError(std::string(who) + ": t must lie in [1, inf)^2");
}

CoefField apply_power(const CoefField& g, const IPair& nu) {
    if (nu[0] == 0 && nu[1] == 0) return g;
    const Eigen::VectorXd l1 = g.space().m1().eigenvalues().array().pow(nu[0]);
    const Eigen::VectorXd l2 = g.space().m2().eigenvalues().array().pow(nu[1]);
    return g.with_coefs(l1.asDiagonal() * g.coefs() * l2.asDiagonal());
}

// One axis of a tensor-product test function: grid samples and eigenvalues.
struct AxisNorms {
    const SpectralModel* m;
    Eigen::VectorXd lhs_w;  // V(., 1/t)^gamma
    Eigen::VectorXd rhs_w;  // V(., 1/t)^(gamma + 1/q - 1/p)
};

double axis_norm(const SpectralModel& m, const Eigen::VectorXd& f, double p) {
    if (std::isinf(p)) return f.cwiseAbs().maxCoeff();
    return std::pow(m.weights().dot(f.cwiseAbs().array().pow(p).matrix()), 1.0 / p);
}

// Per-axis factor of the Nikolski ratio for a 1-D coefficient vector c.
double axis_ratio(const AxisNorms& ax, const Eigen::VectorXd& c, int nu, double t, const NikolskiParams& np) {
    const Eigen::VectorXd lam = ax.m->eigenvalues().array().pow(nu);
    const Eigen::VectorXd g = ax.m->eigenfunctions().transpose() * c;
    const Eigen::VectorXd lg = ax.m->eigenfunctions().transpose() * lam.cwiseProduct(c);
    const double lhs = axis_norm(*ax.m, ax.lhs_w.cwiseProduct(lg), np.q);
    const double rhs = std::pow(t, 2.0 * nu) * axis_norm(*ax.m, ax.rhs_w.cwiseProduct(g), np.p);
    return lhs / rhs;
}

// Thinned eigen-indices with sqrt-eigenvalue <= t, always including the last.
std::vector<int> thinned_modes(const SpectralModel& m, double t) {
    std::vector<int> all;
    for (int k = 0; k < m.band_size(); ++k)
        if (m.sqrt_eigenvalues()(k) <= t) all.push_back(k);
    std::vector<int> out;
    for (int idx : {0, 1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64, 96, 128, 192, 256}) {
        if (idx < static_cast<int>(all.size())) out.push_back(all[idx]);
    }
    if (!all.empty() && out.back() != all.back()) out.push_back(all.back());
    return out;
}

// Coefficients of the plateau-cut band kernel anchored at x on one axis.
Eigen::VectorXd axis_kernel(const SpectralModel& m, double t, double x) {
    Eigen::VectorXd c = m.basis_at(x);
    for (int k = 0; k < m.band_size(); ++k) c(k) *= plateau(2.0 * m.sqrt_eigenvalues()(k) / t);
    return c;
}

std::vector<Eigen::VectorXd> axis_tests(const SpectralModel& m, double t, const std::vector<double>& anchors) {
    std::vector<Eigen::VectorXd> out;
    for (int k : thinned_modes(m, t)) out.push_back(Eigen::VectorXd::Unit(m.band_size(), k));
    for (double x : anchors) out.push_back(axis_kernel(m, t, x));
    return out;
}

// Sweep constant: c(t) for t in {2^0..2^L}^2 via per-axis factorization;
// every test function is a tensor product, paired by index across axes.
Eigen::MatrixXd nikolski_table(const ProductSpace& ps, const NikolskiParams& np, int levels) {
    Eigen::MatrixXd table(levels + 1, levels + 1);
    std::array<std::vector<double>, 2> anchors;
    for (int i = 0; i < 2; ++i) {
        const SpectralModel& m = ps.factor(i);
        anchors[i] = {m.nodes()(0), m.nodes()(m.node_count() / 3)};
    }
    const double shift = inv(np.q) - inv(np.p);
    for (int a = 0; a <= levels; ++a) {
        for (int b = 0; b <= levels; ++b) {
            const Pair t{std::ldexp(1.0, a), std::ldexp(1.0, b)};
            std::array<std::vector<double>, 2> modes, kernels;
            for (int i = 0; i < 2; ++i) {
                const SpectralModel& m = ps.factor(i);
                AxisNorms ax{&m, volume_power(m, 1.0 / t[i], np.gamma[i]),
                             volume_power(m, 1.0 / t[i], np.gamma[i] + shift)};
                const auto tests = axis_tests(m, t[i], anchors[i]);
                const std::size_t n_modes = tests.size() - anchors[i].size();
                for (std::size_t k = 0; k < tests.size(); ++k) {
                    const double r = axis_ratio(ax, tests[k], np.nu[i], t[i], np);
                    (k < n_modes ? modes[i] : kernels[i]).push_back(r);
                }
            }
            // Modes pair freely; kernels pair by anchor.
            double c = 0.0;
            for (double r1 : modes[0])
                for (double r2 : modes[1]) c = std::max(c, r1 * r2);
            for (std::size_t k = 0; k < kernels[0].size(); ++k) c = std::max(c, kernels[0][k] * kernels[1][k]);
            table(a, b) = c;
        }
    }
    return table;
}

}  // namespace

double nikolski_ratio(const CoefField& g, const Pair& t, const NikolskiParams& np) {
    np.validate();
    require_t_at_least_one(t, "nikolski");
    if (!in_spectral_space(g, t)) throw ConfigError("nikolski: g is not band limited to [0, t1] x [0, t2]");
    const ProductSpace& ps = g.space();
    const double shift = inv(np.q) - inv(np.p);
    const Eigen::VectorXd l1 = volume_power(ps.m1(), 1.0 / t[0], np.gamma[0]);
    const Eigen::VectorXd l2 = volume_power(ps.m2(), 1.0 / t[1], np.gamma[1]);
    const Eigen::VectorXd r1 = volume_power(ps.m1(), 1.0 / t[0], np.gamma[0] + shift);
    const Eigen::VectorXd r2 = volume_power(ps.m2(), 1.0 / t[1], np.gamma[1] + shift);
    const GridValues lg = synthesize(apply_power(g, np.nu));
    const GridValues gg = synthesize(g);
    const double lhs = grid_norm(ps, l1.asDiagonal() * lg * l2.asDiagonal(), np.q);
    const double rhs = std::pow(t[0], 2.0 * np.nu[0]) * std::pow(t[1], 2.0 * np.nu[1]) *
                       grid_norm(ps, r1.asDiagonal() * gg * r2.asDiagonal(), np.p);
    if (rhs < 1e-300) throw ConfigError("nikolski: g vanishes");
    return lhs / rhs;
}

namespace {

void nikolski_params(VerificationReport& rep, const NikolskiParams& np) {
    rep.param("p", np.p);
    rep.param("q", np.q);
    rep.param("gamma", std::to_string(np.gamma[0]) + "x" + std::to_string(np.gamma[1]));
    rep.param("nu", std::to_string(np.nu[0]) + "x" + std::to_string(np.nu[1]));
}

}  // namespace

VerificationReport nikolski_check(const CoefField& g, const Pair& t, const NikolskiParams& np) {
    VerificationReport rep;
    ReportTimer timer(rep);
    rep.check_name = "nikolski_single";
    rep.anchor = "nikolski";
    nikolski_params(rep, np);
    rep.param("t", std::to_string(t[0]) + "x" + std::to_string(t[1]));
    rep.measured_constant = nikolski_ratio(g, t, np);
    rep.require("c_emp", rep.measured_constant, Relation::Finite);
    return rep;
}

std::vector<CoefField> nikolski_test_set(const ProductSpacePtr& ps, const Pair& t) {
    std::vector<CoefField> out;
    const auto k1 = thinned_modes(ps->m1(), t[0]);
    const auto k2 = thinned_modes(ps->m2(), t[1]);
    for (int a : k1)
        for (int b : k2) out.push_back(mode_field(ps, a, b));
    for (const ProductPoint x : {ps->node(0, 0), ps->node(ps->rows() / 3, ps->cols() / 3)}) {
        const Eigen::VectorXd c1 = axis_kernel(ps->m1(), t[0], x.x1);
        const Eigen::VectorXd c2 = axis_kernel(ps->m2(), t[1], x.x2);
        out.emplace_back(ps, c1 * c2.transpose());
    }
    return out;
}

VerificationReport nikolski_sweep(const ProductSpacePtr& ps, const NikolskiParams& np, int max_level) {
    np.validate();
    if (max_level < 1) throw ConfigError("nikolski_sweep: need at least two dyadic levels");
    VerificationReport rep;
    ReportTimer timer(rep);
    rep.check_name = "nikolski_sweep";
    rep.anchor = "nikolski";
    nikolski_params(rep, np);
    rep.param("t_levels", std::to_string(max_level + 1));

    const Eigen::MatrixXd table = nikolski_table(*ps, np, max_level);
    const Eigen::MatrixXd refined = nikolski_table(ps->refined(), np, max_level);
    const double c_all = table.maxCoeff();
    const double c_inner = table.topLeftCorner(max_level, max_level).maxCoeff();
    rep.measured_constant = c_all;
    rep.refined_constant = refined.maxCoeff();
    rep.record("c_min", table.minCoeff());
    rep.record("c_inner", c_inner);
    rep.record("envelope_growth", relative_change(c_all, c_inner));
    rep.require("c_emp", c_all, Relation::Finite);
    rep.require("envelope_growth", relative_change(c_all, c_inner), Relation::LessEq, 0.10);
    rep.require_stable("refinement_change", rep.measured_constant, rep.refined_constant, 0.10);
    return rep;
}

GridValues peetre_lhs(const ProductSpace& ps, const GridValues& g, const Pair& t, const PeetreParams& pp) {
    const int n1 = ps.rows(), n2 = ps.cols();
    const Eigen::VectorXd v1 = volume_power(ps.m1(), 1.0 / t[0], pp.gamma[0]);
    const Eigen::VectorXd v2 = volume_power(ps.m2(), 1.0 / t[1], pp.gamma[1]);
    const GridValues h = v1.asDiagonal() * g.cwiseAbs() * v2.asDiagonal();
    const Eigen::MatrixXd a1 =
        (1.0 + t[0] * ps.m1().node_distances().array()).pow(-pp.tau[0] / pp.r).matrix();
    const Eigen::MatrixXd a2 =
        (1.0 + t[1] * ps.m2().node_distances().array()).pow(-pp.tau[1] / pp.r).matrix();
    // The weight factorizes, so the sup splits into two one-axis sweeps.
    GridValues stage(n1, n2);
    for (int y1 = 0; y1 < n1; ++y1)
        for (int x2 = 0; x2 < n2; ++x2) stage(y1, x2) = h.row(y1).cwiseProduct(a2.row(x2)).maxCoeff();
    GridValues out(n1, n2);
    for (int x1 = 0; x1 < n1; ++x1)
        for (int x2 = 0; x2 < n2; ++x2) out(x1, x2) = a1.row(x1).transpose().cwiseProduct(stage.col(x2)).maxCoeff();
    return out;
}

namespace {

struct PeetreConstants {
    double right = 0.0;  // LHS* / M_r
    double left = 0.0;   // t^-2nu LHS*(L^nu g) / LHS*(g)
    long skipped = 0;
};

PeetreConstants peetre_constants(const std::vector<CoefField>& tests, const Pair& t, const PeetreParams& pp) {
    PeetreConstants c;
    for (const CoefField& g : tests) {
        const ProductSpace& ps = g.space();
        const GridValues gv = synthesize(g);
        const GridValues lhs = peetre_lhs(ps, gv, t, pp);
        const Eigen::VectorXd v1 = volume_power(ps.m1(), 1.0 / t[0], pp.gamma[0]);
        const Eigen::VectorXd v2 = volume_power(ps.m2(), 1.0 / t[1], pp.gamma[1]);
        const GridValues mx = strong_maximal(ps, v1.asDiagonal() * gv * v2.asDiagonal(), pp.r);
        const double floor = 1e-14 * mx.maxCoeff();
        for (Eigen::Index i = 0; i < lhs.size(); ++i) {
            if (mx(i) <= floor) {
                ++c.skipped;
                continue;
            }
            c.right = std::max(c.right, lhs(i) / mx(i));
        }
        if (pp.nu[0] != 0 || pp.nu[1] != 0) {
            const double scale = std::pow(t[0], -2.0 * pp.nu[0]) * std::pow(t[1], -2.0 * pp.nu[1]);
            const GridValues lhs_nu = peetre_lhs(ps, synthesize(apply_power(g, pp.nu)), t, pp);
            const double lfloor = 1e-14 * lhs.maxCoeff();
            for (Eigen::Index i = 0; i < lhs.size(); ++i) {
                if (lhs(i) <= lfloor) {
                    ++c.skipped;
                    continue;
                }
                c.left = std::max(c.left, scale * lhs_nu(i) / lhs(i));
            }
        }
    }
    return c;
}

}  // namespace

VerificationReport peetre_check(const std::vector<CoefField>& tests, const Pair& t, const PeetreParams& pp) {
    if (tests.empty()) throw ConfigError("peetre_check: empty test set");
    require_t_at_least_one(t, "peetre_check");
    if (!(pp.r > 0.0)) throw ConfigError("peetre_check: r must be positive");
    const ProductSpacePtr& ps = tests.front().space_ptr();
    const Pair d = ps->d_pair();
    if (pp.tau[0] <= 2.0 * d[0] || pp.tau[1] <= 2.0 * d[1]) {
        throw ConfigError("peetre_check: tau must exceed 2d componentwise");
    }
    for (const CoefField& g : tests) {
        if (!in_spectral_space(g, t)) throw ConfigError("peetre_check: test field is not band limited to t");
    }
    VerificationReport rep;
    ReportTimer timer(rep);
    rep.check_name = "peetre";
    rep.anchor = "peetre-maximal";
    rep.param("t", std::to_string(t[0]) + "x" + std::to_string(t[1]));
    rep.param("tau", std::to_string(pp.tau[0]) + "x" + std::to_string(pp.tau[1]));
    rep.param("r", pp.r);
    rep.param("nu", std::to_string(pp.nu[0]) + "x" + std::to_string(pp.nu[1]));

    const PeetreConstants base = peetre_constants(tests, t, pp);
    auto fine = std::make_shared<const ProductSpace>(ps->refined());
    std::vector<CoefField> moved;
    for (const CoefField& g : tests) moved.emplace_back(fine, g.coefs());
    const PeetreConstants ref = peetre_constants(moved, t, pp);

    rep.measured_constant = base.right;
    rep.refined_constant = ref.right;
    rep.record("skipped_points", static_cast<double>(base.skipped));
    rep.require("c_emp", base.right, Relation::Finite);
    rep.require_stable("refinement_change", base.right, ref.right, 0.10);
    if (pp.nu[0] != 0 || pp.nu[1] != 0) {
        rep.record("c_left", base.left);
        rep.record("c_left_refined", ref.left);
        rep.require("c_left", base.left, Relation::Finite);
        rep.require_stable("left_refinement_change", base.left, ref.left, 0.10);
    }
    return rep;
}

}  // namespace bispec
