#include "checks.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "bispec/multipliers.hpp"

namespace bispec::cli {

VerificationReport doubling_report(const SpectralModel& m) {
    VerificationReport rep;
    ReportTimer timer(rep);
    rep.check_name = "doubling_fit";
    rep.anchor = "doubling";
    rep.param("model", m.name());
    const DoublingFit fit = doubling_fit(m);
    rep.measured_constant = fit.c0;
    rep.record("c0", fit.c0);
    rep.record("d_est", fit.d_est);
    rep.record("d", m.dim_d());
    rep.require("c0", fit.c0, Relation::Finite);
    const ModelRecipe& r = m.recipe();
    const bool exact = r.kind == ModelKind::Circle || (r.alpha == -0.5 && r.beta == -0.5);
    if (exact) {
        rep.require("d_est_error", std::abs(fit.d_est - m.dim_d()), Relation::LessEq, 0.1);
    } else {
        rep.require("d_est_excess", fit.d_est - m.dim_d(), Relation::LessEq, 0.1);
        rep.note("weighted interval: d is an upper bound for the fitted exponent");
    }
    return rep;
}

namespace {

std::vector<ProductPoint> anchors(const ProductSpace& ps) {
    return {ps.node(0, 0), ps.node(ps.rows() / 3, ps.cols() / 2), ps.node(ps.rows() - 1, ps.cols() - 1)};
}

}  // namespace

VerificationReport markov_report(const ProductSpace& ps, double tol) {
    VerificationReport rep;
    ReportTimer timer(rep);
    rep.check_name = "heat_kernel_mass";
    rep.anchor = "heat-markov";
    rep.param("t", "{0.02} u 2^-5..2^2 per axis");
    std::vector<double> ts{0.02};
    for (int a = -5; a <= 2; ++a) ts.push_back(std::ldexp(1.0, a));
    double worst = 0.0;
    bool flagged = false;
    for (const ProductPoint& x : anchors(ps))
        for (double t1 : ts)
            for (double t2 : ts) {
                const KernelSlice k = heat_kernel(ps, {t1, t2}, x);
                worst = std::max(worst, std::abs(k.mass(ps) - 1.0));
                flagged = flagged || k.truncation_flag;
            }
    rep.measured_constant = worst;
    rep.require("max_mass_defect", worst, Relation::LessEq, tol);
    if (flagged) rep.note("band truncation flagged at the smallest t");
    return rep;
}

VerificationReport kernel_mass_report(const ProductSpace& ps, double tol) {
    VerificationReport rep;
    ReportTimer timer(rep);
    rep.check_name = "kernel_mass";
    rep.anchor = "kernel-mass";
    double worst = 0.0;
    for (const Symbol& F : {gaussian_symbol(), bump_symbol()}) {
        double w = 0.0;
        for (const Pair& delta : {Pair{1.0, 1.0}, Pair{0.25, 0.5}})
            for (const ProductPoint& x : anchors(ps))
                w = std::max(w, std::abs(kernel_of_symbol(ps, F, delta, x).mass(ps) - F(0.0, 0.0)));
        rep.record("defect_" + F.name, w);
        worst = std::max(worst, w);
    }
    rep.measured_constant = worst;
    rep.require("max_mass_defect", worst, Relation::LessEq, tol);
    return rep;
}

VerificationReport projector_algebra_report(const ProductSpace& ps, int pairs, unsigned seed) {
    VerificationReport rep;
    ReportTimer timer(rep);
    rep.check_name = "projector_algebra";
    rep.anchor = "projector-algebra";
    rep.param("pairs", double(pairs));
    std::mt19937 rng(seed);
    const double l1 = ps.m1().eigenvalues().maxCoeff() * 1.1, l2 = ps.m2().eigenvalues().maxCoeff() * 1.1;
    std::uniform_real_distribution<double> u1(0.0, l1), u2(0.0, l2);
    std::uniform_int_distribution<int> count(1, 3);
    auto random_union = [&] {
        RectUnion r;
        const int n = count(rng);
        for (int i = 0; i < n; ++i) {
            const double a = u1(rng), b = u1(rng), c = u2(rng), d = u2(rng);
            r.rects.push_back({std::min(a, b), std::max(a, b), std::min(c, d), std::max(c, d)});
        }
        return r;
    };
    int idem = 0, inter = 0;
    for (int i = 0; i < pairs; ++i) {
        const RectUnion S = random_union(), R = random_union();
        const SpectralProjector es = spectral_projector(ps, S), er = spectral_projector(ps, R);
        idem += !(es.then(es) == es);
        inter += !(es.then(er) == spectral_projector(ps, S.intersect(R)));
    }
    rep.measured_constant = idem + inter;
    rep.require("idempotence_failures", idem, Relation::LessEq, 0.0);
    rep.require("intersection_failures", inter, Relation::LessEq, 0.0);
    return rep;
}

VerificationReport calderon_report(const CutoffSystem& cs, const std::vector<CoefField>& tests, double tol) {
    if (tests.empty()) throw ConfigError("calderon: empty test set");
    VerificationReport rep;
    ReportTimer timer(rep);
    rep.check_name = "calderon_reproducing";
    rep.anchor = "reproducing-formula";
    const IPair J = covering_levels(tests.front().space());
    rep.param("J", std::to_string(J[0]) + "x" + std::to_string(J[1]));
    rep.param("functions", double(tests.size()));
    double worst = 0.0;
    for (const CoefField& f : tests) worst = std::max(worst, calderon_residual(cs, f, J));
    rep.measured_constant = worst;
    rep.require("max_residual", worst, Relation::LessEq, tol);
    return rep;
}

VerificationReport lifting_inverse_report(const std::vector<CoefField>& tests, const Pair& tau) {
    VerificationReport rep;
    ReportTimer timer(rep);
    rep.check_name = "lifting_inverse";
    rep.anchor = "lifting";
    rep.param("tau1", tau[0]);
    rep.param("tau2", tau[1]);
    double worst = 0.0;
    for (const CoefField& f : tests) {
        const Eigen::MatrixXd back = lifting(lifting(f, tau), {-tau[0], -tau[1]}).coefs();
        for (Eigen::Index i = 0; i < back.size(); ++i) {
            const double c = f.coefs()(i);
            if (c != 0.0) worst = std::max(worst, std::abs(back(i) - c) / std::abs(c));
        }
    }
    rep.measured_constant = worst;
    // Reciprocal weights: four pow roundings and four products, a few ulps per coefficient.
    rep.require("max_relative_error", worst, Relation::LessEq, 1e-15);
    return rep;
}

}  // namespace bispec::cli
