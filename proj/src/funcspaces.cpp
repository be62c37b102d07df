#include "bispec/funcspaces.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <sstream>

namespace bispec {

namespace {

const char* family_name(Family f) { return f == Family::B ? "B" : "F"; }
const char* kind_name(SpaceKind k) { return k == SpaceKind::Classical ? "classical" : "nonclassical"; }
const char* flavor_name(Flavor f) { return f == Flavor::Mixed ? "mixed" : "ordinary"; }

// (sum a_j^q)^(1/q), max for q = inf.
double lq_combine(const std::vector<double>& a, double q) {
    if (std::isinf(q)) return a.empty() ? 0.0 : *std::max_element(a.begin(), a.end());
    double s = 0.0;
    for (double v : a) s += std::pow(v, q);
    return std::pow(s, 1.0 / q);
}

int covering_level(double radius) {
    int J = 0;
    while (std::ldexp(1.0, J - 1) < radius) ++J;
    return J;
}

// Weighted block: W_j b_j with W_j scalar (classical) or a per-node product.
GridValues weighted(const ProductSpace& ps, const SpaceParams& sp, const IPair& j, const GridValues& b) {
    if (sp.kind == SpaceKind::Classical) {
        const double e = sp.flavor == Flavor::Mixed ? j[0] * sp.s[0] + j[1] * sp.s[1] : j[0] * sp.s[0];
        return std::exp2(e) * b;
    }
    const Pair d = ps.d_pair();
    Pair g, r;
    if (sp.flavor == Flavor::Mixed) {
        g = {-sp.s[0] / d[0], -sp.s[1] / d[1]};
        r = {std::ldexp(1.0, -j[0]), std::ldexp(1.0, -j[1])};
    } else {
        // V(x, r) = V1(x1, r) V2(x2, r) with the total dimension d1 + d2.
        const double gg = -sp.s[0] / (d[0] + d[1]);
        g = {gg, gg};
        r = {std::ldexp(1.0, -j[0]), std::ldexp(1.0, -j[0])};
    }
    return volume_power(ps.m1(), r[0], g[0]).asDiagonal() * b * volume_power(ps.m2(), r[1], g[1]).asDiagonal();
}

}  // namespace

void SpaceParams::validate() const {
    if (!(p > 0.0) || !(q > 0.0)) throw ConfigError("space: p and q must be positive");
    if (family == Family::F && std::isinf(p)) throw ConfigError("space: Triebel-Lizorkin norms need p < inf");
    if (!std::isfinite(s[0]) || !std::isfinite(s[1])) throw ConfigError("space: s must be finite");
    if (J[0] > 40 || J[1] > 40) throw ConfigError("space: truncation J too large");
}

std::string SpaceParams::label() const {
    std::ostringstream os;
    os << family_name(family) << '/' << kind_name(kind) << '/' << flavor_name(flavor) << " s=";
    if (flavor == Flavor::Mixed)
        os << '(' << fmt_double(s[0]) << ',' << fmt_double(s[1]) << ')';
    else
        os << fmt_double(s[0]);
    os << " p=" << fmt_double(p) << " q=" << fmt_double(q);
    return os.str();
}

IPair resolve_levels(const ProductSpace& ps, const SpaceParams& sp) {
    if (sp.flavor == Flavor::Ordinary) {
        const int J = sp.J[0] >= 0 ? sp.J[0]
                                   : covering_level(std::hypot(ps.m1().band_radius(), ps.m2().band_radius()));
        return {J, J};
    }
    const IPair cover = covering_levels(ps);
    return {sp.J[0] >= 0 ? sp.J[0] : cover[0], sp.J[1] >= 0 ? sp.J[1] : cover[1]};
}

Decomposition::Decomposition(const CutoffSystem& cs, const CoefField& cf, const IPair& J, Flavor flavor)
    : ps_(cf.space_ptr()), flavor_(flavor), J_(J) {
    for (LPBlock& b : lp_blocks(cs, cf, J, flavor)) {
        if (b.field.coefs().cwiseAbs().maxCoeff() == 0.0) continue;
        j_.push_back(b.j);
        blocks_.push_back(synthesize_block(b.field));
    }
}

double Decomposition::norm(const SpaceParams& sp) const {
    sp.validate();
    if (sp.flavor != flavor_) throw ConfigError("norm: flavor differs from the decomposition");
    const IPair J = resolve_levels(*ps_, sp);
    if (J[0] > J_[0] || J[1] > J_[1]) throw ConfigError("norm: J exceeds the decomposition depth");
    const ProductSpace& ps = *ps_;
    if (sp.family == Family::B) {
        std::vector<double> a;
        for (std::size_t i = 0; i < blocks_.size(); ++i) {
            if (j_[i][0] > J[0] || j_[i][1] > J[1]) continue;
            a.push_back(grid_norm(ps, weighted(ps, sp, j_[i], blocks_[i]), sp.p));
        }
        return lq_combine(a, sp.q);
    }
    GridValues acc = GridValues::Zero(ps.rows(), ps.cols());
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        if (j_[i][0] > J[0] || j_[i][1] > J[1]) continue;
        const GridValues w = weighted(ps, sp, j_[i], blocks_[i]).cwiseAbs();
        if (std::isinf(sp.q))
            acc = acc.cwiseMax(w);
        else
            acc += w.array().pow(sp.q).matrix();
    }
    if (!std::isinf(sp.q)) acc = acc.array().pow(1.0 / sp.q).matrix();
    return grid_norm(ps, acc, sp.p);
}

double space_norm(const CutoffSystem& cs, const CoefField& cf, const SpaceParams& sp) {
    sp.validate();
    return Decomposition(cs, cf, resolve_levels(cf.space(), sp), sp.flavor).norm(sp);
}

double besov_norm(const CutoffSystem& cs, const CoefField& cf, const SpaceParams& sp) {
    if (sp.family != Family::B) throw ConfigError("besov_norm: family must be B");
    return space_norm(cs, cf, sp);
}

double tl_norm(const CutoffSystem& cs, const CoefField& cf, const SpaceParams& sp) {
    if (sp.family != Family::F) throw ConfigError("tl_norm: family must be F");
    return space_norm(cs, cf, sp);
}

double test_norm(const CoefField& cf, int m, int k, const ProductPoint& x0) {
    if (m < 0 || k < 0) throw ConfigError("test_norm: m and k must be nonnegative");
    const ProductSpace& ps = cf.space();
    const Eigen::VectorXd lam1 = ps.m1().eigenvalues(), lam2 = ps.m2().eigenvalues();
    GridValues best = GridValues::Zero(ps.rows(), ps.cols());
    Eigen::VectorXd p1 = Eigen::VectorXd::Ones(lam1.size());
    for (int a = 0; a <= m; ++a) {
        Eigen::VectorXd p2 = Eigen::VectorXd::Ones(lam2.size());
        for (int b = 0; b <= m; ++b) {
            const Eigen::MatrixXd c = p1.asDiagonal() * cf.coefs() * p2.asDiagonal();
            best = best.cwiseMax(synthesize(cf.with_coefs(c)).cwiseAbs());
            p2 = p2.cwiseProduct(lam2);
        }
        p1 = p1.cwiseProduct(lam1);
    }
    Eigen::VectorXd w1(ps.rows()), w2(ps.cols());
    for (int i = 0; i < ps.rows(); ++i) w1(i) = std::pow(1.0 + ps.m1().distance(ps.m1().nodes()(i), x0.x1), k);
    for (int i = 0; i < ps.cols(); ++i) w2(i) = std::pow(1.0 + ps.m2().distance(ps.m2().nodes()(i), x0.x2), k);
    return (w1.asDiagonal() * best * w2.asDiagonal()).maxCoeff();
}

std::vector<CoefField> random_test_set(const ProductSpacePtr& ps, int count, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<CoefField> out;
    for (int n = 0; n < count; ++n) {
        Eigen::MatrixXd c(ps->m1().band_size(), ps->m2().band_size());
        for (Eigen::Index k = 0; k < c.rows(); ++k)
            for (Eigen::Index l = 0; l < c.cols(); ++l) c(k, l) = u(rng) / ((1.0 + k) * (1.0 + l));
        out.emplace_back(ps, c);
    }
    return out;
}

std::vector<CoefField> rehost_refined(const std::vector<CoefField>& tests) {
    if (tests.empty()) return {};
    const auto fine = std::make_shared<const ProductSpace>(tests.front().space().refined());
    std::vector<CoefField> out;
    for (const CoefField& f : tests) out.emplace_back(fine, f.coefs());
    return out;
}

namespace {

void check_embedding_hypotheses(const ProductSpace& ps, const SpaceParams& src, const std::optional<SpaceParams>& dst,
                                VerificationReport& rep) {
    if (src.family != Family::B || src.flavor != Flavor::Mixed)
        throw ConfigError("embedding: source must be a mixed Besov space");
    if (!dst) {
        if (src.kind != SpaceKind::Classical) throw ConfigError("embedding into L^p: source must be classical");
        if (!(src.s[0] > 0.0 && src.s[1] > 0.0)) throw ConfigError("embedding into L^p: requires s > 0");
        return;
    }
    if (dst->family != Family::B || dst->flavor != Flavor::Mixed || dst->kind != src.kind)
        throw ConfigError("embedding: target must be a mixed Besov space of the same kind");
    if (!(src.p <= dst->p)) throw ConfigError("embedding: requires p <= r");
    if (!(src.q <= dst->q)) throw ConfigError("embedding: requires q <= tau");
    const Pair d = ps.d_pair();
    for (int i = 0; i < 2; ++i) {
        const double lhs = src.s[i] / d[i] - 1.0 / src.p;
        const double rhs = dst->s[i] / d[i] - 1.0 / dst->p;
        if (std::abs(lhs - rhs) > 1e-12) throw ConfigError("embedding: requires s/d - 1/p = s'/d - 1/r");
    }
    // The classical variant also needs non-collapsing factors (inf V(x, 1) > 0),
    // which holds for every compact model here.
    if (src.kind == SpaceKind::Classical) rep.note("classical variant relies on non-collapsing factors");
}

double embedding_constant(const CutoffSystem& cs, const std::vector<CoefField>& tests, const SpaceParams& src,
                          const std::optional<SpaceParams>& dst) {
    double c = 0.0;
    for (const CoefField& f : tests) {
        const ProductSpace& ps = f.space();
        IPair J = resolve_levels(ps, src);
        if (dst) {
            const IPair J2 = resolve_levels(ps, *dst);
            J = {std::max(J[0], J2[0]), std::max(J[1], J2[1])};
        }
        const Decomposition dec(cs, f, J, Flavor::Mixed);
        const double den = dec.norm(src);
        if (den == 0.0) continue;
        const double num = dst ? dec.norm(*dst) : grid_norm(ps, synthesize(f), src.p);
        c = std::max(c, num / den);
    }
    return c;
}

}  // namespace

VerificationReport embedding_check(const CutoffSystem& cs, const std::vector<CoefField>& tests,
                                   const SpaceParams& source, const std::optional<SpaceParams>& target) {
    if (tests.empty()) throw ConfigError("embedding: empty test set");
    source.validate();
    if (target) target->validate();
    VerificationReport rep;
    ReportTimer timer(rep);
    rep.check_name = "embedding";
    rep.anchor = target ? "besov-embedding" : "besov-into-lebesgue";
    rep.param("source", source.label());
    rep.param("target", target ? target->label() : "L^" + fmt_double(source.p));
    check_embedding_hypotheses(tests.front().space(), source, target, rep);
    const double c = embedding_constant(cs, tests, source, target);
    const double c_fine = embedding_constant(cs, rehost_refined(tests), source, target);
    rep.measured_constant = c;
    rep.refined_constant = c_fine;
    rep.require("c_emp", c, Relation::Finite);
    rep.require_stable("refinement_change", c, c_fine, 0.10);
    return rep;
}

namespace {

struct RatioBand {
    double lo = INFINITY, hi = 0.0;
    double constant() const { return std::max(hi, 1.0 / lo); }
    void add(double r) {
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
};

// Bands at J and J + (2, 2) from one deep decomposition per system.
std::pair<RatioBand, RatioBand> ratio_bands(const CutoffSystem& a, const CutoffSystem& b,
                                            const std::vector<CoefField>& tests, const SpaceParams& sp) {
    RatioBand base, deep;
    for (const CoefField& f : tests) {
        const IPair J = resolve_levels(f.space(), sp);
        const IPair J2{J[0] + 2, J[1] + 2};
        const Decomposition da(a, f, J2, sp.flavor), db(b, f, J2, sp.flavor);
        SpaceParams at = sp;
        at.J = J;
        const double nb = db.norm(at);
        if (nb > 0.0) base.add(da.norm(at) / nb);
        at.J = J2;
        const double nb2 = db.norm(at);
        if (nb2 > 0.0) deep.add(da.norm(at) / nb2);
    }
    return {base, deep};
}

}  // namespace

VerificationReport cutoff_independence_check(const CutoffSystem& a, const CutoffSystem& b,
                                             const std::vector<CoefField>& tests, const SpaceParams& sp) {
    if (tests.empty()) throw ConfigError("cutoff independence: empty test set");
    if (!a.norm_admissible() || !b.norm_admissible())
        throw ConfigError("cutoff independence: both systems must be norm-admissible");
    sp.validate();
    VerificationReport rep;
    ReportTimer timer(rep);
    rep.check_name = "cutoff_independence";
    rep.anchor = "cutoff-independence";
    rep.param("systems", a.name + " vs " + b.name);
    rep.param("space", sp.label());
    const auto [base, deep] = ratio_bands(a, b, tests, sp);
    const auto [fine, fine_deep] = ratio_bands(a, b, rehost_refined(tests), sp);
    (void)fine_deep;
    rep.record("ratio_lo", base.lo);
    rep.record("ratio_hi", base.hi);
    rep.record("ratio_lo_refined", fine.lo);
    rep.record("ratio_hi_refined", fine.hi);
    rep.measured_constant = base.constant();
    rep.refined_constant = fine.constant();
    rep.require("C", base.constant(), Relation::Finite);
    rep.require("ratio_lo_positive", base.lo, Relation::GreaterEq, 1e-300);
    rep.require_stable("J_extension_change", base.constant(), deep.constant(), 0.10);
    rep.require_stable("refinement_change", base.constant(), fine.constant(), 0.10);
    return rep;
}

void write_norm_table(const std::vector<NormRow>& rows, std::ostream& os) {
    os << "function_id,family,kind,flavor,s1,s2,p,q,J1,J2,value\n";
    for (const NormRow& r : rows) {
        const SpaceParams& sp = r.params;
        os << r.function_id << ',' << family_name(sp.family) << ',' << kind_name(sp.kind) << ','
           << flavor_name(sp.flavor) << ',' << fmt_double(sp.s[0]) << ','
           << (sp.flavor == Flavor::Mixed ? fmt_double(sp.s[1]) : std::string()) << ',' << fmt_double(sp.p) << ','
           << fmt_double(sp.q) << ',' << sp.J[0] << ',' << sp.J[1] << ',' << fmt_double(r.value) << '\n';
    }
}

}  // namespace bispec
