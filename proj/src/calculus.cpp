#include "bispec/calculus.hpp"

#include <algorithm>
#include <sstream>

#include "bispec/smooth.hpp"

namespace bispec {

CoefField::CoefField(ProductSpacePtr space, Eigen::MatrixXd coefs) : space_(std::move(space)), coefs_(std::move(coefs)) {
    if (coefs_.rows() != space_->m1().band_size() || coefs_.cols() != space_->m2().band_size()) {
        throw ConfigError("CoefField: coefficient shape does not match the eigen band");
    }
}

CoefField operator+(const CoefField& a, const CoefField& b) { return a.with_coefs(a.coefs_ + b.coefs_); }
CoefField operator-(const CoefField& a, const CoefField& b) { return a.with_coefs(a.coefs_ - b.coefs_); }
CoefField operator*(double s, const CoefField& a) { return a.with_coefs(s * a.coefs_); }

CoefField mode_field(const ProductSpacePtr& ps, int k, int l) {
    if (k < 0 || l < 0 || k >= ps->m1().band_size() || l >= ps->m2().band_size()) {
        throw BandOverflow("mode (" + std::to_string(k) + ", " + std::to_string(l) + ") lies outside the band " +
                           std::to_string(ps->m1().band_size()) + " x " + std::to_string(ps->m2().band_size()));
    }
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(ps->m1().band_size(), ps->m2().band_size());
    c(k, l) = 1.0;
    return {ps, std::move(c)};
}

CoefField analyze(const ProductSpacePtr& ps, const GridValues& f) {
    if (f.rows() != ps->rows() || f.cols() != ps->cols()) throw ConfigError("analyze: grid shape mismatch");
    const auto& m1 = ps->m1();
    const auto& m2 = ps->m2();
    Eigen::MatrixXd weighted = m1.weights().asDiagonal() * f * m2.weights().asDiagonal();
    return {ps, m1.eigenfunctions() * weighted * m2.eigenfunctions().transpose()};
}

GridValues synthesize(const CoefField& cf) {
    const auto& ps = cf.space();
    return ps.m1().eigenfunctions().transpose() * cf.coefs() * ps.m2().eigenfunctions();
}

Symbol one_symbol() {
    Symbol s;
    s.name = "one";
    s.eval = [](double, double) { return 1.0; };
    s.factors = {{[](double) { return 1.0; }, [](double) { return 1.0; }}};
    s.smoothness = {kSmoothOrder, kSmoothOrder};
    return s;
}

Symbol gaussian_symbol() {
    Symbol s;
    s.name = "gaussian";
    s.eval = [](double a, double b) { return std::exp(-a * a - b * b); };
    s.factors = {{[](double a) { return std::exp(-a * a); }, [](double b) { return std::exp(-b * b); }}};
    s.smoothness = {kSmoothOrder, kSmoothOrder};
    s.decay_r = std::numeric_limits<double>::infinity();
    return s;
}

Symbol heat_symbol(const Pair& t) {
    Symbol s;
    s.name = "heat";
    s.eval = [t](double a, double b) { return std::exp(-t[0] * a * a - t[1] * b * b); };
    s.factors = {{[t](double a) { return std::exp(-t[0] * a * a); }, [t](double b) { return std::exp(-t[1] * b * b); }}};
    s.smoothness = {kSmoothOrder, kSmoothOrder};
    s.decay_r = std::numeric_limits<double>::infinity();
    return s;
}

Symbol bump_symbol(double scale) {
    Symbol s;
    s.name = "bump";
    s.eval = [scale](double a, double b) { return plateau(a / scale) * plateau(b / scale); };
    s.factors = {{[scale](double a) { return plateau(a / scale); }, [scale](double b) { return plateau(b / scale); }}};
    s.smoothness = {kSmoothOrder, kSmoothOrder};
    s.support_box = Pair{2.0 * scale, 2.0 * scale};
    return s;
}

Symbol fejer_symbol(double a, int order) {
    if (a <= 0.0 || order < 1) throw ConfigError("fejer_symbol: need A > 0 and order >= 1");
    Symbol s;
    s.name = "fejer";
    const double scale = a / order;
    s.eval = [scale, order](double l1, double l2) {
        return std::pow(sinc(scale * l1), 2 * order) * std::exp(-l2 * l2);
    };
    s.factors = {{[scale, order](double l) { return std::pow(sinc(scale * l), 2 * order); },
                  [](double l) { return std::exp(-l * l); }}};
    s.smoothness = {kSmoothOrder, kSmoothOrder};
    s.decay_r = 2.0 * order;
    s.fourier_support = 2.0 * a;
    return s;
}

Symbol separable_symbol(std::string name, std::function<double(double)> f1, std::function<double(double)> f2,
                        IPair smoothness) {
    Symbol s;
    s.name = std::move(name);
    s.eval = [f1, f2](double a, double b) { return f1(a) * f2(b); };
    s.factors = {{std::move(f1), std::move(f2)}};
    s.smoothness = smoothness;
    return s;
}

Symbol product_symbol(const Symbol& a, const Symbol& b) {
    Symbol s;
    s.name = a.name + "*" + b.name;
    s.eval = [fa = a.eval, fb = b.eval](double l1, double l2) { return fa(l1, l2) * fb(l1, l2); };
    s.even = a.even && b.even;
    s.smoothness = {std::min(a.smoothness[0], b.smoothness[0]), std::min(a.smoothness[1], b.smoothness[1])};
    if (a.support_box && b.support_box) {
        s.support_box = Pair{std::min((*a.support_box)[0], (*b.support_box)[0]),
                             std::min((*a.support_box)[1], (*b.support_box)[1])};
    } else if (a.support_box) {
        s.support_box = a.support_box;
    } else {
        s.support_box = b.support_box;
    }
    s.zero_mode_excluded = a.zero_mode_excluded || b.zero_mode_excluded;
    if (a.factors && b.factors) {
        const auto& fa = *a.factors;
        const auto& fb = *b.factors;
        s.factors = {{[f = fa[0], g = fb[0]](double l) { return f(l) * g(l); },
                      [f = fa[1], g = fb[1]](double l) { return f(l) * g(l); }}};
    }
    return s;
}

Eigen::MatrixXd symbol_matrix(const ProductSpace& ps, const Symbol& F, const Pair& delta) {
    const Eigen::VectorXd& r1 = ps.m1().sqrt_eigenvalues();
    const Eigen::VectorXd& r2 = ps.m2().sqrt_eigenvalues();
    Eigen::MatrixXd g(r1.size(), r2.size());
    for (Eigen::Index k = 0; k < r1.size(); ++k) {
        for (Eigen::Index l = 0; l < r2.size(); ++l) {
            g(k, l) = (F.zero_mode_excluded && r1(k) == 0.0 && r2(l) == 0.0)
                          ? 0.0
                          : F(delta[0] * r1(k), delta[1] * r2(l));
        }
    }
    return g;
}

CoefField apply_symbol(const Symbol& F, const CoefField& cf, const Pair& delta) {
    return cf.with_coefs(symbol_matrix(cf.space(), F, delta).cwiseProduct(cf.coefs()));
}

double truncation_tail(const ProductSpace& ps, const Symbol& F, const Pair& delta) {
    const double R1 = ps.m1().band_radius();
    const double R2 = ps.m2().band_radius();
    constexpr int kSamples = 64;
    double tail = 0.0;
    for (int a = 0; a <= kSamples; ++a) {
        for (int b = 0; b <= kSamples; ++b) {
            const double l1 = 4.0 * R1 * a / kSamples;
            const double l2 = 4.0 * R2 * b / kSamples;
            if (l1 <= R1 && l2 <= R2) continue;
            tail = std::max(tail, std::abs(F(delta[0] * l1, delta[1] * l2)));
        }
    }
    for (int k = 3; k <= 12; ++k) {
        const double s = std::ldexp(1.0, k);
        tail = std::max({tail, std::abs(F(delta[0] * s * R1, 0.0)), std::abs(F(0.0, delta[1] * s * R2)),
                         std::abs(F(delta[0] * s * R1, delta[1] * s * R2))});
    }
    return tail;
}

double KernelSlice::mass(const ProductSpace& ps) const { return ps.product_weights().cwiseProduct(values).sum(); }

void KernelSlice::write_csv(const ProductSpace& ps, std::ostream& os) const {
    os << "i,j,y1,y2,value\n";
    os.precision(15);
    for (int i = 0; i < ps.rows(); ++i) {
        for (int j = 0; j < ps.cols(); ++j) {
            os << i << ',' << j << ',' << ps.m1().nodes()(i) << ',' << ps.m2().nodes()(j) << ',' << values(i, j)
               << '\n';
        }
    }
}

namespace {

KernelSlice assemble_slice(const ProductSpace& ps, const Symbol& F, const Pair& delta, const ProductPoint& x) {
    const Eigen::MatrixXd g = symbol_matrix(ps, F, delta);
    const Eigen::VectorXd a = ps.m1().basis_at(x.x1);
    const Eigen::VectorXd b = ps.m2().basis_at(x.x2);
    const Eigen::MatrixXd m = a.asDiagonal() * g * b.asDiagonal();
    KernelSlice slice;
    slice.anchor = x;
    slice.delta = delta;
    slice.values = ps.m1().eigenfunctions().transpose() * m * ps.m2().eigenfunctions();
    slice.tail_bound = truncation_tail(ps, F, delta);
    const double sup = std::max(g.cwiseAbs().maxCoeff(), slice.tail_bound);
    slice.truncation_flag = slice.tail_bound > 1e-8 * sup;
    return slice;
}

struct RadialPoint {
    double rho;
    double value;
};

// |K| along one axis of the slice through the anchor node.
std::vector<RadialPoint> axis_profile(const ProductSpace& ps, const GridValues& k, int axis, int i0, int j0) {
    std::vector<RadialPoint> pts;
    const SpectralModel& m = ps.factor(axis);
    for (int n = 0; n < m.node_count(); ++n) {
        const double v = axis == 0 ? k(n, j0) : k(i0, n);
        pts.push_back({m.node_distances()(axis == 0 ? i0 : j0, n), std::abs(v)});
    }
    std::sort(pts.begin(), pts.end(), [](const RadialPoint& a, const RadialPoint& b) { return a.rho < b.rho; });
    return pts;
}

// Negative least-squares slope of log(envelope) against log(1 + rho / delta),
// over points above the round-off floor. Capped at 1e3.
double decay_slope(std::vector<RadialPoint> pts, double delta) {
    if (pts.empty()) return 0.0;
    double peak = 0.0;
    for (const auto& p : pts) peak = std::max(peak, p.value);
    for (std::size_t i = pts.size() - 1; i-- > 0;) pts[i].value = std::max(pts[i].value, pts[i + 1].value);
    const double floor = 1e-13 * peak;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& p : pts) {
        if (p.rho <= 0.0 || p.value <= floor) continue;
        const double lx = std::log1p(p.rho / delta);
        const double ly = std::log(p.value);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2) return 1e3;
    const double den = n * sxx - sx * sx;
    if (den <= 0.0) return 1e3;
    return std::min(1e3, -(n * sxy - sx * sy) / den);
}

}  // namespace

KernelSlice heat_kernel(const ProductSpace& ps, const Pair& t, const ProductPoint& x) {
    if (!positive(t)) throw ConfigError("heat_kernel: t must be positive componentwise");
    return assemble_slice(ps, heat_symbol(t), {1.0, 1.0}, x);
}

KernelSlice kernel_of_symbol(const ProductSpace& ps, const Symbol& F, const Pair& delta, const ProductPoint& x) {
    if (!F.even) throw ConfigError("kernel_of_symbol: symbol must satisfy F(+-l1, +-l2) = F(l1, l2)");
    if (!positive(delta)) throw ConfigError("kernel_of_symbol: delta must be positive componentwise");
    return assemble_slice(ps, F, delta, x);
}

Eigen::VectorXd kernel_1d(const SpectralModel& m, const std::function<double(double)>& F, double delta, double x) {
    const Eigen::VectorXd& r = m.sqrt_eigenvalues();
    Eigen::VectorXd coef = m.basis_at(x);
    for (Eigen::Index k = 0; k < r.size(); ++k) coef(k) *= F(delta * r(k));
    return m.eigenfunctions().transpose() * coef;
}

bool RectUnion::contains(double l1, double l2) const {
    return std::any_of(rects.begin(), rects.end(), [&](const Rect& r) { return r.contains(l1, l2); });
}

RectUnion RectUnion::intersect(const RectUnion& other) const {
    RectUnion out;
    for (const Rect& a : rects) {
        for (const Rect& b : other.rects) {
            Rect c{std::max(a.lo1, b.lo1), std::min(a.hi1, b.hi1), std::max(a.lo2, b.lo2), std::min(a.hi2, b.hi2)};
            if (!c.empty()) out.rects.push_back(c);
        }
    }
    return out;
}

RectUnion RectUnion::from_sqrt_box(double a1, double b1, double a2, double b2) {
    auto sq = [](double v) { return std::isinf(v) ? v : v * v; };
    return {{Rect{sq(a1), sq(b1), sq(a2), sq(b2)}}};
}

CoefField SpectralProjector::apply(const CoefField& cf) const { return cf.with_coefs(mask_.cwiseProduct(cf.coefs())); }

SpectralProjector SpectralProjector::then(const SpectralProjector& other) const {
    return SpectralProjector(mask_.cwiseProduct(other.mask_));
}

SpectralProjector SpectralProjector::operator+(const SpectralProjector& other) const {
    return SpectralProjector(mask_ + other.mask_);
}

SpectralProjector spectral_projector(const ProductSpace& ps, const RectUnion& rects) {
    const Eigen::VectorXd l1 = ps.m1().eigenvalues();
    const Eigen::VectorXd l2 = ps.m2().eigenvalues();
    Eigen::MatrixXd mask(l1.size(), l2.size());
    for (Eigen::Index k = 0; k < l1.size(); ++k) {
        for (Eigen::Index l = 0; l < l2.size(); ++l) mask(k, l) = rects.contains(l1(k), l2(l)) ? 1.0 : 0.0;
    }
    return SpectralProjector(std::move(mask));
}

VerificationReport localization_fit(const ProductSpace& ps, const Symbol& F, const Pair& delta, const IPair& k_target,
                                    double slope_slack) {
    VerificationReport rep;
    ReportTimer timer(rep);
    rep.check_name = "localization_" + F.name;
    rep.anchor = "kernel-localization";
    rep.param("delta", std::to_string(delta[0]) + "x" + std::to_string(delta[1]));
    rep.param("k", std::to_string(k_target[0]) + "x" + std::to_string(k_target[1]));

    const Pair d = ps.d_pair();
    const int order = k_target[0] + k_target[1];
    const bool smooth_enough = std::min(F.smoothness[0], F.smoothness[1]) >= order;
    const bool decays = F.support_box.has_value() || (F.decay_r && *F.decay_r > d[0] + d[1] + order);
    if (!smooth_enough || !decays) {
        rep.informational = true;
        rep.note("symbol metadata does not meet the smoothness/decay hypothesis");
    }

    const int i0 = ps.rows() / 4;
    const int j0 = ps.cols() / 4;
    const ProductPoint x = ps.node(i0, j0);
    const KernelSlice slice = kernel_of_symbol(ps, F, delta, x);
    if (slice.truncation_flag) rep.note("truncation tail above 1e-8 sup|F|");

    // Volumes at the nodes, per factor.
    Eigen::VectorXd v1(ps.rows()), v2(ps.cols());
    for (int i = 0; i < ps.rows(); ++i) v1(i) = ps.m1().ball_volume(ps.m1().nodes()(i), delta[0]);
    for (int j = 0; j < ps.cols(); ++j) v2(j) = ps.m2().ball_volume(ps.m2().nodes()(j), delta[1]);
    const Eigen::MatrixXd& dist1 = ps.m1().node_distances();
    const Eigen::MatrixXd& dist2 = ps.m2().node_distances();
    auto envelope = [&](int i, int j) {
        return std::pow(1.0 + dist1(i0, i) / delta[0], -k_target[0]) *
               std::pow(1.0 + dist2(j0, j) / delta[1], -k_target[1]) / std::sqrt(v1(i0) * v2(j0) * v1(i) * v2(j));
    };

    double c_fit = 0.0;
    double c_holder = 0.0;
    const double a1 = ps.m1().holder_alpha();
    const double a2 = ps.m2().holder_alpha();
    for (int i = 0; i < ps.rows(); ++i) {
        for (int j = 0; j < ps.cols(); ++j) {
            const double env = envelope(i, j);
            c_fit = std::max(c_fit, std::abs(slice.values(i, j)) / env);
            // Nearest-neighbour increments along each axis.
            if (i + 1 < ps.rows() && dist1(i, i + 1) <= delta[0]) {
                const double inc = std::abs(slice.values(i, j) - slice.values(i + 1, j));
                c_holder = std::max(c_holder, inc / (std::pow(dist1(i, i + 1) / delta[0], a1) * env));
            }
            if (j + 1 < ps.cols() && dist2(j, j + 1) <= delta[1]) {
                const double inc = std::abs(slice.values(i, j) - slice.values(i, j + 1));
                c_holder = std::max(c_holder, inc / (std::pow(dist2(j, j + 1) / delta[1], a2) * env));
            }
        }
    }
    const double slope1 = decay_slope(axis_profile(ps, slice.values, 0, i0, j0), delta[0]);
    const double slope2 = decay_slope(axis_profile(ps, slice.values, 1, i0, j0), delta[1]);

    rep.measured_constant = c_fit;
    rep.record("c_fit", c_fit);
    rep.record("c_holder", c_holder);
    rep.record("slope_1", slope1);
    rep.record("slope_2", slope2);
    rep.record("tail_bound", slice.tail_bound);
    rep.require("c_fit", c_fit, Relation::Finite);
    rep.require("c_holder", c_holder, Relation::Finite);
    rep.require("slope_1", slope1, Relation::GreaterEq, k_target[0] - slope_slack);
    rep.require("slope_2", slope2, Relation::GreaterEq, k_target[1] - slope_slack);
    return rep;
}

namespace {

void require_band_limited(const ProductSpace& ps, const Symbol& F, const Pair& t) {
    if (ps.m1().recipe().kind != ModelKind::Circle) throw ConfigError("finite_speed_check: first factor must be a circle");
    if (!F.fourier_support) throw ConfigError("finite_speed_check: symbol profile is not band limited in Fourier space");
    if (!positive(t)) throw ConfigError("finite_speed_check: t must be positive componentwise");
    if (*F.fourier_support * t[0] >= kPi) throw ConfigError("finite_speed_check: propagation radius exceeds the diameter");
}

}  // namespace

VerificationReport finite_speed_check(const ProductSpace& ps, const Symbol& F, const Pair& t) {
    require_band_limited(ps, F, t);
    VerificationReport rep;
    ReportTimer timer(rep);
    rep.check_name = "finite_speed_" + F.name;
    rep.anchor = "finite-speed";
    rep.param("t", std::to_string(t[0]) + "x" + std::to_string(t[1]));
    const double radius = *F.fourier_support * t[0];
    rep.param("radius", radius);

    const ProductPoint x = ps.node(0, 0);
    const KernelSlice slice = kernel_of_symbol(ps, F, t, x);
    const double peak = slice.values.cwiseAbs().maxCoeff();
    double tail = 0.0;
    for (int i = 0; i < ps.rows(); ++i) {
        if (ps.m1().node_distances()(0, i) <= radius) continue;
        tail = std::max(tail, slice.values.row(i).cwiseAbs().maxCoeff());
    }
    rep.measured_constant = tail / peak;
    rep.record("tail_over_peak", tail / peak);
    rep.record("crossing_radius_1e-3", kernel_crossing_radius(ps, F, t, 1e-3));
    rep.record("tail_bound", slice.tail_bound);
    rep.require("tail_over_peak", tail / peak, Relation::LessEq, 1e-6);
    return rep;
}

double kernel_crossing_radius(const ProductSpace& ps, const Symbol& F, const Pair& t, double level) {
    require_band_limited(ps, F, t);
    const KernelSlice slice = kernel_of_symbol(ps, F, t, ps.node(0, 0));
    const auto pts = axis_profile(ps, slice.values, 0, 0, 0);
    double peak = 0.0;
    for (const auto& p : pts) peak = std::max(peak, p.value);
    double rho = 0.0;
    for (const auto& p : pts) {
        if (p.value >= level * peak) rho = std::max(rho, p.rho);
    }
    return rho;
}

}  // namespace bispec
