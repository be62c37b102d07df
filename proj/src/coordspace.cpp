#include "bispec/coordspace.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace bispec {

namespace {

constexpr double kTwoPi = 2.0 * kPi;

double wrap_angle(double t) {
    t = std::fmod(t, kTwoPi);
    return t < 0.0 ? t + kTwoPi : t;
}

double overlap(double a, double b, double lo, double hi) {
    return std::max(0.0, std::min(b, hi) - std::max(a, lo));
}

// Recurrence coefficients of the orthonormal Jacobi polynomials:
// x p_n = b_{n+1} p_{n+1} + a_n p_n + b_n p_{n-1}.
double jacobi_a(int n, double al, double be) {
    if (n == 0) return (be - al) / (al + be + 2.0);
    const double s = 2.0 * n + al + be;
    return (be * be - al * al) / (s * (s + 2.0));
}

double jacobi_b(int n, double al, double be) {
    if (n == 1) {
        const double s = al + be + 2.0;
        return std::sqrt(4.0 * (1.0 + al) * (1.0 + be) / (s * s * (s + 1.0)));
    }
    const double s = 2.0 * n + al + be;
    return std::sqrt(4.0 * n * (n + al) * (n + be) * (n + al + be) /
                     (s * s * (s + 1.0) * (s - 1.0)));
}

double jacobi_mass(double al, double be) {
    return std::exp((al + be + 1.0) * std::log(2.0) + std::lgamma(al + 1.0) +
                    std::lgamma(be + 1.0) - std::lgamma(al + be + 2.0));
}

Eigen::VectorXd jacobi_orthonormal(int count, double al, double be, double x) {
    Eigen::VectorXd p(count);
    if (count == 0) return p;
    p(0) = 1.0 / std::sqrt(jacobi_mass(al, be));
    if (count == 1) return p;
    p(1) = (x - jacobi_a(0, al, be)) * p(0) / jacobi_b(1, al, be);
    for (int n = 1; n + 1 < count; ++n) {
        p(n + 1) = ((x - jacobi_a(n, al, be)) * p(n) - jacobi_b(n, al, be) * p(n - 1)) /
                   jacobi_b(n + 1, al, be);
    }
    return p;
}

// First-derivative matrix on arbitrary distinct nodes (barycentric form).
Eigen::MatrixXd differentiation_matrix(const Eigen::VectorXd& x) {
    const Eigen::Index n = x.size();
    Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index k = 0; k < n; ++k) {
            if (k != j) w(j) /= 2.0 * (x(j) - x(k));
        }
    }
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double diag = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            d(i, j) = (w(j) / w(i)) / (x(i) - x(j));
            diag -= d(i, j);
        }
        d(i, i) = diag;
    }
    return d;
}

}  // namespace

std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_jacobi(int n, double alpha, double beta) {
    if (n <= 0) throw ConfigError("gauss_jacobi: node count must be positive");
    if (alpha <= -1.0 || beta <= -1.0) throw ConfigError("gauss_jacobi: alpha, beta must exceed -1");
    Eigen::VectorXd diag(n);
    Eigen::VectorXd sub(std::max(n - 1, 1));
    for (int k = 0; k < n; ++k) diag(k) = jacobi_a(k, alpha, beta);
    for (int k = 1; k < n; ++k) sub(k - 1) = jacobi_b(k, alpha, beta);
    if (n == 1) {
        return {diag, Eigen::VectorXd::Constant(1, jacobi_mass(alpha, beta))};
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub.head(n - 1), Eigen::ComputeEigenvectors);
    Eigen::VectorXd nodes = solver.eigenvalues();
    Eigen::VectorXd weights =
        jacobi_mass(alpha, beta) * solver.eigenvectors().row(0).transpose().array().square();
    return {nodes, weights};
}

SpectralModel make_circle(int n_modes, int n_nodes) {
    if (n_modes <= 0) throw ConfigError("make_circle: n_modes must be positive");
    if (n_nodes < 4 * n_modes) throw ConfigError("make_circle: n_nodes must be at least 4 * n_modes");
    SpectralModel m;
    m.name_ = "circle";
    m.recipe_ = {ModelKind::Circle, n_modes, n_nodes, 0.0, 0.0};
    const int band = 2 * n_modes - 1;
    m.sqrt_eig_.resize(band);
    m.sqrt_eig_(0) = 0.0;
    for (int k = 1; k < n_modes; ++k) {
        m.sqrt_eig_(2 * k - 1) = k;
        m.sqrt_eig_(2 * k) = k;
    }
    const double h = kTwoPi / n_nodes;
    m.nodes_ = Eigen::VectorXd::LinSpaced(n_nodes, 0.0, h * (n_nodes - 1));
    m.weights_ = Eigen::VectorXd::Constant(n_nodes, h);
    m.eigfun_.resize(band, n_nodes);
    for (int j = 0; j < n_nodes; ++j) m.eigfun_.col(j) = m.basis_at(m.nodes_(j));
    m.cell_lo_ = m.nodes_.array() - 0.5 * h;
    m.cell_hi_ = m.nodes_.array() + 0.5 * h;
    m.finish();
    return m;
}

SpectralModel make_jacobi(int n_modes, double alpha, double beta, int n_nodes) {
    if (alpha <= -1.0 || beta <= -1.0) throw ConfigError("make_jacobi: alpha, beta must exceed -1");
    if (n_modes <= 0) throw ConfigError("make_jacobi: n_modes must be positive");
    if (n_nodes <= 0) n_nodes = 2 * n_modes;
    if (n_nodes < n_modes) throw ConfigError("make_jacobi: quadrature order must be at least n_modes");
    SpectralModel m;
    m.name_ = "jacobi";
    m.recipe_ = {ModelKind::Jacobi, n_modes, n_nodes, alpha, beta};
    // V(x, r) ~ r (1-x+r^2)^(alpha+1/2) (1+x+r^2)^(beta+1/2): at an endpoint the
    // volume grows like r^(2 alpha + 2) (resp. beta).
    m.dim_d_ = std::max(1.0, 2.0 * std::max(alpha, beta) + 2.0);
    m.sqrt_eig_.resize(n_modes);
    for (int n = 0; n < n_modes; ++n) m.sqrt_eig_(n) = std::sqrt(n * (n + alpha + beta + 1.0));
    auto [x, w] = gauss_jacobi(n_nodes, alpha, beta);
    m.nodes_ = x;
    m.weights_ = w;
    m.eigfun_.resize(n_modes, n_nodes);
    for (int j = 0; j < n_nodes; ++j) m.eigfun_.col(j) = m.basis_at(x(j));

    // Ascending x means descending theta = arccos x.
    Eigen::VectorXd theta = x.unaryExpr([](double v) { return std::acos(std::clamp(v, -1.0, 1.0)); });
    m.cell_lo_.resize(n_nodes);
    m.cell_hi_.resize(n_nodes);
    for (int j = 0; j < n_nodes; ++j) {
        m.cell_hi_(j) = j == 0 ? kPi : 0.5 * (theta(j) + theta(j - 1));
        m.cell_lo_(j) = j + 1 == n_nodes ? 0.0 : 0.5 * (theta(j) + theta(j + 1));
    }
    m.finish();
    return m;
}

SpectralModel make_model(const ModelRecipe& r) {
    switch (r.kind) {
        case ModelKind::Circle: return make_circle(r.n_modes, r.n_nodes);
        case ModelKind::Jacobi: return make_jacobi(r.n_modes, r.alpha, r.beta, r.n_nodes);
    }
    throw ConfigError("make_model: unknown model kind");
}

void SpectralModel::finish() {
    const int n = node_count();
    node_dist_.resize(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) node_dist_(i, j) = distance(nodes_(i), nodes_(j));
    }
}

double SpectralModel::metric_coord(double x) const {
    if (recipe_.kind == ModelKind::Circle) return wrap_angle(x);
    return std::acos(std::clamp(x, -1.0, 1.0));
}

double SpectralModel::distance(double x, double y) const {
    if (recipe_.kind == ModelKind::Circle) {
        const double d = std::fmod(std::abs(x - y), kTwoPi);
        return std::min(d, kTwoPi - d);
    }
    return std::abs(metric_coord(x) - metric_coord(y));
}

Eigen::VectorXd SpectralModel::basis_at(double x) const {
    if (recipe_.kind == ModelKind::Circle) {
        const int band = 2 * recipe_.n_modes - 1;
        Eigen::VectorXd e(band);
        e(0) = 1.0 / std::sqrt(kTwoPi);
        const double s = 1.0 / std::sqrt(kPi);
        for (int k = 1; k < recipe_.n_modes; ++k) {
            e(2 * k - 1) = s * std::cos(k * x);
            e(2 * k) = s * std::sin(k * x);
        }
        return e;
    }
    return jacobi_orthonormal(recipe_.n_modes, recipe_.alpha, recipe_.beta, std::clamp(x, -1.0, 1.0));
}

Eigen::VectorXd SpectralModel::ball_weights(double x, double r) const {
    if (r <= 0.0) throw ConfigError("ball_volume: radius must be positive");
    const int n = node_count();
    Eigen::VectorXd out(n);
    const double c = metric_coord(x);
    if (recipe_.kind == ModelKind::Circle) {
        if (r >= kPi) return weights_;
        for (int j = 0; j < n; ++j) {
            const double width = cell_hi_(j) - cell_lo_(j);
            double off = wrap_angle(nodes_(j) - c);
            if (off > kPi) off -= kTwoPi;
            double cover = 0.0;
            for (double shift : {-kTwoPi, 0.0, kTwoPi}) {
                cover += overlap(off + shift - 0.5 * width, off + shift + 0.5 * width, -r, r);
            }
            out(j) = weights_(j) * std::min(1.0, cover / width);
        }
        return out;
    }
    for (int j = 0; j < n; ++j) {
        const double width = cell_hi_(j) - cell_lo_(j);
        out(j) = weights_(j) * overlap(cell_lo_(j), cell_hi_(j), c - r, c + r) / width;
    }
    return out;
}

double SpectralModel::ball_volume(double x, double r) const { return ball_weights(x, r).sum(); }

double SpectralModel::min_cell_width() const { return (cell_hi_ - cell_lo_).minCoeff(); }

SpectralModel SpectralModel::refined() const {
    ModelRecipe r = recipe_;
    r.n_nodes = 2 * node_count();
    return make_model(r);
}

Eigen::MatrixXd SpectralModel::operator_matrix() const {
    const int n = node_count();
    if (recipe_.kind == ModelKind::Circle) {
        // Periodic spectral second derivative; L = -D2.
        const double h = kTwoPi / n;
        Eigen::MatrixXd l(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (i == j) {
                    l(i, j) = n % 2 == 0 ? kPi * kPi / (3.0 * h * h) + 1.0 / 6.0
                                         : kPi * kPi / (3.0 * h * h) - 1.0 / 12.0;
                    continue;
                }
                const double sgn = (i - j) % 2 == 0 ? 1.0 : -1.0;
                const double s = std::sin(0.5 * (i - j) * h);
                l(i, j) = n % 2 == 0 ? sgn / (2.0 * s * s) : sgn * std::cos(0.5 * (i - j) * h) / (2.0 * s * s);
            }
        }
        return l;
    }
    const double al = recipe_.alpha;
    const double be = recipe_.beta;
    const Eigen::MatrixXd d = differentiation_matrix(nodes_);
    const Eigen::MatrixXd d2 = d * d;
    Eigen::MatrixXd l(n, n);
    for (int i = 0; i < n; ++i) {
        const double x = nodes_(i);
        l.row(i) = -((1.0 - x * x) * d2.row(i) + (be - al - (al + be + 2.0) * x) * d.row(i));
    }
    return l;
}

double SpectralModel::orthonormality_residual() const {
    const Eigen::MatrixXd g = eigfun_ * weights_.asDiagonal() * eigfun_.transpose();
    return (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

DoublingFit doubling_fit(const SpectralModel& model) {
    DoublingFit fit;
    const double diam = model.diameter();
    const int n = model.node_count();
    constexpr int kDyadicLevels = 10;
    constexpr int kSlopeLevels = 5;  // lambda = 1, 2, ..., 16
    const double r0 = diam / 64.0;
    for (int m = 0; m < n; ++m) {
        const double x = model.nodes()(m);
        for (int k = 1; k <= kDyadicLevels; ++k) {
            const double r = diam * std::ldexp(1.0, -k);
            const double v = model.ball_volume(x, r);
            if (v <= 0.0) continue;
            fit.c0 = std::max(fit.c0, model.ball_volume(x, 2.0 * r) / v);
        }
        // Least-squares slope of log V(x, lambda r0) against log lambda.
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        for (int k = 0; k < kSlopeLevels; ++k) {
            const double lx = k * std::log(2.0);
            const double ly = std::log(model.ball_volume(x, std::ldexp(r0, k)));
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        const double slope = (kSlopeLevels * sxy - sx * sy) / (kSlopeLevels * sxx - sx * sx);
        fit.d_est = std::max(fit.d_est, slope);
    }
    return fit;
}

std::pair<double, double> jacobi_volume_ratio_band(const SpectralModel& model) {
    if (model.recipe().kind != ModelKind::Jacobi) throw ConfigError("jacobi_volume_ratio_band: Jacobi model required");
    const double al = model.recipe().alpha;
    const double be = model.recipe().beta;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (int m = 0; m < model.node_count(); ++m) {
        const double x = model.nodes()(m);
        for (int k = 0; k <= 10; ++k) {
            const double r = kPi * std::ldexp(1.0, -k);
            const double shape =
                r * std::pow(1.0 - x + r * r, al + 0.5) * std::pow(1.0 + x + r * r, be + 0.5);
            const double ratio = model.ball_volume(x, r) / shape;
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
        }
    }
    return {lo, hi};
}

}  // namespace bispec
