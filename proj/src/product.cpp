#include "bispec/product.hpp"

#include <algorithm>

namespace bispec {

namespace {

const char* estimate_tag(IntegralEstimate e) {
    switch (e) {
        case IntegralEstimate::SingleKernel: return "dkernel-integral";
        case IntegralEstimate::Composition: return "dkernel-composition";
        case IntegralEstimate::VolumeComposition: return "dkernel-volume-composition";
        case IntegralEstimate::CrossScale: return "dkernel-cross-scale";
    }
    return "?";
}

// A(s, m) = (1 + rho(sample_s, node_m) / delta)^(-sigma).
Eigen::MatrixXd decay_matrix(const SpectralModel& m, const Eigen::VectorXd& samples, double delta, double sigma) {
    Eigen::MatrixXd a(samples.size(), m.node_count());
    for (Eigen::Index s = 0; s < samples.size(); ++s) {
        for (int j = 0; j < m.node_count(); ++j) {
            a(s, j) = std::pow(1.0 + m.distance(samples(s), m.nodes()(j)) / delta, -sigma);
        }
    }
    return a;
}

Eigen::MatrixXd sample_decay(const SpectralModel& m, const Eigen::VectorXd& samples, double delta, double sigma) {
    Eigen::MatrixXd a(samples.size(), samples.size());
    for (Eigen::Index s = 0; s < samples.size(); ++s) {
        for (Eigen::Index t = 0; t < samples.size(); ++t) {
            a(s, t) = std::pow(1.0 + m.distance(samples(s), samples(t)) / delta, -sigma);
        }
    }
    return a;
}

Eigen::VectorXd node_volumes(const SpectralModel& m, double delta) {
    Eigen::VectorXd v(m.node_count());
    for (int j = 0; j < m.node_count(); ++j) v(j) = m.ball_volume(m.nodes()(j), delta);
    return v;
}

// Per-axis ratio table R(x_s, z_t) for one estimate; the product-space ratio
// at ((x1,x2), (z1,z2)) is R1(x1,z1) R2(x2,z2) because every kernel, volume
// and quadrature weight involved factorizes across the axes.
Eigen::MatrixXd axis_ratio(const SpectralModel& m, const Eigen::VectorXd& samples, double delta, double sigma,
                           double d, IntegralEstimate which) {
    const Eigen::VectorXd& w = m.weights();
    const Eigen::MatrixXd a = decay_matrix(m, samples, delta, sigma);
    const Eigen::Index s = samples.size();
    Eigen::VectorXd vx(s);
    for (Eigen::Index k = 0; k < s; ++k) vx(k) = m.ball_volume(samples(k), delta);
    switch (which) {
        case IntegralEstimate::SingleKernel: {
            Eigen::VectorXd lhs = a * w;
            return lhs.cwiseQuotient(vx);  // column vector: no z dependence
        }
        case IntegralEstimate::Composition: {
            Eigen::MatrixXd lhs = a * w.asDiagonal() * a.transpose();
            Eigen::MatrixXd rhs = vx.asDiagonal() * sample_decay(m, samples, delta, sigma - d);
            return lhs.cwiseQuotient(rhs);
        }
        case IntegralEstimate::VolumeComposition: {
            const Eigen::VectorXd vy = node_volumes(m, delta);
            Eigen::MatrixXd lhs = a * (w.cwiseQuotient(vy)).asDiagonal() * a.transpose();
            return lhs.cwiseQuotient(sample_decay(m, samples, delta, sigma));
        }
        case IntegralEstimate::CrossScale: {
            const Eigen::VectorXd vy = node_volumes(m, delta);
            const Eigen::MatrixXd b = decay_matrix(m, samples, 1.0, sigma);
            Eigen::MatrixXd lhs = a * (w.cwiseQuotient(vy)).asDiagonal() * b.transpose();
            return lhs.cwiseQuotient(sample_decay(m, samples, 1.0, sigma));
        }
    }
    return {};
}

double estimate_constant(const ProductSpace& ps, const DKernelParams& p, IntegralEstimate which) {
    const Pair d = ps.d_pair();
    const Eigen::MatrixXd r1 =
        axis_ratio(ps.m1(), sample_points(ps.m1()), p.delta[0], p.sigma[0], d[0], which);
    const Eigen::MatrixXd r2 =
        axis_ratio(ps.m2(), sample_points(ps.m2()), p.delta[1], p.sigma[1], d[1], which);
    // All entries are positive, so the max of products is the product of maxes.
    return r1.maxCoeff() * r2.maxCoeff();
}

}  // namespace

ProductSpace::ProductSpace(SpectralModel m1, SpectralModel m2) : m1_(std::move(m1)), m2_(std::move(m2)) {}

double ProductSpace::distance(const ProductPoint& x, const ProductPoint& y) const {
    return std::max(m1_.distance(x.x1, y.x1), m2_.distance(x.x2, y.x2));
}

ProductSpacePtr make_product(SpectralModel m1, SpectralModel m2) {
    return std::make_shared<const ProductSpace>(std::move(m1), std::move(m2));
}

void DKernelParams::validate() const {
    if (!positive(delta) || !positive(sigma)) {
        throw ConfigError("DKernelParams: delta and sigma must be positive componentwise");
    }
}

double rect_volume(const ProductSpace& ps, const ProductPoint& x, const Pair& delta) {
    if (!positive(delta)) throw ConfigError("rect_volume: delta must be positive componentwise");
    return ps.m1().ball_volume(x.x1, delta[0]) * ps.m2().ball_volume(x.x2, delta[1]);
}

double rect_volume_pow(const ProductSpace& ps, const ProductPoint& x, const Pair& delta, const Pair& gamma) {
    if (!positive(delta)) throw ConfigError("rect_volume_pow: delta must be positive componentwise");
    return std::pow(ps.m1().ball_volume(x.x1, delta[0]), gamma[0]) *
           std::pow(ps.m2().ball_volume(x.x2, delta[1]), gamma[1]);
}

double dstar(const ProductSpace& ps, const DKernelParams& p, const ProductPoint& x, const ProductPoint& y) {
    return std::pow(1.0 + ps.m1().distance(x.x1, y.x1) / p.delta[0], -p.sigma[0]) *
           std::pow(1.0 + ps.m2().distance(x.x2, y.x2) / p.delta[1], -p.sigma[1]);
}

double dkernel(const ProductSpace& ps, const DKernelParams& p, const ProductPoint& x, const ProductPoint& y) {
    return dstar(ps, p, x, y) / std::sqrt(rect_volume(ps, x, p.delta) * rect_volume(ps, y, p.delta));
}

Eigen::VectorXd sample_points(const SpectralModel& m, int count) {
    Eigen::VectorXd s(count);
    for (int k = 0; k < count; ++k) {
        s(k) = m.recipe().kind == ModelKind::Circle ? 2.0 * kPi * k / count
                                                    : std::cos(kPi * k / (count - 1));
    }
    return s;
}

VerificationReport verify_integral_estimate(const ProductSpace& ps, const DKernelParams& params,
                                            IntegralEstimate which) {
    params.validate();
    const Pair d = ps.d_pair();
    const bool needs_2d = which == IntegralEstimate::VolumeComposition || which == IntegralEstimate::CrossScale;
    const double factor = needs_2d ? 2.0 : 1.0;
    if (params.sigma[0] <= factor * d[0] || params.sigma[1] <= factor * d[1]) {
        throw ConfigError(std::string(estimate_tag(which)) + ": sigma must exceed " +
                          (needs_2d ? "2d" : "d") + " componentwise");
    }
    if (which == IntegralEstimate::CrossScale && (params.delta[0] > 1.0 || params.delta[1] > 1.0)) {
        throw ConfigError("dkernel-cross-scale: delta must lie in (0, 1]^2");
    }

    VerificationReport rep;
    ReportTimer timer(rep);
    rep.check_name = std::string("integral_estimate_") + estimate_tag(which);
    rep.anchor = estimate_tag(which);
    rep.param("delta", std::to_string(params.delta[0]) + "x" + std::to_string(params.delta[1]));
    rep.param("sigma", std::to_string(params.sigma[0]) + "x" + std::to_string(params.sigma[1]));
    rep.measured_constant = estimate_constant(ps, params, which);
    rep.refined_constant = estimate_constant(ps.refined(), params, which);
    rep.require("measured_constant", rep.measured_constant, Relation::Finite);
    rep.require_stable("refinement_change", rep.measured_constant, rep.refined_constant, 0.10);
    return rep;
}

std::vector<VerificationReport> verify_integral_estimates(const ProductSpace& ps, const DKernelParams& params) {
    params.validate();
    const Pair d = ps.d_pair();
    if (params.sigma[0] <= d[0] || params.sigma[1] <= d[1]) {
        throw ConfigError("integral estimates: sigma must exceed d componentwise");
    }
    std::vector<VerificationReport> out;
    out.push_back(verify_integral_estimate(ps, params, IntegralEstimate::SingleKernel));
    out.push_back(verify_integral_estimate(ps, params, IntegralEstimate::Composition));
    const bool above_2d = params.sigma[0] > 2.0 * d[0] && params.sigma[1] > 2.0 * d[1];
    for (auto which : {IntegralEstimate::VolumeComposition, IntegralEstimate::CrossScale}) {
        const bool small_delta = params.delta[0] <= 1.0 && params.delta[1] <= 1.0;
        if (above_2d && (which == IntegralEstimate::VolumeComposition || small_delta)) {
            out.push_back(verify_integral_estimate(ps, params, which));
            continue;
        }
        VerificationReport skip;
        skip.check_name = std::string("integral_estimate_") + estimate_tag(which);
        skip.anchor = estimate_tag(which);
        skip.informational = true;
        skip.note(above_2d ? "skipped: delta outside (0,1]^2" : "skipped: sigma <= 2d");
        out.push_back(std::move(skip));
    }
    return out;
}

VerificationReport verify_rect_doubling(const ProductSpace& ps) {
    VerificationReport rep;
    ReportTimer timer(rep);
    rep.check_name = "rect_doubling";
    rep.anchor = "rectangle-doubling";
    const Pair d = ps.d_pair();
    auto measure = [&](const ProductSpace& space) {
        const Eigen::VectorXd s1 = sample_points(space.m1());
        const Eigen::VectorXd s2 = sample_points(space.m2());
        double c = 0.0;
        for (int a = 0; a < s1.size(); ++a) {
            for (int b = 0; b < s2.size(); ++b) {
                const ProductPoint x{s1(a), s2(b)};
                for (int k1 = 1; k1 <= 8; ++k1) {
                    for (int k2 = 1; k2 <= 8; ++k2) {
                        const Pair delta{kPi * std::ldexp(1.0, -k1), kPi * std::ldexp(1.0, -k2)};
                        const double base = rect_volume(space, x, delta);
                        for (int l1 = 0; l1 <= k1; ++l1) {
                            for (int l2 = 0; l2 <= k2; ++l2) {
                                const double lam1 = std::ldexp(1.0, l1);
                                const double lam2 = std::ldexp(1.0, l2);
                                const double big = rect_volume(space, x, {lam1 * delta[0], lam2 * delta[1]});
                                c = std::max(c, big / (std::pow(lam1, d[0]) * std::pow(lam2, d[1]) * base));
                            }
                        }
                    }
                }
            }
        }
        return c;
    };
    rep.measured_constant = measure(ps);
    rep.refined_constant = measure(ps.refined());
    rep.require("measured_constant", rep.measured_constant, Relation::Finite);
    rep.require_stable("refinement_change", rep.measured_constant, rep.refined_constant, 0.10);
    return rep;
}

VerificationReport verify_center_change(const ProductSpace& ps) {
    VerificationReport rep;
    ReportTimer timer(rep);
    rep.check_name = "center_change";
    rep.anchor = "center-change";
    const Pair d = ps.d_pair();
    auto measure = [&](const ProductSpace& space) {
        double c = 0.0;
        for (int i = 0; i < 2; ++i) {
            const SpectralModel& m = space.factor(i);
            const Eigen::VectorXd s = sample_points(m);
            double ci = 0.0;
            for (int k = 1; k <= 8; ++k) {
                const double delta = kPi * std::ldexp(1.0, -k);
                for (Eigen::Index a = 0; a < s.size(); ++a) {
                    for (Eigen::Index b = 0; b < s.size(); ++b) {
                        const double ratio = m.ball_volume(s(a), delta) / m.ball_volume(s(b), delta) /
                                             std::pow(1.0 + m.distance(s(a), s(b)) / delta, d[i]);
                        ci = std::max(ci, ratio);
                    }
                }
            }
            c = i == 0 ? ci : c * ci;
        }
        return c;
    };
    rep.measured_constant = measure(ps);
    rep.refined_constant = measure(ps.refined());
    rep.require("measured_constant", rep.measured_constant, Relation::Finite);
    rep.require_stable("refinement_change", rep.measured_constant, rep.refined_constant, 0.10);
    return rep;
}

}  // namespace bispec
