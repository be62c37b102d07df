#include <doctest.h>

#include <random>

#include "bispec/coordspace.hpp"

using namespace bispec;

TEST_CASE("circle spectrum lists each frequency twice after the constant mode") {
    const SpectralModel m = make_circle(4, 64);
    const Eigen::VectorXd expected = (Eigen::VectorXd(7) << 0, 1, 1, 2, 2, 3, 3).finished();
    CHECK(m.band_size() == 7);
    CHECK((m.sqrt_eigenvalues() - expected).norm() == 0.0);
    CHECK(m.dim_d() == 1.0);
    CHECK(m.holder_alpha() == 1.0);
}

TEST_CASE("circle construction rejects bad sizes") {
    CHECK_THROWS_AS(make_circle(0, 16), ConfigError);
    CHECK_THROWS_AS(make_circle(8, 31), ConfigError);
    CHECK_NOTHROW(make_circle(8, 32));
}

TEST_CASE("trapezoid rule makes the circle basis orthonormal") {
    CHECK(make_circle(16, 256).orthonormality_residual() < 1e-12);
    CHECK(make_circle(32, 128).orthonormality_residual() < 1e-12);
}

TEST_CASE("circle ball volumes") {
    const SpectralModel m = make_circle(8, 64);
    for (double theta : {0.0, 0.3, 1.0, 4.0}) {
        CHECK(m.ball_volume(theta, kPi) == doctest::Approx(2 * kPi).epsilon(1e-14));
        CHECK(m.ball_volume(theta, kPi / 2) == doctest::Approx(kPi).epsilon(1e-12));
        CHECK(m.ball_volume(theta, 10.0) == doctest::Approx(m.total_measure()));
        // Sub-cell radii still see 2r of uniform density.
        CHECK(m.ball_volume(theta, 0.01) == doctest::Approx(0.02).epsilon(1e-10));
    }
    CHECK_THROWS_AS(m.ball_volume(0.0, 0.0), ConfigError);
    CHECK_THROWS_AS(m.ball_volume(0.0, -1.0), ConfigError);
}

TEST_CASE("circle discretized operator reproduces k^2") {
    const SpectralModel m = make_circle(8, 64);
    const Eigen::MatrixXd L = m.operator_matrix();
    for (int k = 0; k < m.band_size(); ++k) {
        const Eigen::VectorXd e = m.eigenfunctions().row(k).transpose();
        const double lam = m.eigenvalues()(k);
        CHECK((L * e - lam * e).cwiseAbs().maxCoeff() < 1e-9 * std::max(1.0, lam));
    }
    const SpectralModel odd = make_circle(8, 65);
    const Eigen::MatrixXd Lo = odd.operator_matrix();
    const Eigen::VectorXd e = odd.eigenfunctions().row(9).transpose();
    CHECK((Lo * e - odd.eigenvalues()(9) * e).cwiseAbs().maxCoeff() < 1e-9 * 25.0);
}

TEST_CASE("gauss-jacobi matches closed-form rules") {
    auto [x, w] = gauss_jacobi(2, 0.0, 0.0);
    CHECK(x(0) == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-14));
    CHECK(x(1) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
    CHECK(w(0) == doctest::Approx(1.0).epsilon(1e-14));
    // Gauss-Chebyshev: nodes cos((2k-1) pi / 2n), equal weights pi / n.
    const int n = 12;
    auto [xc, wc] = gauss_jacobi(n, -0.5, -0.5);
    for (int k = 1; k <= n; ++k) {
        CHECK(xc(n - k) == doctest::Approx(std::cos((2.0 * k - 1.0) * kPi / (2.0 * n))).epsilon(1e-13));
        CHECK(wc(k - 1) == doctest::Approx(kPi / n).epsilon(1e-12));
    }
    CHECK_THROWS_AS(gauss_jacobi(4, -1.0, 0.0), ConfigError);
}

TEST_CASE("chebyshev model has sqrt-eigenvalues n") {
    const SpectralModel m = make_jacobi(8, -0.5, -0.5);
    for (int n = 0; n < 8; ++n) CHECK(m.sqrt_eigenvalues()(n) == doctest::Approx(n).epsilon(1e-14));
    CHECK(m.orthonormality_residual() < 1e-12);
}

TEST_CASE("discretized jacobi operator reproduces the eigenvalues") {
    for (auto [al, be] : {std::pair{-0.5, -0.5}, std::pair{0.0, 0.0}, std::pair{1.5, 0.0}, std::pair{0.3, -0.4}}) {
        const SpectralModel m = make_jacobi(32, al, be, 64);
        const Eigen::MatrixXd L = m.operator_matrix();
        for (int k = 0; k < m.band_size(); ++k) {
            const Eigen::VectorXd e = m.eigenfunctions().row(k).transpose();
            const Eigen::VectorXd le = L * e;
            const double lam = m.eigenvalues()(k);
            const double scale = std::max(1.0, lam) * e.cwiseAbs().maxCoeff();
            for (int i = 4; i < m.node_count() - 4; ++i) {
                CHECK(std::abs(le(i) - lam * e(i)) < 1e-6 * scale);
            }
        }
    }
}

TEST_CASE("jacobi model basics") {
    const SpectralModel legendre = make_jacobi(16, 0.0, 0.0);
    CHECK(legendre.total_measure() == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(legendre.orthonormality_residual() < 1e-8);
    CHECK(legendre.dim_d() == 2.0);
    CHECK(make_jacobi(16, -0.5, -0.5).dim_d() == 1.0);
    CHECK(make_jacobi(16, 1.5, 0.0).dim_d() == 5.0);
    CHECK_THROWS_AS(make_jacobi(8, -1.0, 0.0), ConfigError);
    CHECK_THROWS_AS(make_jacobi(8, 0.0, -2.0), ConfigError);
    CHECK_THROWS_AS(make_jacobi(8, 0.0, 0.0, 4), ConfigError);
    // Band radius of Jacobi(32, 0, 0) is sqrt(31 * 32).
    CHECK(make_jacobi(32, 0.0, 0.0).band_radius() == doctest::Approx(std::sqrt(31.0 * 32.0)));
}

TEST_CASE("legendre ball volume at the center matches 2 sin r") {
    // mu{x : |arccos x - pi/2| < r} = 2 sin r for the unweighted measure.
    const SpectralModel m = make_jacobi(32, 0.0, 0.0, 64);
    for (double r : {0.2, 0.4, 0.8, 1.2}) {
        CHECK(m.ball_volume(0.0, r) == doctest::Approx(2.0 * std::sin(r)).epsilon(0.01));
    }
    CHECK(m.ball_volume(0.3, kPi) == doctest::Approx(m.total_measure()).epsilon(1e-14));
    CHECK(m.ball_volume(1.0, kPi) == doctest::Approx(m.total_measure()).epsilon(1e-14));
}

TEST_CASE("jacobi volume follows the two-sided asymptotic shape") {
    for (auto [al, be] : {std::pair{0.0, 0.0}, std::pair{-0.5, -0.5}, std::pair{1.5, 0.0}}) {
        // The equivalence constant depends on alpha, beta only: the recorded
        // band must not drift when the quadrature grid is refined.
        const auto [lo, hi] = jacobi_volume_ratio_band(make_jacobi(32, al, be, 64));
        const auto [lo2, hi2] = jacobi_volume_ratio_band(make_jacobi(32, al, be, 128));
        MESSAGE("alpha=" << al << " beta=" << be << " ratio band [" << lo << ", " << hi << "], refined [" << lo2
                         << ", " << hi2 << "]");
        CHECK(lo > 0.0);
        CHECK(lo2 == doctest::Approx(lo).epsilon(0.25));
        CHECK(hi2 == doctest::Approx(hi).epsilon(0.25));
    }
    CHECK_THROWS_AS(jacobi_volume_ratio_band(make_circle(4, 16)), ConfigError);
}

TEST_CASE("volumes are nondecreasing in the radius") {
    for (const SpectralModel& m : {make_circle(16, 64), make_jacobi(16, 1.5, 0.0, 40)}) {
        for (int j = 0; j < m.node_count(); j += 3) {
            double prev = 0.0;
            for (int k = 1; k <= 400; ++k) {
                const double v = m.ball_volume(m.nodes()(j), 0.01 * k);
                CHECK(v >= prev - 1e-15);
                prev = v;
            }
        }
    }
}

TEST_CASE("metric axioms on random points") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> theta(0.0, 2 * kPi), x(-1.0, 1.0);
    const SpectralModel c = make_circle(4, 16);
    const SpectralModel j = make_jacobi(4, 0.0, 0.0);
    for (int trial = 0; trial < 500; ++trial) {
        const double a = theta(rng), b = theta(rng), e = theta(rng);
        CHECK(c.distance(a, a) == 0.0);
        CHECK(c.distance(a, b) == doctest::Approx(c.distance(b, a)));
        CHECK(c.distance(a, e) <= c.distance(a, b) + c.distance(b, e) + 1e-12);
        CHECK(c.distance(a, b) <= kPi);
        const double u = x(rng), v = x(rng), w = x(rng);
        CHECK(j.distance(u, u) == 0.0);
        CHECK(j.distance(u, v) == j.distance(v, u));
        CHECK(j.distance(u, w) <= j.distance(u, v) + j.distance(v, w) + 1e-12);
    }
}

TEST_CASE("doubling fits") {
    const DoublingFit circle = doubling_fit(make_circle(32, 128));
    CHECK(circle.d_est == doctest::Approx(1.0).epsilon(0.05));
    CHECK(circle.d_est <= std::log2(circle.c0) + 0.05);

    const DoublingFit cheb = doubling_fit(make_jacobi(32, -0.5, -0.5, 64));
    CHECK(std::abs(cheb.d_est - 1.0) < 0.1);
    CHECK(cheb.d_est <= std::log2(cheb.c0) + 0.1);

    const SpectralModel heavy = make_jacobi(32, 1.5, 0.0, 64);
    const DoublingFit fit = doubling_fit(heavy);
    MESSAGE("jacobi(3/2, 0): c0=" << fit.c0 << " d_est=" << fit.d_est);
    CHECK(std::isfinite(fit.c0));
    CHECK(fit.d_est <= std::log2(fit.c0) + 0.1);
    CHECK(fit.d_est <= heavy.dim_d() + 0.1);

    // Doubling inequality holds at every sampled (x, r) with the fitted c0.
    for (int j = 0; j < heavy.node_count(); ++j) {
        for (int k = 1; k <= 10; ++k) {
            const double r = kPi * std::ldexp(1.0, -k);
            const double x = heavy.nodes()(j);
            CHECK(heavy.ball_volume(x, 2 * r) <= fit.c0 * heavy.ball_volume(x, r) * (1 + 1e-12));
        }
    }
}

TEST_CASE("basis evaluation at nodes matches the stored samples") {
    const SpectralModel j = make_jacobi(10, 0.7, -0.3);
    for (int m = 0; m < j.node_count(); ++m) {
        CHECK((j.basis_at(j.nodes()(m)) - j.eigenfunctions().col(m)).norm() < 1e-12);
    }
    const SpectralModel r = j.refined();
    CHECK(r.node_count() == 2 * j.node_count());
    CHECK(r.band_size() == j.band_size());
}
