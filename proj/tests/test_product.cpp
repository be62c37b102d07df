#include <doctest.h>

#include <random>

#include "bispec/product.hpp"

using namespace bispec;

namespace {

ProductSpace circle2(int modes = 16, int nodes = 64) { return {make_circle(modes, nodes), make_circle(modes, nodes)}; }

}  // namespace

TEST_CASE("product measure and grid") {
    const ProductSpace cc = circle2();
    CHECK(cc.total_measure() == doctest::Approx(4 * kPi * kPi).epsilon(1e-12));
    CHECK(cc.product_weights().sum() == doctest::Approx(4 * kPi * kPi).epsilon(1e-10));
    CHECK(cc.grid_size() == 64 * 64);

    const ProductSpace cj(make_circle(16, 64), make_jacobi(16, 0.0, 0.0));
    CHECK(cj.product_weights().sum() == doctest::Approx(4 * kPi).epsilon(1e-10));
    CHECK(cj.grid_size() == 64 * 32);
    CHECK(cj.d_pair() == Pair{1.0, 2.0});
}

TEST_CASE("rectangle volumes factorize") {
    const ProductSpace cj(make_circle(8, 64), make_jacobi(16, 0.5, 0.0));
    CHECK(rect_volume(circle2(), {0.4, 2.0}, {kPi, kPi}) == doctest::Approx(4 * kPi * kPi));
    for (double x1 : {0.0, 1.0, 3.0}) {
        for (double x2 : {-0.9, 0.0, 0.7}) {
            const Pair delta{0.3, 0.8};
            const double v1 = cj.m1().ball_volume(x1, delta[0]);
            const double v2 = cj.m2().ball_volume(x2, delta[1]);
            CHECK(rect_volume(cj, {x1, x2}, delta) == v1 * v2);
            CHECK(rect_volume_pow(cj, {x1, x2}, delta, {-1.0, 2.0}) ==
                  doctest::Approx(v2 * v2 / v1).epsilon(1e-14));
        }
    }
    CHECK_THROWS_AS(rect_volume(cj, {0.0, 0.0}, {0.0, 1.0}), ConfigError);
}

TEST_CASE("dstar values") {
    const ProductSpace cc = circle2();
    const DKernelParams p{{1.0, 1.0}, {2.0, 2.0}};
    CHECK(dstar(cc, p, {0.5, 0.5}, {1.5, 1.5}) == doctest::Approx(1.0 / 16.0).epsilon(1e-14));
    CHECK(dstar(cc, p, {0.5, 2.0}, {0.5, 2.0}) == 1.0);
    CHECK(dstar(cc, {{1.0, 1.0}, {0.0, 0.0}}, {0.0, 0.0}, {2.0, 3.0}) == 1.0);
    CHECK_THROWS_AS((DKernelParams{{1.0, 1.0}, {0.0, 1.0}}.validate()), ConfigError);

    std::mt19937 rng(3);
    std::uniform_real_distribution<double> th(0.0, 2 * kPi);
    for (int trial = 0; trial < 200; ++trial) {
        const ProductPoint x{th(rng), th(rng)}, y{th(rng), th(rng)}, z{th(rng), th(rng)};
        const double dxy = dstar(cc, p, x, y);
        CHECK(dxy > 0.0);
        CHECK(dxy <= 1.0);
        CHECK(dxy == doctest::Approx(dstar(cc, p, y, x)));
        CHECK(dstar(cc, p, x, z) >= dxy * dstar(cc, p, y, z) * (1 - 1e-12));
        CHECK(cc.distance(x, z) <= cc.distance(x, y) + cc.distance(y, z) + 1e-12);
    }
    const double dk = dkernel(cc, p, {0.0, 0.0}, {1.0, 1.0});
    CHECK(dk == doctest::Approx(dstar(cc, p, {0.0, 0.0}, {1.0, 1.0}) / 4.0).epsilon(1e-12));
}

TEST_CASE("integral estimates on the circle square") {
    const ProductSpace cc = circle2(16, 64);
    const auto reps = verify_integral_estimates(cc, {{0.5, 0.5}, {3.0, 3.0}});
    REQUIRE(reps.size() == 4);
    for (const auto& r : reps) {
        MESSAGE(r.check_name << " c=" << r.measured_constant << " refined=" << r.refined_constant);
        CHECK(!r.informational);
        CHECK(r.pass());
    }
    // sigma <= d is a precondition violation.
    CHECK_THROWS_AS(verify_integral_estimates(cc, {{0.5, 0.5}, {1.0, 1.0}}), ConfigError);
    CHECK_THROWS_AS(verify_integral_estimate(cc, {{0.5, 0.5}, {1.5, 1.5}}, IntegralEstimate::VolumeComposition), ConfigError);
    // Between d and 2d only the first two are asserted.
    const auto mid = verify_integral_estimates(cc, {{0.5, 0.5}, {1.5, 1.5}});
    CHECK(!mid[0].informational);
    CHECK(mid[2].informational);
    CHECK(mid[3].informational);
}

TEST_CASE("single-kernel integral constant matches a direct integration") {
    // On one circle axis the integral of (1 + rho/delta)^-sigma is closed form:
    // 2 delta / (sigma - 1) * (1 - (1 + pi/delta)^(1 - sigma)), and V = 2 delta.
    const ProductSpace cc = circle2(16, 128);
    const double delta = 0.5, sigma = 3.0;
    const double axis = 2 * delta / (sigma - 1) * (1 - std::pow(1 + kPi / delta, 1 - sigma)) / (2 * delta);
    const auto rep = verify_integral_estimate(cc, {{delta, delta}, {sigma, sigma}}, IntegralEstimate::SingleKernel);
    CHECK(rep.measured_constant == doctest::Approx(axis * axis).epsilon(0.02));
}

TEST_CASE("integral estimates on circle x jacobi") {
    const ProductSpace cj(make_circle(16, 64), make_jacobi(16, 0.0, 0.0, 64));
    const auto reps = verify_integral_estimates(cj, {{0.5, 0.5}, {5.0, 5.0}});
    for (const auto& r : reps) {
        MESSAGE(r.check_name << " c=" << r.measured_constant << " refined=" << r.refined_constant);
        CHECK(r.pass());
    }
}

TEST_CASE("rectangle doubling and center change") {
    for (const ProductSpace& ps : {circle2(16, 64), ProductSpace(make_circle(16, 64), make_jacobi(16, 0.0, 0.0, 64))}) {
        const auto dbl = verify_rect_doubling(ps);
        const auto cc = verify_center_change(ps);
        MESSAGE("doubling c=" << dbl.measured_constant << " center change c=" << cc.measured_constant);
        CHECK(dbl.pass());
        CHECK(cc.pass());
    }
}

TEST_CASE("sample points") {
    const Eigen::VectorXd j = sample_points(make_jacobi(8, 0.0, 0.0));
    CHECK(j(0) == 1.0);
    CHECK(j(7) == -1.0);
    const Eigen::VectorXd c = sample_points(make_circle(8, 32));
    CHECK(c(4) == doctest::Approx(kPi));
}
