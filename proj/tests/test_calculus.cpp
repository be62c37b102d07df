#include <doctest.h>

#include <random>
#include <sstream>

#include "bispec/calculus.hpp"
#include "bispec/smooth.hpp"

using namespace bispec;

namespace {

ProductSpacePtr circle2(int modes = 16, int nodes = 64) {
    return make_product(make_circle(modes, nodes), make_circle(modes, nodes));
}

CoefField random_field(const ProductSpacePtr& ps, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd c(ps->m1().band_size(), ps->m2().band_size());
    for (Eigen::Index k = 0; k < c.rows(); ++k)
        for (Eigen::Index l = 0; l < c.cols(); ++l) c(k, l) = u(rng) / ((1.0 + k) * (1.0 + l));
    return {ps, c};
}

}  // namespace

TEST_CASE("analysis and synthesis") {
    const auto ps = make_product(make_circle(8, 64), make_jacobi(8, 0.5, -0.3));
    SUBCASE("single mode") {
        const GridValues f = synthesize(mode_field(ps, 2, 3));
        const Eigen::MatrixXd c = analyze(ps, f).coefs();
        Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(c.rows(), c.cols());
        expect(2, 3) = 1.0;
        CHECK((c - expect).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("constant") {
        const GridValues one = GridValues::Ones(ps->rows(), ps->cols());
        const Eigen::MatrixXd c = analyze(ps, one).coefs();
        CHECK(c(0, 0) == doctest::Approx(std::sqrt(ps->total_measure())).epsilon(1e-12));
        CHECK(c.cwiseAbs().sum() - std::abs(c(0, 0)) < 1e-10);
    }
    SUBCASE("roundtrip and Parseval") {
        const CoefField cf = random_field(ps, 11);
        const GridValues f = synthesize(cf);
        CHECK((synthesize(analyze(ps, f)) - f).cwiseAbs().maxCoeff() < 1e-9);
        const double grid_l2 = std::sqrt(ps->product_weights().cwiseProduct(f.cwiseAbs2()).sum());
        CHECK(grid_l2 == doctest::Approx(cf.l2_norm()).epsilon(1e-8));
    }
    CHECK_THROWS_AS(mode_field(ps, 99, 0), BandOverflow);
    CHECK_THROWS_AS(analyze(ps, GridValues::Zero(3, 3)), ConfigError);
}

TEST_CASE("symbol application") {
    const auto ps = circle2(8, 32);
    const CoefField f = random_field(ps, 5);
    CHECK((apply_symbol(one_symbol(), f).coefs() - f.coefs()).norm() == 0.0);

    const Symbol g = gaussian_symbol();
    const Symbol b = bump_symbol(2.0);
    const CoefField fg = apply_symbol(product_symbol(g, b), f);
    const CoefField seq = apply_symbol(g, apply_symbol(b, f));
    CHECK((fg.coefs() - seq.coefs()).cwiseAbs().maxCoeff() == 0.0);

    // Operator norm bound on L2.
    const double sup = symbol_matrix(*ps, b).cwiseAbs().maxCoeff();
    CHECK(apply_symbol(b, f).l2_norm() <= sup * f.l2_norm() * (1 + 1e-14));

    // Heat symbol at sqrt-eigenvalues is the semigroup e^{-tL}.
    const Pair t{0.1, 0.3};
    const Eigen::MatrixXd hm = symbol_matrix(*ps, heat_symbol(t));
    const Eigen::VectorXd l1 = ps->m1().eigenvalues(), l2 = ps->m2().eigenvalues();
    for (int k = 0; k < hm.rows(); ++k)
        for (int l = 0; l < hm.cols(); ++l) CHECK(hm(k, l) == doctest::Approx(std::exp(-t[0] * l1(k) - t[1] * l2(l))));

    Symbol z = gaussian_symbol();
    z.zero_mode_excluded = true;
    CHECK(symbol_matrix(*ps, z)(0, 0) == 0.0);
    CHECK(symbol_matrix(*ps, z)(1, 0) == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("heat kernel has unit mass") {
    const auto ps = circle2(32, 128);
    for (double t1 : {0.02, 0.125, 1.0, 4.0}) {
        for (double t2 : {0.02, 0.5, 4.0}) {
            const KernelSlice k = heat_kernel(*ps, {t1, t2}, ps->node(5, 17));
            CHECK(std::abs(k.mass(*ps) - 1.0) < 1e-8);
        }
    }
    // Large t: only the constant mode survives.
    const KernelSlice big = heat_kernel(*ps, {60.0, 60.0}, ps->node(3, 3));
    CHECK((big.values.array() - 1.0 / ps->total_measure()).abs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(heat_kernel(*ps, {0.0, 1.0}, ps->node(0, 0)), ConfigError);
    // Very small t: truncation is flagged.
    CHECK(heat_kernel(*ps, {1e-4, 1e-4}, ps->node(0, 0)).truncation_flag);
    CHECK(!heat_kernel(*ps, {0.1, 0.1}, ps->node(0, 0)).truncation_flag);
}

TEST_CASE("heat kernel matches the periodized Gaussian") {
    // p_t(0, y) on the circle = sum_n exp(-(y + 2 pi n)^2 / 4t) / sqrt(4 pi t).
    const auto ps = circle2(32, 128);
    const double t = 0.1;
    const KernelSlice k = heat_kernel(*ps, {t, t}, ps->node(0, 0));
    auto p1 = [t](double y) {
        double s = 0.0;
        for (int n = -5; n <= 5; ++n) s += std::exp(-std::pow(y + 2 * kPi * n, 2) / (4 * t));
        return s / std::sqrt(4 * kPi * t);
    };
    for (int i = 0; i < 128; i += 7) {
        for (int j = 0; j < 128; j += 11) {
            const double y1 = ps->m1().nodes()(i), y2 = ps->m2().nodes()(j);
            CHECK(k.values(i, j) == doctest::Approx(p1(y1) * p1(y2)).epsilon(1e-9));
        }
    }
}

TEST_CASE("heat kernel Gaussian envelope") {
    const auto ps = circle2(32, 128);
    double c = 0.0;
    for (double t : {0.02, 0.1, 0.5, 2.0}) {
        const Pair delta{std::sqrt(t), std::sqrt(t)};
        const DKernelParams p{delta, {2.0, 2.0}};
        for (int a : {0, 40}) {
            const ProductPoint x = ps->node(a, a);
            const KernelSlice k = heat_kernel(*ps, {t, t}, x);
            for (int i = 0; i < 128; i += 3)
                for (int j = 0; j < 128; j += 3) c = std::max(c, k.values(i, j) / dkernel(*ps, p, x, ps->node(i, j)));
        }
    }
    MESSAGE("Gaussian envelope constant " << c);
    CHECK(std::isfinite(c));
    CHECK(c < 100.0);
}

TEST_CASE("kernel mass equals F(0,0)") {
    const auto ps = circle2(32, 128);
    for (const Symbol& F : {gaussian_symbol(), bump_symbol()}) {
        for (Pair delta : {Pair{1.0, 1.0}, Pair{0.25, 0.5}}) {
            const KernelSlice k = kernel_of_symbol(*ps, F, delta, ps->node(9, 70));
            CHECK(std::abs(k.mass(*ps) - F(0.0, 0.0)) < 1e-8);
        }
    }
    Symbol odd = gaussian_symbol();
    odd.even = false;
    CHECK_THROWS_AS(kernel_of_symbol(*ps, odd, {1.0, 1.0}, ps->node(0, 0)), ConfigError);
}

TEST_CASE("kernel structure") {
    const auto ps = make_product(make_circle(16, 64), make_jacobi(16, 0.0, 0.0));
    const ProductPoint x = ps->node(5, 7);
    SUBCASE("separable kernels factorize") {
        const auto f1 = [](double l) { return std::exp(-0.3 * l * l); };
        const auto f2 = [](double l) { return plateau(l / 4.0); };
        const Symbol F = separable_symbol("sep", f1, f2);
        const KernelSlice k = kernel_of_symbol(*ps, F, {1.0, 1.0}, x);
        const Eigen::VectorXd k1 = kernel_1d(ps->m1(), f1, 1.0, x.x1);
        const Eigen::VectorXd k2 = kernel_1d(ps->m2(), f2, 1.0, x.x2);
        CHECK((k.values - k1 * k2.transpose()).cwiseAbs().maxCoeff() < 1e-12 * k.values.cwiseAbs().maxCoeff());
    }
    SUBCASE("band reproducing kernel") {
        const KernelSlice k = kernel_of_symbol(*ps, one_symbol(), {1.0, 1.0}, x);
        const GridValues f = synthesize(random_field(ps, 8));
        const double reproduced = ps->product_weights().cwiseProduct(k.values).cwiseProduct(f).sum();
        CHECK(reproduced == doctest::Approx(f(5, 7)).epsilon(1e-10));
    }
    SUBCASE("symmetry") {
        std::mt19937 rng(1);
        std::uniform_int_distribution<int> ri(0, ps->rows() - 1), rj(0, ps->cols() - 1);
        const Symbol F = gaussian_symbol();
        for (int trial = 0; trial < 100; ++trial) {
            const int a = ri(rng), b = rj(rng), c = ri(rng), d = rj(rng);
            const double kxy = kernel_of_symbol(*ps, F, {0.5, 0.5}, ps->node(a, b)).values(c, d);
            const double kyx = kernel_of_symbol(*ps, F, {0.5, 0.5}, ps->node(c, d)).values(a, b);
            CHECK(std::abs(kxy - kyx) < 1e-10 * std::max(1.0, std::abs(kxy)));
        }
    }
    SUBCASE("csv export") {
        std::ostringstream os;
        heat_kernel(*ps, {0.5, 0.5}, x).write_csv(*ps, os);
        const std::string s = os.str();
        CHECK(s.rfind("i,j,y1,y2,value\n", 0) == 0);
        CHECK(std::count(s.begin(), s.end(), '\n') == 1 + ps->grid_size());
    }
}

TEST_CASE("spectral projector algebra") {
    const auto ps = circle2(16, 64);
    const double lmax = ps->m1().eigenvalues().maxCoeff();
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> u(0.0, lmax * 1.1);
    auto random_union = [&] {
        RectUnion r;
        const int n = 1 + static_cast<int>(rng() % 3);
        for (int i = 0; i < n; ++i) {
            double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
            r.rects.push_back({std::min(a, b), std::max(a, b), std::min(c, d), std::max(c, d)});
        }
        return r;
    };
    for (int trial = 0; trial < 200; ++trial) {
        const RectUnion S = random_union(), R = random_union();
        const SpectralProjector es = spectral_projector(*ps, S), er = spectral_projector(*ps, R);
        CHECK(es.then(es) == es);
        CHECK(es.then(er) == spectral_projector(*ps, S.intersect(R)));
    }
    const SpectralProjector all = spectral_projector(*ps, RectUnion{{Rect{}}});
    CHECK(all.mask() == Eigen::MatrixXd::Ones(all.mask().rows(), all.mask().cols()));
    // A disjoint partition of the quadrant sums to the identity.
    const RectUnion p1{{Rect{0, 10, 0, 40}}}, p2{{Rect{10, INFINITY, 0, 40}}}, p3{{Rect{0, INFINITY, 40, INFINITY}}};
    const SpectralProjector sum =
        spectral_projector(*ps, p1) + spectral_projector(*ps, p2) + spectral_projector(*ps, p3);
    CHECK(sum == all);
    // Overlaps are a set predicate, never double-counted.
    const RectUnion overlap{{Rect{0, 10, 0, 10}, Rect{5, 20, 5, 20}}};
    CHECK(spectral_projector(*ps, overlap).mask().maxCoeff() == 1.0);
    // sqrt boxes convert to eigenvalue rectangles.
    const SpectralProjector low = spectral_projector(*ps, RectUnion::from_sqrt_box(0, 3.5, 0, 2.5));
    CHECK(low.mask().sum() == 7 * 5);
    const CoefField f = random_field(ps, 1);
    CHECK((low.apply(low.apply(f)).coefs() - low.apply(f).coefs()).norm() == 0.0);
}

TEST_CASE("localization of smooth symbols") {
    const auto ps = circle2(64, 256);
    SUBCASE("compactly supported bump") {
        const auto rep = localization_fit(*ps, bump_symbol(16.0), {1.0, 1.0}, {3, 3});
        MESSAGE("bump slopes " << rep.value("slope_1") << ", " << rep.value("slope_2") << " c_fit "
                               << rep.value("c_fit") << " c_holder " << rep.value("c_holder"));
        CHECK(!rep.informational);
        CHECK(rep.pass());
    }
    SUBCASE("Gaussian") {
        const auto rep = localization_fit(*ps, gaussian_symbol(), {0.125, 0.125}, {4, 4});
        MESSAGE("gaussian slopes " << rep.value("slope_1") << ", " << rep.value("slope_2") << " c_fit "
                                   << rep.value("c_fit"));
        CHECK(std::isfinite(rep.value("c_fit")));
        CHECK(rep.pass());
    }
    SUBCASE("rough symbol is informational") {
        Symbol rough = separable_symbol("indicator", [](double l) { return l <= 4.0 ? 1.0 : 0.0; },
                                        [](double l) { return l <= 4.0 ? 1.0 : 0.0; }, {0, 0});
        const auto rep = localization_fit(*ps, rough, {1.0, 1.0}, {3, 3});
        CHECK(rep.informational);
    }
}

TEST_CASE("finite speed of propagation") {
    const auto ps = make_product(make_circle(96, 384), make_circle(16, 64));
    const Pair t{0.3, 0.3};
    const auto rep = finite_speed_check(*ps, fejer_symbol(1.0), t);
    MESSAGE("tail/peak " << rep.value("tail_over_peak") << " tail bound " << rep.value("tail_bound"));
    CHECK(rep.pass());

    // Single-factor truncation floor: the same profile in one variable.
    const SpectralModel& c = ps->m1();
    const auto prof = [](double l) { return std::pow(sinc(0.25 * l), 8); };
    const Eigen::VectorXd k1 = kernel_1d(c, prof, 0.3, 0.0);
    double tail1 = 0.0;
    for (int i = 0; i < c.node_count(); ++i)
        if (c.node_distances()(0, i) > 0.6) tail1 = std::max(tail1, std::abs(k1(i)));
    MESSAGE("1-factor floor " << tail1 / k1.cwiseAbs().maxCoeff());
    CHECK(tail1 / k1.cwiseAbs().maxCoeff() < 1e-6);

    const double r1 = kernel_crossing_radius(*ps, fejer_symbol(1.0), t, 1e-3);
    const double r2 = kernel_crossing_radius(*ps, fejer_symbol(2.0), t, 1e-3);
    MESSAGE("crossing radii " << r1 << " " << r2);
    CHECK(r2 / r1 == doctest::Approx(2.0).epsilon(0.10));

    CHECK_THROWS_AS(finite_speed_check(*ps, heat_symbol({1.0, 1.0}), t), ConfigError);
    const auto pj = make_product(make_jacobi(16, 0.0, 0.0), make_circle(16, 64));
    CHECK_THROWS_AS(finite_speed_check(*pj, fejer_symbol(1.0), t), ConfigError);
}
