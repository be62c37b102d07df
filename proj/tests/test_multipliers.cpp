#include <doctest.h>

#include "bispec/multipliers.hpp"

using namespace bispec;

namespace {

ProductSpacePtr circle2(int modes = 16, int nodes = 64) {
    return make_product(make_circle(modes, nodes), make_circle(modes, nodes));
}

SpaceParams space(Family fam, Pair s, double p, double q, SpaceKind kind = SpaceKind::Classical) {
    SpaceParams sp;
    sp.family = fam;
    sp.s = s;
    sp.p = p;
    sp.q = q;
    sp.kind = kind;
    return sp;
}

}  // namespace

TEST_CASE("derivative scan") {
    const Pair range{32.0, 32.0};
    SUBCASE("lifting symbol is in M(tau, kappa)") {
        const auto rep = multiplier_admissible_check(m_tau_symbol({1, -1}), {1, -1}, {3, 3}, range);
        for (int b = 0; b <= 3; ++b) MESSAGE("c_" << b << "_" << b << " = " << rep.value("c_" + std::to_string(b) + "_" + std::to_string(b)));
        CHECK(rep.pass());
        // (1 + l^2)^(1/2) / (1 + l) <= 1 and (1 + l) / (1 + l^2)^(1/2) <= sqrt 2.
        CHECK(rep.value("c_0_0") == doctest::Approx(std::sqrt(2.0)).epsilon(1e-3));
    }
    SUBCASE("constant") {
        const auto rep = multiplier_admissible_check(one_symbol(), {0, 0}, {3, 3}, range);
        CHECK(rep.pass());
        CHECK(rep.value("c_0_0") == 1.0);
        CHECK(rep.value("c_1_0") == 0.0);
        CHECK(rep.value("c_3_3") == 0.0);
    }
    SUBCASE("lambda1 is not bounded for tau = 0") {
        const Symbol lin = separable_symbol("l1", [](double l) { return l; }, [](double) { return 1.0; });
        const auto rep = multiplier_admissible_check(lin, {0, 0}, {2, 2}, range);
        CHECK(!rep.pass());
        bool c00_failed = false;
        for (const Criterion& c : rep.criteria)
            if (c.name == "c_0_0_range") c00_failed = !c.ok();
        CHECK(c00_failed);
        // With tau = (1, 0) it is admissible.
        CHECK(multiplier_admissible_check(lin, {1, 0}, {2, 2}, range).pass());
    }
    SUBCASE("smooth bumps and the Gaussian") {
        CHECK(multiplier_admissible_check(bump_symbol(2.0), {0, 0}, {4, 4}, range).pass());
        // High orders need steps below the balanced one near the plateau edge.
        CHECK(multiplier_admissible_check(bump_symbol(4.0), {0, 0}, {8, 8}, {62.0, 63.0}).pass());
        CHECK(multiplier_admissible_check(gaussian_symbol(), {0, 0}, {3, 3}, range).pass());
    }
    SUBCASE("oscillation with growing frequency fails for beta >= 1") {
        const Symbol osc = separable_symbol("chirp", [](double l) { return std::cos(l * l); }, [](double) { return 1.0; });
        const auto rep = multiplier_admissible_check(osc, {0, 0}, {1, 0}, range);
        CHECK(!rep.pass());
        CHECK(rep.value("c_1_0") > 30.0);
    }
    SUBCASE("general path agrees with the per-axis path") {
        Symbol g = m_tau_symbol({1, -1});
        g.factors.reset();
        const auto a = multiplier_admissible_check(g, {1, -1}, {2, 2}, range);
        const auto b = multiplier_admissible_check(m_tau_symbol({1, -1}), {1, -1}, {2, 2}, range);
        CHECK(a.pass());
        for (const char* k : {"c_0_0", "c_1_1", "c_2_2", "c_2_0"})
            CHECK(a.value(k) == doctest::Approx(b.value(k)).epsilon(0.02));
    }
    CHECK_THROWS_AS(multiplier_admissible_check(one_symbol(), {0, 0}, {-1, 0}, range), ConfigError);
}

TEST_CASE("multiplier application") {
    const auto ps = circle2(16, 64);
    const auto tests = random_test_set(ps, 4);
    const CutoffSystem cs = make_partition_cutoffs();
    const MultiplierSpec mt = make_multiplier(m_tau_symbol({1, -1}), {1, -1}, {3, 3}, *ps);
    CHECK(mt.admissible);
    SUBCASE("identity") {
        const MultiplierSpec id = make_multiplier(one_symbol(), {0, 0}, {3, 3}, *ps);
        CHECK(apply_multiplier(id, tests[0]).coefs() == tests[0].coefs());
    }
    SUBCASE("dyadic series agrees with direct multiplication") {
        for (const CoefField& f : tests) {
            const Eigen::MatrixXd d = dyadic_series_apply(mt, cs, f, covering_levels(*ps)).coefs();
            CHECK((d - apply_multiplier(mt, f).coefs()).cwiseAbs().maxCoeff() < 1e-12);
        }
        CHECK_THROWS_AS(dyadic_series_apply(mt, make_orthogonal_cutoffs(), tests[0], {5, 5}), ConfigError);
    }
    SUBCASE("m_tau equals lifting") {
        for (const CoefField& f : tests)
            CHECK((apply_multiplier(mt, f).coefs() - lifting(f, {1, -1}).coefs()).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("lifting algebra") {
        const CoefField& f = tests[1];
        CHECK(lifting(f, {0, 0}).coefs() == f.coefs());
        CHECK((lifting(lifting(f, {1.5, -2}), {-1.5, 2}).coefs() - f.coefs()).cwiseAbs().maxCoeff() < 1e-14);
        CHECK((lifting(lifting(f, {1, 0.5}), {0.5, -2}).coefs() - lifting(f, {1.5, -1.5}).coefs())
                  .cwiseAbs()
                  .maxCoeff() < 1e-12);
    }
    SUBCASE("linear and commutes with projectors") {
        const CoefField a = apply_multiplier(mt, 2.0 * tests[0] + tests[1]);
        const CoefField b = 2.0 * apply_multiplier(mt, tests[0]) + apply_multiplier(mt, tests[1]);
        CHECK((a.coefs() - b.coefs()).cwiseAbs().maxCoeff() < 1e-12);
        const SpectralProjector e = spectral_projector(*ps, RectUnion::from_sqrt_box(0.0, 3.0, 1.0, 5.0));
        CHECK((e.apply(apply_multiplier(mt, tests[2])).coefs() - apply_multiplier(mt, e.apply(tests[2])).coefs())
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
    }
}

TEST_CASE("kappa thresholds") {
    const auto ps = circle2(8, 32);
    CHECK(kappa_threshold(*ps, space(Family::B, {0, 0}, 2, 2)) == Pair{2.5, 2.5});
    CHECK(kappa_threshold(*ps, space(Family::F, {0, 0}, 2, 1)) == Pair{3.5, 3.5});
    CHECK(kappa_threshold(*ps, space(Family::B, {1, -2}, 1, 2, SpaceKind::Nonclassical)) == Pair{4.5, 5.5});
    CHECK(kappa_threshold(*ps, space(Family::B, {0, 0}, INFINITY, 2)) == Pair{1.5, 1.5});
}

TEST_CASE("boundedness harness") {
    const auto ps = circle2(16, 64);
    const auto tests = random_test_set(ps, 20);
    const CutoffSystem cs = make_partition_cutoffs();
    SUBCASE("identity has constant one") {
        const MultiplierSpec id = make_multiplier(one_symbol(), {0, 0}, {4, 4}, *ps);
        for (const SpaceParams& sp : {space(Family::B, {0, 0}, 2, 2), space(Family::F, {1, -1}, 1, 0.5),
                                      space(Family::B, {1, 0}, 1, INFINITY, SpaceKind::Nonclassical)}) {
            const auto rep = multiplier_boundedness_harness(id, cs, tests, sp);
            CHECK(rep.measured_constant == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    SUBCASE("m_tau on B and F") {
        const MultiplierSpec mt = make_multiplier(m_tau_symbol({1, 1}), {1, 1}, {3, 3}, *ps);
        for (Family fam : {Family::B, Family::F}) {
            const auto rep = multiplier_boundedness_harness(mt, cs, tests, space(fam, {0, 0}, 2, 2));
            MESSAGE("family " << int(fam) << " c_emp = " << rep.measured_constant << " refined "
                              << rep.refined_constant << " informational " << rep.informational);
            CHECK(rep.pass());
            CHECK(!rep.informational);
        }
    }
    SUBCASE("raising the source smoothness does not increase c_emp") {
        const MultiplierSpec a = make_multiplier(m_tau_symbol({1, 1}), {1, 1}, {3, 3}, *ps);
        const MultiplierSpec b = make_multiplier(m_tau_symbol({1, 1}), {1.5, 2}, {3, 3}, *ps);
        const SpaceParams sp = space(Family::B, {0, 0}, 2, 2);
        CHECK(multiplier_boundedness_harness(b, cs, tests, sp).measured_constant <=
              multiplier_boundedness_harness(a, cs, tests, sp).measured_constant);
    }
    SUBCASE("nonclassical bump multiplier") {
        const MultiplierSpec bump = make_multiplier(bump_symbol(4.0), {0, 0}, {4, 4}, *ps);
        REQUIRE(bump.admissible);
        const auto rep =
            multiplier_boundedness_harness(bump, cs, tests, space(Family::B, {1, 0}, 2, 2, SpaceKind::Nonclassical));
        MESSAGE("c_emp = " << rep.measured_constant);
        CHECK(rep.pass());
        CHECK(!rep.informational);  // kappa 4 > |s| + 2/p + 3/2 = 3.5 on the first axis
        const MultiplierSpec mt = make_multiplier(m_tau_symbol({1, 1}), {1, 1}, {3, 3}, *ps);
        CHECK_THROWS_AS(
            multiplier_boundedness_harness(mt, cs, tests, space(Family::B, {1, 0}, 2, 2, SpaceKind::Nonclassical)),
            ConfigError);
    }
    SUBCASE("below threshold is informational") {
        const MultiplierSpec mt = make_multiplier(m_tau_symbol({1, 1}), {1, 1}, {2, 2}, *ps);
        CHECK(multiplier_boundedness_harness(mt, cs, tests, space(Family::B, {0, 0}, 2, 2)).informational);
    }
    CHECK_THROWS_AS(multiplier_boundedness_harness(make_multiplier(one_symbol(), {0, 0}, {3, 3}, *ps), cs, {},
                                                   space(Family::B, {0, 0}, 2, 2)),
                    ConfigError);
}

TEST_CASE("lifting norm equivalence") {
    const auto ps = circle2(16, 64);
    const auto tests = random_test_set(ps, 20);
    const CutoffSystem cs = make_partition_cutoffs();
    for (Family fam : {Family::B, Family::F}) {
        const auto rep = lifting_equivalence_report(cs, tests, {1, -1}, space(fam, {0.5, 0.5}, 2, 2));
        MESSAGE("band " << rep.value("ratio_lo") << " .. " << rep.value("ratio_hi") << " C " << rep.measured_constant
                        << " refined " << rep.refined_constant);
        CHECK(rep.pass());
    }
}
