#pragma once

#include <vector>

#include "bispec/funcspaces.hpp"

namespace bispec {

/// A symbol together with the class M(tau, kappa) it is claimed to belong to.
/// `admissible` is set by make_multiplier from the derivative scan.
struct MultiplierSpec {
    Symbol m;
    Pair tau{0.0, 0.0};
    IPair kappa{3, 3};
    bool admissible = false;
};

/// (1 + l1^2)^(tau1/2) (1 + l2^2)^(tau2/2); at sqrt-eigenvalues this is
/// (I + L1)^(tau1/2) (I + L2)^(tau2/2).
Symbol m_tau_symbol(const Pair& tau);

/// Finite-difference scan of |d^beta m| / ((1 + l1)^(tau1 - b1) (1 + l2)^(tau2 - b2))
/// for every beta <= kappa on a grid over [0, R1] x [0, R2], R = lambda_max.
/// Stencils are central binomial differences with steps h (1 + l_i), h growing
/// with the order and halved (up to four times) until h and h/2 agree. Each
/// c_beta must be finite, agree with its value at h/2 (Richardson check) and
/// with the scan over [0, 2R] (range check) to 10%.
VerificationReport multiplier_admissible_check(const Symbol& m, const Pair& tau, const IPair& kappa,
                                               const Pair& lambda_max);

/// Runs the scan over twice the band of ps and records the outcome.
MultiplierSpec make_multiplier(const Symbol& m, const Pair& tau, const IPair& kappa, const ProductSpace& ps);

/// m(sqrt L) f by coefficient multiplication.
CoefField apply_multiplier(const MultiplierSpec& spec, const CoefField& cf);
/// sum_{j <= J} (m phi_j)(sqrt L) f; equals apply_multiplier once J covers the band.
CoefField dyadic_series_apply(const MultiplierSpec& spec, const CutoffSystem& cs, const CoefField& cf, const IPair& J);

/// Coefficients times (1 + lambda1_k)^(tau1/2) (1 + lambda2_l)^(tau2/2).
CoefField lifting(const CoefField& cf, const Pair& tau);

/// Smallest admissible kappa bound: kappa_i must exceed 2 d_i / p + 3 d_i / 2
/// (B), with min(p, q) for F, plus |s_i| for nonclassical spaces.
Pair kappa_threshold(const ProductSpace& ps, const SpaceParams& target);

/// c_emp = max ||m(sqrt L) f||_target / ||f||_source. Classical: source has
/// smoothness s + tau. Nonclassical: source = target and tau must vanish.
/// Below the kappa threshold the run is informational.
VerificationReport multiplier_boundedness_harness(const MultiplierSpec& spec, const CutoffSystem& cs,
                                                  const std::vector<CoefField>& tests, const SpaceParams& target);

/// Band of ||lifting(tau) f||_{s - tau} / ||f||_s, C = max(hi, 1/lo),
/// stable under grid refinement.
VerificationReport lifting_equivalence_report(const CutoffSystem& cs, const std::vector<CoefField>& tests,
                                              const Pair& tau, const SpaceParams& sp);

}  // namespace bispec
