#pragma once

#include <vector>

#include "bispec/lpdecomp.hpp"

namespace bispec::cli {

/// Doubling fit of one factor: d_est within 0.1 of d on the circle and the
/// Chebyshev interval, d_est <= d + 0.1 on other Jacobi weights.
VerificationReport doubling_report(const SpectralModel& m);

/// |mass of p_t(x, .) - 1| for t in {0.02, 2^-5, ..., 4} per axis at three anchors.
VerificationReport markov_report(const ProductSpace& ps, double tol);

/// |mass of K_{F(delta sqrt L)}(x, .) - F(0, 0)| for the Gaussian and the
/// bump at delta in {(1, 1), (1/4, 1/2)}.
VerificationReport kernel_mass_report(const ProductSpace& ps, double tol);

/// E(S)^2 = E(S) and E(S) E(R) = E(S n R) as mask equalities over random
/// unions of up to three rectangles.
VerificationReport projector_algebra_report(const ProductSpace& ps, int pairs, unsigned seed);

/// Reproducing-formula residual at the covering levels.
VerificationReport calderon_report(const CutoffSystem& cs, const std::vector<CoefField>& tests, double tol);

/// lifting(tau) after lifting(-tau) returns the coefficients exactly.
VerificationReport lifting_inverse_report(const std::vector<CoefField>& tests, const Pair& tau);

}  // namespace bispec::cli
