#pragma once

#include <string>
#include <vector>

#include "bispec/calculus.hpp"

namespace bispec {

/// Dyadic radii pi 2^-k on one factor, down to the first radius below half of
/// the narrowest cell (where the ball average is the point value).
std::vector<double> maximal_radii(const SpectralModel& m);

/// Strong maximal function: at each node, the max over radius pairs of
/// (average of |f|^r over B1(x1, r1) x B2(x2, r2))^(1/r).
GridValues strong_maximal(const ProductSpace& ps, const GridValues& f, double r);

enum class MaximalVariant { Plain, Aperture, Peetre };

struct MaximalParams {
    /// Dilations per axis. 0 stands for the t -> 0 limit, where
    /// exp(-t^2 L) f = f on the finite band.
    std::vector<double> t_axis;
    Pair a{1.0, 1.0};      // aperture
    Pair gamma{3.0, 3.0};  // Peetre exponent

    /// {0} and 2^k for k = -8..2.
    static MaximalParams defaults();
    /// Same span with twice the density (half-integer dyadic exponents).
    MaximalParams densified() const;
    void validate() const;
};

/// phi(t sqrt L) f on the grid for phi(l) = exp(-|l|^2), i.e. exp(-t1^2 L1 - t2^2 L2) f.
GridValues heat_smooth(const CoefField& cf, const Pair& t);

/// M(f; phi), M*_a(f; phi) or M**_gamma(f; phi), with the sup over t
/// restricted to the t-grid. The profile defaults to the Gaussian.
GridValues heat_maximal(const CoefField& cf, const MaximalParams& mp, MaximalVariant variant);
GridValues symbol_maximal(const CoefField& cf, const Symbol& phi, const MaximalParams& mp, MaximalVariant variant);

/// ||M(f; exp(-|.|^2))||_p.
double hp_quasinorm(const CoefField& cf, double p, const MaximalParams& mp = MaximalParams::defaults());

/// Five admissible profiles standing in for the grand maximal class: Gaussian,
/// exp(-2|l|^2), plateau bump, orthogonal-partition bump, cos(l1) cos(l2) exp(-|l|^2).
std::vector<Symbol> grand_maximal_surrogate();

/// Pairwise norm-ratio bands of M, M*_1, M**_gamma and the surrogate grand
/// maximal function over the test set. Compact models violate the infinite
/// measure assumption, so the report carries a regime flag.
VerificationReport hp_equivalence_report(const std::vector<CoefField>& tests, double p, const MaximalParams& mp);

/// ||f||_2 <= hp_quasinorm(f) and hp_quasinorm(f) / ||f||_2 bounded, stable
/// under grid refinement and t-grid densification.
VerificationReport hp_lebesgue_report(const std::vector<CoefField>& tests, const MaximalParams& mp);

/// Pointwise chain M <= M*_a <= (1 + a)^gamma M**_gamma over the test set.
VerificationReport maximal_ordering_report(const std::vector<CoefField>& tests, const MaximalParams& mp);

/// ||(sum M_r f_j^2)^1/2||_p / ||(sum f_j^2)^1/2||_p over families of grid functions.
VerificationReport fefferman_stein_report(const ProductSpace& ps, const std::vector<std::vector<GridValues>>& families,
                                          double p, double r);

}  // namespace bispec
