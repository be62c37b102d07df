#pragma once

#include <array>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "bispec/calculus.hpp"

namespace bispec {

enum class CutoffKind {
    Partition,            // phi0 + sum phi(2^-n .) = 1
    OrthogonalPartition,  // phi0^2 + sum phi(2^-n .)^2 = 1
};

/// Dyadic blocks indexed by rectangles (j1, j2) or by a single radial level.
enum class Flavor { Mixed, Ordinary };

/// Per-axis cutoff pairs (phi0, phi). Both built-in systems also satisfy the
/// norm-admissibility lower bounds; c_hat records the measured bound.
struct CutoffSystem {
    std::string name;
    CutoffKind kind = CutoffKind::Partition;
    std::array<std::function<double(double)>, 2> phi0;
    std::array<std::function<double(double)>, 2> phi;
    double c_hat = 0.0;

    bool norm_admissible() const { return c_hat > 0.0; }
    /// phi_j(t): phi0(t) for j = 0, phi(2^-j t) otherwise.
    double level(int axis, int j, double t) const;
};

/// phi0 = C-infinity plateau (1 on [-1, 1], supported in [-2, 2]),
/// phi(t) = phi0(t) - phi0(2t).
CutoffSystem make_partition_cutoffs();
/// psi0(t) = cos(pi/2 s(|t| - 1)) with s the smooth step; psi^2 = psi0^2 - psi0(2.)^2.
CutoffSystem make_orthogonal_cutoffs();

/// min of |phi0| on [-5/3, 5/3] and of |phi| on [3/5, 5/3] over a dense grid.
double admissibility_bound(const CutoffSystem& cs);
/// max over a dense t-grid of |1 - sum_{j<=levels} phi_j(t)| (or of squares).
double partition_defect(const CutoffSystem& cs, int levels, double t_max);

struct LPBlock {
    IPair j;  // ordinary blocks carry their level on both axes
    CoefField field;
};

/// Symbol of block j: phi_j1(l1) phi_j2(l2) (mixed) or phi_j(|l|) (ordinary).
Symbol block_symbol(const CutoffSystem& cs, const IPair& j, Flavor flavor);

/// All blocks j in [0, J1] x [0, J2] (mixed) or j in [0, max J] (ordinary).
std::vector<LPBlock> lp_blocks(const CutoffSystem& cs, const CoefField& cf, const IPair& J,
                               Flavor flavor = Flavor::Mixed);

/// Synthesized block, touching only the modes where the block is nonzero.
GridValues synthesize_block(const CoefField& block);

/// ||f - sum_{j <= J} phi_j(sqrt L) f||_2 / ||f||_2 (0 for f = 0).
double calderon_residual(const CutoffSystem& cs, const CoefField& cf, const IPair& J);

/// Smallest J with 2^(J-1) >= band radius on each axis.
IPair covering_levels(const ProductSpace& ps);

/// (j1, j2, ||block||_2) rows.
void write_block_energies(const std::vector<LPBlock>& blocks, std::ostream& os);

/// Zeroes coefficients with sqrt-eigenvalues outside [0, t1] x [0, t2].
CoefField band_project(const CoefField& cf, const Pair& t);
bool in_spectral_space(const CoefField& cf, const Pair& t);

/// Weighted grid L^p norm (p = inf: grid max).
double grid_norm(const ProductSpace& ps, const GridValues& f, double p);

/// Per-node V_i(x, r)^gamma on one factor.
Eigen::VectorXd volume_power(const SpectralModel& m, double r, double gamma);

struct NikolskiParams {
    double p = 1.0;
    double q = INFINITY;
    Pair gamma{0.0, 0.0};
    IPair nu{0, 0};

    void validate() const;
};

/// c_emp = ||V(., 1/t)^gamma L^nu g||_q / (t^(2 nu) ||V(., 1/t)^(gamma + 1/q - 1/p) g||_p).
/// Throws ConfigError unless g lies in the spectral space of t and t >= 1.
double nikolski_ratio(const CoefField& g, const Pair& t, const NikolskiParams& np);
VerificationReport nikolski_check(const CoefField& g, const Pair& t, const NikolskiParams& np);

/// Test set in the spectral space of t: tensor modes from a thinned index list
/// and plateau-cut band kernels at two anchors, scaled to fill the box.
std::vector<CoefField> nikolski_test_set(const ProductSpacePtr& ps, const Pair& t);

/// Sweeps t over {2^0..2^max_level}^2. c(t) is the max of the ratio over the
/// test set; the check asserts that the envelope max_{t' <= t} c(t') has
/// saturated (last doubling adds < 10%) and that the sweep constant is stable
/// under a 2x grid refinement.
VerificationReport nikolski_sweep(const ProductSpacePtr& ps, const NikolskiParams& np, int max_level = 5);

struct PeetreParams {
    Pair gamma{0.0, 0.0};
    Pair tau{3.0, 3.0};
    double r = 1.0;
    IPair nu{0, 0};
};

/// LHS*(x) = max_y V(y, 1/t)^gamma |g(y)| prod (1 + t_i rho_i)^(-tau_i / r).
GridValues peetre_lhs(const ProductSpace& ps, const GridValues& g, const Pair& t, const PeetreParams& pp);

/// Pointwise ratios LHS* / M_r(V^gamma g) over the test fields at one t, with
/// the left half (t^-2nu LHS*(L^nu g) <= c LHS*(g)) when nu != 0. Reports one
/// global c and its value on the 2x refined grid.
VerificationReport peetre_check(const std::vector<CoefField>& tests, const Pair& t, const PeetreParams& pp);

}  // namespace bispec
