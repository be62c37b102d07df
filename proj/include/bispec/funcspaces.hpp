#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bispec/lpdecomp.hpp"

namespace bispec {

enum class Family { B, F };
/// Classical: weight 2^(j.s). Nonclassical: pointwise V(x, 2^-j)^(-s/d).
enum class SpaceKind { Classical, Nonclassical };

struct SpaceParams {
    Pair s{0.0, 0.0};  // ordinary spaces use s[0]
    double p = 2.0;
    double q = 2.0;
    Family family = Family::B;
    SpaceKind kind = SpaceKind::Classical;
    Flavor flavor = Flavor::Mixed;
    IPair J{-1, -1};  // negative: picked from the band (covering_levels)

    void validate() const;
    std::string label() const;
};

/// J with the automatic choice resolved against the space.
IPair resolve_levels(const ProductSpace& ps, const SpaceParams& sp);

/// Synthesized blocks of one field, reusable across norm parameters.
class Decomposition {
public:
    Decomposition(const CutoffSystem& cs, const CoefField& cf, const IPair& J, Flavor flavor);

    Flavor flavor() const { return flavor_; }
    const IPair& levels() const { return J_; }
    /// Besov or Triebel-Lizorkin norm over the blocks j <= sp.J.
    double norm(const SpaceParams& sp) const;

private:
    ProductSpacePtr ps_;
    Flavor flavor_;
    IPair J_;
    std::vector<IPair> j_;
    std::vector<GridValues> blocks_;
};

double besov_norm(const CutoffSystem& cs, const CoefField& cf, const SpaceParams& sp);
double tl_norm(const CutoffSystem& cs, const CoefField& cf, const SpaceParams& sp);
/// Dispatches on sp.family.
double space_norm(const CutoffSystem& cs, const CoefField& cf, const SpaceParams& sp);

/// P_{m,k}(f) = max_x prod (1 + rho_i(x_i, x0_i))^k max_{0 <= nu_i <= m} |L^nu f(x)|.
double test_norm(const CoefField& cf, int m, int k, const ProductPoint& x0);

/// count fields with coefficients u / ((1 + k)(1 + l)), u uniform on (-1, 1).
std::vector<CoefField> random_test_set(const ProductSpacePtr& ps, int count = 20, unsigned seed = 20240611);

/// Same coefficients on the 2x refined grid.
std::vector<CoefField> rehost_refined(const std::vector<CoefField>& tests);

/// c_emp = max ||f||_target / ||f||_source. Without a target space the target
/// is L^p (source must be classical mixed B with s > 0); otherwise both are
/// mixed B of the same kind with p <= r, q <= tau and s/d - 1/p = s'/d - 1/r.
VerificationReport embedding_check(const CutoffSystem& cs, const std::vector<CoefField>& tests,
                                   const SpaceParams& source, const std::optional<SpaceParams>& target);

/// Ratio band of norm_A / norm_B over the test set, with C = max(hi, 1/lo)
/// required stable under J -> J + (2, 2) and under grid refinement.
VerificationReport cutoff_independence_check(const CutoffSystem& a, const CutoffSystem& b,
                                             const std::vector<CoefField>& tests, const SpaceParams& sp);

struct NormRow {
    std::string function_id;
    SpaceParams params;
    double value = 0.0;
};

/// CSV: function_id,family,kind,flavor,s1,s2,p,q,J1,J2,value.
void write_norm_table(const std::vector<NormRow>& rows, std::ostream& os);

}  // namespace bispec
