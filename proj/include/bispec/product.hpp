#pragma once

#include <memory>
#include <vector>

#include "bispec/coordspace.hpp"
#include "bispec/report.hpp"

namespace bispec {

/// A point of X = X1 x X2 in domain coordinates.
struct ProductPoint {
    double x1 = 0.0;
    double x2 = 0.0;
};

/// Product of two coordinate spaces with the max-metric and product measure.
/// The grid is the Cartesian product of the factor node lists; grid values are
/// stored as (nodes of factor 1) x (nodes of factor 2) matrices.
class ProductSpace {
public:
    ProductSpace(SpectralModel m1, SpectralModel m2);

    const SpectralModel& m1() const { return m1_; }
    const SpectralModel& m2() const { return m2_; }
    const SpectralModel& factor(int i) const { return i == 0 ? m1_ : m2_; }

    Pair d_pair() const { return {m1_.dim_d(), m2_.dim_d()}; }
    int rows() const { return m1_.node_count(); }
    int cols() const { return m2_.node_count(); }
    Eigen::Index grid_size() const { return Eigen::Index(rows()) * cols(); }

    /// w(m, n) = w1(m) w2(n).
    GridValues product_weights() const { return m1_.weights() * m2_.weights().transpose(); }
    double total_measure() const { return m1_.total_measure() * m2_.total_measure(); }

    ProductPoint node(int i, int j) const { return {m1_.nodes()(i), m2_.nodes()(j)}; }
    double distance(const ProductPoint& x, const ProductPoint& y) const;

    /// Both factors rebuilt with twice as many nodes.
    ProductSpace refined() const { return {m1_.refined(), m2_.refined()}; }

private:
    SpectralModel m1_;
    SpectralModel m2_;
};

using ProductSpacePtr = std::shared_ptr<const ProductSpace>;

ProductSpacePtr make_product(SpectralModel m1, SpectralModel m2);

/// Parameters of the kernels D*_{delta,sigma} and D_{delta,sigma}.
struct DKernelParams {
    Pair delta{1.0, 1.0};
    Pair sigma{1.0, 1.0};

    void validate() const;
};

/// V(x, delta) = V1(x1, delta1) V2(x2, delta2).
double rect_volume(const ProductSpace& ps, const ProductPoint& x, const Pair& delta);
/// V(x, delta)^gamma = V1^gamma1 V2^gamma2.
double rect_volume_pow(const ProductSpace& ps, const ProductPoint& x, const Pair& delta, const Pair& gamma);

/// prod_i (1 + rho_i(x_i, y_i) / delta_i)^(-sigma_i).
double dstar(const ProductSpace& ps, const DKernelParams& params, const ProductPoint& x, const ProductPoint& y);
/// D*_{delta,sigma}(x, y) / sqrt(V(x, delta) V(y, delta)).
double dkernel(const ProductSpace& ps, const DKernelParams& params, const ProductPoint& x, const ProductPoint& y);

enum class IntegralEstimate { SingleKernel, Composition, VolumeComposition, CrossScale };

/// Measures the constant of one of the integral estimates over a fixed set of
/// (at most 64) sample points and checks it is stable under a 2x refinement
/// of both quadrature grids.
VerificationReport verify_integral_estimate(const ProductSpace& ps, const DKernelParams& params,
                                            IntegralEstimate which);

/// All four estimates. Throws ConfigError if sigma <= d; the sigma > 2d
/// estimates are reported as informational skips when sigma <= 2d.
std::vector<VerificationReport> verify_integral_estimates(const ProductSpace& ps, const DKernelParams& params);

/// Constant c in V(x, lambda delta) <= c lambda^d V(x, delta), lambda >= 1.
VerificationReport verify_rect_doubling(const ProductSpace& ps);

/// Constant c in V(x, delta) <= c V(y, delta) prod_i (1 + rho_i / delta_i)^d_i.
VerificationReport verify_center_change(const ProductSpace& ps);

/// Fixed sample points of a factor: eight points spread over the domain,
/// including the endpoints of the Jacobi interval.
Eigen::VectorXd sample_points(const SpectralModel& m, int count = 8);

}  // namespace bispec
