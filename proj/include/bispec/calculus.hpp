#pragma once

#include <array>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bispec/product.hpp"

namespace bispec {

/// A function on the product grid represented by its coefficients in the
/// tensor eigenbasis: f = sum_{k,l} c(k, l) e1_k (x) e2_l.
class CoefField {
public:
    CoefField(ProductSpacePtr space, Eigen::MatrixXd coefs);

    const ProductSpace& space() const { return *space_; }
    const ProductSpacePtr& space_ptr() const { return space_; }
    const Eigen::MatrixXd& coefs() const { return coefs_; }

    /// L2 norm; equals the weighted grid norm of the synthesized function.
    double l2_norm() const { return coefs_.norm(); }

    CoefField with_coefs(Eigen::MatrixXd coefs) const { return {space_, std::move(coefs)}; }

    friend CoefField operator+(const CoefField& a, const CoefField& b);
    friend CoefField operator-(const CoefField& a, const CoefField& b);
    friend CoefField operator*(double s, const CoefField& a);

private:
    ProductSpacePtr space_;
    Eigen::MatrixXd coefs_;
};

/// Tensor eigenfunction e1_k (x) e2_l as a coefficient field.
CoefField mode_field(const ProductSpacePtr& ps, int k, int l);

CoefField analyze(const ProductSpacePtr& ps, const GridValues& f);
GridValues synthesize(const CoefField& cf);

/// Smoothness order used for C-infinity symbols.
inline constexpr int kSmoothOrder = 1 << 20;

/// A two-variable spectral function F(lambda1, lambda2), evaluated at the
/// square roots of the eigenvalues.
struct Symbol {
    std::string name;
    std::function<double(double, double)> eval;
    bool even = true;                  // F(+-l1, +-l2) = F(l1, l2)
    std::optional<Pair> support_box;   // F vanishes outside [-a, a] x [-b, b]
    IPair smoothness{0, 0};            // continuous derivatives per axis
    std::optional<double> decay_r;     // |F| <= c (1 + |lambda|)^-r
    bool zero_mode_excluded = false;   // drop the (0, 0) eigenvalue pair
    /// Half-width of the Fourier support of the first-axis profile at unit
    /// dilation, when that profile is band limited in Fourier space.
    std::optional<double> fourier_support;
    /// F1, F2 with F = F1(l1) F2(l2), when the symbol is a tensor product.
    std::optional<std::array<std::function<double(double)>, 2>> factors;

    double operator()(double l1, double l2) const { return eval(l1, l2); }
};

Symbol one_symbol();
/// exp(-l1^2 - l2^2).
Symbol gaussian_symbol();
/// exp(-t1 l1^2 - t2 l2^2); at sqrt-eigenvalues this is e^{-t1 L1 - t2 L2}.
Symbol heat_symbol(const Pair& t);
/// plateau(l1 / scale) plateau(l2 / scale): C-infinity, 1 on [-scale, scale]^2,
/// supported in [-2 scale, 2 scale]^2.
Symbol bump_symbol(double scale = 1.0);
/// sinc(A l1 / m)^(2m) exp(-l2^2). The first-axis profile has Fourier
/// support [-2A, 2A]; m = 1 is the Fejer kernel.
Symbol fejer_symbol(double a, int order = 4);
/// F1(l1) F2(l2).
Symbol separable_symbol(std::string name, std::function<double(double)> f1, std::function<double(double)> f2,
                        IPair smoothness = {kSmoothOrder, kSmoothOrder});
/// Pointwise product.
Symbol product_symbol(const Symbol& a, const Symbol& b);

/// G(k, l) = F(delta1 sqrt(lambda1_k), delta2 sqrt(lambda2_l)), with the (0,0)
/// eigenvalue pair zeroed for zero-mode-excluded symbols.
Eigen::MatrixXd symbol_matrix(const ProductSpace& ps, const Symbol& F, const Pair& delta = {1.0, 1.0});

/// Coefficient-wise multiplication by F(sqrt L1, sqrt L2).
CoefField apply_symbol(const Symbol& F, const CoefField& cf, const Pair& delta = {1.0, 1.0});

/// sup over the spectrum outside the retained band of |F(delta lambda)|,
/// sampled on [0, 4 R1] x [0, 4 R2] minus the band box plus far-field rays.
double truncation_tail(const ProductSpace& ps, const Symbol& F, const Pair& delta);

/// One row K(x0, .) of an operator kernel on the product grid.
struct KernelSlice {
    ProductPoint anchor;
    GridValues values;
    Pair delta{1.0, 1.0};
    double tail_bound = 0.0;
    bool truncation_flag = false;  // tail bound above 1e-8 sup|F|

    /// Integral of the slice against the product measure.
    double mass(const ProductSpace& ps) const;
    void write_csv(const ProductSpace& ps, std::ostream& os) const;
};

/// Product heat kernel p_t(x, .) = p_{1,t1}(x1, .) p_{2,t2}(x2, .).
KernelSlice heat_kernel(const ProductSpace& ps, const Pair& t, const ProductPoint& x);

/// Kernel of F(delta sqrt L) anchored at x. Requires an even symbol.
KernelSlice kernel_of_symbol(const ProductSpace& ps, const Symbol& F, const Pair& delta, const ProductPoint& x);

/// Kernel of a univariate F(delta sqrt L_i) on one factor, anchored at x.
Eigen::VectorXd kernel_1d(const SpectralModel& m, const std::function<double(double)>& F, double delta, double x);

/// Half-open rectangle [lo1, hi1) x [lo2, hi2) in the eigenvalues of (L1, L2).
struct Rect {
    double lo1 = 0.0;
    double hi1 = std::numeric_limits<double>::infinity();
    double lo2 = 0.0;
    double hi2 = std::numeric_limits<double>::infinity();

    bool contains(double l1, double l2) const { return lo1 <= l1 && l1 < hi1 && lo2 <= l2 && l2 < hi2; }
    bool empty() const { return !(lo1 < hi1 && lo2 < hi2); }
};

/// Finite union of rectangles; membership is a set predicate, so overlaps are
/// never double-counted.
struct RectUnion {
    std::vector<Rect> rects;

    bool contains(double l1, double l2) const;
    RectUnion intersect(const RectUnion& other) const;
    /// Box [a1, b1) x [a2, b2) given in sqrt(L) units.
    static RectUnion from_sqrt_box(double a1, double b1, double a2, double b2);
};

/// E(S) for a finite union S of rectangles: a 0/1 coefficient mask.
class SpectralProjector {
public:
    explicit SpectralProjector(Eigen::MatrixXd mask) : mask_(std::move(mask)) {}

    const Eigen::MatrixXd& mask() const { return mask_; }
    CoefField apply(const CoefField& cf) const;
    /// Composition E(S) E(R).
    SpectralProjector then(const SpectralProjector& other) const;
    SpectralProjector operator+(const SpectralProjector& other) const;
    bool operator==(const SpectralProjector& other) const { return mask_ == other.mask_; }

private:
    Eigen::MatrixXd mask_;
};

SpectralProjector spectral_projector(const ProductSpace& ps, const RectUnion& rects);

/// Fits |K(x, y)| <= c D_{delta,k}(x, y) on a kernel slice, measures the
/// per-axis log-log decay slope of the kernel envelope, and the Holder
/// surrogate constant on nearest-neighbour pairs.
VerificationReport localization_fit(const ProductSpace& ps, const Symbol& F, const Pair& delta, const IPair& k_target,
                                    double slope_slack = 0.5);

/// Kernel of a Fourier-band-limited symbol must vanish beyond the propagation
/// radius fourier_support * t1 along the first (circle) axis.
VerificationReport finite_speed_check(const ProductSpace& ps, const Symbol& F, const Pair& t);

/// Smallest rho such that |K| / peak < level for all first-axis distances
/// beyond rho (on the slice through the anchor).
double kernel_crossing_radius(const ProductSpace& ps, const Symbol& F, const Pair& t, double level);

}  // namespace bispec
