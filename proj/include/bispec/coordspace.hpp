#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bispec/common.hpp"

namespace bispec {

enum class ModelKind { Circle, Jacobi };

/// Parameters that rebuild a model; used for grid-refinement sweeps.
struct ModelRecipe {
    ModelKind kind = ModelKind::Circle;
    int n_modes = 32;
    int n_nodes = 128;
    double alpha = 0.0;  // Jacobi weight exponent at x = 1
    double beta = 0.0;   // Jacobi weight exponent at x = -1
};

/// One coordinate space: a truncated eigen-decomposition of a non-negative
/// self-adjoint operator sampled on a quadrature grid, together with the
/// metric and volume machinery of the underlying doubling space.
///
/// Points are coordinates in the domain: the angle in [0, 2pi) for the
/// circle, x in [-1, 1] for the Jacobi interval. Volumes are computed by
/// quadrature: every node owns a cell (an interval in the metric's arc-length
/// coordinate) carrying its weight uniformly, and a ball collects the covered
/// fraction of each cell.
class SpectralModel {
public:
    const std::string& name() const { return name_; }
    const ModelRecipe& recipe() const { return recipe_; }
    double dim_d() const { return dim_d_; }
    double holder_alpha() const { return holder_alpha_; }

    /// Number of retained eigenpairs.
    int band_size() const { return static_cast<int>(sqrt_eig_.size()); }
    int node_count() const { return static_cast<int>(nodes_.size()); }

    const Eigen::VectorXd& sqrt_eigenvalues() const { return sqrt_eig_; }
    Eigen::VectorXd eigenvalues() const { return sqrt_eig_.array().square(); }
    const Eigen::VectorXd& nodes() const { return nodes_; }
    const Eigen::VectorXd& weights() const { return weights_; }
    /// E(k, m) = e_k(node_m).
    const Eigen::MatrixXd& eigenfunctions() const { return eigfun_; }

    /// Largest retained sqrt-eigenvalue.
    double band_radius() const { return sqrt_eig_.maxCoeff(); }
    double total_measure() const { return weights_.sum(); }
    double diameter() const { return kPi; }

    double distance(double x, double y) const;
    /// Pairwise node distances.
    const Eigen::MatrixXd& node_distances() const { return node_dist_; }

    /// All retained eigenfunctions evaluated at an arbitrary domain point.
    Eigen::VectorXd basis_at(double x) const;

    /// V(x, r) = mu(B(x, r)).
    double ball_volume(double x, double r) const;
    /// Per-node share of the ball B(x, r): weight times covered cell fraction.
    Eigen::VectorXd ball_weights(double x, double r) const;

    /// Width (in the metric coordinate) of the narrowest node cell.
    double min_cell_width() const;

    /// The same model with twice as many quadrature nodes.
    SpectralModel refined() const;

    /// Discretized operator on node samples, exact on polynomials (Jacobi)
    /// or trigonometric polynomials (circle) of degree below the node count.
    Eigen::MatrixXd operator_matrix() const;

    /// max_{k,l} |sum_m w_m E(k,m) E(l,m) - delta_kl|.
    double orthonormality_residual() const;

    friend SpectralModel make_circle(int, int);
    friend SpectralModel make_jacobi(int, double, double, int);

private:
    SpectralModel() = default;
    double metric_coord(double x) const;
    void finish();

    std::string name_;
    ModelRecipe recipe_;
    double dim_d_ = 1.0;
    double holder_alpha_ = 1.0;
    Eigen::VectorXd sqrt_eig_;
    Eigen::VectorXd nodes_;
    Eigen::VectorXd weights_;
    Eigen::MatrixXd eigfun_;
    Eigen::MatrixXd node_dist_;
    Eigen::VectorXd cell_lo_;  // cell bounds in the metric coordinate
    Eigen::VectorXd cell_hi_;
};

/// L = -d^2/dtheta^2 on [0, 2pi): eigenfunctions 1/sqrt(2pi), cos(k.)/sqrt(pi),
/// sin(k.)/sqrt(pi) for frequencies k < n_modes, on n_nodes uniform nodes.
SpectralModel make_circle(int n_modes, int n_nodes);

/// Jacobi operator on [-1, 1] with weight (1-x)^alpha (1+x)^beta and metric
/// |arccos x - arccos y|; orthonormal Jacobi polynomials of degree < n_modes on
/// an n_nodes-point Gauss-Jacobi rule (n_nodes <= 0 selects 2 * n_modes).
SpectralModel make_jacobi(int n_modes, double alpha, double beta, int n_nodes = 0);

SpectralModel make_model(const ModelRecipe& recipe);

/// Gauss-Jacobi nodes (ascending) and weights for (1-x)^alpha (1+x)^beta.
std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_jacobi(int n, double alpha, double beta);

struct DoublingFit {
    double c0 = 0.0;     // max V(x, 2r) / V(x, r)
    double d_est = 0.0;  // max over x of the log-log slope of V(x, lambda r)
};

DoublingFit doubling_fit(const SpectralModel& model);

/// Ratio band [min, max] of V(x, r) / [r (1-x+r^2)^(alpha+1/2) (1+x+r^2)^(beta+1/2)]
/// over all nodes and a dyadic radius sweep in (0, pi]. Jacobi models only.
std::pair<double, double> jacobi_volume_ratio_band(const SpectralModel& model);

}  // namespace bispec
