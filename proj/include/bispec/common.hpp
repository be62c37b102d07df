#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace bispec {

/// Per-axis pair of reals: radii, dilations, smoothness indices, ...
using Pair = std::array<double, 2>;
/// Per-axis pair of integers: dyadic levels, derivative orders, ...
using IPair = std::array<int, 2>;

/// Function sampled on the product grid: rows follow the nodes of the first
/// factor, columns the nodes of the second.
using GridValues = Eigen::MatrixXd;

/// Raised for invalid parameters and violated preconditions.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a request refers to modes beyond the retained eigen band.
class BandOverflow : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

inline constexpr double kPi = 3.14159265358979323846;

inline bool positive(const Pair& p) { return p[0] > 0.0 && p[1] > 0.0; }

/// Number of worker threads used by grid sweeps (OpenMP when available).
void set_num_threads(int n);
int num_threads();

}  // namespace bispec
