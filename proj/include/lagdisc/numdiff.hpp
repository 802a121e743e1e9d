#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

/// Finite-difference and three-point Lagrange derivative estimates on sampled series.
namespace lagdisc::numdiff {

struct StencilResult {
    double first_derivative = 0.0;
    double second_derivative = 0.0;
    int truncation_order = 2;         ///< of the first derivative
    int second_derivative_order = 2;  ///< 1 when the two steps differ
};

enum class Scheme {
    Central,  ///< second-order central, one-sided second-order at the ends
    Forward,  ///< first-order forward, backward at the last sample
};

std::vector<double> central_first_derivative(std::span<const double> series, double step);
std::vector<double> central_second_derivative(std::span<const double> series, double step);
std::vector<double> forward_first_derivative(std::span<const double> series, double step);

/// Writes d(series)/dt into out (same length) without allocating.
void time_derivative(std::span<const double> series, double step, Scheme scheme,
                     std::span<double> out);

int truncation_order(Scheme scheme);

/**
 * @brief Derivatives of the parabola through (eta_i, w0), (eta_i+h1, w1), (eta_i+h1+h2, w2).
 *
 * The evaluation point is eta_{i+1} + s*h1, so s = -1, 0 and h2/h1 select the three nodes.
 */
StencilResult lagrange_three_point(double w0, double w1, double w2, double h1, double h2, double s);

/// Fornberg weights for the derivative of the given order at x0 from samples at `nodes`.
std::vector<double> fd_weights(std::span<const double> nodes, double x0, int order);

/**
 * @brief Spatial derivatives of a field sampled as rows = grid nodes, cols = time.
 *
 * Returns grids for orders 1..max_order (element k holds order k+1). Interior rows use
 * central second-order stencils; rows too close to a boundary use shifted stencils of
 * the same order.
 */
std::vector<Eigen::MatrixXd> field_spatial_derivatives(const Eigen::MatrixXd& field, double dx,
                                                       int max_order);

}  // namespace lagdisc::numdiff
