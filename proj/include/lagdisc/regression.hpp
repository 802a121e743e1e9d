#pragma once

#include <Eigen/Dense>

#include <vector>

namespace lagdisc {

struct SparseModel {
    Eigen::VectorXd coefficients;
    std::vector<std::size_t> active_set;
    int iterations_used = 0;
    double residual_norm = 0.0;
    bool converged = true;
    bool empty = false;  ///< every coefficient was thresholded away
};

struct StlsOptions {
    double lambda = 0.0;
    int max_iter = 20;
    /// Threshold on coefficients of unit-RMS columns (reported coefficients stay in the
    /// original scale). When false, lambda applies to raw coefficients.
    bool standardize = true;
    /// Columns whose RMS is at most this fraction of the label RMS are treated as zero.
    double zero_tolerance = 1e-10;
    /// Singular values of the active (standardized) columns below this fraction of the largest
    /// are truncated; 0 keeps the full numerical rank (solved by COD).
    double rank_tolerance = 0.0;
};

/// Minimum-norm least-squares solution (COD, or truncated SVD when rank_tolerance > 0).
Eigen::VectorXd least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                              double rank_tolerance = 0.0);

/**
 * @brief Sequential threshold least squares.
 *
 * Repeats {least squares on the active columns, drop coefficients with |c| < lambda} until the
 * active set stops changing or max_iter solves were spent; the returned coefficients are the
 * unthresholded fit on the final support.
 */
SparseModel stls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double lambda,
                 int max_iter = 20);
SparseModel stls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const StlsOptions& opts);

/// STLS for several labels sharing one feature matrix; the first solve is factorized once.
std::vector<SparseModel> stls_batch(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                    const StlsOptions& opts);

}  // namespace lagdisc
