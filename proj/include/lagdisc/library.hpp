#pragma once

#include "lagdisc/basis.hpp"
#include "lagdisc/numdiff.hpp"
#include "lagdisc/sim.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace lagdisc {

/// Candidate Lagrangian terms serving one target coordinate.
struct CandidateLibrary {
    std::vector<BasisDescriptor> bases;
    std::size_t kinetic_index = 0;
    std::size_t target_coord = 0;

    std::size_t size() const { return bases.size(); }
    std::optional<std::size_t> find(const std::string& label) const;
    std::vector<std::string> labels() const;
    /// Checks the kinetic index, unique labels and m >= 2.
    void validate() const;
};

/**
 * @brief Switches for the default Lagrangian library compositions.
 *
 * Single-coordinate systems: constant, u^1..u^position_degree, u|u| and u_t|u_t| (abs_terms),
 * cos(u) (position_trig), 1/2 u_t^2, odd u_t powers up to velocity_degree, sin/cos(k u_t) for
 * k <= trig_harmonics, u^p u_t for p <= gauge_degree, and u_t sin(u), u_t cos(u), u_t|u|,
 * u_t u|u| (gauge_mixed).
 *
 * Chains: per coordinate u^1..u^position_degree, u|u|, 1/2 u_t^2, odd u_t powers, sin/cos(k u_t),
 * u^p u_t; adjacent differences of degree 2..difference_degree and their abs-products, the
 * end-to-end difference in even degrees, a constant, and cyclic u_i u_t(i+1) (gauge_mixed).
 *
 * Fields: over the sensor window [window_first, window_last]: 1/2 u_t^2, u^2, optionally u^4,
 * (u_xx)^2 and a constant; (u_x)^2 on every edge touching the window.
 */
struct LibraryOptions {
    int position_degree = 3;
    int velocity_degree = 5;
    int trig_harmonics = 3;
    bool position_trig = true;
    bool abs_terms = true;
    int gauge_degree = 4;
    bool gauge_mixed = true;
    bool constant = true;
    int difference_degree = 4;
    std::size_t window_first = 9;
    std::size_t window_last = 92;
    bool field_quartic = false;
    bool field_curvature = false;
};

LibraryOptions default_library_options(const std::string& system);

/// One library per discovery target (every particle, or field nodes inside the window).
std::vector<CandidateLibrary> build_lagrangian_library(const SystemSpec& spec,
                                                       const LibraryOptions& opts);

/**
 * @brief Diffusion (squared-gain) candidates shared by all targets.
 *
 * Family tokens: "1", "u", "u_t", "u^2", "u*u_t", "u^3", "u_t^2", "u_t^3", "|u|", "u|u|", "sin(u)",
 * "sin(u_t)", "cos(u_t)", "u_t|u_t|", "(u_n-u_1)^2" (chains), "mean(u)^2" (fields).
 * Per-coordinate tokens are expanded over coordinates node_first..node_last (all by default).
 */
struct DiffusionOptions {
    std::vector<std::string> families;
    std::optional<std::size_t> node_first;
    std::optional<std::size_t> node_last;
};

DiffusionOptions default_diffusion_options(const std::string& system);
std::vector<BasisDescriptor> build_diffusion_library(const SystemSpec& spec,
                                                     const DiffusionOptions& opts);

/// Ensemble-expected Euler-Lagrange columns, N_t x m.
struct ElFeatureMatrix {
    Eigen::MatrixXd values;
    std::vector<std::string> labels;
};

/// D evaluated along realization r.
std::vector<double> eval_basis(const BasisDescriptor& b, const Ensemble& e, std::size_t r);

/// Ensemble mean of each descriptor at every sample, N_t x m.
Eigen::MatrixXd expected_bases(const std::vector<BasisDescriptor>& bases, const Ensemble& e);

/**
 * @brief Acceleration stencil used for the momentum derivative.
 *
 * Central suits smooth Taylor-scheme data; forward differencing is exact for the semi-implicit
 * Euler-Maruyama update and is also the Ito increment used for diffusion residuals.
 */
numdiff::Scheme default_acceleration_scheme(const Ensemble& e);

/**
 * @brief E[d/dt dD/du_t - dD/du] for the library's target coordinate.
 *
 * d/dt dD/du_t is expanded by the chain rule with the acceleration estimated from the velocity
 * series; descriptors not involving the target produce exact zero columns.
 */
ElFeatureMatrix el_transform(const CandidateLibrary& lib, const Ensemble& e,
                             numdiff::Scheme scheme);
ElFeatureMatrix el_transform(const CandidateLibrary& lib, const Ensemble& e);

/// Per-realization EL residual of sum_j coef_j D_j for `target` at every sample.
void el_residual(const std::vector<BasisDescriptor>& terms, const std::vector<double>& coefs,
                 std::size_t target, const Ensemble& e, std::size_t r, numdiff::Scheme scheme,
                 std::span<double> out);

struct KineticSplit {
    Eigen::VectorXd label;     ///< EL column of 1/2 u_t^2
    Eigen::MatrixXd features;  ///< remaining columns; label = -features * C
    std::vector<std::string> labels;
    std::vector<std::size_t> columns;  ///< library index of each feature column
};

KineticSplit split_kinetic(const ElFeatureMatrix& fm, const CandidateLibrary& lib);

nlohmann::json library_to_json(const CandidateLibrary& lib);

}  // namespace lagdisc
