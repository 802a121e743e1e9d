#pragma once

#include "lagdisc/library.hpp"
#include "lagdisc/regression.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lagdisc {

struct Term {
    BasisDescriptor basis;
    double coefficient = 0.0;
};

/// Lagrangian density discovered for one target coordinate.
struct ParticleLagrangian {
    std::size_t target = 0;
    SparseModel model;  ///< over the library without the kinetic column
    std::vector<std::string> reduced_labels;
    std::vector<Term> terms;  ///< kinetic term (coefficient 1) followed by the retained terms
    double label_rms = 0.0;
};

struct LagrangianModel {
    std::vector<ParticleLagrangian> particles;
    std::vector<Term> total;  ///< sum over particles; shared terms pooled by averaging
    std::vector<std::string> coord_names;
    double lambda = 0.0;

    std::string expression(int precision = 4) const;
    nlohmann::json to_json() const;
};

struct ParticleDiffusion {
    std::size_t target = 0;
    SparseModel model;
    std::vector<Term> terms;  ///< retained squared-gain terms
    std::string status;       ///< ok, empty, sign-error, unsupported
    double gain = 0.0;        ///< noise gain sqrt(beta) when status is ok
    std::string potential;    ///< Wiener potential, e.g. "1.0300*X"
    std::string squared_potential;
};

struct DiffusionModel {
    std::vector<std::string> library_labels;
    std::vector<ParticleDiffusion> particles;
    double lambda = 0.0;

    /// Gain of a target coordinate, or nullopt when it was not discovered.
    std::optional<double> gain_of(std::size_t coord) const;
    std::string expression(int precision = 4) const;
    nlohmann::json to_json() const;
};

/// Drift contribution coefficient * atom(y) on the left-hand side of u_tt + drift = gain W_t.
/// One term kappa * atom of the normal form u_tt + sum kappa * atom(u) = gain W_t.
struct EomTerm {
    double coefficient = 0.0;
    Atom atom;
    std::string label;
};

struct CoordinateEquation {
    std::size_t coord = 0;
    std::string name;
    std::vector<EomTerm> drift;
    double gain = 0.0;

    /// Acceleration -sum kappa * atom(u).
    double drift_value(std::span<const double> u) const;
    std::string text(int precision = 4) const;
    std::map<std::string, double> parameters() const;
};

/// Pooled field equation u_tt + sum kappa_op * op(u) = gain W_t.
struct FieldEquation {
    std::map<std::string, double> operators;  ///< "u", "u^3", "u_xx", "u_xxxx"
    double gain = 0.0;
    std::string text(int precision = 4) const;
    std::map<std::string, double> parameters() const;
};

struct EquationsOfMotion {
    std::vector<CoordinateEquation> equations;
    std::optional<FieldEquation> field;

    /// Field equation parameters when present, else every coordinate's parameters prefixed
    /// with "<coord>:".
    std::map<std::string, double> parameters() const;
    std::string text(int precision = 4) const;
    nlohmann::json to_json() const;
};

struct HamiltonianModel {
    std::vector<Term> terms;

    double evaluate(std::span<const double> u, std::span<const double> v) const;
    std::string expression(int precision = 4) const;
    nlohmann::json to_json() const;
};

struct DiscoveryOptions {
    double lambda = 1.0;
    int max_iter = 20;
    bool standardize = true;
    double rank_tolerance = 0.0;  ///< see StlsOptions::rank_tolerance
    std::optional<numdiff::Scheme> scheme;  ///< acceleration stencil; default by ensemble type
};

/// Algorithm: per target EL transform, kinetic split, STLS on label = -features * C.
LagrangianModel discover_lagrangian(const Ensemble& e, const std::vector<CandidateLibrary>& libs,
                                    const DiscoveryOptions& opts);

/// Second-moment regression dt * E[r^2] = E[G] beta on the EL residual r of each particle.
DiffusionModel discover_diffusion(const Ensemble& e, const LagrangianModel& lagrangian,
                                  const std::vector<BasisDescriptor>& library,
                                  const DiscoveryOptions& opts);

/// Builds the total Lagrangian from per-particle terms (kinetic terms keep coefficient 1).
std::vector<Term> pool_terms(const std::vector<ParticleLagrangian>& particles);

EquationsOfMotion derive_equations_of_motion(const LagrangianModel& lagrangian,
                                             const DiffusionModel& diffusion);
EquationsOfMotion derive_equations_of_motion(const std::vector<Term>& lagrangian,
                                             const std::vector<std::string>& coord_names,
                                             const std::map<std::size_t, double>& gains,
                                             const std::vector<std::size_t>& coords,
                                             bool field);

HamiltonianModel legendre_transform(const std::vector<Term>& lagrangian);
HamiltonianModel legendre_transform(const LagrangianModel& lagrangian);
/// L = sum p u_t - H for the quadratic-kinetic family (inverse of legendre_transform).
std::vector<Term> induced_lagrangian(const HamiltonianModel& h);

/// 100 * |theta - theta*| / |theta| over the union of parameter names.
double relative_error(const std::map<std::string, double>& truth,
                      const std::map<std::string, double>& discovered);

/// Signed sum "c1*label1 + c2*label2 ..." with unit coefficients printed bare.
std::string format_terms(const std::vector<Term>& terms, int precision);
/// Reads coefficients of format_terms output back; `labels` are the candidate term labels.
std::map<std::string, double> parse_terms(const std::string& text,
                                          const std::vector<std::string>& labels);

}  // namespace lagdisc
