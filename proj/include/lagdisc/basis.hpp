#pragma once

#include <json.hpp>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace lagdisc {

/// Whether a linear form reads displacements or velocities.
enum class Slot { Position, Velocity };

/// y = sum_k w_k q_k over displacements (or velocities) of the listed coordinates.
struct LinearForm {
    Slot slot = Slot::Position;
    std::vector<std::pair<std::size_t, double>> terms;
    std::string label;
    bool compound = false;  ///< label needs parentheses when raised to a power

    double weight(std::size_t coord) const;
    double eval(std::span<const double> state) const;
    bool operator==(const LinearForm& o) const;
};

enum class Func { Pow, Sin, Cos, AbsProduct, Abs, Sign };

/// Scalar function of a linear form: Pow(p) y^p, Sin(w) sin(w y), Cos(w) cos(w y),
/// AbsProduct y|y|, Abs |y|, Sign sgn(y).
struct Atom {
    LinearForm form;
    Func func = Func::Pow;
    double param = 1.0;

    double value(double y) const;
    double d1(double y) const;
    double d2(double y) const;
    /// d/dy of this atom as (factor, atom); the factor is 0 when the derivative vanishes.
    std::pair<double, Atom> derivative() const;
    /// True when the atom is y^1 (its second derivative vanishes identically).
    bool is_linear() const { return func == Func::Pow && param == 1.0; }
    bool is_constant() const;
    std::string label() const;
    bool operator==(const Atom& o) const;
};

enum class Form {
    Constant,
    Monomial,
    DifferenceMonomial,
    Trig,
    VelocityMonomial,
    SpatialDerivativeMonomial,
    AbsProduct,
    Abs,
    Product,
    MeanMonomial,
};

const char* to_string(Form f);

/**
 * @brief Candidate energy term D = scale * F(y) * G(z).
 *
 * F is an optional atom over displacements and G an optional atom over velocities; a missing
 * atom counts as 1. Partial derivatives in u and u_t are again of this form, which is what the
 * Euler-Lagrange operator needs.
 */
struct BasisDescriptor {
    Form form = Form::Constant;
    double scale = 1.0;
    std::optional<Atom> pos;
    std::optional<Atom> vel;
    std::string label;
    std::string family;  ///< label with node indices removed, used to pool field terms

    double eval(std::span<const double> u, std::span<const double> v) const;
    double d_du(std::size_t coord, std::span<const double> u, std::span<const double> v) const;
    double d_dut(std::size_t coord, std::span<const double> u, std::span<const double> v) const;
    bool involves(std::size_t coord) const;
    /// Largest coordinate index referenced (0 for the constant).
    std::size_t max_coord() const;
    bool depends_on_velocity() const { return vel.has_value(); }
    bool is_kinetic_of(std::size_t coord) const;
};

nlohmann::json to_json(const LinearForm& f);
nlohmann::json to_json(const Atom& a);
nlohmann::json to_json(const BasisDescriptor& b);
BasisDescriptor descriptor_from_json(const nlohmann::json& j);

/// Builders for the descriptor family. `name` is the displacement name of the coordinate.
namespace basis {

BasisDescriptor constant();
BasisDescriptor monomial(std::size_t coord, const std::string& name, int degree);
BasisDescriptor difference_monomial(std::size_t a, const std::string& name_a, std::size_t b,
                                    const std::string& name_b, int degree);
BasisDescriptor trig(Func kind, Slot slot, std::size_t coord, const std::string& name,
                     double frequency);
BasisDescriptor velocity_monomial(std::size_t coord, const std::string& name, int degree,
                                  double scale = 1.0);
/// 0.5 * u_t^2 of one coordinate.
BasisDescriptor kinetic(std::size_t coord, const std::string& name);
BasisDescriptor abs_product(Slot slot, const LinearForm& form);
BasisDescriptor abs_value(Slot slot, const LinearForm& form);
/// F(positions) * G(velocities).
BasisDescriptor product(const Atom& pos, const Atom& vel);
/// (mean over coords of u or u_t)^degree.
BasisDescriptor mean_monomial(Slot slot, const std::vector<std::size_t>& coords,
                              const std::string& name, int degree);
BasisDescriptor spatial_derivative_monomial(const LinearForm& stencil, int order, int degree,
                                            const std::string& family);

LinearForm coordinate(Slot slot, std::size_t coord, const std::string& name);
LinearForm difference(std::size_t a, const std::string& name_a, std::size_t b,
                      const std::string& name_b);
/// Forward edge derivative (u[e+1] - u[e]) / dx, labelled u_x[e].
LinearForm gradient_edge(std::size_t e, double dx);
/// Three-point curvature at node j, labelled u_xx[j]. With clamped_root, node 0 uses the
/// mirrored ghost value u[-1] = u[1].
LinearForm curvature(std::size_t j, double dx, bool clamped_root);

std::string velocity_name(const std::string& name);

}  // namespace basis

}  // namespace lagdisc
