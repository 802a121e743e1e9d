#include "lagdisc/basis.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace lagdisc;

namespace {

std::vector<BasisDescriptor> sample_descriptors() {
    using namespace basis;
    const auto x0 = coordinate(Slot::Position, 0, "X1");
    const auto v1 = coordinate(Slot::Velocity, 1, "X2");
    Atom sin_x0{x0, Func::Sin, 2.0};
    Atom cube_v1{v1, Func::Pow, 3.0};
    return {
        constant(),
        monomial(0, "X1", 3),
        difference_monomial(1, "X2", 0, "X1", 4),
        trig(Func::Cos, Slot::Position, 2, "X3", 1.0),
        trig(Func::Sin, Slot::Velocity, 0, "X1", 2.0),
        velocity_monomial(1, "X2", 3),
        kinetic(2, "X3"),
        abs_product(Slot::Position, difference(2, "X3", 1, "X2")),
        abs_value(Slot::Velocity, coordinate(Slot::Velocity, 0, "X1")),
        product(sin_x0, cube_v1),
        mean_monomial(Slot::Position, {0, 1, 2}, "X", 2),
        spatial_derivative_monomial(gradient_edge(1, 0.5), 1, 2, "u_x^2"),
        spatial_derivative_monomial(curvature(0, 0.5, true), 2, 2, "u_xx^2"),
    };
}

}  // namespace

TEST_CASE("descriptor partial derivatives match finite differences") {
    const std::vector<double> u{0.3, -0.7, 1.1}, v{-0.4, 0.9, 0.25};
    const double h = 1e-6;
    for (const auto& d : sample_descriptors()) {
        CAPTURE(d.label);
        for (std::size_t c = 0; c < 3; ++c) {
            auto up = u, um = u, vp = v, vm = v;
            up[c] += h;
            um[c] -= h;
            vp[c] += h;
            vm[c] -= h;
            const double du = (d.eval(up, v) - d.eval(um, v)) / (2 * h);
            const double dv = (d.eval(u, vp) - d.eval(u, vm)) / (2 * h);
            CHECK(d.d_du(c, u, v) == doctest::Approx(du).epsilon(1e-6).scale(1.0));
            CHECK(d.d_dut(c, u, v) == doctest::Approx(dv).epsilon(1e-6).scale(1.0));
            if (!d.involves(c)) {
                CHECK(d.d_du(c, u, v) == 0.0);
                CHECK(d.d_dut(c, u, v) == 0.0);
            }
        }
    }
}

TEST_CASE("descriptor values and labels") {
    using namespace basis;
    const std::vector<double> u{2.0, -1.0}, v{3.0, 0.5};
    const auto k = kinetic(0, "X");
    CHECK(k.label == "0.5*X_t^2");
    CHECK(k.eval(u, v) == doctest::Approx(4.5));
    CHECK(k.is_kinetic_of(0));
    CHECK_FALSE(k.is_kinetic_of(1));
    const auto d = difference_monomial(1, "X2", 0, "X1", 2);
    CHECK(d.label == "(X2-X1)^2");
    CHECK(d.eval(u, v) == doctest::Approx(9.0));
    CHECK(d.max_coord() == 1);
    const auto c = trig(Func::Cos, Slot::Position, 0, "theta", 1.0);
    CHECK(c.label == "cos(theta)");
    CHECK(c.eval(u, v) == doctest::Approx(std::cos(2.0)));
    CHECK(constant().eval(u, v) == 1.0);
    CHECK_FALSE(constant().depends_on_velocity());
    CHECK(velocity_monomial(0, "X", 1).depends_on_velocity());
    CHECK(basis::velocity_name("X") == "X_t");
}

TEST_CASE("atom derivatives stay inside the atom family") {
    const auto y = basis::coordinate(Slot::Position, 0, "X");
    for (const Atom& a : {Atom{y, Func::Pow, 3.0}, Atom{y, Func::Sin, 2.0}, Atom{y, Func::Cos, 1.5},
                          Atom{y, Func::AbsProduct, 1.0}, Atom{y, Func::Abs, 1.0}}) {
        CAPTURE(a.label());
        const auto [factor, da] = a.derivative();
        for (double x : {-0.8, 0.3, 1.7})
            CHECK(factor * da.value(x) == doctest::Approx(a.d1(x)).epsilon(1e-12));
    }
    CHECK(Atom{y, Func::Pow, 1.0}.is_linear());
    CHECK(Atom{y, Func::Pow, 0.0}.is_constant());
    const auto [zero, unused] = Atom{y, Func::Pow, 0.0}.derivative();
    (void)unused;
    CHECK(zero == 0.0);
}

TEST_CASE("spatial stencils read the right nodes") {
    const auto g = basis::gradient_edge(3, 0.1);
    CHECK(g.weight(3) == doctest::Approx(-10.0));
    CHECK(g.weight(4) == doctest::Approx(10.0));
    CHECK(g.weight(5) == 0.0);
    const auto root = basis::curvature(0, 0.1, true);
    CHECK(root.weight(0) == doctest::Approx(-200.0));
    CHECK(root.weight(1) == doctest::Approx(200.0));
    const auto mid = basis::curvature(4, 0.1, false);
    CHECK(mid.weight(3) == doctest::Approx(100.0));
    CHECK(mid.weight(4) == doctest::Approx(-200.0));
    CHECK(mid.weight(5) == doctest::Approx(100.0));
}

TEST_CASE("descriptors round-trip through JSON") {
    for (const auto& d : sample_descriptors()) {
        CAPTURE(d.label);
        const auto back = descriptor_from_json(to_json(d));
        CHECK(back.label == d.label);
        CHECK(back.family == d.family);
        CHECK(back.form == d.form);
        CHECK(to_json(back) == to_json(d));
        const std::vector<double> u{0.3, -0.7, 1.1}, v{-0.4, 0.9, 0.25};
        CHECK(back.eval(u, v) == d.eval(u, v));
    }
    CHECK(testing::error_kind([] { descriptor_from_json(nlohmann::json{{"form", "bogus"}}); }) ==
          ErrorKind::Schema);
}
