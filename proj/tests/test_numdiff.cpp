#include "lagdisc/numdiff.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace lagdisc;
using namespace lagdisc::numdiff;

namespace {

std::vector<double> sample(double (*f)(double), double h, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = f(static_cast<double>(i) * h);
    return out;
}

double quad(double t) { return 3.0 * t * t - 2.0 * t + 1.0; }
double cubic(double t) { return t * t * t - t; }

}  // namespace

TEST_CASE("central first derivative is exact on quadratics including the ends") {
    const double h = 0.1;
    const auto y = sample(quad, h, 11);
    const auto d = central_first_derivative(y, h);
    for (std::size_t i = 0; i < y.size(); ++i)
        CHECK(d[i] == doctest::Approx(6.0 * i * h - 2.0).epsilon(1e-12));
}

TEST_CASE("forward difference reproduces linear slopes and repeats the last step") {
    const std::vector<double> y{1.0, 3.0, 5.0, 6.0};
    const auto d = forward_first_derivative(y, 0.5);
    CHECK(d[0] == doctest::Approx(4.0));
    CHECK(d[1] == doctest::Approx(4.0));
    CHECK(d[2] == doctest::Approx(2.0));
    CHECK(d[3] == doctest::Approx(2.0));
}

TEST_CASE("central second derivative is exact on cubics including the ends") {
    const double h = 0.05;
    const auto y = sample(cubic, h, 21);
    const auto d = central_second_derivative(y, h);
    for (std::size_t i = 0; i < y.size(); ++i)
        CHECK(d[i] == doctest::Approx(6.0 * i * h).epsilon(1e-9));
}

TEST_CASE("declared orders of the time stencils") {
    CHECK(truncation_order(Scheme::Central) == 2);
    CHECK(truncation_order(Scheme::Forward) == 1);
}

TEST_CASE("time derivative rejects bad steps, short series and mismatched output") {
    std::vector<double> y{1.0, 2.0, 3.0}, out(3), shorter(2);
    CHECK(testing::error_kind([&] { time_derivative(y, 0.0, Scheme::Central, out); }) ==
          ErrorKind::InvalidArgument);
    CHECK(testing::error_kind([&] { time_derivative(y, 0.1, Scheme::Central, shorter); }) ==
          ErrorKind::InvalidArgument);
    std::vector<double> two{1.0, 2.0}, out2(2);
    CHECK(testing::error_kind([&] { time_derivative(two, 0.1, Scheme::Central, out2); }) ==
          ErrorKind::InvalidArgument);
    CHECK_FALSE(testing::error_kind([&] { time_derivative(two, 0.1, Scheme::Forward, out2); }));
}

TEST_CASE("three-point Lagrange stencil reproduces a parabola on uneven steps") {
    const double h1 = 0.2, h2 = 0.35, x0 = -0.4;
    auto f = [](double x) { return 2.0 * x * x + 0.5 * x - 1.0; };
    const double w0 = f(x0), w1 = f(x0 + h1), w2 = f(x0 + h1 + h2);
    for (double s : {-1.0, 0.0, 0.4, h2 / h1}) {
        const double x = x0 + h1 + s * h1;
        const auto r = lagrange_three_point(w0, w1, w2, h1, h2, s);
        CHECK(r.first_derivative == doctest::Approx(4.0 * x + 0.5).epsilon(1e-12));
        CHECK(r.second_derivative == doctest::Approx(4.0).epsilon(1e-12));
    }
    CHECK(lagrange_three_point(w0, w1, w2, h1, h2, 0.0).second_derivative_order == 1);
    CHECK(lagrange_three_point(w0, w1, w2, h1, h1, 0.0).second_derivative_order == 2);
}

TEST_CASE("three-point Lagrange stencil reduces to the standard equal-step stencils") {
    const double h = 0.1, w0 = 0.3, w1 = -0.2, w2 = 0.7;
    const auto mid = lagrange_three_point(w0, w1, w2, h, h, 0.0);
    CHECK(mid.first_derivative == doctest::Approx((w2 - w0) / (2 * h)));
    CHECK(mid.second_derivative == doctest::Approx((w0 - 2 * w1 + w2) / (h * h)));
    const auto left = lagrange_three_point(w0, w1, w2, h, h, -1.0);
    CHECK(left.first_derivative == doctest::Approx((-3 * w0 + 4 * w1 - w2) / (2 * h)));
    CHECK(testing::error_kind([] { lagrange_three_point(0, 0, 0, 0.0, 0.1, 0.0); }) ==
          ErrorKind::InvalidArgument);
}

TEST_CASE("Fornberg weights match the classical stencils") {
    const std::vector<double> three{-1.0, 0.0, 1.0}, five{-2.0, -1.0, 0.0, 1.0, 2.0};
    const auto d1 = fd_weights(three, 0.0, 1);
    CHECK(d1[0] == doctest::Approx(-0.5));
    CHECK(d1[1] == doctest::Approx(0.0));
    CHECK(d1[2] == doctest::Approx(0.5));
    const auto d4 = fd_weights(five, 0.0, 4);
    const double expect4[] = {1.0, -4.0, 6.0, -4.0, 1.0};
    for (int i = 0; i < 5; ++i) CHECK(d4[i] == doctest::Approx(expect4[i]));
    const auto d0 = fd_weights(three, 0.5, 0);
    CHECK(d0[0] + d0[1] + d0[2] == doctest::Approx(1.0));
    CHECK(testing::error_kind([&] { fd_weights(three, 0.0, 3); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("field spatial derivatives are exact on low-degree polynomials") {
    const long n = 12;
    const double dx = 0.1;
    Eigen::MatrixXd field(n, 2);
    for (long i = 0; i < n; ++i) {
        const double x = static_cast<double>(i) * dx;
        field(i, 0) = x * x;
        field(i, 1) = x * x * x;
    }
    const auto g = field_spatial_derivatives(field, dx, 4);
    REQUIRE(g.size() == 4);
    for (long i = 0; i < n; ++i) {
        const double x = static_cast<double>(i) * dx;
        CHECK(g[0](i, 0) == doctest::Approx(2 * x).epsilon(1e-9));
        CHECK(g[1](i, 0) == doctest::Approx(2.0).epsilon(1e-9));
        CHECK(g[1](i, 1) == doctest::Approx(6 * x).epsilon(1e-9));
        CHECK(g[2](i, 1) == doctest::Approx(6.0).epsilon(1e-7));
        CHECK(std::abs(g[3](i, 1)) < 1e-5);
    }
    CHECK(testing::error_kind([&] { field_spatial_derivatives(field, dx, 5); }) ==
          ErrorKind::InvalidArgument);
    CHECK(testing::error_kind([&] { field_spatial_derivatives(field.topRows(3), dx, 3); }) ==
          ErrorKind::InvalidArgument);
}
