#include "lagdisc/regression.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace lagdisc;

namespace {

Eigen::MatrixXd random_matrix(long rows, long cols, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Eigen::MatrixXd A(rows, cols);
    for (long i = 0; i < rows; ++i)
        for (long j = 0; j < cols; ++j) A(i, j) = g(rng);
    return A;
}

}  // namespace

TEST_CASE("unthresholded STLS is ordinary least squares") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 10; ++trial) {
        const auto A = random_matrix(80, 12, rng);
        const Eigen::VectorXd b = random_matrix(80, 1, rng);
        const auto ref = oracle::normal_equations(A, b);
        const auto m = stls(A, b, 0.0);
        CHECK((m.coefficients - ref).norm() <= 1e-10 * ref.norm());
        CHECK(m.active_set.size() == 12);
        CHECK(m.converged);
        CHECK((least_squares(A, b) - ref).norm() <= 1e-10 * ref.norm());
    }
}

TEST_CASE("STLS recovers a sparse support from noisy data") {
    std::mt19937_64 rng(2);
    const auto A = random_matrix(400, 15, rng);
    Eigen::VectorXd truth = Eigen::VectorXd::Zero(15);
    truth(2) = 1.5;
    truth(7) = -0.8;
    truth(11) = 2.0;
    const Eigen::VectorXd b = A * truth + 0.01 * random_matrix(400, 1, rng);
    const auto m = stls(A, b, 0.1);
    CHECK(m.active_set == std::vector<std::size_t>{2, 7, 11});
    for (long j = 0; j < 15; ++j)
        CHECK(m.coefficients(j) == doctest::Approx(truth(j)).epsilon(0.01).scale(1.0));
    CHECK_FALSE(m.empty);
    CHECK(m.residual_norm == doctest::Approx((A * m.coefficients - b).norm()));
}

TEST_CASE("threshold applies to standardized columns unless disabled") {
    std::mt19937_64 rng(3);
    Eigen::MatrixXd A = random_matrix(300, 2, rng);
    A.col(1) *= 100.0;  // large column with a small raw coefficient but a large effect
    const Eigen::VectorXd b = A.col(0) * 1.0 + A.col(1) * 0.05;
    StlsOptions o;
    o.lambda = 0.5;
    const auto scaled = stls(A, b, o);
    CHECK(scaled.active_set == std::vector<std::size_t>{0, 1});
    o.standardize = false;
    const auto raw = stls(A, b, o);
    CHECK(raw.active_set == std::vector<std::size_t>{0});
    CHECK(raw.coefficients(1) == 0.0);
}

TEST_CASE("a threshold above every coefficient gives an empty model") {
    std::mt19937_64 rng(4);
    const auto A = random_matrix(50, 4, rng);
    const Eigen::VectorXd b = A * Eigen::VectorXd::Constant(4, 0.1);
    const auto m = stls(A, b, 10.0);
    CHECK(m.empty);
    CHECK(m.active_set.empty());
    CHECK(m.coefficients.isZero());
}

TEST_CASE("zero columns never enter the support") {
    std::mt19937_64 rng(5);
    Eigen::MatrixXd A = random_matrix(60, 3, rng);
    A.col(1).setZero();
    const Eigen::VectorXd b = A.col(0) - A.col(2);
    const auto m = stls(A, b, 0.0);
    CHECK(m.active_set == std::vector<std::size_t>{0, 2});
    CHECK(m.coefficients(1) == 0.0);
}

TEST_CASE("collinear columns get the minimum-norm split") {
    std::mt19937_64 rng(6);
    Eigen::MatrixXd A(100, 3);
    A.col(0) = random_matrix(100, 1, rng);
    A.col(1) = A.col(0);
    A.col(2) = random_matrix(100, 1, rng);
    const Eigen::VectorXd b = 2.0 * A.col(0) + A.col(2);
    const auto cod = least_squares(A, b);
    CHECK(cod(0) == doctest::Approx(1.0));
    CHECK(cod(1) == doctest::Approx(1.0));
    CHECK(cod(2) == doctest::Approx(1.0));
    const auto svd = least_squares(A, b, 1e-9);
    CHECK((svd - cod).norm() < 1e-10);
    // Near-collinear direction: truncation removes the amplified noise component.
    Eigen::MatrixXd B = A;
    B.col(1) += 1e-7 * random_matrix(100, 1, rng);
    const Eigen::VectorXd y = 2.0 * B.col(0) + B.col(2) + 1e-3 * random_matrix(100, 1, rng);
    const auto truncated = least_squares(B, y, 1e-4);
    CHECK(std::abs(truncated(0) - truncated(1)) < 1e-3);
    CHECK(std::abs(least_squares(B, y)(0) - least_squares(B, y)(1)) > 1.0);
}

TEST_CASE("batch STLS matches per-label STLS") {
    std::mt19937_64 rng(7);
    const auto A = random_matrix(120, 8, rng);
    const auto B = random_matrix(120, 3, rng);
    StlsOptions o;
    o.lambda = 0.05;
    const auto batch = stls_batch(A, B, o);
    REQUIRE(batch.size() == 3);
    for (long k = 0; k < 3; ++k) {
        const auto single = stls(A, B.col(k), o);
        CHECK(batch[k].active_set == single.active_set);
        CHECK((batch[k].coefficients - single.coefficients).norm() < 1e-12);
    }
}

TEST_CASE("invalid inputs are rejected") {
    const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(4, 2);
    const Eigen::VectorXd b = Eigen::VectorXd::Ones(4);
    CHECK(testing::error_kind([&] { stls(A, b, -1.0); }) == ErrorKind::InvalidArgument);
    CHECK(testing::error_kind([&] { stls(A, b, 0.1, 0); }) == ErrorKind::InvalidArgument);
    StlsOptions o;
    o.rank_tolerance = 1.0;
    CHECK(testing::error_kind([&] { stls(A, b, o); }) == ErrorKind::InvalidArgument);
    CHECK(testing::error_kind([&] { stls(A, Eigen::VectorXd::Ones(3), 0.1); }) ==
          ErrorKind::InvalidArgument);
    Eigen::MatrixXd bad = A;
    bad(0, 0) = std::nan("");
    CHECK(testing::error_kind([&] { stls(bad, b, 0.1); }) == ErrorKind::Numerical);
    CHECK(testing::error_kind([&] { least_squares(A, Eigen::VectorXd::Ones(5)); }) ==
          ErrorKind::InvalidArgument);
}
