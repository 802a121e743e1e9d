#include "lagdisc/numdiff.hpp"

#include "lagdisc/error.hpp"

#include <algorithm>
#include <cmath>

namespace lagdisc::numdiff {

namespace {

void check_step(double step) {
    require(step > 0.0 && std::isfinite(step), ErrorKind::InvalidArgument,
            "derivative step must be positive and finite");
}

}  // namespace

std::vector<double> central_first_derivative(std::span<const double> series, double step) {
    std::vector<double> out(series.size());
    time_derivative(series, step, Scheme::Central, out);
    return out;
}

std::vector<double> central_second_derivative(std::span<const double> series, double step) {
    check_step(step);
    const std::size_t n = series.size();
    require(n >= 3, ErrorKind::InvalidArgument, "second derivative needs at least 3 samples");
    std::vector<double> out(n);
    const double h2 = step * step;
    for (std::size_t i = 1; i + 1 < n; ++i)
        out[i] = (series[i + 1] - 2.0 * series[i] + series[i - 1]) / h2;
    if (n >= 4) {
        out[0] = (2.0 * series[0] - 5.0 * series[1] + 4.0 * series[2] - series[3]) / h2;
        out[n - 1] = (2.0 * series[n - 1] - 5.0 * series[n - 2] + 4.0 * series[n - 3] -
                      series[n - 4]) / h2;
    } else {
        out[0] = out[1];
        out[2] = out[1];
    }
    return out;
}

std::vector<double> forward_first_derivative(std::span<const double> series, double step) {
    std::vector<double> out(series.size());
    time_derivative(series, step, Scheme::Forward, out);
    return out;
}

void time_derivative(std::span<const double> series, double step, Scheme scheme,
                     std::span<double> out) {
    check_step(step);
    const std::size_t n = series.size();
    require(out.size() == n, ErrorKind::InvalidArgument, "output length mismatch");
    if (scheme == Scheme::Forward) {
        require(n >= 2, ErrorKind::InvalidArgument, "forward difference needs at least 2 samples");
        for (std::size_t i = 0; i + 1 < n; ++i) out[i] = (series[i + 1] - series[i]) / step;
        out[n - 1] = (series[n - 1] - series[n - 2]) / step;
        return;
    }
    require(n >= 3, ErrorKind::InvalidArgument, "central difference needs at least 3 samples");
    const double h2 = 2.0 * step;
    for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (series[i + 1] - series[i - 1]) / h2;
    out[0] = (-3.0 * series[0] + 4.0 * series[1] - series[2]) / h2;
    out[n - 1] = (3.0 * series[n - 1] - 4.0 * series[n - 2] + series[n - 3]) / h2;
}

int truncation_order(Scheme scheme) { return scheme == Scheme::Central ? 2 : 1; }

StencilResult lagrange_three_point(double w0, double w1, double w2, double h1, double h2,
                                   double s) {
    require(h1 > 0.0 && h2 > 0.0, ErrorKind::InvalidArgument,
            "Lagrange steps must be positive");
    StencilResult r;
    const double sum = h1 + h2;
    r.first_derivative = (2.0 * s * h1 - h2) / (h1 * sum) * w0 -
                         ((2.0 * s + 1.0) * h1 - h2) / (h1 * h2) * w1 +
                         (2.0 * s + 1.0) * h1 / (h2 * sum) * w2;
    r.second_derivative = 2.0 * (h2 * w0 - sum * w1 + h1 * w2) / (h1 * h2 * sum);
    r.truncation_order = 2;
    r.second_derivative_order = h1 == h2 ? 2 : 1;
    return r;
}

std::vector<double> fd_weights(std::span<const double> nodes, double x0, int order) {
    const int n = static_cast<int>(nodes.size());
    require(order >= 0 && n > order, ErrorKind::InvalidArgument,
            "stencil needs more nodes than the derivative order");
    // Fornberg (1988) recursion.
    std::vector<std::vector<double>> c(n, std::vector<double>(order + 1, 0.0));
    double c1 = 1.0;
    double c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, order);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = nodes[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = c[i][order];
    return w;
}

std::vector<Eigen::MatrixXd> field_spatial_derivatives(const Eigen::MatrixXd& field, double dx,
                                                       int max_order) {
    check_step(dx);
    require(max_order >= 1 && max_order <= 4, ErrorKind::InvalidArgument,
            "spatial derivative order must be in 1..4");
    const long n = field.rows();
    require(n >= max_order + 1, ErrorKind::InvalidArgument,
            "grid too small for the requested derivative order");
    std::vector<Eigen::MatrixXd> out;
    for (int d = 1; d <= max_order; ++d) {
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, field.cols());
        const long half = (d + 1) / 2;
        const long shifted = std::min<long>(n, d + 2);
        for (long i = 0; i < n; ++i) {
            long start, size;
            if (i - half >= 0 && i + half < n) {
                start = i - half;
                size = 2 * half + 1;
            } else {
                size = shifted;
                start = std::clamp<long>(i - size / 2, 0, n - size);
            }
            std::vector<double> nodes(size);
            for (long k = 0; k < size; ++k) nodes[k] = static_cast<double>(start + k - i);
            const auto w = fd_weights(nodes, 0.0, d);
            const double scale = std::pow(dx, -d);
            for (long k = 0; k < size; ++k) g.row(i) += (w[k] * scale) * field.row(start + k);
        }
        out.push_back(std::move(g));
    }
    return out;
}

}  // namespace lagdisc::numdiff
