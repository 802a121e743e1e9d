#include "lagdisc/regression.hpp"

#include "lagdisc/error.hpp"

#include <cmath>

namespace lagdisc {

namespace {

void check_finite(const Eigen::MatrixXd& A, const char* what) {
    require(A.allFinite(), ErrorKind::Numerical, std::string(what) + " contains non-finite entries");
}

double rms(const Eigen::VectorXd& x) {
    return x.size() == 0 ? 0.0 : x.norm() / std::sqrt(static_cast<double>(x.size()));
}

Eigen::MatrixXd columns(const Eigen::MatrixXd& A, const std::vector<std::size_t>& idx,
                        const Eigen::VectorXd& inv_scale) {
    Eigen::MatrixXd S(A.rows(), static_cast<long>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const long j = static_cast<long>(idx[k]);
        S.col(static_cast<long>(k)) = A.col(j) * inv_scale(j);
    }
    return S;
}

struct Prepared {
    Eigen::VectorXd scale;      ///< column RMS (or 1 without standardization)
    Eigen::VectorXd inv_scale;
    std::vector<std::size_t> nonzero;
};

Prepared prepare(const Eigen::MatrixXd& A, double label_rms, const StlsOptions& o) {
    Prepared p;
    const long m = A.cols();
    p.scale = Eigen::VectorXd::Ones(m);
    p.inv_scale = Eigen::VectorXd::Ones(m);
    for (long j = 0; j < m; ++j) {
        const double s = rms(A.col(j));
        if (s == 0.0 || s <= o.zero_tolerance * label_rms) continue;
        if (o.standardize) {
            p.scale(j) = s;
            p.inv_scale(j) = 1.0 / s;
        }
        p.nonzero.push_back(static_cast<std::size_t>(j));
    }
    return p;
}

/// Continues STLS from a solution c (in standardized units) on `active`.
SparseModel iterate(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Prepared& p,
                    std::vector<std::size_t> active, Eigen::VectorXd c, int used,
                    const StlsOptions& o) {
    SparseModel model;
    model.converged = false;
    while (true) {
        std::vector<std::size_t> kept;
        std::vector<double> kept_c;
        for (std::size_t k = 0; k < active.size(); ++k)
            if (!(std::abs(c(static_cast<long>(k))) < o.lambda)) {
                kept.push_back(active[k]);
                kept_c.push_back(c(static_cast<long>(k)));
            }
        if (kept.size() == active.size()) {
            model.converged = true;
            break;
        }
        active = std::move(kept);
        if (active.empty()) {
            model.converged = true;
            c.resize(0);
            break;
        }
        if (used >= o.max_iter) {
            // Out of budget: refit once on the current support.
            c = least_squares(columns(A, active, p.inv_scale), b, o.rank_tolerance);
            ++used;
            break;
        }
        c = least_squares(columns(A, active, p.inv_scale), b, o.rank_tolerance);
        ++used;
    }
    model.iterations_used = used;
    model.coefficients = Eigen::VectorXd::Zero(A.cols());
    for (std::size_t k = 0; k < active.size(); ++k) {
        const long j = static_cast<long>(active[k]);
        model.coefficients(j) = c(static_cast<long>(k)) * p.inv_scale(j);
    }
    model.active_set = active;
    model.empty = active.empty();
    model.residual_norm = (A * model.coefficients - b).norm();
    return model;
}

SparseModel empty_model(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
    SparseModel m;
    m.coefficients = Eigen::VectorXd::Zero(A.cols());
    m.empty = true;
    m.residual_norm = b.norm();
    return m;
}

void check_options(const StlsOptions& o) {
    require(o.lambda >= 0.0 && std::isfinite(o.lambda), ErrorKind::InvalidArgument,
            "threshold must be a finite non-negative number");
    require(o.max_iter >= 1, ErrorKind::InvalidArgument, "max_iter must be at least 1");
    require(o.rank_tolerance >= 0.0 && o.rank_tolerance < 1.0, ErrorKind::InvalidArgument,
            "rank tolerance must lie in [0, 1)");
}

/// Full-rank problems use COD; a positive rank tolerance truncates singular values instead.
Eigen::MatrixXd solve(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double rank_tolerance) {
    if (rank_tolerance > 0.0) {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
        svd.setThreshold(rank_tolerance);
        return svd.solve(B);
    }
    return Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(A).solve(B);
}

}  // namespace

Eigen::VectorXd least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                              double rank_tolerance) {
    require(A.rows() == b.size(), ErrorKind::InvalidArgument, "least squares shape mismatch");
    check_finite(A, "least-squares matrix");
    require(b.allFinite(), ErrorKind::Numerical, "least-squares label contains non-finite entries");
    if (A.cols() == 0) return Eigen::VectorXd(0);
    return solve(A, b, rank_tolerance);
}

SparseModel stls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double lambda, int max_iter) {
    StlsOptions o;
    o.lambda = lambda;
    o.max_iter = max_iter;
    return stls(A, b, o);
}

SparseModel stls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const StlsOptions& o) {
    check_options(o);
    require(A.rows() == b.size(), ErrorKind::InvalidArgument, "STLS shape mismatch");
    check_finite(A, "STLS feature matrix");
    require(b.allFinite(), ErrorKind::Numerical, "STLS label contains non-finite entries");
    if (b.isZero(0.0)) return empty_model(A, b);
    const auto p = prepare(A, rms(b), o);
    if (p.nonzero.empty()) return empty_model(A, b);
    Eigen::VectorXd c = least_squares(columns(A, p.nonzero, p.inv_scale), b, o.rank_tolerance);
    return iterate(A, b, p, p.nonzero, c, 1, o);
}

std::vector<SparseModel> stls_batch(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                    const StlsOptions& o) {
    check_options(o);
    require(A.rows() == B.rows(), ErrorKind::InvalidArgument, "STLS batch shape mismatch");
    check_finite(A, "STLS feature matrix");
    check_finite(B, "STLS labels");
    double max_rms = 0.0;
    for (long k = 0; k < B.cols(); ++k) max_rms = std::max(max_rms, rms(B.col(k)));
    const auto p = prepare(A, max_rms, o);
    std::vector<SparseModel> out;
    if (p.nonzero.empty()) {
        for (long k = 0; k < B.cols(); ++k) out.push_back(empty_model(A, B.col(k)));
        return out;
    }
    const Eigen::MatrixXd S = columns(A, p.nonzero, p.inv_scale);
    const Eigen::MatrixXd C = solve(S, B, o.rank_tolerance);
    for (long k = 0; k < B.cols(); ++k) {
        const Eigen::VectorXd b = B.col(k);
        if (b.isZero(0.0)) {
            out.push_back(empty_model(A, b));
            continue;
        }
        out.push_back(iterate(A, b, p, p.nonzero, C.col(k), 1, o));
    }
    return out;
}

}  // namespace lagdisc
