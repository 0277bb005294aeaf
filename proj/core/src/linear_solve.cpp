#include "linear_solve.hpp"

#include "robinp/errors.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

#include <cmath>

namespace robinp::detail {

namespace {

double inf_norm(const SparseMatrix& m) {
    Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(m.rows());
    for (Eigen::Index c = 0; c < m.outerSize(); ++c) {
        for (SparseMatrix::InnerIterator it(m, c); it; ++it) row_sums[it.row()] += std::abs(it.value());
    }
    return row_sums.size() == 0 ? 0.0 : row_sums.maxCoeff();
}

}  // namespace

std::vector<double> sparse_solve(const SparseMatrix& m, std::span<const double> b) {
    const Eigen::Map<const Eigen::VectorXd> rhs(b.data(), static_cast<Eigen::Index>(b.size()));
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(m);
    if (lu.info() != Eigen::Success) {
        throw LinearSolveFailed("sparse LU factorization failed: " + lu.lastErrorMessage());
    }
    Eigen::VectorXd x = lu.solve(rhs);
    Eigen::VectorXd residual = rhs - m * x;
    x += lu.solve(residual);
    residual = rhs - m * x;

    const double scale = inf_norm(m) * x.lpNorm<Eigen::Infinity>() + rhs.lpNorm<Eigen::Infinity>();
    const double err = residual.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(err) || !x.allFinite() || (scale > 0.0 && err > 1e-12 * scale)) {
        throw LinearSolveFailed("linear solve did not reach 1e-12 backward error (got " + std::to_string(err / scale) + ")");
    }
    return {x.data(), x.data() + x.size()};
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace robinp::detail
