#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <concepts>
#include <limits>
#include <vector>

namespace shiftstab {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using DenseMatrix = Eigen::MatrixXcd;
using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;
using Index = Eigen::Index;

// Anything usable as the operator A of (A + sigma I) x = b.
template <class Op>
concept LinearOp = requires(const Op& a, const Vector& v) {
    { a.rows() } -> std::convertible_to<Index>;
    { a.cols() } -> std::convertible_to<Index>;
    { a * v } -> std::convertible_to<Vector>;
};

// One residual-history record; matvec counts refer to the shared seed
// operator applications, true-residual evaluations are counted separately.
struct HistoryRecord {
    long matvecs = 0;
    double relres_recursive = 0.0;
    double relres_true = std::numeric_limits<double>::quiet_NaN();
    double quasi_bound = std::numeric_limits<double>::quiet_NaN();
};

using ResidualHistory = std::vector<HistoryRecord>;

}  // namespace shiftstab
