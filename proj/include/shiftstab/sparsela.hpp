#pragma once

#include "shiftstab/types.hpp"

#include <random>
#include <span>
#include <stdexcept>

namespace shiftstab {

// Inner product conjugating the first argument, so dot(v, v) is real >= 0.
inline Complex dot(const Vector& u, const Vector& v) {
    if (u.size() != v.size()) throw std::invalid_argument("dot: length mismatch");
    return u.dot(v);
}

inline double norm2(const Vector& v) { return v.norm(); }

template <LinearOp Op>
Vector matvec(const Op& A, const Vector& x) {
    if (A.cols() != x.size()) throw std::invalid_argument("matvec: dimension mismatch");
    return A * x;
}

// (A + sigma I) v without materializing the sum.
struct ShiftedOperator {
    const SparseMatrix* base = nullptr;
    Complex shift{0.0, 0.0};

    Index rows() const { return base->rows(); }
    Index cols() const { return base->cols(); }

    friend Vector operator*(const ShiftedOperator& op, const Vector& v) {
        return Vector(matvec(*op.base, v) + op.shift * v);
    }
};

inline SparseMatrix make_bidiagonal_test(Index n, std::span<const double> diag_values,
                                         Complex super_value) {
    if (static_cast<Index>(diag_values.size()) != n)
        throw std::invalid_argument("make_bidiagonal_test: diagonal length mismatch");
    std::vector<Eigen::Triplet<Complex>> trip;
    trip.reserve(static_cast<size_t>(2 * n));
    for (Index i = 0; i < n; ++i) {
        trip.emplace_back(i, i, Complex(diag_values[static_cast<size_t>(i)], 0.0));
        if (i + 1 < n) trip.emplace_back(i, i + 1, super_value);
    }
    SparseMatrix A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();
    return A;
}

// I + c G / sqrt(n) with G standard complex Gaussian; well conditioned for
// small c and positive real (field of values in the right half plane) for
// c below roughly 0.5.
inline SparseMatrix make_random_perturbed_identity(Index n, double c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double scale = c / std::sqrt(static_cast<double>(n));
    std::vector<Eigen::Triplet<Complex>> trip;
    trip.reserve(static_cast<size_t>(n * n));
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
            Complex v = scale * Complex(gauss(rng), gauss(rng));
            if (i == j) v += 1.0;
            trip.emplace_back(i, j, v);
        }
    SparseMatrix A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();
    return A;
}

inline Vector make_random_vector(Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = Complex(gauss(rng), gauss(rng));
    return v;
}

}  // namespace shiftstab
