#pragma once

#include <span>
#include <vector>

#include "shiftstab/sparsela.hpp"
#include "shiftstab/types.hpp"

namespace shiftstab {

// Two-coloring of the sparsity graph of a hopping matrix: site i gets color
// 0 (even) or 1 (odd) so that every nonzero couples opposite colors.  Works
// per connected component via breadth-first search; isolated sites are even.
// Throws std::invalid_argument when the graph has an odd cycle.
std::vector<int> bipartite_parity(const SparseMatrix& d);

struct OddEvenSplit {
    SparseMatrix d_eo;  // even rows, odd columns
    SparseMatrix d_oe;  // odd rows, even columns
    std::vector<Index> even_indices;
    std::vector<Index> odd_indices;
};

// Permutes a hopping matrix into its even-odd blocks.  Entries coupling
// same-parity sites must vanish to 1e-14 relative to the largest entry.
OddEvenSplit odd_even_split(const SparseMatrix& d, const std::vector<int>& parity);

// v -> lambda*v + mu*D_oe*(D_eo*v) on the odd sites; one application counts
// as one operator product for the solvers.
struct ReducedOp {
    SparseMatrix d_eo;
    SparseMatrix d_oe;
    Complex lambda{1.0, 0.0};
    Complex mu{-1.0, 0.0};

    Index rows() const { return d_oe.rows(); }
    Index cols() const { return d_oe.rows(); }
};

inline Vector operator*(const ReducedOp& op, const Vector& v) {
    Vector w = op.d_eo * v;
    return Vector(op.lambda * v + op.mu * (op.d_oe * w));
}

struct ReducedSystem {
    ReducedOp op;   // I - k^2 * D_oe * D_eo
    Vector rhs;     // b_odd + k * D_oe * b_even
    Vector b_even;  // kept for back-substitution
    Complex k;
};

// Eliminates the even sites of (I - k D) x = b, leaving a system on the
// odd sites only.
ReducedSystem reduce(const OddEvenSplit& split, Complex k, const Vector& b);

// Recovers the full-ordering solution from the odd-site solve:
// x_even = b_even + k * D_eo * x_odd.
Vector back_substitute(const OddEvenSplit& split, Complex k, const Vector& b,
                       const Vector& x_odd);

struct FamilySetup {
    ReducedOp op;  // k_seed^{-2} I - D_oe * D_eo
    std::vector<Complex> shifts;  // k_i^{-2} - k_seed^{-2}, caller order
    Vector rhs;                   // k_seed^{-2} (b_odd + k_seed * D_oe * b_even)
    Vector b_even;
    std::size_t seed_index{0};    // position of the largest k (shift zero)
};

// Casts a set of hopping parameters as one shifted family on the odd sites.
// Dividing (I - k^2 M) x = c by k^2 gives (k^{-2} I - M) x = k^{-2} c; the
// largest k seeds the family and all rhs vectors are identified with the
// seed's so that a single Krylov subspace serves every k.
FamilySetup family_from_hoppings(const OddEvenSplit& split,
                                 std::span<const double> ks, const Vector& b);

}  // namespace shiftstab
