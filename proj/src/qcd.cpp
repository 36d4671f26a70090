#include "shiftstab/qcd.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <string>

namespace shiftstab {

namespace {

double max_abs_entry(const SparseMatrix& d) {
    double m = 0.0;
    for (Index i = 0; i < d.outerSize(); ++i)
        for (SparseMatrix::InnerIterator it(d, i); it; ++it)
            m = std::max(m, std::abs(it.value()));
    return m;
}

Vector gather(const Vector& v, const std::vector<Index>& idx) {
    Vector out(static_cast<Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Index>(i)] = v[idx[i]];
    return out;
}

}  // namespace

std::vector<int> bipartite_parity(const SparseMatrix& d) {
    if (d.rows() != d.cols()) throw std::invalid_argument("bipartite_parity: matrix not square");
    const Index n = d.rows();
    const double cutoff = 1e-14 * max_abs_entry(d);

    std::vector<std::vector<Index>> adj(static_cast<std::size_t>(n));
    for (Index i = 0; i < d.outerSize(); ++i)
        for (SparseMatrix::InnerIterator it(d, i); it; ++it) {
            if (it.row() == it.col() || std::abs(it.value()) <= cutoff) continue;
            adj[static_cast<std::size_t>(it.row())].push_back(it.col());
            adj[static_cast<std::size_t>(it.col())].push_back(it.row());
        }

    std::vector<int> parity(static_cast<std::size_t>(n), -1);
    std::queue<Index> frontier;
    for (Index start = 0; start < n; ++start) {
        if (parity[static_cast<std::size_t>(start)] != -1) continue;
        parity[static_cast<std::size_t>(start)] = 0;
        frontier.push(start);
        while (!frontier.empty()) {
            const Index cur = frontier.front();
            frontier.pop();
            for (Index nb : adj[static_cast<std::size_t>(cur)]) {
                int& p = parity[static_cast<std::size_t>(nb)];
                if (p == -1) {
                    p = 1 - parity[static_cast<std::size_t>(cur)];
                    frontier.push(nb);
                } else if (p == parity[static_cast<std::size_t>(cur)]) {
                    throw std::invalid_argument(
                        "bipartite_parity: sparsity graph is not two-colorable (odd cycle "
                        "through site " +
                        std::to_string(nb) + ")");
                }
            }
        }
    }
    return parity;
}

OddEvenSplit odd_even_split(const SparseMatrix& d, const std::vector<int>& parity) {
    if (d.rows() != d.cols()) throw std::invalid_argument("odd_even_split: matrix not square");
    if (parity.size() != static_cast<std::size_t>(d.rows()))
        throw std::invalid_argument("odd_even_split: parity size mismatch");

    OddEvenSplit split;
    std::vector<Index> pos(parity.size());
    for (Index i = 0; i < d.rows(); ++i) {
        auto& side = parity[static_cast<std::size_t>(i)] == 0 ? split.even_indices
                                                              : split.odd_indices;
        pos[static_cast<std::size_t>(i)] = static_cast<Index>(side.size());
        side.push_back(i);
    }
    const Index n_even = static_cast<Index>(split.even_indices.size());
    const Index n_odd = static_cast<Index>(split.odd_indices.size());

    const double cutoff = 1e-14 * max_abs_entry(d);
    std::vector<Eigen::Triplet<Complex>> eo;
    std::vector<Eigen::Triplet<Complex>> oe;
    for (Index i = 0; i < d.outerSize(); ++i)
        for (SparseMatrix::InnerIterator it(d, i); it; ++it) {
            const int pr = parity[static_cast<std::size_t>(it.row())];
            const int pc = parity[static_cast<std::size_t>(it.col())];
            if (pr == pc) {
                if (std::abs(it.value()) > cutoff)
                    throw std::invalid_argument(
                        "odd_even_split: entry (" + std::to_string(it.row()) + ", " +
                        std::to_string(it.col()) + ") couples same-parity sites");
                continue;
            }
            if (pr == 0)
                eo.emplace_back(pos[static_cast<std::size_t>(it.row())],
                                pos[static_cast<std::size_t>(it.col())], it.value());
            else
                oe.emplace_back(pos[static_cast<std::size_t>(it.row())],
                                pos[static_cast<std::size_t>(it.col())], it.value());
        }

    split.d_eo.resize(n_even, n_odd);
    split.d_eo.setFromTriplets(eo.begin(), eo.end());
    split.d_eo.makeCompressed();
    split.d_oe.resize(n_odd, n_even);
    split.d_oe.setFromTriplets(oe.begin(), oe.end());
    split.d_oe.makeCompressed();
    return split;
}

ReducedSystem reduce(const OddEvenSplit& split, Complex k, const Vector& b) {
    const Index n = split.d_eo.rows() + split.d_oe.rows();
    if (b.size() != n) throw std::invalid_argument("reduce: rhs size mismatch");

    ReducedSystem sys;
    sys.k = k;
    sys.b_even = gather(b, split.even_indices);
    const Vector b_odd = gather(b, split.odd_indices);
    sys.rhs = b_odd + k * (split.d_oe * sys.b_even);
    sys.op = ReducedOp{split.d_eo, split.d_oe, Complex{1.0, 0.0}, -k * k};
    return sys;
}

Vector back_substitute(const OddEvenSplit& split, Complex k, const Vector& b,
                       const Vector& x_odd) {
    const Index n = split.d_eo.rows() + split.d_oe.rows();
    if (b.size() != n) throw std::invalid_argument("back_substitute: rhs size mismatch");
    if (x_odd.size() != split.d_oe.rows())
        throw std::invalid_argument("back_substitute: odd solution size mismatch");

    const Vector b_even = gather(b, split.even_indices);
    const Vector x_even = b_even + k * (split.d_eo * x_odd);
    Vector x(n);
    for (std::size_t i = 0; i < split.even_indices.size(); ++i)
        x[split.even_indices[i]] = x_even[static_cast<Index>(i)];
    for (std::size_t i = 0; i < split.odd_indices.size(); ++i)
        x[split.odd_indices[i]] = x_odd[static_cast<Index>(i)];
    return x;
}

FamilySetup family_from_hoppings(const OddEvenSplit& split, std::span<const double> ks,
                                 const Vector& b) {
    if (ks.empty()) throw std::invalid_argument("family_from_hoppings: no hopping parameters");
    for (double k : ks)
        if (!(k > 0.0))
            throw std::invalid_argument("family_from_hoppings: hopping parameters must be positive");

    FamilySetup fam;
    fam.seed_index = static_cast<std::size_t>(
        std::max_element(ks.begin(), ks.end()) - ks.begin());
    const double k_seed = ks[fam.seed_index];
    const double base = 1.0 / (k_seed * k_seed);

    fam.shifts.reserve(ks.size());
    for (double k : ks) fam.shifts.emplace_back(1.0 / (k * k) - base, 0.0);
    fam.shifts[fam.seed_index] = Complex{0.0, 0.0};

    fam.b_even = gather(b, split.even_indices);
    const Vector b_odd = gather(b, split.odd_indices);
    fam.rhs = base * (b_odd + k_seed * (split.d_oe * fam.b_even));
    fam.op = ReducedOp{split.d_eo, split.d_oe, Complex{base, 0.0}, Complex{-1.0, 0.0}};
    return fam;
}

}  // namespace shiftstab
