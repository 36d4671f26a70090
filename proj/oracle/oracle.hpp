#pragma once

#include <complex>
#include <vector>

// Small-scale reference implementations for tests. Deliberately naive,
// capped at n <= 256 / m <= 32, and sharing no code with the solvers.
namespace shiftstab::oracle {

using Complex = std::complex<double>;
using CVec = std::vector<Complex>;

struct Dense {
    int rows = 0;
    int cols = 0;
    CVec a;  // row-major

    Dense() = default;
    Dense(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c) {}
    Complex& at(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    const Complex& at(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }
};

Complex cdot(const CVec& u, const CVec& v);  // conjugates the first argument
double nrm2(const CVec& v);
CVec apply(const Dense& A, const CVec& x);

// Partial-pivoting elimination; throws when a pivot falls below
// 1e-13 * max|A_ij|.
CVec dense_solve(Dense A, CVec b);

// Least-squares minimizer of ||rhs - H z|| for (m+1) x m H of full column
// rank, via the normal equations.
CVec dense_lstsq(const Dense& H, const CVec& rhs);

// Evaluates the residual polynomial p_m(t) from a recorded scalar stream:
//   p_0 = 1, p_1 = 1 - alpha_0 t,
//   p_{m+1} = (1 + (beta_{m-1}/alpha_{m-1}) alpha_m - alpha_m t) p_m
//           - (beta_{m-1}/alpha_{m-1}) alpha_m p_{m-1}.
Complex residual_polynomial_eval(const CVec& alpha_seq, const CVec& beta_seq, Complex t);

// Fixed-iteration straight-line transcription of the stabilized seed
// recurrence (x_0 = 0, r_0 = shadow = b), recording everything; no breakdown
// handling, callers supply benign systems.
struct StabRun {
    std::vector<CVec> x;  // x_1 .. x_m
    std::vector<CVec> r;  // r_0 .. r_m
    CVec alpha, beta, chi, rho;
};
StabRun bicgstab_reference(const Dense& A, const CVec& b, int iters);

}  // namespace shiftstab::oracle
