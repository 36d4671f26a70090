#include "oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace shiftstab::oracle {

namespace {

constexpr int kMaxN = 256;
constexpr int kMaxM = 32;

void check_square(const Dense& A) {
    if (A.rows != A.cols) throw std::invalid_argument("oracle: matrix not square");
    if (A.rows > kMaxN) throw std::invalid_argument("oracle: n exceeds cap");
}

}  // namespace

Complex cdot(const CVec& u, const CVec& v) {
    if (u.size() != v.size()) throw std::invalid_argument("oracle: length mismatch");
    Complex s{0.0, 0.0};
    for (size_t i = 0; i < u.size(); ++i) s += std::conj(u[i]) * v[i];
    return s;
}

double nrm2(const CVec& v) {
    double s = 0.0;
    for (const Complex& x : v) s += std::norm(x);
    return std::sqrt(s);
}

CVec apply(const Dense& A, const CVec& x) {
    if (static_cast<size_t>(A.cols) != x.size())
        throw std::invalid_argument("oracle: dimension mismatch");
    CVec y(static_cast<size_t>(A.rows), Complex{0.0, 0.0});
    for (int i = 0; i < A.rows; ++i) {
        Complex s{0.0, 0.0};
        for (int j = 0; j < A.cols; ++j) s += A.at(i, j) * x[static_cast<size_t>(j)];
        y[static_cast<size_t>(i)] = s;
    }
    return y;
}

CVec dense_solve(Dense A, CVec b) {
    check_square(A);
    const int n = A.rows;
    if (static_cast<size_t>(n) != b.size())
        throw std::invalid_argument("oracle: dimension mismatch");

    double amax = 0.0;
    for (const Complex& v : A.a) amax = std::max(amax, std::abs(v));
    const double pivot_tol = 1e-13 * amax;

    for (int k = 0; k < n; ++k) {
        int piv = k;
        double best = std::abs(A.at(k, k));
        for (int i = k + 1; i < n; ++i)
            if (std::abs(A.at(i, k)) > best) {
                best = std::abs(A.at(i, k));
                piv = i;
            }
        if (best <= pivot_tol) throw std::runtime_error("oracle: singular to tolerance");
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(A.at(k, j), A.at(piv, j));
            std::swap(b[static_cast<size_t>(k)], b[static_cast<size_t>(piv)]);
        }
        for (int i = k + 1; i < n; ++i) {
            const Complex f = A.at(i, k) / A.at(k, k);
            if (f == Complex{0.0, 0.0}) continue;
            for (int j = k; j < n; ++j) A.at(i, j) -= f * A.at(k, j);
            b[static_cast<size_t>(i)] -= f * b[static_cast<size_t>(k)];
        }
    }
    CVec x(static_cast<size_t>(n));
    for (int i = n - 1; i >= 0; --i) {
        Complex s = b[static_cast<size_t>(i)];
        for (int j = i + 1; j < n; ++j) s -= A.at(i, j) * x[static_cast<size_t>(j)];
        x[static_cast<size_t>(i)] = s / A.at(i, i);
    }
    return x;
}

CVec dense_lstsq(const Dense& H, const CVec& rhs) {
    const int rows = H.rows, cols = H.cols;
    if (rows != cols + 1) throw std::invalid_argument("oracle: H must be (m+1) x m");
    if (cols > 2 * kMaxM) throw std::invalid_argument("oracle: m exceeds cap");
    if (static_cast<size_t>(rows) != rhs.size())
        throw std::invalid_argument("oracle: dimension mismatch");

    Dense N(cols, cols);  // H^H H
    CVec g(static_cast<size_t>(cols), Complex{0.0, 0.0});
    for (int i = 0; i < cols; ++i) {
        for (int j = 0; j < cols; ++j) {
            Complex s{0.0, 0.0};
            for (int k = 0; k < rows; ++k) s += std::conj(H.at(k, i)) * H.at(k, j);
            N.at(i, j) = s;
        }
        Complex s{0.0, 0.0};
        for (int k = 0; k < rows; ++k) s += std::conj(H.at(k, i)) * rhs[static_cast<size_t>(k)];
        g[static_cast<size_t>(i)] = s;
    }
    try {
        return dense_solve(N, g);
    } catch (const std::runtime_error&) {
        throw std::runtime_error("oracle: rank-deficient least-squares system");
    }
}

Complex residual_polynomial_eval(const CVec& alpha_seq, const CVec& beta_seq, Complex t) {
    if (alpha_seq.size() > kMaxM) throw std::invalid_argument("oracle: m exceeds cap");
    if (alpha_seq.empty()) return Complex{1.0, 0.0};
    if (beta_seq.size() + 1 < alpha_seq.size())
        throw std::invalid_argument("oracle: beta sequence too short");
    Complex p_prev{1.0, 0.0};
    Complex p = Complex{1.0, 0.0} - alpha_seq[0] * t;
    for (size_t m = 1; m < alpha_seq.size(); ++m) {
        const Complex c = beta_seq[m - 1] / alpha_seq[m - 1] * alpha_seq[m];
        const Complex p_next = (Complex{1.0, 0.0} + c - alpha_seq[m] * t) * p - c * p_prev;
        p_prev = p;
        p = p_next;
    }
    return p;
}

StabRun bicgstab_reference(const Dense& A, const CVec& b, int iters) {
    check_square(A);
    if (iters > kMaxM) throw std::invalid_argument("oracle: m exceeds cap");
    const size_t n = b.size();

    StabRun run;
    CVec x(n, Complex{0.0, 0.0});
    CVec r = b, rt = b;
    CVec u(n, Complex{0.0, 0.0}), v(n, Complex{0.0, 0.0});
    Complex rho{1.0, 0.0}, alpha{1.0, 0.0}, chi{1.0, 0.0};
    run.r.push_back(r);

    for (int m = 1; m <= iters; ++m) {
        const Complex rho_new = cdot(rt, r);
        const Complex beta = rho_new * alpha / (rho * chi);
        for (size_t i = 0; i < n; ++i) u[i] = r[i] + beta * (u[i] - chi * v[i]);
        v = apply(A, u);
        alpha = rho_new / cdot(rt, v);
        CVec s(n);
        for (size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
        const CVec t = apply(A, s);
        chi = cdot(s, t) / cdot(t, t);
        for (size_t i = 0; i < n; ++i) {
            r[i] = s[i] - chi * t[i];
            x[i] += alpha * u[i] + chi * s[i];
        }
        rho = rho_new;
        run.x.push_back(x);
        run.r.push_back(r);
        run.alpha.push_back(alpha);
        run.beta.push_back(beta);
        run.chi.push_back(chi);
        run.rho.push_back(rho);
    }
    return run;
}

}  // namespace shiftstab::oracle
