#pragma once

#include "shiftstab/sparsela.hpp"

#include <functional>
#include <optional>
#include <utility>

namespace shiftstab {

// Scalar magnitudes below kBreakdownTol times the scale of the quantities
// forming them abort the recurrence instead of continuing with garbage.
inline constexpr double kBreakdownTol = 1e-14;

struct BreakdownReport {
    enum class Kind { rho_zero, pivot_zero, omega_zero };
    Kind kind = Kind::rho_zero;
    int iteration = 0;
    double magnitude = 0.0;
};

inline const char* to_string(BreakdownReport::Kind k) {
    switch (k) {
        case BreakdownReport::Kind::rho_zero: return "rho_zero";
        case BreakdownReport::Kind::pivot_zero: return "pivot_zero";
        case BreakdownReport::Kind::omega_zero: return "omega_zero";
    }
    return "?";
}

inline std::string to_string(const BreakdownReport& b) {
    return std::string(to_string(b.kind)) + " at iteration " + std::to_string(b.iteration) +
           " (magnitude " + std::to_string(b.magnitude) + ")";
}

// State after one seed iteration m:
//   rho   = (rt0, r_{m-1})
//   beta  = rho_m alpha_{m-1} / (rho_{m-1} chi_{m-1})
//   u     = r_{m-1} + beta (u_{m-1} - chi_{m-1} v_{m-1})
//   v     = A u,   alpha = rho / (rt0, v),   s = r_{m-1} - alpha v
//   t     = A s,   chi = (s,t)/(t,t),        r = s - chi t
struct SeedIterationRecord {
    int m = 0;
    Complex alpha{1.0, 0.0};
    Complex alpha_prev{1.0, 0.0};
    Complex beta{0.0, 0.0};
    Complex chi{1.0, 0.0};
    Complex rho{1.0, 0.0};
    Vector u, v, s, t, r;
    double s_norm = 0.0;
    double r_norm = 0.0;
    // the t half-step was skipped because s already vanished
    bool converged_at_half = false;
};

struct SeedScalarRecord {
    Complex alpha, beta, chi, rho;
};

template <LinearOp Op>
class SeedEngine {
  public:
    SeedEngine(const Op& A, const Vector& b, const Vector& shadow, double halt_tol)
        : A_(A), b_(b), rt_(shadow), halt_tol_(halt_tol) {
        if (A_.rows() != A_.cols() || A_.cols() != b_.size() || rt_.size() != b_.size())
            throw std::invalid_argument("seed: dimension mismatch");
        const Index n = b_.size();
        rec_.u = Vector::Zero(n);
        rec_.v = Vector::Zero(n);
        rec_.s = Vector::Zero(n);
        rec_.t = Vector::Zero(n);
        rec_.r = b_;
        rec_.r_norm = b_.norm();
        b_norm_ = rec_.r_norm;
        rt_norm_ = rt_.norm();
        x_ = Vector::Zero(n);
    }

    // One full iteration, two operator applications. Returns false on
    // breakdown or on an exactly vanished half-step residual (halted()).
    bool step() {
        SeedIterationRecord& c = rec_;
        const int m = c.m + 1;

        const Complex rho_new = dot(rt_, c.r);
        const double rho_scale = rt_norm_ * c.r_norm;
        if (std::abs(rho_new) <= kBreakdownTol * rho_scale) {
            breakdown_ = BreakdownReport{BreakdownReport::Kind::rho_zero, m,
                                         rho_scale > 0.0 ? std::abs(rho_new) / rho_scale : 0.0};
            return false;
        }
        const Complex beta = rho_new * c.alpha / (c.rho * c.chi);
        c.alpha_prev = c.alpha;
        c.u = c.r + beta * (c.u - c.chi * c.v);
        c.v = apply(c.u);
        const Complex rtv = dot(rt_, c.v);
        const double rtv_scale = rt_norm_ * c.v.norm();
        if (std::abs(rtv) <= kBreakdownTol * rtv_scale) {
            breakdown_ = BreakdownReport{BreakdownReport::Kind::pivot_zero, m,
                                         rtv_scale > 0.0 ? std::abs(rtv) / rtv_scale : 0.0};
            return false;
        }
        const Complex alpha = rho_new / rtv;
        c.s = c.r - alpha * c.v;
        c.s_norm = c.s.norm();
        c.m = m;
        c.rho = rho_new;
        c.beta = beta;
        c.alpha = alpha;

        if (c.s_norm <= 1e-300) {
            // the stabilizing half-step has nothing left to do and
            // chi = (s,t)/(t,t) would be 0/0; finish with chi = 0, r = s
            c.chi = Complex{0.0, 0.0};
            c.t.setZero();
            c.r = c.s;
            c.r_norm = c.s_norm;
            c.converged_at_half = true;
            halted_ = true;
            x_ += alpha * c.u;
            scalars_.push_back({c.alpha, c.beta, c.chi, c.rho});
            return false;
        }

        c.t = apply(c.s);
        const double t_norm = c.t.norm();
        if (t_norm <= kBreakdownTol * c.s_norm) {
            if (c.s_norm <= halt_tol_ * b_norm_) {
                c.chi = Complex{0.0, 0.0};
                c.r = c.s;
                c.r_norm = c.s_norm;
                c.converged_at_half = true;
                halted_ = true;
                x_ += alpha * c.u;
                scalars_.push_back({c.alpha, c.beta, c.chi, c.rho});
                return false;
            }
            breakdown_ = BreakdownReport{BreakdownReport::Kind::omega_zero, m, t_norm / c.s_norm};
            return false;
        }
        const Complex chi = dot(c.s, c.t) / dot(c.t, c.t);
        if (std::abs(chi) <= kBreakdownTol * c.s_norm / t_norm) {
            breakdown_ = BreakdownReport{BreakdownReport::Kind::omega_zero, m,
                                         std::abs(chi) * t_norm / c.s_norm};
            return false;
        }
        c.chi = chi;
        c.r = c.s - chi * c.t;
        c.r_norm = c.r.norm();
        x_ += alpha * c.u + chi * c.s;
        scalars_.push_back({c.alpha, c.beta, c.chi, c.rho});
        return true;
    }

    const SeedIterationRecord& record() const { return rec_; }
    const Vector& x() const { return x_; }
    const Vector& b() const { return b_; }
    double b_norm() const { return b_norm_; }
    long matvecs() const { return matvecs_; }
    bool halted() const { return halted_; }
    const std::optional<BreakdownReport>& breakdown() const { return breakdown_; }
    const std::vector<SeedScalarRecord>& scalars() const { return scalars_; }

  private:
    Vector apply(const Vector& v) {
        ++matvecs_;
        return A_ * v;
    }

    const Op& A_;
    Vector b_, rt_;
    double halt_tol_;
    double b_norm_ = 0.0, rt_norm_ = 0.0;
    SeedIterationRecord rec_;
    Vector x_;
    long matvecs_ = 0;
    bool halted_ = false;
    std::optional<BreakdownReport> breakdown_;
    std::vector<SeedScalarRecord> scalars_;
};

struct PlainSolveResult {
    Vector x;
    ResidualHistory history;
    bool converged = false;
    std::optional<BreakdownReport> breakdown;
    long matvecs = 0;
    int iterations = 0;
    std::vector<SeedScalarRecord> scalars;
};

struct PlainSolveOptions {
    double tol = 1e-8;
    int maxit = 0;  // 0 selects 10 n
    std::optional<Vector> shadow;
    std::function<void(const SeedIterationRecord&, const Vector& x)> observer;
};

// Stabilized seed recurrence run on its own (the sigma = 0 member of the
// family machinery, without any shift tracks).
template <LinearOp Op>
PlainSolveResult bicgstab_solve(const Op& A, const Vector& b, const PlainSolveOptions& opts = {}) {
    const int maxit = opts.maxit > 0 ? opts.maxit : static_cast<int>(10 * b.size());
    SeedEngine<Op> seed(A, b, opts.shadow ? *opts.shadow : b, opts.tol);
    PlainSolveResult out;
    const double bn = seed.b_norm();
    if (bn == 0.0) {
        out.x = Vector::Zero(b.size());
        out.converged = true;
        out.history.push_back({0, 0.0});
        return out;
    }
    out.history.push_back({0, 1.0});
    for (int m = 1; m <= maxit; ++m) {
        const bool ok = seed.step();
        if (!ok && !seed.halted()) break;
        const auto& rec = seed.record();
        out.history.push_back({2 * m - 1, rec.s_norm / bn});
        out.history.push_back({2 * m, rec.r_norm / bn});
        if (opts.observer) opts.observer(rec, seed.x());
        if (rec.r_norm <= opts.tol * bn) {
            out.converged = true;
            break;
        }
        if (!ok) break;
    }
    out.x = seed.x();
    out.breakdown = seed.breakdown();
    out.matvecs = seed.matvecs();
    out.iterations = seed.record().m;
    out.scalars = seed.scalars();
    return out;
}

struct BicgResult {
    Vector x;
    ResidualHistory history;
    bool converged = false;
    std::optional<BreakdownReport> breakdown;
    long matvecs = 0;
    int iterations = 0;
    std::vector<Complex> alphas, betas;
    std::vector<Vector> residuals;  // filled when record_residuals is set
};

struct BicgOptions {
    double tol = 1e-8;
    int maxit = 0;
    std::optional<Vector> shadow;
    bool record_residuals = false;
};

// Two-sided Lanczos solver; the transpose-side product applies the adjoint
// lazily (row traversal of A serves the columns of A^H), no transposed copy.
inline BicgResult bicg_solve(const SparseMatrix& A, const Vector& b, const BicgOptions& opts = {}) {
    if (A.rows() != A.cols() || A.cols() != b.size())
        throw std::invalid_argument("bicg: dimension mismatch");
    const int maxit = opts.maxit > 0 ? opts.maxit : static_cast<int>(10 * b.size());
    const double bn = b.norm();

    BicgResult out;
    Vector x = Vector::Zero(b.size());
    if (bn == 0.0) {
        out.x = x;
        out.converged = true;
        out.history.push_back({0, 0.0});
        return out;
    }
    Vector r = b;
    Vector rt = opts.shadow ? *opts.shadow : b;
    Vector p = r, pt = rt;
    Complex rho = dot(rt, r);
    out.history.push_back({0, 1.0});
    if (opts.record_residuals) out.residuals.push_back(r);
    if (std::abs(rho) <= kBreakdownTol * rt.norm() * bn) {
        out.breakdown = BreakdownReport{BreakdownReport::Kind::rho_zero, 0, std::abs(rho)};
        out.x = x;
        return out;
    }

    for (int m = 1; m <= maxit; ++m) {
        const Vector q = A * p;
        const Complex ptq = dot(pt, q);
        if (std::abs(ptq) <= kBreakdownTol * pt.norm() * q.norm()) {
            out.breakdown = BreakdownReport{BreakdownReport::Kind::pivot_zero, m, std::abs(ptq)};
            break;
        }
        const Complex alpha = rho / ptq;
        x += alpha * p;
        r -= alpha * q;
        const Vector qt = A.adjoint() * pt;
        rt -= std::conj(alpha) * qt;
        out.matvecs += 2;
        out.iterations = m;
        out.alphas.push_back(alpha);
        if (opts.record_residuals) out.residuals.push_back(r);
        const double rn = r.norm();
        out.history.push_back({out.matvecs, rn / bn});
        if (rn <= opts.tol * bn) {
            out.converged = true;
            break;
        }
        const Complex rho_new = dot(rt, r);
        if (std::abs(rho_new) <= kBreakdownTol * rt.norm() * rn) {
            out.breakdown = BreakdownReport{BreakdownReport::Kind::rho_zero, m, std::abs(rho_new)};
            break;
        }
        const Complex beta = rho_new / rho;
        out.betas.push_back(beta);
        p = r + beta * p;
        pt = rt + std::conj(beta) * pt;
        rho = rho_new;
    }
    out.x = std::move(x);
    return out;
}

}  // namespace shiftstab
