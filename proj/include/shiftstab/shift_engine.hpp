#pragma once

#include "shiftstab/seed.hpp"

#include <cmath>
#include <span>
#include <string>

namespace shiftstab {

// pi_m = p_m(-sigma) for the seed residual polynomial p_m, plus the
// accumulated MR damping factor rho_mr = prod_i 1/(1 + sigma chi_i).
struct CollinearityState {
    Complex pi_curr{1.0, 0.0};  // pi_m
    Complex pi_prev{1.0, 0.0};  // pi_{m-1}
    Complex rho_mr{1.0, 0.0};
};

// pi_m = (1 + alpha_m sigma) pi_{m-1} + (alpha_m beta_m / alpha_{m-1}) (pi_{m-1} - pi_{m-2})
inline CollinearityState update_collinearity(const CollinearityState& coll, Complex sigma,
                                             Complex alpha_m, Complex alpha_prev,
                                             Complex beta_m) {
    CollinearityState next = coll;
    next.pi_curr = (1.0 + alpha_m * sigma) * coll.pi_curr +
                   (alpha_m * beta_m / alpha_prev) * (coll.pi_curr - coll.pi_prev);
    next.pi_prev = coll.pi_curr;
    return next;
}

struct ShiftedScalars {
    Complex alpha_shift{}, beta_shift{}, chi_shift{};
    Complex rho_mr_next{};
    CollinearityState coll_next;
    bool stalled = false;  // pi cancellation or 1 + sigma chi ~ 0
};

// alpha^s = alpha pi_{m-1}/pi_m, beta^s = (pi_{m-2}/pi_{m-1})^2 beta,
// chi^s = chi/(1 + sigma chi), rho_mr scaled by the same factor.
inline ShiftedScalars shifted_scalars(const CollinearityState& coll, Complex alpha_m,
                                      Complex alpha_prev, Complex beta_m, Complex chi_m,
                                      Complex sigma) {
    ShiftedScalars out;
    out.coll_next = update_collinearity(coll, sigma, alpha_m, alpha_prev, beta_m);
    const Complex pi_next = out.coll_next.pi_curr;
    const double pi_scale = std::abs((1.0 + alpha_m * sigma) * coll.pi_curr) +
                            std::abs((alpha_m * beta_m / alpha_prev) *
                                     (coll.pi_curr - coll.pi_prev));
    const Complex denom = 1.0 + sigma * chi_m;
    if (std::abs(pi_next) <= kBreakdownTol * pi_scale ||
        std::abs(denom) <= kBreakdownTol * (1.0 + std::abs(sigma * chi_m))) {
        out.stalled = true;
        return out;
    }
    const Complex ratio = coll.pi_prev / coll.pi_curr;
    out.beta_shift = ratio * ratio * beta_m;
    out.alpha_shift = alpha_m * coll.pi_curr / pi_next;
    out.chi_shift = chi_m / denom;
    out.rho_mr_next = coll.rho_mr / denom;
    out.coll_next.rho_mr = out.rho_mr_next;
    return out;
}

// Upper bound sqrt(2m+1) tau for the residual norm after m iterations
// (2m+1 quasi-minimization basis columns).
inline double quasi_residual_bound(int m, double tau) {
    return std::sqrt(2.0 * m + 1.0) * tau;
}

// Lower-bidiagonal H of the half-step least-squares system together with
// its right-hand side theta_1 e_1:
//   H(i,i) = theta_i / delta_i, H(i+1,i) = -theta_{i+1} / delta_i
// where delta interleaves (alpha^s_i, chi^s_i) and theta_i = ||w_{i-1}||.
inline std::pair<DenseMatrix, Vector> assemble_qmr_system(std::span<const Complex> delta,
                                                          std::span<const double> theta) {
    const int k = static_cast<int>(delta.size());
    if (static_cast<int>(theta.size()) != k + 1)
        throw std::invalid_argument("assemble_qmr_system: need k+1 column norms");
    DenseMatrix H = DenseMatrix::Zero(k + 1, k);
    for (int i = 0; i < k; ++i) {
        if (delta[static_cast<size_t>(i)] == Complex{0.0, 0.0})
            throw std::invalid_argument("assemble_qmr_system: zero delta");
        H(i, i) = theta[static_cast<size_t>(i)] / delta[static_cast<size_t>(i)];
        H(i + 1, i) = -theta[static_cast<size_t>(i) + 1] / delta[static_cast<size_t>(i)];
    }
    Vector rhs = Vector::Zero(k + 1);
    rhs[0] = theta[0];
    return {std::move(H), std::move(rhs)};
}

enum class TrackStatus { running, converged, stalled, seed_exhausted, maxit_reached };

inline const char* to_string(TrackStatus s) {
    switch (s) {
        case TrackStatus::running: return "running";
        case TrackStatus::converged: return "converged";
        case TrackStatus::stalled: return "stalled";
        case TrackStatus::seed_exhausted: return "seed_exhausted";
        case TrackStatus::maxit_reached: return "maxit";
    }
    return "?";
}

// Per-shift state. r is the collinear residual (rho_mr/pi) r_m; in
// quasi-minimization mode x is the quasi-minimal iterate and rhat its
// recursively updated residual.
struct ShiftTrack {
    Complex sigma{};
    CollinearityState coll;
    Vector x, u, v, s, r;
    Complex alpha_shift{1.0, 0.0};
    Complex beta_shift{0.0, 0.0};
    Complex chi_shift{0.0, 0.0};  // chi^s_{m-1}; multiplies v = 0 at m = 1
    Complex scale_s{0.0, 0.0};    // rho^s_{m-1}/pi_m
    Complex scale_r{1.0, 0.0};    // rho^s_m/pi_m
    // quasi-minimization state
    double tau = 0.0;
    double theta_prev = 0.0, theta_tilde = 0.0;
    double tau_tilde = 0.0;
    Complex eta_prev{0.0, 0.0}, eta_tilde{0.0, 0.0};
    Vector d, d_tilde, g, g_tilde;  // g = (A + sigma I) d, for the rhat update
    Vector rhat;
    TrackStatus status = TrackStatus::running;
    int iterations = 0;
    bool pi_range_flag = false;  // |pi| left [1e-150, 1e150]
    double final_relres = std::numeric_limits<double>::quiet_NaN();
    ResidualHistory history;
};

struct ShiftResult {
    Complex sigma{};
    Vector x;
    Vector r;
    TrackStatus status = TrackStatus::running;
    int iterations = 0;
    double final_relres = std::numeric_limits<double>::quiet_NaN();
    bool pi_range_flag = false;
    ResidualHistory history;
};

struct FamilyResult {
    std::vector<ShiftResult> shifts;
    long matvecs = 0;        // seed operator applications, 2 per iteration
    long extra_matvecs = 0;  // true-residual samples and confirmations
    int iterations = 0;
    bool seed_converged_warning = false;
    std::optional<BreakdownReport> seed_breakdown;
    std::vector<SeedScalarRecord> seed_scalars;

    bool all_converged() const {
        for (const auto& s : shifts)
            if (s.status != TrackStatus::converged) return false;
        return true;
    }
};

struct SolverOptions {
    double tol = 1e-8;
    int maxit = 0;  // 0 selects 10 n
    std::optional<Vector> shadow;
    int true_res_every = 5;  // sample cadence in iterations; 0 disables
    bool record_history = true;
    // called after each half-step of each active track (half = 1 or 2)
    std::function<void(const SeedIterationRecord&, const ShiftTrack&, int half)> observer;
};

namespace detail {

enum class QuasiMode { none, qmr };

inline bool pi_in_range(const Complex& pi) {
    const double a = std::abs(pi);
    return a >= 1e-150 && a <= 1e150;
}

// first half of iteration m: collinearity advance, u/s/v updates and the
// theta-tilde quasi-minimization step
inline void track_first_half(ShiftTrack& t, const SeedIterationRecord& c, QuasiMode mode) {
    const auto sc =
        shifted_scalars(t.coll, c.alpha, c.alpha_prev, c.beta, c.chi, t.sigma);
    if (sc.stalled) {
        t.status = TrackStatus::stalled;
        return;
    }
    t.u = t.r + sc.beta_shift * (t.u - t.chi_shift * t.v);
    t.scale_s = t.coll.rho_mr / sc.coll_next.pi_curr;  // rho^s_{m-1} / pi_m
    t.s = t.scale_s * c.s;
    t.v = (t.r - t.s) / sc.alpha_shift;  // (A + sigma I) u^s without a product
    t.alpha_shift = sc.alpha_shift;
    t.beta_shift = sc.beta_shift;
    t.coll = sc.coll_next;
    t.chi_shift = sc.chi_shift;
    if (!pi_in_range(t.coll.pi_curr)) t.pi_range_flag = true;

    if (mode == QuasiMode::qmr) {
        const double s_norm_shift = std::abs(t.scale_s) * c.s_norm;
        t.theta_tilde = s_norm_shift / t.tau;
        const double zeta = 1.0 / std::sqrt(1.0 + t.theta_tilde * t.theta_tilde);
        t.tau_tilde = t.tau * t.theta_tilde * zeta;
        t.eta_tilde = (zeta * zeta) * t.alpha_shift;
        const Complex num = (t.theta_prev * t.theta_prev) * t.eta_prev;
        Complex coeff{0.0, 0.0};
        if (std::abs(num) != 0.0) coeff = num / t.alpha_shift;
        t.d_tilde = t.u + coeff * t.d;
        t.g_tilde = t.v + coeff * t.g;
        t.x += t.eta_tilde * t.d_tilde;
        t.rhat -= t.eta_tilde * t.g_tilde;
    }
}

// second half: chi^s scalings, collinear residual, x update (plain mode)
// or the theta quasi-minimization step
inline void track_second_half(ShiftTrack& t, const SeedIterationRecord& c, QuasiMode mode) {
    t.scale_r = t.coll.rho_mr / t.coll.pi_curr;  // rho^s_m / pi_m
    const Vector r_coll = t.scale_r * c.r;
    if (mode == QuasiMode::none) {
        t.x += t.alpha_shift * t.u + t.chi_shift * t.s;
        t.r = r_coll;
        return;
    }
    const double r_norm_shift = std::abs(t.scale_r) * c.r_norm;
    const double theta = r_norm_shift / t.tau_tilde;
    const double zeta = 1.0 / std::sqrt(1.0 + theta * theta);
    t.tau = t.tau_tilde * theta * zeta;
    const Complex eta = (zeta * zeta) * t.chi_shift;
    const Complex num = (t.theta_tilde * t.theta_tilde) * t.eta_tilde;
    Complex coeff{0.0, 0.0};
    bool have_chi = t.chi_shift != Complex{0.0, 0.0};
    if (std::abs(num) != 0.0) {
        if (!have_chi) {
            t.status = TrackStatus::stalled;
            return;
        }
        coeff = num / t.chi_shift;
    }
    t.d = t.s + coeff * t.d_tilde;
    if (have_chi) {
        t.g = (t.s - r_coll) / t.chi_shift + coeff * t.g_tilde;  // (A + sigma I) s^s
    } else {
        t.g.setZero();
    }
    t.x += eta * t.d;
    t.rhat -= eta * t.g;
    t.theta_prev = theta;
    t.eta_prev = eta;
    t.r = r_coll;
}

template <LinearOp Op>
FamilyResult run_family(const Op& A, std::span<const Complex> shifts, const Vector& b,
                        const SolverOptions& opts, QuasiMode mode) {
    if (A.rows() != A.cols() || A.cols() != b.size())
        throw std::invalid_argument("shifted solve: dimension mismatch");
    if (shifts.empty()) throw std::invalid_argument("shifted solve: no shifts");
    if (!(opts.tol >= 0.0)) throw std::invalid_argument("shifted solve: bad tolerance");

    const Index n = b.size();
    const int maxit = opts.maxit > 0 ? opts.maxit : static_cast<int>(10 * n);
    SeedEngine<Op> seed(A, b, opts.shadow ? *opts.shadow : b, opts.tol);
    const double bn = seed.b_norm();

    if (bn == 0.0) {
        FamilyResult out;
        for (const Complex& sigma : shifts) {
            ShiftResult sr;
            sr.sigma = sigma;
            sr.x = Vector::Zero(n);
            sr.r = Vector::Zero(n);
            sr.status = TrackStatus::converged;
            sr.final_relres = 0.0;
            if (opts.record_history) sr.history.push_back({0, 0.0, 0.0, 0.0});
            out.shifts.push_back(std::move(sr));
        }
        return out;
    }

    std::vector<ShiftTrack> tracks(shifts.size());
    for (size_t i = 0; i < shifts.size(); ++i) {
        ShiftTrack& t = tracks[i];
        t.sigma = shifts[i];
        t.x = Vector::Zero(n);
        t.u = Vector::Zero(n);
        t.v = Vector::Zero(n);
        t.s = Vector::Zero(n);
        t.r = b;
        if (mode == QuasiMode::qmr) {
            t.tau = bn;
            t.d = Vector::Zero(n);
            t.d_tilde = Vector::Zero(n);
            t.g = Vector::Zero(n);
            t.g_tilde = Vector::Zero(n);
            t.rhat = b;
        }
        if (opts.record_history)
            t.history.push_back({0, 1.0, 1.0,
                                 mode == QuasiMode::qmr ? 1.0
                                                        : std::numeric_limits<double>::quiet_NaN()});
    }

    FamilyResult out;
    long extra = 0;
    const auto true_relres = [&](const ShiftTrack& t) {
        ++extra;
        const Vector rt = b - Vector(A * t.x) - t.sigma * t.x;
        return rt.norm() / bn;
    };

    int m = 0;
    bool seed_dead = false;
    while (m < maxit) {
        ++m;
        const bool ok = seed.step();
        if (!ok && !seed.halted()) {
            // seed breakdown aborts every running track
            out.seed_breakdown = seed.breakdown();
            for (auto& t : tracks)
                if (t.status == TrackStatus::running) t.status = TrackStatus::seed_exhausted;
            seed_dead = true;
            --m;
            break;
        }
        const auto& rec = seed.record();
        const bool sample_true =
            opts.true_res_every > 0 && m % opts.true_res_every == 0;

        for (auto& t : tracks) {
            if (t.status != TrackStatus::running) continue;
            t.iterations = m;

            track_first_half(t, rec, mode);
            if (t.status == TrackStatus::stalled) continue;
            const double rec_norm1 = mode == QuasiMode::qmr
                                         ? t.rhat.norm() / bn
                                         : std::abs(t.scale_s) * rec.s_norm / bn;
            if (opts.record_history)
                t.history.push_back({2L * m - 1, rec_norm1,
                                     std::numeric_limits<double>::quiet_NaN(),
                                     mode == QuasiMode::qmr
                                         ? std::sqrt(2.0 * m) * t.tau_tilde / bn
                                         : std::numeric_limits<double>::quiet_NaN()});
            if (opts.observer) opts.observer(rec, t, 1);

            if (rec.converged_at_half && mode == QuasiMode::qmr) {
                // seed ended on the half-step: tau_tilde vanishes with it, so
                // the quasi iterate is judged as it stands
                t.final_relres = rec_norm1;
                const double tr = true_relres(t);
                if (opts.record_history) t.history.back().relres_true = tr;
                if (std::sqrt(2.0 * m) * t.tau_tilde <= opts.tol * bn && tr <= opts.tol) {
                    t.status = TrackStatus::converged;
                    t.final_relres = tr;
                }
                continue;
            }

            track_second_half(t, rec, mode);
            if (t.status == TrackStatus::stalled) continue;
            const double rec_relres = mode == QuasiMode::qmr
                                          ? t.rhat.norm() / bn
                                          : std::abs(t.scale_r) * rec.r_norm / bn;
            const double bound = quasi_residual_bound(m, t.tau) / bn;
            if (opts.record_history)
                t.history.push_back({2L * m, rec_relres,
                                     std::numeric_limits<double>::quiet_NaN(),
                                     mode == QuasiMode::qmr
                                         ? bound
                                         : std::numeric_limits<double>::quiet_NaN()});
            if (opts.observer) opts.observer(rec, t, 2);

            t.final_relres = rec_relres;
            if (mode == QuasiMode::none) {
                if (rec_relres <= opts.tol) t.status = TrackStatus::converged;
            } else if (bound <= opts.tol) {
                // the bound is pessimistic; confirm with one true residual
                const double tr = true_relres(t);
                if (opts.record_history) t.history.back().relres_true = tr;
                if (tr <= opts.tol) {
                    t.status = TrackStatus::converged;
                    t.final_relres = tr;
                }
            }
            if (opts.record_history &&
                (t.status == TrackStatus::converged || (sample_true && t.status == TrackStatus::running)) &&
                std::isnan(t.history.back().relres_true))
                t.history.back().relres_true = true_relres(t);
        }

        if (!ok) {
            // exact seed convergence: the recurrence cannot continue
            for (auto& t : tracks)
                if (t.status == TrackStatus::running) t.status = TrackStatus::seed_exhausted;
            seed_dead = true;
            break;
        }
        if (seed.record().r_norm <= 1e-14 * bn) out.seed_converged_warning = true;

        bool any_running = false;
        for (const auto& t : tracks) any_running |= t.status == TrackStatus::running;
        if (!any_running) break;
    }
    (void)seed_dead;

    for (auto& t : tracks)
        if (t.status == TrackStatus::running) t.status = TrackStatus::maxit_reached;

    out.matvecs = seed.matvecs();
    out.extra_matvecs = extra;
    out.iterations = seed.record().m;
    out.seed_scalars = seed.scalars();
    out.shifts.reserve(tracks.size());
    for (auto& t : tracks) {
        ShiftResult r;
        r.sigma = t.sigma;
        r.x = std::move(t.x);
        r.r = mode == QuasiMode::qmr ? std::move(t.rhat) : std::move(t.r);
        r.status = t.status;
        r.iterations = t.iterations;
        r.final_relres = t.final_relres;
        r.pi_range_flag = t.pi_range_flag;
        r.history = std::move(t.history);
        out.shifts.push_back(std::move(r));
    }
    return out;
}

}  // namespace detail

// Solves (A + sigma_i I) x = b for every shift with one seed Krylov run;
// two operator applications per iteration regardless of the shift count.
template <LinearOp Op>
FamilyResult shifted_bicgstab(const Op& A, std::span<const Complex> shifts, const Vector& b,
                              const SolverOptions& opts = {}) {
    return detail::run_family(A, shifts, b, opts, detail::QuasiMode::none);
}

// Same seed run with the per-shift quasi-minimal-residual smoothing layer.
template <LinearOp Op>
FamilyResult sqmrcgstab(const Op& A, std::span<const Complex> shifts, const Vector& b,
                        const SolverOptions& opts = {}) {
    return detail::run_family(A, shifts, b, opts, detail::QuasiMode::qmr);
}

}  // namespace shiftstab
