#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "shiftstab/shift_engine.hpp"
#include "shiftstab/types.hpp"

namespace shiftstab {

// r(t) = sum_i weights[i] / (t - poles[i]), the rational approximation an
// outside tool has fitted to the sign function (or any other scalar map).
struct PartialFractionSpec {
    std::vector<Complex> weights;
    std::vector<Complex> poles;
};

// One "omega_re omega_im sigma_re sigma_im" line per term; '#' comments and
// blank lines are skipped.  Throws std::runtime_error with a line number on
// malformed input.
PartialFractionSpec read_partial_fraction(const std::string& path);

enum class Backend { sbicgstab, sqmrcgstab };

struct RationalApplyResult {
    Vector y;             // sum_i w_i x_i with (A - p_i) x_i = b
    FamilyResult family;  // the underlying multi-shift solve
};

// Thrown when some pole's system fails to converge; carries whatever was
// accumulated so the caller can inspect per-pole statuses.
class RationalApplyError : public std::runtime_error {
  public:
    RationalApplyError(std::string what, RationalApplyResult partial)
        : std::runtime_error(std::move(what)), partial_(std::move(partial)) {}

    const RationalApplyResult& partial() const { return partial_; }

  private:
    RationalApplyResult partial_;
};

// Applies r(A) to b through one multi-shift solve: the systems
// (A - p_i) x_i = b share a single Krylov subspace.  Each system is solved
// to tol * sum|w| / (count * max|w|) so the weighted sum of residuals stays
// within tol * |b| overall.
template <LinearOp Op>
RationalApplyResult apply_rational(const Op& a, const PartialFractionSpec& spec,
                                   const Vector& b, Backend backend,
                                   SolverOptions opts = {}) {
    if (spec.weights.size() != spec.poles.size())
        throw std::invalid_argument("apply_rational: weights/poles size mismatch");
    if (spec.weights.empty())
        throw std::invalid_argument("apply_rational: empty partial fraction");

    double sum_w = 0.0;
    double max_w = 0.0;
    for (const Complex& w : spec.weights) {
        sum_w += std::abs(w);
        max_w = std::max(max_w, std::abs(w));
    }
    if (max_w == 0.0) throw std::invalid_argument("apply_rational: all weights are zero");
    opts.tol = opts.tol * sum_w / (static_cast<double>(spec.weights.size()) * max_w);

    std::vector<Complex> shifts;
    shifts.reserve(spec.poles.size());
    for (const Complex& p : spec.poles) shifts.push_back(-p);

    RationalApplyResult out;
    out.family = backend == Backend::sbicgstab ? shifted_bicgstab(a, shifts, b, opts)
                                               : sqmrcgstab(a, shifts, b, opts);

    out.y = Vector::Zero(b.size());
    std::size_t failed = 0;
    for (std::size_t i = 0; i < spec.weights.size(); ++i) {
        const ShiftResult& sr = out.family.shifts[i];
        if (sr.status == TrackStatus::converged)
            out.y += spec.weights[i] * sr.x;
        else
            ++failed;
    }
    if (failed > 0) {
        std::string what = "apply_rational: " + std::to_string(failed) + " of " +
                           std::to_string(spec.weights.size()) +
                           " pole systems did not converge";
        if (out.family.seed_breakdown)
            what += " (seed breakdown: " + to_string(*out.family.seed_breakdown) + ")";
        throw RationalApplyError(std::move(what), std::move(out));
    }
    return out;
}

}  // namespace shiftstab
