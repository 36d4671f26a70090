#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracle.hpp"
#include "shiftstab/shift_engine.hpp"

using namespace shiftstab;

namespace {

oracle::Dense to_dense(const SparseMatrix& a) {
    oracle::Dense d(static_cast<int>(a.rows()), static_cast<int>(a.cols()));
    for (Index i = 0; i < a.outerSize(); ++i)
        for (SparseMatrix::InnerIterator it(a, i); it; ++it)
            d.at(static_cast<int>(it.row()), static_cast<int>(it.col())) = it.value();
    return d;
}

oracle::Dense to_dense(const DenseMatrix& a) {
    oracle::Dense d(static_cast<int>(a.rows()), static_cast<int>(a.cols()));
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j) d.at(static_cast<int>(i), static_cast<int>(j)) = a(i, j);
    return d;
}

// polynomial-coefficient route for pi_m = p_m(-sigma): run the same
// three-term recurrence on coefficient arrays, then evaluate by Horner
Complex pi_via_coefficients(const std::vector<Complex>& alphas, const std::vector<Complex>& betas,
                            Complex sigma) {
    using Poly = std::vector<Complex>;
    const auto times_t = [](const Poly& p) {
        Poly q(p.size() + 1, Complex{0.0, 0.0});
        for (size_t j = 0; j < p.size(); ++j) q[j + 1] = p[j];
        return q;
    };
    Poly prev{Complex{1.0, 0.0}}, curr{Complex{1.0, 0.0}};
    Complex alpha_prev{1.0, 0.0};
    for (size_t m = 0; m < alphas.size(); ++m) {
        const Complex lam = m == 0 ? Complex{0.0, 0.0} : alphas[m] * betas[m] / alpha_prev;
        const Poly tp = times_t(curr);
        Poly next(tp.size(), Complex{0.0, 0.0});
        for (size_t j = 0; j < next.size(); ++j) {
            Complex c = -alphas[m] * tp[j];
            if (j < curr.size()) c += (1.0 + lam) * curr[j];
            if (j < prev.size()) c -= lam * prev[j];
            next[j] = c;
        }
        prev = std::move(curr);
        curr = std::move(next);
        alpha_prev = alphas[m];
    }
    Complex val{0.0, 0.0};
    for (size_t j = curr.size(); j-- > 0;) val = val * (-sigma) + curr[j];
    return val;
}

}  // namespace

TEST_CASE("collinearity factor stays at one for a zero shift") {
    CollinearityState st;
    for (int m = 1; m <= 5; ++m) {
        st = update_collinearity(st, Complex{0.0, 0.0}, Complex{0.3, 0.1}, Complex{0.7, -0.2},
                                 Complex{1.1, 0.4});
        CHECK(st.pi_curr == Complex{1.0, 0.0});
    }
}

TEST_CASE("first collinearity step gives 1 + alpha sigma") {
    CollinearityState st;
    const Complex sigma{2.0, 0.5}, alpha{0.3, -0.1};
    st = update_collinearity(st, sigma, alpha, Complex{1.0, 0.0}, Complex{9.0, 9.0});
    CHECK(std::abs(st.pi_curr - (1.0 + alpha * sigma)) <= 1e-15);
    CHECK(st.pi_prev == Complex{1.0, 0.0});
}

TEST_CASE("second collinearity step adds the forward difference of pi") {
    CollinearityState st;
    st = update_collinearity(st, 2.0, 0.5, 1.0, 7.0);  // pi_1 = 2
    REQUIRE(std::abs(st.pi_curr - Complex{2.0, 0.0}) == 0.0);
    st = update_collinearity(st, 2.0, 0.25, 0.5, 0.4);
    // (1 + 0.5) 2 + (0.25 0.4 / 0.5)(2 - 1) = 3.2; the reversed difference gives 2.8
    CHECK(std::abs(st.pi_curr - Complex{3.2, 0.0}) <= 1e-15);
}

TEST_CASE("shifted scalars reduce to the seed scalars at sigma zero") {
    CollinearityState st;
    const Complex alpha{0.4, 0.2}, alpha_prev{0.9, -0.3}, beta{0.6, 0.1}, chi{0.8, -0.4};
    const ShiftedScalars sc = shifted_scalars(st, alpha, alpha_prev, beta, chi, Complex{0.0, 0.0});
    CHECK_FALSE(sc.stalled);
    CHECK(std::abs(sc.alpha_shift - alpha) == 0.0);
    CHECK(std::abs(sc.beta_shift - beta) == 0.0);
    CHECK(std::abs(sc.chi_shift - chi) == 0.0);
    CHECK(std::abs(sc.rho_mr_next - Complex{1.0, 0.0}) == 0.0);
}

TEST_CASE("unit chi at unit shift halves chi and the residual scaling") {
    CollinearityState st;
    const ShiftedScalars sc = shifted_scalars(st, Complex{0.5, 0.0}, Complex{1.0, 0.0},
                                              Complex{0.0, 0.0}, Complex{1.0, 0.0},
                                              Complex{1.0, 0.0});
    CHECK_FALSE(sc.stalled);
    CHECK(std::abs(sc.chi_shift - Complex{0.5, 0.0}) <= 1e-15);
    CHECK(std::abs(sc.rho_mr_next - Complex{0.5, 0.0}) <= 1e-15);
}

TEST_CASE("vanishing 1 + sigma chi marks the shift as stalled") {
    CollinearityState st;
    const ShiftedScalars sc = shifted_scalars(st, Complex{0.5, 0.0}, Complex{1.0, 0.0},
                                              Complex{0.2, 0.0}, Complex{-0.25, 0.0},
                                              Complex{4.0, 0.0});
    CHECK(sc.stalled);
}

TEST_CASE("pi tracks the seed residual polynomial evaluated at minus sigma") {
    const SparseMatrix a = make_random_perturbed_identity(24, 0.35, 101);
    const Vector b = make_random_vector(24, 102);
    const Complex sigma{0.8, 0.3};

    std::vector<Complex> alphas, betas, pis;
    SolverOptions opts;
    opts.tol = 1e-30;
    opts.maxit = 10;
    opts.observer = [&](const SeedIterationRecord& rec, const ShiftTrack& t, int half) {
        if (half != 2) return;
        alphas.push_back(rec.alpha);
        betas.push_back(rec.beta);
        pis.push_back(t.coll.pi_curr);
    };
    const std::vector<Complex> shifts{sigma};
    const FamilyResult fam = shifted_bicgstab(a, shifts, b, opts);
    REQUIRE(pis.size() == 10);
    REQUIRE(fam.iterations == 10);

    for (size_t m = 1; m <= pis.size(); ++m) {
        const oracle::CVec oa(alphas.begin(), alphas.begin() + static_cast<long>(m));
        const oracle::CVec ob(betas.begin() + 1, betas.begin() + static_cast<long>(m));
        const Complex direct = oracle::residual_polynomial_eval(oa, ob, -sigma);
        CHECK(std::abs(pis[m - 1] - direct) <= 1e-8 * std::abs(direct));
        const Complex via_coeff = pi_via_coefficients(
            std::vector<Complex>(alphas.begin(), alphas.begin() + static_cast<long>(m)),
            std::vector<Complex>(betas.begin(), betas.begin() + static_cast<long>(m)), sigma);
        CHECK(std::abs(pis[m - 1] - via_coeff) <= 1e-10 * std::abs(via_coeff));
    }
}

TEST_CASE("shifted diagonal systems are inverted entrywise by both solvers") {
    const SparseMatrix a = make_bidiagonal_test(3, std::vector<double>{1, 2, 3}, 0.0);
    const Vector b = Vector::Ones(3);
    const std::vector<Complex> shifts{Complex{1.0, 0.0}, Complex{10.0, 0.0}};
    SolverOptions opts;
    opts.tol = 1e-12;
    for (int which = 0; which < 2; ++which) {
        const FamilyResult fam = which == 0 ? shifted_bicgstab(a, shifts, b, opts)
                                            : sqmrcgstab(a, shifts, b, opts);
        REQUIRE(fam.all_converged());
        for (size_t k = 0; k < shifts.size(); ++k)
            for (Index i = 0; i < 3; ++i) {
                const Complex expect = 1.0 / (double(i + 1) + shifts[k]);
                CHECK(std::abs(fam.shifts[k].x[i] - expect) <= 1e-10);
            }
    }
}

TEST_CASE("the zero-shift track reproduces the plain solver iterate by iterate") {
    const SparseMatrix a = make_random_perturbed_identity(16, 0.3, 111);
    const Vector b = make_random_vector(16, 112);

    std::vector<Vector> plain_x;
    PlainSolveOptions popts;
    popts.tol = 1e-30;
    popts.maxit = 8;
    popts.observer = [&](const SeedIterationRecord&, const Vector& x) { plain_x.push_back(x); };
    bicgstab_solve(a, b, popts);

    std::vector<Vector> shift_x;
    SolverOptions sopts;
    sopts.tol = 1e-30;
    sopts.maxit = 8;
    sopts.observer = [&](const SeedIterationRecord&, const ShiftTrack& t, int half) {
        if (half == 2) shift_x.push_back(t.x);
    };
    const std::vector<Complex> shifts{Complex{0.0, 0.0}};
    shifted_bicgstab(a, shifts, b, sopts);

    REQUIRE(plain_x.size() == 8);
    REQUIRE(shift_x.size() == 8);
    for (size_t m = 0; m < 8; ++m) {
        const double scale = std::max(plain_x[m].norm(), 1e-30);
        CHECK((shift_x[m] - plain_x[m]).norm() <= 1e-13 * scale);
    }
}

TEST_CASE("recursive residuals track the true shifted residual for both solvers") {
    const SparseMatrix a = make_random_perturbed_identity(32, 0.3, 121);
    const Vector b = make_random_vector(32, 122);
    const double bn = b.norm();
    const std::vector<Complex> shifts{Complex{0.5, 0.0}, Complex{1.0, 0.0}, Complex{5.0, 0.0}};

    for (int which = 0; which < 2; ++which) {
        int checked = 0;
        SolverOptions opts;
        opts.tol = 1e-10;
        opts.observer = [&](const SeedIterationRecord&, const ShiftTrack& t, int half) {
            if (half != 2) return;
            const Vector& rrec = which == 0 ? t.r : t.rhat;
            const Vector gap = b - Vector(a * t.x) - t.sigma * t.x - rrec;
            CHECK(gap.norm() <= 1e-6 * bn);
            ++checked;
        };
        const FamilyResult fam = which == 0 ? shifted_bicgstab(a, shifts, b, opts)
                                            : sqmrcgstab(a, shifts, b, opts);
        CHECK(fam.all_converged());
        CHECK(checked > 0);
    }
}

TEST_CASE("quasi-minimization keeps tau below the half-step residual norms") {
    const SparseMatrix a = make_random_perturbed_identity(20, 0.3, 131);
    const Vector b = make_random_vector(20, 132);
    const double bn = b.norm();
    const std::vector<Complex> shifts{Complex{0.7, 0.0}, Complex{2.0, 0.0}};

    int checked = 0;
    SolverOptions opts;
    opts.tol = 1e-9;
    opts.observer = [&](const SeedIterationRecord& rec, const ShiftTrack& t, int half) {
        ++checked;
        if (half == 1) {
            const double s_norm_shift = std::abs(t.scale_s) * rec.s_norm;
            CHECK(t.tau_tilde >= 0.0);
            CHECK(t.tau_tilde <= s_norm_shift * (1.0 + 1e-12));
        } else {
            const double r_norm_shift = std::abs(t.scale_r) * rec.r_norm;
            CHECK(t.tau >= 0.0);
            CHECK(t.tau <= r_norm_shift * (1.0 + 1e-12));
            // the quasi bound dominates the true residual up to roundoff
            const double bound = quasi_residual_bound(rec.m, t.tau);
            const Vector rt = b - Vector(a * t.x) - t.sigma * t.x;
            CHECK(bound >= rt.norm() - 1e-8 * bn);
        }
    };
    const FamilyResult fam = sqmrcgstab(a, shifts, b, opts);
    CHECK(fam.all_converged());
    CHECK(checked > 0);
}

TEST_CASE("quasi residual bound endpoints") {
    CHECK(quasi_residual_bound(0, 3.5) == 3.5);
    CHECK(quasi_residual_bound(7, 0.0) == 0.0);
    CHECK(quasi_residual_bound(4, 2.0) == doctest::Approx(std::sqrt(9.0) * 2.0));
}

TEST_CASE("least-squares assembly lays out the bidiagonal factors") {
    {
        const std::vector<Complex> delta{Complex{2.0, 0.0}};
        const std::vector<double> theta{1.0, 1.0};
        const auto [H, rhs] = assemble_qmr_system(delta, theta);
        REQUIRE(H.rows() == 2);
        REQUIRE(H.cols() == 1);
        CHECK(std::abs(H(0, 0) - Complex{0.5, 0.0}) == 0.0);
        CHECK(std::abs(H(1, 0) - Complex{-0.5, 0.0}) == 0.0);
        CHECK(std::abs(rhs[0] - Complex{1.0, 0.0}) == 0.0);
        CHECK(std::abs(rhs[1]) == 0.0);
    }
    {
        const std::vector<Complex> delta{Complex{1.0, 0.0}, Complex{1.0, 0.0}};
        const std::vector<double> theta{1.0, 1.0, 1.0};
        const auto [H, rhs] = assemble_qmr_system(delta, theta);
        DenseMatrix expect = DenseMatrix::Zero(3, 2);
        expect(0, 0) = 1.0;
        expect(1, 0) = -1.0;
        expect(1, 1) = 1.0;
        expect(2, 1) = -1.0;
        CHECK((H - expect).norm() == 0.0);
        CHECK(rhs[0] == Complex{1.0, 0.0});
    }
    CHECK_THROWS_AS(assemble_qmr_system(std::vector<Complex>{Complex{0.0, 0.0}},
                                        std::vector<double>{1.0, 1.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(assemble_qmr_system(std::vector<Complex>{Complex{1.0, 0.0}},
                                        std::vector<double>{1.0}),
                    std::invalid_argument);
}

TEST_CASE("quasi-minimal iterates solve the projected least-squares problem") {
    const SparseMatrix a = make_random_perturbed_identity(12, 0.3, 141);
    const Vector b = make_random_vector(12, 142);
    const Complex sigma{0.7, 0.0};

    std::vector<Vector> basis, snapshots;
    std::vector<Complex> delta;
    std::vector<double> theta{b.norm()};
    SolverOptions opts;
    opts.tol = 1e-30;
    opts.maxit = 5;
    opts.true_res_every = 0;
    opts.observer = [&](const SeedIterationRecord& rec, const ShiftTrack& t, int half) {
        if (half == 1) {
            basis.push_back(t.u);
            delta.push_back(t.alpha_shift);
            theta.push_back(std::abs(t.scale_s) * rec.s_norm);
        } else {
            basis.push_back(t.s);
            delta.push_back(t.chi_shift);
            theta.push_back(std::abs(t.scale_r) * rec.r_norm);
        }
        snapshots.push_back(t.x);
    };
    const std::vector<Complex> shifts{sigma};
    sqmrcgstab(a, shifts, b, opts);
    REQUIRE(snapshots.size() == 10);

    for (size_t k = 1; k <= snapshots.size(); ++k) {
        const auto [H, rhs] = assemble_qmr_system(
            std::span<const Complex>(delta.data(), k), std::span<const double>(theta.data(), k + 1));
        oracle::CVec rv(rhs.data(), rhs.data() + rhs.size());
        const oracle::CVec z = oracle::dense_lstsq(to_dense(H), rv);
        Vector x_ls = Vector::Zero(b.size());
        for (size_t j = 0; j < k; ++j) x_ls += z[j] * basis[j];
        const Vector& x_rec = snapshots[k - 1];
        CHECK((x_ls - x_rec).norm() <= 1e-10 * std::max(x_ls.norm(), 1e-30));
    }
}

TEST_CASE("one seed run serves any number of shifts at two products per iteration") {
    const SparseMatrix a = make_random_perturbed_identity(20, 0.3, 151);
    const Vector b = make_random_vector(20, 152);
    const std::vector<Complex> pool{Complex{0.3, 0.0}, Complex{0.7, 0.0}, Complex{1.1, 0.0},
                                    Complex{2.2, 0.0}, Complex{-0.4, 0.0}, Complex{0.9, 0.0},
                                    Complex{1.7, 0.0}, Complex{2.9, 0.0}};
    SolverOptions opts;
    opts.tol = 1e-30;
    opts.maxit = 12;
    opts.true_res_every = 0;

    std::vector<SeedScalarRecord> reference;
    for (size_t count : {size_t{1}, size_t{2}, size_t{4}, size_t{8}}) {
        const std::span<const Complex> shifts(pool.data(), count);
        for (int which = 0; which < 2; ++which) {
            const FamilyResult fam = which == 0 ? shifted_bicgstab(a, shifts, b, opts)
                                                : sqmrcgstab(a, shifts, b, opts);
            CHECK(fam.iterations == 12);
            CHECK(fam.matvecs == 24);
            CHECK(fam.extra_matvecs == 0);
            if (reference.empty()) {
                reference = fam.seed_scalars;
            } else {
                REQUIRE(fam.seed_scalars.size() == reference.size());
                for (size_t i = 0; i < reference.size(); ++i) {
                    CHECK(fam.seed_scalars[i].alpha == reference[i].alpha);
                    CHECK(fam.seed_scalars[i].beta == reference[i].beta);
                    CHECK(fam.seed_scalars[i].chi == reference[i].chi);
                    CHECK(fam.seed_scalars[i].rho == reference[i].rho);
                }
            }
        }
    }
}

TEST_CASE("positive shifts of a positive-definite diagonal keep pi away from zero") {
    const SparseMatrix a = make_bidiagonal_test(
        12, std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12}, 0.0);
    const Vector b = make_random_vector(12, 161);
    SolverOptions opts;
    opts.tol = 1e-10;
    int checked = 0;
    opts.observer = [&](const SeedIterationRecord&, const ShiftTrack& t, int half) {
        if (half != 2) return;
        CHECK(std::abs(t.coll.pi_curr) >= 0.99);
        ++checked;
    };
    const std::vector<Complex> shifts{Complex{1.0, 0.0}};
    const FamilyResult fam = shifted_bicgstab(a, shifts, b, opts);
    CHECK(fam.all_converged());
    CHECK(checked > 0);
}

TEST_CASE("a stalled shift freezes without disturbing the others") {
    const SparseMatrix a = make_random_perturbed_identity(16, 0.25, 171);
    const Vector b = make_random_vector(16, 172);

    SolverOptions probe;
    probe.tol = 1e-10;
    const std::vector<Complex> one{Complex{1.0, 0.0}};
    const FamilyResult first = shifted_bicgstab(a, one, b, probe);
    REQUIRE(!first.seed_scalars.empty());
    const Complex chi1 = first.seed_scalars[0].chi;

    const std::vector<Complex> shifts{-1.0 / chi1, Complex{1.0, 0.0}};
    const FamilyResult fam = shifted_bicgstab(a, shifts, b, probe);
    CHECK(fam.shifts[0].status == TrackStatus::stalled);
    CHECK(fam.shifts[0].iterations == 1);
    CHECK(fam.shifts[1].status == TrackStatus::converged);
    CHECK_FALSE(fam.all_converged());
}

TEST_CASE("astronomic shifts trip the pi range flag without derailing the run") {
    const SparseMatrix a = make_random_perturbed_identity(8, 0.3, 181);
    const Vector b = make_random_vector(8, 182);
    SolverOptions opts;
    // the collinear residual scale collapses like |sigma|^-2m, so any
    // positive tol converges the track before pi leaves [1e-150, 1e150]
    opts.tol = 0.0;
    opts.maxit = 4;
    const std::vector<Complex> shifts{Complex{1e40, 0.0}};
    const FamilyResult fam = shifted_bicgstab(a, shifts, b, opts);
    CHECK(fam.shifts[0].pi_range_flag);
    CHECK(fam.shifts[0].status == TrackStatus::maxit_reached);
}

TEST_CASE("a seed that converges before its tracks raises the warning") {
    const SparseMatrix a = make_random_perturbed_identity(8, 0.2, 191);
    const Vector b = make_random_vector(8, 192);
    SolverOptions opts;
    // qmr mode confirms against the true residual, which can never pass
    // tol = 0, so the track is guaranteed to outlive the seed
    opts.tol = 0.0;
    opts.maxit = 60;
    const std::vector<Complex> shifts{Complex{0.5, 0.0}};
    const FamilyResult fam = sqmrcgstab(a, shifts, b, opts);
    CHECK(fam.seed_converged_warning);
    CHECK(fam.shifts[0].status != TrackStatus::converged);
}

TEST_CASE("a seed breakdown marks every running track as exhausted") {
    const SparseMatrix a = make_random_perturbed_identity(2, 0.3, 201);
    Vector b = Vector::Zero(2), shadow = Vector::Zero(2);
    b[0] = 1.0;
    shadow[1] = 1.0;
    SolverOptions opts;
    opts.shadow = shadow;
    const std::vector<Complex> shifts{Complex{1.0, 0.0}};
    const FamilyResult fam = shifted_bicgstab(a, shifts, b, opts);
    CHECK(fam.shifts[0].status == TrackStatus::seed_exhausted);
    REQUIRE(fam.seed_breakdown.has_value());
    CHECK(fam.seed_breakdown->kind == BreakdownReport::Kind::rho_zero);
    CHECK(fam.matvecs == 0);
}

TEST_CASE("histories start at the rhs and advance one half-step at a time") {
    const SparseMatrix a = make_random_perturbed_identity(10, 0.3, 211);
    const Vector b = make_random_vector(10, 212);
    const std::vector<Complex> shifts{Complex{0.4, 0.0}};
    for (int which = 0; which < 2; ++which) {
        const FamilyResult fam = which == 0 ? shifted_bicgstab(a, shifts, b)
                                            : sqmrcgstab(a, shifts, b);
        const ResidualHistory& h = fam.shifts[0].history;
        REQUIRE(h.size() >= 3);
        CHECK(h[0].matvecs == 0);
        CHECK(h[0].relres_recursive == 1.0);
        CHECK(h[0].relres_true == 1.0);
        if (which == 0)
            CHECK(std::isnan(h[0].quasi_bound));
        else
            CHECK(h[0].quasi_bound == 1.0);
        for (size_t i = 1; i < h.size(); ++i) CHECK(h[i].matvecs > h[i - 1].matvecs);
    }
}

TEST_CASE("zero right-hand side yields converged zero tracks") {
    const SparseMatrix a = make_random_perturbed_identity(6, 0.3, 221);
    const std::vector<Complex> shifts{Complex{1.0, 0.0}, Complex{2.0, 0.0}};
    const FamilyResult fam = sqmrcgstab(a, shifts, Vector::Zero(6));
    REQUIRE(fam.all_converged());
    for (const auto& s : fam.shifts) {
        CHECK(s.x.norm() == 0.0);
        CHECK(s.final_relres == 0.0);
    }
}

TEST_CASE("input validation rejects malformed families") {
    const SparseMatrix a = make_random_perturbed_identity(4, 0.3, 231);
    const Vector b = make_random_vector(4, 232);
    const std::vector<Complex> shifts{Complex{1.0, 0.0}};
    CHECK_THROWS_AS(shifted_bicgstab(a, std::vector<Complex>{}, b), std::invalid_argument);
    CHECK_THROWS_AS(shifted_bicgstab(a, shifts, make_random_vector(5, 233)), std::invalid_argument);
    SolverOptions bad;
    bad.tol = -1.0;
    CHECK_THROWS_AS(sqmrcgstab(a, shifts, b, bad), std::invalid_argument);
}

TEST_CASE("repeated runs are bitwise identical") {
    const SparseMatrix a = make_random_perturbed_identity(14, 0.3, 241);
    const Vector b = make_random_vector(14, 242);
    const std::vector<Complex> shifts{Complex{0.6, 0.0}, Complex{1.3, 0.0}};
    const FamilyResult f1 = sqmrcgstab(a, shifts, b);
    const FamilyResult f2 = sqmrcgstab(a, shifts, b);
    REQUIRE(f1.shifts.size() == f2.shifts.size());
    for (size_t k = 0; k < f1.shifts.size(); ++k) {
        CHECK((f1.shifts[k].x - f2.shifts[k].x).norm() == 0.0);
        CHECK(f1.shifts[k].iterations == f2.shifts[k].iterations);
    }
}
