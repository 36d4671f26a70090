#include "shiftstab/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "shiftstab/matrix_market.hpp"
#include "shiftstab/qcd.hpp"

namespace shiftstab {

namespace {

std::string fmt_double(double x) {
    if (std::isnan(x)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

Vector build_rhs(const RhsSpec& spec, Index n) {
    switch (spec.kind) {
        case RhsKind::ones:
            return Vector::Ones(n);
        case RhsKind::ones_normalized: {
            Vector v = Vector::Ones(n);
            return Vector(v / v.norm());
        }
        case RhsKind::unit: {
            if (spec.unit_index < 0 || spec.unit_index >= n)
                throw std::invalid_argument("rhs unit index out of range");
            Vector e = Vector::Zero(n);
            e[spec.unit_index] = Complex{1.0, 0.0};
            return e;
        }
        case RhsKind::file: {
            Vector v = read_vector_lines(spec.path);
            if (v.size() != n)
                throw std::invalid_argument("rhs file holds " + std::to_string(v.size()) +
                                            " entries, matrix needs " + std::to_string(n));
            return v;
        }
    }
    throw std::logic_error("unreachable rhs kind");
}

template <LinearOp Op>
SolverReport run_one_solver(const Op& op, const std::vector<Complex>& shifts,
                            const Vector& rhs, const ExperimentConfig& cfg, bool quasi) {
    SolverOptions opts;
    opts.tol = cfg.tol;
    opts.maxit = static_cast<int>(cfg.maxit);
    opts.true_res_every = static_cast<int>(cfg.true_res_every);
    opts.shadow = make_shadow(cfg.shadow, rhs.size());

    const auto t0 = std::chrono::steady_clock::now();
    FamilyResult fam = quasi ? sqmrcgstab(op, shifts, rhs, opts)
                             : shifted_bicgstab(op, shifts, rhs, opts);
    const auto t1 = std::chrono::steady_clock::now();

    SolverReport sr;
    sr.solver = quasi ? "sqmrcgstab" : "sbicgstab";
    sr.matvecs = fam.matvecs;
    sr.extra_matvecs = fam.extra_matvecs;
    sr.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    sr.seed_converged_warning = fam.seed_converged_warning;
    sr.seed_breakdown = fam.seed_breakdown;

    const double bn = rhs.norm();
    sr.shifts.reserve(fam.shifts.size());
    for (auto& s : fam.shifts) {
        ShiftReport r;
        r.sigma = s.sigma;
        r.status = s.status;
        r.iterations = s.iterations;
        r.matvecs = 2L * s.iterations;
        r.final_relres_recursive = s.final_relres;
        const Vector resid = rhs - Vector(op * s.x) - s.sigma * s.x;
        r.final_relres_true = bn > 0.0 ? resid.norm() / bn : resid.norm();
        r.history = std::move(s.history);
        sr.shifts.push_back(std::move(r));
    }
    return sr;
}

void write_outputs(RunReport& rep, const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    if (!cfg.out_dir.empty()) fs::create_directories(cfg.out_dir);
    const fs::path dir = cfg.out_dir.empty() ? fs::path(".") : fs::path(cfg.out_dir);

    std::ostringstream plot_lines;
    for (const auto& sr : rep.solvers) {
        for (std::size_t i = 0; i < sr.shifts.size(); ++i) {
            const auto& sh = sr.shifts[i];
            const std::string base =
                rep.name + "_" + sr.solver + "_shift" + std::to_string(i) + ".csv";
            const fs::path csv = dir / base;
            {
                std::ofstream out(csv);
                if (!out) throw std::runtime_error("cannot write " + csv.string());
                out << "# sigma = " << fmt_double(sh.sigma.real()) << " "
                    << fmt_double(sh.sigma.imag());
                if (cfg.qcd) out << ", hopping = " << fmt_double(sh.hopping);
                out << "\n";
            }
            write_history_csv(csv.string(), sh.history);
            rep.csv_paths.push_back(csv.string());

            const std::string label = sr.solver + " sigma " + fmt_double(sh.sigma.real());
            if (!plot_lines.str().empty()) plot_lines << ", \\\n    ";
            plot_lines << "'" << base << "' using 1:2 with lines title '" << label
                       << " (recursive)', '" << base << "' using 1:3 with points title '"
                       << label << " (true)'";
        }
    }

    const fs::path gp = dir / (rep.name + ".gp");
    std::ofstream out(gp);
    if (!out) throw std::runtime_error("cannot write " + gp.string());
    out << "set datafile separator ','\n"
        << "set logscale y\n"
        << "set xlabel 'operator products'\n"
        << "set ylabel 'relative residual'\n"
        << "set key bottom left\n"
        << "plot " << plot_lines.str() << "\n";
    rep.plot_path = gp.string();
}

}  // namespace

double smoothness_metric(const ResidualHistory& history) {
    std::vector<double> vals;
    for (const auto& rec : history)
        if (!std::isnan(rec.relres_true)) vals.push_back(rec.relres_true);
    if (vals.size() < 3)
        throw std::invalid_argument(
            "smoothness_metric: need at least three sampled true residuals, have " +
            std::to_string(vals.size()));
    std::size_t increases = 0;
    for (std::size_t i = 1; i < vals.size(); ++i)
        if (vals[i] > vals[i - 1]) ++increases;
    return static_cast<double>(increases) / static_cast<double>(vals.size());
}

void write_history_csv(const std::string& path, const ResidualHistory& history) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "matvecs,relres_recursive,relres_true,quasi_bound\n";
    for (const auto& rec : history)
        out << rec.matvecs << "," << fmt_double(rec.relres_recursive) << ","
            << fmt_double(rec.relres_true) << "," << fmt_double(rec.quasi_bound) << "\n";
}

std::optional<Vector> make_shadow(const std::string& spec, Index n) {
    if (spec == "b" || spec.empty()) return std::nullopt;
    if (spec.rfind("seed:", 0) == 0) {
        const char* digits = spec.c_str() + 5;
        char* end = nullptr;
        const unsigned long long seed = std::strtoull(digits, &end, 10);
        if (end == digits || *end != '\0')
            throw std::invalid_argument("shadow spec: bad integer in '" + spec + "'");
        return make_random_vector(n, static_cast<std::uint64_t>(seed));
    }
    throw std::invalid_argument("shadow spec must be 'b' or 'seed:<integer>', got '" +
                                spec + "'");
}

std::vector<DatasetInfo> read_dataset_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open dataset manifest");
    std::vector<DatasetInfo> sets;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream iss(line);
        DatasetInfo info;
        if (!(iss >> info.name >> info.n >> info.k_critical) || info.n <= 0)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected 'name n k_critical'");
        sets.push_back(std::move(info));
    }
    return sets;
}

const std::vector<DatasetInfo>& builtin_datasets() {
    static const std::vector<DatasetInfo> sets{
        {"conf5.4-00l4x4-1400", 3072, 0.20328},
        {"conf5.4-00l4x4-1800", 3072, 0.20265},
    };
    return sets;
}

std::vector<std::string> preset_names() {
    return {"example5.3-case1", "example5.3-case2", "example5.1-binary",
            "example5.1-unsym", "qcd-1400", "qcd-1800"};
}

ExperimentConfig preset_config(const std::string& name) {
    ExperimentConfig cfg;
    cfg.name = name;
    if (name == "example5.3-case1" || name == "example5.3-case2") {
        if (name == "example5.3-case1") {
            cfg.diag_values = {0.001, 0.002, 0.003, 0.004};
            for (int d = 10; d <= 105; ++d) cfg.diag_values.push_back(static_cast<double>(d));
        } else {
            cfg.diag_values = {0.0001, 0.0002, 0.0003, 0.0004};
            for (int d = 10; d <= 1005; ++d) cfg.diag_values.push_back(static_cast<double>(d));
        }
        cfg.super_value = Complex{1.0, 0.0};
        cfg.rhs.kind = RhsKind::ones_normalized;
        cfg.shifts = {Complex{1.0, 0.0}, Complex{-1.0, 0.0}};
        return cfg;
    }
    if (name == "example5.1-binary") {
        cfg.expected_n = 1960;
        cfg.shifts = {Complex{0.0, 0.0}, Complex{1.0, 0.0}, Complex{10.0, 0.0}};
        cfg.rhs.kind = RhsKind::unit;
        return cfg;
    }
    if (name == "example5.1-unsym") {
        cfg.expected_n = 1879;
        cfg.shifts = {Complex{0.0, 0.0}, Complex{0.1, 0.0}, Complex{1.0, 0.0}};
        cfg.rhs.kind = RhsKind::unit;
        return cfg;
    }
    if (name == "qcd-1400" || name == "qcd-1800") {
        const std::string dataset =
            name == "qcd-1400" ? "conf5.4-00l4x4-1400" : "conf5.4-00l4x4-1800";
        cfg.qcd = true;
        cfg.hoppings = {0.2, 0.196};
        cfg.rhs.kind = RhsKind::unit;
        for (const auto& info : builtin_datasets())
            if (info.name == dataset) {
                cfg.expected_n = info.n;
                cfg.k_critical = info.k_critical;
            }
        return cfg;
    }
    throw std::invalid_argument("unknown preset '" + name + "'");
}

RunReport run_experiment(const ExperimentConfig& cfg) {
    RunReport rep;
    rep.name = cfg.name;

    SparseMatrix a;
    if (!cfg.matrix_path.empty())
        a = read_matrix_market(cfg.matrix_path);
    else if (!cfg.diag_values.empty())
        a = make_bidiagonal_test(static_cast<Index>(cfg.diag_values.size()), cfg.diag_values,
                                 cfg.super_value);
    else
        throw std::invalid_argument("run_experiment: no matrix source (need a matrix file "
                                    "or generated diagonal values)");

    if (cfg.expected_n > 0 && a.rows() != cfg.expected_n)
        std::fprintf(stderr, "warning: %s: matrix has %ld unknowns, preset expects %ld\n",
                     cfg.name.c_str(), static_cast<long>(a.rows()),
                     static_cast<long>(cfg.expected_n));

    const Vector b = build_rhs(cfg.rhs, a.rows());
    const bool want_sb = cfg.solver != SolverChoice::sqmrcgstab;
    const bool want_qmr = cfg.solver != SolverChoice::sbicgstab;

    if (cfg.qcd) {
        if (cfg.hoppings.empty())
            throw std::invalid_argument("run_experiment: qcd mode needs hopping values");
        if (cfg.k_critical > 0.0)
            for (double k : cfg.hoppings)
                if (k >= cfg.k_critical)
                    std::fprintf(stderr,
                                 "warning: %s: hopping %.6g at or beyond critical %.6g\n",
                                 cfg.name.c_str(), k, cfg.k_critical);
        const auto parity = bipartite_parity(a);
        const auto split = odd_even_split(a, parity);
        const FamilySetup fam = family_from_hoppings(split, cfg.hoppings, b);
        rep.n = fam.op.rows();
        if (want_sb)
            rep.solvers.push_back(run_one_solver(fam.op, fam.shifts, fam.rhs, cfg, false));
        if (want_qmr)
            rep.solvers.push_back(run_one_solver(fam.op, fam.shifts, fam.rhs, cfg, true));
        for (auto& sr : rep.solvers)
            for (std::size_t i = 0; i < sr.shifts.size(); ++i)
                sr.shifts[i].hopping = cfg.hoppings[i];
    } else {
        if (cfg.shifts.empty())
            throw std::invalid_argument("run_experiment: no shifts given");
        rep.n = a.rows();
        if (want_sb)
            rep.solvers.push_back(run_one_solver(a, cfg.shifts, b, cfg, false));
        if (want_qmr)
            rep.solvers.push_back(run_one_solver(a, cfg.shifts, b, cfg, true));
    }

    if (cfg.write_files) write_outputs(rep, cfg);
    return rep;
}

}  // namespace shiftstab
