#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shiftstab/bench.hpp"

namespace {

shiftstab::RhsSpec parse_rhs(const std::string& s) {
    shiftstab::RhsSpec spec;
    if (s == "ones") {
        spec.kind = shiftstab::RhsKind::ones;
    } else if (s == "ones:normalized") {
        spec.kind = shiftstab::RhsKind::ones_normalized;
    } else if (s.rfind("unit:", 0) == 0) {
        spec.kind = shiftstab::RhsKind::unit;
        spec.unit_index = std::stol(s.substr(5));
    } else if (s.rfind("file:", 0) == 0) {
        spec.kind = shiftstab::RhsKind::file;
        spec.path = s.substr(5);
    } else {
        throw CLI::ValidationError("--rhs", "expected ones, unit:<index> or file:<path>");
    }
    return spec;
}

void print_report(const shiftstab::RunReport& rep) {
    std::printf("%s: %ld unknowns\n", rep.name.c_str(), static_cast<long>(rep.n));
    for (const auto& sr : rep.solvers) {
        std::printf("  %s: %ld products + %ld extra, %.3f s%s\n", sr.solver.c_str(),
                    sr.matvecs, sr.extra_matvecs, sr.wall_seconds,
                    sr.seed_converged_warning ? " (seed residual hit round-off floor)" : "");
        if (sr.seed_breakdown)
            std::printf("    seed breakdown: %s\n",
                        shiftstab::to_string(*sr.seed_breakdown).c_str());
        for (const auto& sh : sr.shifts) {
            std::printf("    sigma %.6g%+.6gi", sh.sigma.real(), sh.sigma.imag());
            if (sh.hopping != 0.0) std::printf(" (k = %.6g)", sh.hopping);
            std::printf(": %s, %ld iterations, %ld products, relres %.3e (true %.3e)\n",
                        shiftstab::to_string(sh.status), sh.iterations, sh.matvecs,
                        sh.final_relres_recursive, sh.final_relres_true);
        }
    }
    for (const auto& p : rep.csv_paths) std::printf("  wrote %s\n", p.c_str());
    if (!rep.plot_path.empty()) std::printf("  wrote %s\n", rep.plot_path.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-shift BiCGstab / QMRCGstab benchmark driver"};

    std::string preset;
    std::string matrix;
    std::string rhs;
    std::string solver = "both";
    std::string shadow;
    std::string out;
    std::string manifest;
    std::string name;
    std::vector<double> sigmas;
    std::vector<double> ks;
    double tol = 0.0;
    long maxit = -1;
    long every = -1;

    std::string preset_help = "named experiment:";
    for (const auto& p : shiftstab::preset_names()) preset_help += " " + p;
    app.add_option("--preset", preset, preset_help)
        ->check(CLI::IsMember(shiftstab::preset_names()));
    app.add_option("--matrix", matrix, "Matrix Market file");
    app.add_option("--sigma", sigmas, "real shift values (direct mode)");
    app.add_option("--k", ks, "hopping values (odd-even reduced mode)");
    app.add_option("--rhs", rhs, "ones | ones:normalized | unit:<index> | file:<path>");
    app.add_option("--solver", solver, "sbicgstab | sqmrcgstab | both")
        ->check(CLI::IsMember({"sbicgstab", "sqmrcgstab", "both"}));
    app.add_option("--tol", tol, "relative residual target (default 1e-8)");
    app.add_option("--maxit", maxit, "iteration cap (default ten per unknown)");
    app.add_option("--shadow", shadow, "b | seed:<integer>");
    app.add_option("--true-res-every", every, "true-residual sampling stride (0 disables)");
    app.add_option("--out", out, "output directory for CSV and plot files");
    app.add_option("--manifest", manifest, "dataset manifest (name n k_critical lines)");
    app.add_option("--name", name, "basename for output files");

    CLI11_PARSE(app, argc, argv);

    try {
        shiftstab::ExperimentConfig cfg =
            preset.empty() ? shiftstab::ExperimentConfig{} : shiftstab::preset_config(preset);

        if (!matrix.empty()) cfg.matrix_path = matrix;
        if (!sigmas.empty()) {
            cfg.qcd = false;
            cfg.shifts.clear();
            for (double s : sigmas) cfg.shifts.emplace_back(s, 0.0);
        }
        if (!ks.empty()) {
            cfg.qcd = true;
            cfg.hoppings = ks;
        }
        if (!rhs.empty()) cfg.rhs = parse_rhs(rhs);
        if (solver == "sbicgstab") cfg.solver = shiftstab::SolverChoice::sbicgstab;
        else if (solver == "sqmrcgstab") cfg.solver = shiftstab::SolverChoice::sqmrcgstab;
        else cfg.solver = shiftstab::SolverChoice::both;
        if (tol > 0.0) cfg.tol = tol;
        if (maxit >= 0) cfg.maxit = maxit;
        if (!shadow.empty()) cfg.shadow = shadow;
        if (every >= 0) cfg.true_res_every = every;
        if (!out.empty()) cfg.out_dir = out;
        if (!name.empty()) cfg.name = name;
        if (cfg.name.empty()) cfg.name = "run";

        if (!manifest.empty() && cfg.qcd) {
            const auto sets = shiftstab::read_dataset_manifest(manifest);
            for (const auto& info : sets)
                if (!preset.empty() && preset.rfind("qcd-", 0) == 0 &&
                    info.name.find(preset.substr(4)) != std::string::npos) {
                    cfg.expected_n = info.n;
                    cfg.k_critical = info.k_critical;
                }
        }

        const shiftstab::RunReport rep = shiftstab::run_experiment(cfg);
        print_report(rep);

        for (const auto& sr : rep.solvers)
            for (const auto& sh : sr.shifts)
                if (sh.status != shiftstab::TrackStatus::converged) return 1;
        return 0;
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 1;
    }
}
