#pragma once

#include <optional>
#include <string>
#include <vector>

#include "shiftstab/seed.hpp"
#include "shiftstab/shift_engine.hpp"
#include "shiftstab/types.hpp"

namespace shiftstab {

enum class RhsKind { ones, ones_normalized, unit, file };

struct RhsSpec {
    RhsKind kind = RhsKind::ones;
    Index unit_index = 0;
    std::string path;
};

enum class SolverChoice { sbicgstab, sqmrcgstab, both };

struct ExperimentConfig {
    std::string name = "run";
    std::string matrix_path;  // Matrix Market file; empty means generated

    // generated test matrix (bidiagonal), used when matrix_path is empty
    std::vector<double> diag_values;
    Complex super_value{0.0, 0.0};

    bool qcd = false;               // treat the matrix as a hopping term
    std::vector<double> hoppings;   // qcd mode: one system per value
    double k_critical = 0.0;        // advisory, printed with the report
    Index expected_n = 0;           // advisory, warn on mismatch

    std::vector<Complex> shifts;    // direct mode
    RhsSpec rhs;
    SolverChoice solver = SolverChoice::both;
    double tol = 1e-8;
    long maxit = 0;                 // 0: ten iterations per unknown
    std::string shadow = "b";       // "b" or "seed:<integer>"
    long true_res_every = 5;
    std::string out_dir = ".";
    bool write_files = true;
};

struct ShiftReport {
    Complex sigma;
    double hopping = 0.0;  // qcd mode only
    TrackStatus status = TrackStatus::running;
    long iterations = 0;
    long matvecs = 0;  // seed products consumed by this system
    double final_relres_recursive = 0.0;
    double final_relres_true = 0.0;
    ResidualHistory history;
};

struct SolverReport {
    std::string solver;
    long matvecs = 0;        // products by the seed recursion
    long extra_matvecs = 0;  // true-residual sampling and confirmations
    double wall_seconds = 0.0;
    bool seed_converged_warning = false;
    std::optional<BreakdownReport> seed_breakdown;
    std::vector<ShiftReport> shifts;
};

struct RunReport {
    std::string name;
    Index n = 0;  // unknowns seen by the solver (odd sites in qcd mode)
    std::vector<SolverReport> solvers;
    std::vector<std::string> csv_paths;
    std::string plot_path;
};

// Fraction of strictly increasing steps in the sampled true residuals of a
// history: increases divided by the number of sampled records.  Requires at
// least three sampled records.
double smoothness_metric(const ResidualHistory& history);

// One row per record: matvecs, relres_recursive, relres_true, quasi_bound,
// full precision, missing values written as nan.
void write_history_csv(const std::string& path, const ResidualHistory& history);

// "b" keeps the seed residual as shadow vector, "seed:<n>" draws a random
// one from that generator seed.
std::optional<Vector> make_shadow(const std::string& spec, Index n);

struct DatasetInfo {
    std::string name;
    Index n = 0;
    double k_critical = 0.0;
};

// Lines of "name n k_critical"; '#' comments and blank lines are skipped.
std::vector<DatasetInfo> read_dataset_manifest(const std::string& path);
// The lattice configurations the qcd presets expect.
const std::vector<DatasetInfo>& builtin_datasets();

std::vector<std::string> preset_names();
// Throws std::invalid_argument for unknown names.
ExperimentConfig preset_config(const std::string& name);

// Loads or generates the matrix, builds the rhs, runs the selected solvers,
// and (unless write_files is off) drops one CSV per (solver, shift) plus a
// gnuplot script next to them.
RunReport run_experiment(const ExperimentConfig& cfg);

}  // namespace shiftstab
