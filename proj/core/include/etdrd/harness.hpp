#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "etdrd/problems.hpp"
#include "etdrd/stepper.hpp"
#include "etdrd/tensor_ops.hpp"

namespace etdrd {

struct RunConfig {
    std::string problem = "allen-cahn-2d";
    ProblemParams params;
    int m = 0;                      // 0 = problem default
    std::vector<int> Ns;            // convergence study step counts
    int N = 0;                      // single-run step count (run subcommand)
    double tau = 0.0;               // alternative to N: N = round(T/tau)
    double T = 0.0;                 // 0 = problem default
    PadeFamily scheme = PadeFamily::P02;
    BackendKind backend = BackendKind::Spectral;
    int coarse = 0;                 // 0 = problem default (16 in 2D, 10 in 3D)
    std::filesystem::path out = "out";
    int repeats = 3;                // timing repeats (median reported)
    std::vector<int> bench_ms;      // grid sizes for the timing table
    double memory_cap_gb = 3.0;     // banded-factorization guard
    int bench_nonslice_max = 256;   // largest m the non-sliced variant is timed at
    int snapshot_every = 0;         // run subcommand: emit every k steps
    bool quiet = false;
};

// Fields snapshotted at the shared coarse times (t=0 included).
struct Trajectory {
    std::vector<double> times;
    std::vector<Field> fields;
};

struct SystemTrajectory {
    std::vector<double> times;
    std::vector<Field> u, v;
};

// Max over shared times of the interior sup-norm difference.  Throws
// ConfigError when the time sets or shapes do not line up.
double compute_error_E(const Trajectory& traj, const Trajectory& truth);
double compute_error_E(const SystemTrajectory& traj, const SystemTrajectory& truth);

struct ConvergenceRow {
    int N = 0;
    double E = 0.0;
    std::optional<double> eoc;  // empty on the first row or non-halving steps
    double cpu_seconds = 0.0;
};

struct ConvergenceReport {
    std::string problem, scheme, backend, platform;
    int m = 0;
    std::vector<ConvergenceRow> rows;
};

// Integrate one scalar configuration, snapshotting at every coarse time.
// N must be a multiple of the coarse count.
Trajectory integrate_scalar(const ProblemSpec& spec, const StepperPlan& plan, int N,
                            int coarse);
SystemTrajectory integrate_system(const ProblemSpec& spec, const SystemPlan& plan, int N,
                                  int coarse);

// Runs each N in config.Ns, measures E(N) against the exact solution or a
// disk-cached fine-N reference, and writes <out>/convergence_*.csv plus a
// run manifest.  EOC row r compares row r-1 to row r under step halving.
ConvergenceReport run_convergence(const RunConfig& config);

// Fixed tau = 1/32; medians over config.repeats; includes the non-sliced
// banded variant in 2D alongside the spectral and Thomas backends.  Returns
// the CSV text (also written to <out>/timing_*.csv).
std::string run_timing_scaling(const RunConfig& config);

// Oracle suite: slice equivalence, backend agreement, manufactured-solution
// residuals.  Prints one line per check; returns the number of failures.
int verify_suite(std::ostream& os);

void write_convergence_csv(const ConvergenceReport& report, const std::filesystem::path& path);
ConvergenceReport parse_convergence_csv(const std::filesystem::path& path);

int cli_main(int argc, const char* const* argv);

} // namespace etdrd
