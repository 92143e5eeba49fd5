#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "etdrd/field.hpp"
#include "etdrd/grid.hpp"
#include "etdrd/stepper.hpp"

namespace etdrd {

// Tunables with problem-specific defaults; any entry may be overridden from
// the CLI/config before the ProblemSpec is built.
struct ProblemParams {
    double lambda = 1.0;    // decay rate of the manufactured solution
    double rho = 0.1;       // singular source strength
    double kappa = 1.0;     // scalar diffusivity
    double sigma = 0.05;    // Gaussian bump width
    double alpha = 1.0;     // inhibitor relaxation
    double eps = 1.0;       // activator->inhibitor coupling
    double kappa_u = 0.01;
    double kappa_v = 10.0;
    std::optional<double> T;  // final time override
};

struct ProblemSpec {
    std::string name;
    int dim = 2;
    bool system = false;

    double kappa = 1.0;     // scalar problems
    double kappa_u = 0.0, kappa_v = 0.0;  // systems
    double q = 0.0;
    double T = 1.0;
    int default_m = 512;
    int coarse = 16;        // shared snapshot-set size: 16 in 2D, 10 in 3D
    int reference_N = 0;    // 0 = exact solution available instead

    std::function<Field(const Grid&)> initial_u;
    std::function<Field(const Grid&)> initial_v;  // systems only

    SourceFunction source;        // scalar problems
    SystemSource system_source;   // systems

    bool has_exact = false;
    std::function<double(double x, double y, double z, double t)> exact;

    Field exact_field(const Grid& grid, double t) const;
};

// Cubic reaction with a manufactured exponentially-decaying product-of-sines
// solution; the compensating forcing makes the error exactly measurable.
ProblemSpec allen_cahn(int dim, const ProblemParams& p = {});

// rho*u/(1-u) source, q=1; no closed-form solution (reference-based errors).
// Source evaluation throws if any u >= 1 (outside the invariant region).
ProblemSpec singular_source(int dim, const ProblemParams& p = {});

// Two-component activator-inhibitor system with strongly heterogeneous
// diffusivities; errors are reference-based.
ProblemSpec fhn(const ProblemParams& p = {});

// Lookup by CLI name: allen-cahn-2d, allen-cahn-3d, singular-source-2d,
// singular-source-3d, fhn-2d.  Throws ConfigError for unknown names.
ProblemSpec problem_by_name(const std::string& name, const ProblemParams& p = {});

std::vector<std::string> problem_names();

} // namespace etdrd
