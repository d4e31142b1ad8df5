#pragma once

// Independent KdV solvers used to cross-check the closed form: a periodic
// method-of-lines solver and a replay of the boundary-trace problem on [0, L].

#include "solflow/analysis.hpp"
#include "solflow/hirota.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace solflow {

enum class BoundaryMode { Periodic, DirichletTraces };

struct SolverConfig {
    Interval domain{-20.0, 20.0};
    std::size_t resolution = 1024;  ///< periodic: grid points; traces: intervals on [0, L]
    BoundaryMode bc = BoundaryMode::Periodic;
    double dt = 0.0;                ///< 0 chooses a stable step automatically
    double courant = 0.25;          ///< dt <= courant * dx^3 for the finite-difference schemes
    double t0 = 0.0;
    double t1 = 1.0;
    std::size_t snapshots = 11;     ///< output rows, t0 and t1 included
    EvalFrame frame = EvalFrame::SolitonFrame;
    bool dealias = true;            ///< 2/3 rule for the spectral scheme
};

void validate(const SolverConfig& config);

/// max |eta_t + 6 eta eta_x + eta_xxx| on `resolution` x-points spanning the
/// domain and `time_samples` times spanning [t0, t1].
[[nodiscard]] double residual_norm(const NSolitonSolution& sol, const SolverConfig& grid,
                                   std::size_t time_samples = 50, DifferenceRule rule = {});

/// Abscissae of a periodic grid: a + j (b - a) / n, j < n.
[[nodiscard]] std::vector<double> periodic_grid(const SolverConfig& config);

/// Periodic configuration whose domain holds every soliton of sol over
/// [t0, t1] with boundary values below 1e-10, widened by doubling as needed,
/// at spacing at most dx on a power-of-two grid.
[[nodiscard]] SolverConfig periodic_config_for(const NSolitonSolution& sol, double t0, double t1, double dx);

/// Evolves the single time row of `initial` over [config.t0, config.t1] in
/// the equation of config.frame. Power-of-two grids use Fourier
/// differentiation with an integrating-factor RK4; others use sixth-order
/// centered differences with RK4. Throws NumericError when the field grows
/// past 10 times its initial maximum.
[[nodiscard]] GridField solve(const GridField& initial, const SolverConfig& config);

/// Discrete mass sum(u) dx of one row of a periodic grid field.
[[nodiscard]] double discrete_mass(const GridField& field, std::size_t time_index);

/// Largest |field - closed form| over every row.
[[nodiscard]] double max_deviation(const GridField& field, const NSolitonSolution& sol);

struct ReplayResult {
    GridField field;             ///< interior and boundary values on [0, L]
    double max_deviation = 0.0;  ///< max over snapshots of |numeric - closed form|
    std::size_t steps = 0;
};

/// Solves the problem on [0, L] with u(0,t), u(L,t) and u_x(L,t) taken from
/// the closed form (in config.frame) and initial data from the closed form at
/// config.t0. Fourth-order differences with one-sided closures at both ends,
/// RK4 with dt <= courant dx^3.
[[nodiscard]] ReplayResult ibvp_replay(const NSolitonSolution& sol, double L, const SolverConfig& config);

/// One CSV block per time row: t,x,value.
void write_grid_csv(std::ostream& out, const GridField& field);

} // namespace solflow
