#pragma once

// Particle flow dPhi/dt = v(Phi, t) driven by a soliton field or a sampled grid.

#include "solflow/analysis.hpp"
#include "solflow/hirota.hpp"

#include <iosfwd>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

namespace solflow {

/// Velocity choices for the flow: eta/2, eta, or the physical y = 6 eta(x - t, t).
enum class FieldScale { Half, Unit, Physical };

[[nodiscard]] const char* to_string(FieldScale scale);

struct VelocityField {
    using Source = std::variant<std::shared_ptr<const NSolitonSolution>, std::shared_ptr<const GridField>>;

    Source source;
    EvalFrame frame = EvalFrame::SolitonFrame;  ///< ignored for grid sources
    double scale = 1.0;
    std::optional<Interval> clamp;  ///< trace extension outside [lo, hi]

    static VelocityField from_solution(std::shared_ptr<const NSolitonSolution> sol,
                                       FieldScale which = FieldScale::Unit);
    /// Bilinear interpolation of the grid; constant continuation past its edges.
    static VelocityField from_grid(std::shared_ptr<const GridField> grid, double scale = 1.0);

    /// Raw field value, no clamping.
    [[nodiscard]] double raw(double x, double t) const;
    /// Largest amplitude parameter of a solution source, 0 for grids.
    [[nodiscard]] double time_scale_hint() const;
};

/// Field value at the clamped position when a clamp is set.
[[nodiscard]] double extend_field(const VelocityField& field, double x, double t);

struct FlowSample {
    double t = 0.0;
    double phi = 0.0;
    double err = 0.0;  ///< accumulated local error estimate up to t
};

struct FlowTrajectory {
    double x0 = 0.0;
    std::vector<FlowSample> samples;
    double error_estimate = 0.0;

    [[nodiscard]] double final_position() const { return samples.back().phi; }
    /// Position at one of the integrator's stop times (exact match required).
    [[nodiscard]] double at(double t) const;
};

struct FlowOptions {
    double tol = 1e-8;
    /// Largest step; 0 picks 1/(4 alpha_max^3) for solution sources and the
    /// grid time spacing for grid sources, so no passage can be stepped over.
    double max_step = 0.0;
    double min_step = 1e-14;
    std::size_t max_steps = 10'000'000;
    std::vector<double> stops;  ///< times every trajectory must land on
};

/// Dormand-Prince 5(4) with local error control on max(|Phi|, 1) * tol.
[[nodiscard]] FlowTrajectory integrate_flow(const VelocityField& field, double x0, double t0, double t1,
                                            const FlowOptions& options = {});

struct ExitReport {
    std::vector<double> times;      ///< terminal times checked
    std::vector<double> min_phi;    ///< min over x0 of Phi(x0, time)
    double margin = 0.0;            ///< min over times of min_phi - L
    bool exits = false;             ///< margin > 0 (strict)
    bool order_preserved = true;    ///< Phi(x0, t) nondecreasing in x0 at every stop
    bool monotone = true;           ///< every Phi(x0, .) nondecreasing in t
    std::vector<FlowTrajectory> trajectories;
};

/// Integrates grid+1 equispaced particles of [0, L] from t = 0 and checks
/// Phi(x, t) >= L at each requested time.
[[nodiscard]] ExitReport exit_check(const VelocityField& field, double L, std::vector<double> times,
                                    std::size_t grid, FlowOptions options = {});

/// Columns x0,t,phi,err with '.' decimals.
void write_trajectories_csv(std::ostream& out, const std::vector<FlowTrajectory>& trajectories);

} // namespace solflow
