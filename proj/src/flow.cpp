#include "solflow/flow.hpp"

#include "solflow/error.hpp"
#include "solflow/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>
#include <string>

namespace solflow {
namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

double grid_value(const GridField& g, double x, double t) {
    auto bracket = [](const std::vector<double>& axis, double v, std::size_t& i, double& w) {
        if (axis.size() == 1 || v <= axis.front()) {
            i = 0;
            w = 0.0;
            return;
        }
        if (v >= axis.back()) {
            i = axis.size() - 2;
            w = 1.0;
            return;
        }
        i = static_cast<std::size_t>(std::upper_bound(axis.begin(), axis.end(), v) - axis.begin()) - 1;
        w = (v - axis[i]) / (axis[i + 1] - axis[i]);
    };
    std::size_t ix = 0, it = 0;
    double wx = 0.0, wt = 0.0;
    bracket(g.xs, x, ix, wx);
    bracket(g.ts, t, it, wt);
    const std::size_t ix1 = std::min(ix + 1, g.xs.size() - 1);
    const std::size_t it1 = std::min(it + 1, g.ts.size() - 1);
    const double lo = (1 - wx) * g.at(it, ix) + wx * g.at(it, ix1);
    const double hi = (1 - wx) * g.at(it1, ix) + wx * g.at(it1, ix1);
    return (1 - wt) * lo + wt * hi;
}

double default_max_step(const VelocityField& field, double span) {
    if (const auto* g = std::get_if<std::shared_ptr<const GridField>>(&field.source)) {
        const auto& ts = (*g)->ts;
        double dt = span;
        for (std::size_t i = 1; i < ts.size(); ++i) dt = std::min(dt, ts[i] - ts[i - 1]);
        return dt;
    }
    const double a = std::max(field.time_scale_hint(), 0.5);
    return std::min(span, 0.25 / (a * a * a));
}

std::string format(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, r.ptr};
}

} // namespace

const char* to_string(FieldScale scale) {
    switch (scale) {
    case FieldScale::Half: return "half";
    case FieldScale::Unit: return "unit";
    case FieldScale::Physical: return "physical";
    }
    return "unknown";
}

VelocityField VelocityField::from_solution(std::shared_ptr<const NSolitonSolution> sol, FieldScale which) {
    if (!sol) throw DomainError("velocity field needs a solution");
    VelocityField f;
    f.source = std::move(sol);
    f.frame = which == FieldScale::Physical ? EvalFrame::PhysicalFrame : EvalFrame::SolitonFrame;
    f.scale = which == FieldScale::Half ? 0.5 : 1.0;
    return f;
}

VelocityField VelocityField::from_grid(std::shared_ptr<const GridField> grid, double scale) {
    if (!grid) throw DomainError("velocity field needs a grid");
    grid->validate();
    VelocityField f;
    f.source = std::move(grid);
    f.scale = scale;
    return f;
}

double VelocityField::raw(double x, double t) const {
    if (const auto* s = std::get_if<std::shared_ptr<const NSolitonSolution>>(&source))
        return scale * eta(**s, x, t, frame);
    return scale * grid_value(*std::get<std::shared_ptr<const GridField>>(source), x, t);
}

double VelocityField::time_scale_hint() const {
    if (const auto* s = std::get_if<std::shared_ptr<const NSolitonSolution>>(&source)) return (*s)->max_alpha();
    return 0.0;
}

double extend_field(const VelocityField& field, double x, double t) {
    if (field.clamp) x = std::clamp(x, field.clamp->lo, field.clamp->hi);
    return field.raw(x, t);
}

double FlowTrajectory::at(double t) const {
    for (const auto& s : samples)
        if (s.t == t) return s.phi;
    throw DomainError("trajectory has no sample at the requested time");
}

FlowTrajectory integrate_flow(const VelocityField& field, double x0, double t0, double t1,
                              const FlowOptions& options) {
    if (!(t1 > t0)) throw DomainError("flow integration needs t0 < t1");
    if (!(options.tol > 0.0)) throw DomainError("flow tolerance must be positive");
    const double h_max = options.max_step > 0.0 ? options.max_step : default_max_step(field, t1 - t0);

    std::vector<double> stops;
    for (double s : options.stops)
        if (s > t0 && s < t1) stops.push_back(s);
    stops.push_back(t1);
    std::sort(stops.begin(), stops.end());
    stops.erase(std::unique(stops.begin(), stops.end()), stops.end());

    auto f = [&](double x, double t) {
        const double v = extend_field(field, x, t);
        if (!std::isfinite(v)) {
            std::ostringstream msg;
            msg << "non-finite field value at x=" << x << ", t=" << t;
            throw NumericError(msg.str());
        }
        return v;
    };

    FlowTrajectory traj;
    traj.x0 = x0;
    traj.samples.push_back({t0, x0, 0.0});
    double t = t0, y = x0;
    double h = std::min(h_max, 1e-3 * (t1 - t0));
    double k1 = f(y, t);
    std::size_t next_stop = 0;
    std::size_t steps = 0;

    while (next_stop < stops.size()) {
        if (++steps > options.max_steps) throw NumericError("flow integration exceeded the step budget");
        const double target = stops[next_stop];
        bool landing = false;
        double step = std::min(h, h_max);
        if (t + step >= target || target - (t + step) < options.min_step) {
            step = target - t;
            landing = true;
        }
        if (step < options.min_step) {
            std::ostringstream msg;
            msg << "step size underflow at t=" << t << ", phi=" << y;
            throw NumericError(msg.str());
        }

        const double k2 = f(y + step * a21 * k1, t + c2 * step);
        const double k3 = f(y + step * (a31 * k1 + a32 * k2), t + c3 * step);
        const double k4 = f(y + step * (a41 * k1 + a42 * k2 + a43 * k3), t + c4 * step);
        const double k5 = f(y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), t + c5 * step);
        const double k6 = f(y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), t + step);
        const double y5 = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const double t_new = landing ? target : t + step;
        const double k7 = f(y5, t_new);
        const double err = std::abs(step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7));
        const double scale = options.tol * std::max(1.0, std::max(std::abs(y), std::abs(y5)));

        const double ratio = err / scale;
        if (ratio <= 1.0) {
            t = t_new;
            y = y5;
            k1 = k7;
            traj.error_estimate += err;
            traj.samples.push_back({t, y, traj.error_estimate});
            if (landing) ++next_stop;
            const double grow = ratio == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(ratio, -0.2), 0.2, 5.0);
            // a landing step may be artificially short; keep the previous proposal
            h = landing ? std::max(h, step * grow) : step * grow;
        } else {
            h = step * std::max(0.2, 0.9 * std::pow(ratio, -0.2));
        }
    }
    return traj;
}

ExitReport exit_check(const VelocityField& field, double L, std::vector<double> times, std::size_t grid,
                      FlowOptions options) {
    if (grid < 2) throw DomainError("exit check needs a grid of at least 2");
    if (times.empty()) throw DomainError("exit check needs at least one terminal time");
    if (!(L > 0.0)) throw DomainError("L must be positive");
    std::sort(times.begin(), times.end());
    if (!(times.front() > 0.0)) throw DomainError("terminal times must be positive");
    options.stops.insert(options.stops.end(), times.begin(), times.end());

    ExitReport rep;
    rep.times = times;
    rep.trajectories.resize(grid + 1);
    parallel_for(grid + 1, [&](std::size_t i) {
        const double x0 = L * static_cast<double>(i) / static_cast<double>(grid);
        rep.trajectories[i] = integrate_flow(field, x0, 0.0, times.back(), options);
    });

    const double slack = 10.0 * options.tol;
    for (const auto& tr : rep.trajectories)
        for (std::size_t j = 1; j < tr.samples.size(); ++j)
            if (tr.samples[j].phi < tr.samples[j - 1].phi - slack * std::max(1.0, std::abs(tr.samples[j].phi)))
                rep.monotone = false;

    for (double t : options.stops) {
        if (!(t > 0.0 && t <= times.back())) continue;
        for (std::size_t i = 1; i < rep.trajectories.size(); ++i)
            if (rep.trajectories[i].at(t) < rep.trajectories[i - 1].at(t) - slack)
                rep.order_preserved = false;
    }

    rep.margin = HUGE_VAL;
    for (double t : times) {
        double lo = HUGE_VAL;
        for (const auto& tr : rep.trajectories) lo = std::min(lo, tr.at(t));
        rep.min_phi.push_back(lo);
        rep.margin = std::min(rep.margin, lo - L);
    }
    rep.exits = rep.margin > 0.0;
    return rep;
}

void write_trajectories_csv(std::ostream& out, const std::vector<FlowTrajectory>& trajectories) {
    out << "x0,t,phi,err\n";
    for (const auto& tr : trajectories)
        for (const auto& s : tr.samples)
            out << format(tr.x0) << ',' << format(s.t) << ',' << format(s.phi) << ',' << format(s.err) << '\n';
}

} // namespace solflow
