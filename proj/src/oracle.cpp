#include "solflow/oracle.hpp"

#include "solflow/error.hpp"
#include "solflow/parallel.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

namespace solflow {
namespace {

using cplx = std::complex<double>;

bool power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

double max_abs(const std::vector<double>& u) {
    double m = 0.0;
    for (double v : u) m = std::max(m, std::abs(v));
    return m;
}

std::vector<double> snapshot_times(const SolverConfig& c) {
    std::vector<double> ts(c.snapshots);
    for (std::size_t i = 0; i < c.snapshots; ++i)
        ts[i] = c.t0 + (c.t1 - c.t0) * static_cast<double>(i) / static_cast<double>(c.snapshots - 1);
    return ts;
}

// Equation coefficients: u_t = -lin u_x - nl (u^2)_x - u_xxx.
struct Equation {
    double lin = 0.0;
    double nl = 3.0;
};

Equation equation_for(EvalFrame frame) {
    return frame == EvalFrame::PhysicalFrame ? Equation{1.0, 0.5} : Equation{0.0, 3.0};
}

class GrowthGuard {
public:
    explicit GrowthGuard(double initial) : limit_(10.0 * std::max(initial, 1e-300)) {}
    void check(const std::vector<double>& u, double t) const {
        const double m = max_abs(u);
        if (!(m <= limit_) || !std::isfinite(m)) {
            std::ostringstream msg;
            msg << "instability: max |u| = " << m << " exceeds " << limit_ << " at t = " << t;
            throw NumericError(msg.str());
        }
    }
    [[nodiscard]] bool zero() const { return limit_ <= 1e-299; }
    /// Boundary data entering the domain raises the admissible level.
    void admit(double v) { limit_ = std::max(limit_, 10.0 * std::abs(v)); }

private:
    double limit_;
};

// FFTW planning is not thread safe; execution with new-array functions is.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

class Spectral {
public:
    explicit Spectral(std::size_t n) : n_(n), modes_(n / 2 + 1) {
        real_ = fftw_alloc_real(n_);
        spec_ = fftw_alloc_complex(modes_);
        std::lock_guard lock(plan_mutex());
        forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(n_), real_, spec_, FFTW_ESTIMATE);
        backward_ = fftw_plan_dft_c2r_1d(static_cast<int>(n_), spec_, real_, FFTW_ESTIMATE);
    }
    ~Spectral() {
        std::lock_guard lock(plan_mutex());
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
        fftw_free(real_);
        fftw_free(spec_);
    }
    Spectral(const Spectral&) = delete;
    Spectral& operator=(const Spectral&) = delete;

    void forward(const std::vector<double>& u, std::vector<cplx>& out) {
        std::copy(u.begin(), u.end(), real_);
        fftw_execute(forward_);
        out.resize(modes_);
        for (std::size_t k = 0; k < modes_; ++k) out[k] = {spec_[k][0], spec_[k][1]};
    }
    void backward(const std::vector<cplx>& in, std::vector<double>& u) {
        for (std::size_t k = 0; k < modes_; ++k) {
            spec_[k][0] = in[k].real();
            spec_[k][1] = in[k].imag();
        }
        fftw_execute(backward_);
        u.resize(n_);
        const double inv = 1.0 / static_cast<double>(n_);
        for (std::size_t j = 0; j < n_; ++j) u[j] = real_[j] * inv;
    }
    [[nodiscard]] std::size_t modes() const { return modes_; }

private:
    std::size_t n_;
    std::size_t modes_;
    double* real_ = nullptr;
    fftw_complex* spec_ = nullptr;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

// Integrating-factor RK4 in Fourier space for v = exp(-L t) u_hat, with the
// linear symbol L(k) = i k^3 - i lin k.
GridField solve_spectral(const GridField& initial, const SolverConfig& c) {
    const std::size_t n = initial.xs.size();
    const double period = c.domain.hi - c.domain.lo;
    const double dx = period / static_cast<double>(n);
    const Equation eq = equation_for(c.frame);
    Spectral fft(n);
    const std::size_t modes = fft.modes();

    std::vector<double> wave(modes), mask(modes, 1.0);
    std::vector<cplx> symbol(modes);
    const double kmax = 2.0 * std::numbers::pi / period * static_cast<double>(n / 2);
    for (std::size_t k = 0; k < modes; ++k) {
        wave[k] = 2.0 * std::numbers::pi / period * static_cast<double>(k);
        symbol[k] = cplx(0.0, wave[k] * wave[k] * wave[k] - eq.lin * wave[k]);
        if (c.dealias && wave[k] > 2.0 / 3.0 * kmax) mask[k] = 0.0;
    }
    if (n % 2 == 0) mask[modes - 1] = 0.0;  // Nyquist mode carries no derivative

    std::vector<double> u(initial.values.begin(), initial.values.begin() + static_cast<std::ptrdiff_t>(n));
    const GrowthGuard guard(max_abs(u));
    double dt = c.dt;
    if (!(dt > 0.0)) {
        const double speed = 2.0 * eq.nl * std::max(max_abs(u), 1e-3) + eq.lin;
        dt = 0.25 * dx / speed;
    }

    std::vector<cplx> uh, tmp;
    std::vector<double> work;
    std::vector<cplx> half(modes), full(modes), unit(modes, cplx(1.0, 0.0));
    double phase_step = -1.0;
    auto set_phases = [&](double h) {
        if (h == phase_step) return;
        for (std::size_t k = 0; k < modes; ++k) {
            half[k] = std::exp(symbol[k] * (0.5 * h));
            full[k] = half[k] * half[k];
        }
        phase_step = h;
    };
    // nonlinear term in the frame rotated by exp(L tau), tau measured from the step start
    auto nonlinear = [&](const std::vector<cplx>& vh, const std::vector<cplx>& rot, std::vector<cplx>& out) {
        tmp.resize(modes);
        for (std::size_t k = 0; k < modes; ++k) tmp[k] = vh[k] * rot[k] * mask[k];
        fft.backward(tmp, work);
        for (double& w : work) w *= w;
        fft.forward(work, out);
        for (std::size_t k = 0; k < modes; ++k)
            out[k] = (cplx(0.0, -eq.nl * wave[k]) * out[k]) * mask[k] / rot[k];
    };

    const auto ts = snapshot_times(c);
    GridField out{initial.xs, ts, {}, "oracle"};
    out.values.reserve(n * ts.size());
    out.values.insert(out.values.end(), u.begin(), u.end());

    fft.forward(u, uh);
    std::vector<cplx> k1, k2, k3, k4, stage(modes);
    double t = c.t0;
    for (std::size_t snap = 1; snap < ts.size(); ++snap) {
        const double target = ts[snap];
        const auto steps = static_cast<std::size_t>(std::ceil((target - t) / dt - 1e-9));
        const double h = (target - t) / static_cast<double>(std::max<std::size_t>(steps, 1));
        set_phases(h);
        for (std::size_t s = 0; s < steps; ++s) {
            nonlinear(uh, unit, k1);
            for (std::size_t k = 0; k < modes; ++k) stage[k] = uh[k] + 0.5 * h * k1[k];
            nonlinear(stage, half, k2);
            for (std::size_t k = 0; k < modes; ++k) stage[k] = uh[k] + 0.5 * h * k2[k];
            nonlinear(stage, half, k3);
            for (std::size_t k = 0; k < modes; ++k) stage[k] = uh[k] + h * k3[k];
            nonlinear(stage, full, k4);
            for (std::size_t k = 0; k < modes; ++k)
                uh[k] = full[k] * (uh[k] + h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]));
            t += h;
        }
        t = target;
        fft.backward(uh, u);
        if (!guard.zero()) guard.check(u, t);
        out.values.insert(out.values.end(), u.begin(), u.end());
    }
    return out;
}

constexpr double d1c[3] = {3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0};
constexpr double d3c[4] = {-488.0 / 240.0, 338.0 / 240.0, -72.0 / 240.0, 7.0 / 240.0};

GridField solve_difference(const GridField& initial, const SolverConfig& c) {
    const std::size_t n = initial.xs.size();
    if (n < 9) throw DomainError("periodic difference solver needs at least 9 points");
    const double dx = (c.domain.hi - c.domain.lo) / static_cast<double>(n);
    const Equation eq = equation_for(c.frame);
    const double dt_max = c.dt > 0.0 ? c.dt : c.courant * dx * dx * dx;

    auto rhs = [&](const std::vector<double>& u, std::vector<double>& out) {
        out.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            auto at = [&](std::ptrdiff_t o) {
                return u[static_cast<std::size_t>((static_cast<std::ptrdiff_t>(j + n) + o) % static_cast<std::ptrdiff_t>(n))];
            };
            double flux = 0.0, third = 0.0;
            for (int m = 1; m <= 3; ++m) {
                const double up = at(m), um = at(-m);
                flux += d1c[m - 1] * (eq.nl * (up * up - um * um) + eq.lin * (up - um));
            }
            for (int m = 1; m <= 4; ++m) third += d3c[m - 1] * (at(m) - at(-m));
            out[j] = -flux / dx - third / (dx * dx * dx);
        }
    };

    std::vector<double> u(initial.values.begin(), initial.values.begin() + static_cast<std::ptrdiff_t>(n));
    const GrowthGuard guard(max_abs(u));
    const auto ts = snapshot_times(c);
    GridField out{initial.xs, ts, {}, "oracle"};
    out.values.insert(out.values.end(), u.begin(), u.end());

    std::vector<double> k1, k2, k3, k4, stage(n);
    double t = c.t0;
    for (std::size_t snap = 1; snap < ts.size(); ++snap) {
        const double target = ts[snap];
        const auto steps = static_cast<std::size_t>(std::ceil((target - t) / dt_max - 1e-9));
        const double h = (target - t) / static_cast<double>(std::max<std::size_t>(steps, 1));
        for (std::size_t s = 0; s < steps; ++s) {
            rhs(u, k1);
            for (std::size_t j = 0; j < n; ++j) stage[j] = u[j] + 0.5 * h * k1[j];
            rhs(stage, k2);
            for (std::size_t j = 0; j < n; ++j) stage[j] = u[j] + 0.5 * h * k2[j];
            rhs(stage, k3);
            for (std::size_t j = 0; j < n; ++j) stage[j] = u[j] + h * k3[j];
            rhs(stage, k4);
            for (std::size_t j = 0; j < n; ++j) u[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        t = target;
        if (!guard.zero()) guard.check(u, t);
        out.values.insert(out.values.end(), u.begin(), u.end());
    }
    return out;
}

std::string format(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, r.ptr};
}


// Finite-difference weights for the derivative of order `order` at offset 0
// from samples at `offsets` (in grid units), optionally with a first
// derivative sample at `slope_at`. The last weight multiplies that slope.
std::vector<double> stencil_weights(int order, const std::vector<double>& offsets, std::optional<double> slope_at) {
    const std::size_t n = offsets.size() + (slope_at ? 1 : 0);
    std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
    double factorial = 1.0;
    for (std::size_t m = 0; m < n; ++m) {
        if (m > 0) factorial *= static_cast<double>(m);
        for (std::size_t i = 0; i < offsets.size(); ++i) a[m][i] = std::pow(offsets[i], m) / factorial;
        if (slope_at && m > 0) a[m][n - 1] = std::pow(*slope_at, m - 1) * static_cast<double>(m) / factorial;
        a[m][n] = static_cast<int>(m) == order ? 1.0 : 0.0;
    }
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        std::swap(a[col], a[pivot]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / a[col][col];
            for (std::size_t k = col; k <= n; ++k) a[r][k] -= f * a[col][k];
        }
    }
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = a[i][n] / a[i][i];
    return w;
}

// One row of a difference operator: sum_i w[i] v[first + i] (+ slope_weight w_L).
struct StencilRow {
    std::size_t first = 0;
    std::vector<double> w;
    double slope_weight = 0.0;
};

// Rows j = 1..M-1 of a derivative operator on the nodes 0..M. Interior rows
// are centered with `half` points per side; rows near x = 0 use the nodes
// 0..width-1, rows near x = L use M-width+1..M and, for `use_slope`, the
// boundary slope. Weights are scaled by 1/h^order (1/h^(order-1) for the slope).
std::vector<StencilRow> operator_rows(int order, std::size_t M, std::size_t half, std::size_t width, bool use_slope,
                                      double h) {
    std::vector<StencilRow> rows(M + 1);
    for (std::size_t j = 1; j < M; ++j) {
        StencilRow& r = rows[j];
        std::vector<double> offsets;
        bool slope = false;
        if (j >= half && j + half <= M) {
            r.first = j - half;
        } else if (j < half) {
            r.first = 0;
        } else {
            r.first = M + 1 - width;
            slope = use_slope;
        }
        const std::size_t count = (j >= half && j + half <= M) ? 2 * half + 1 : width;
        for (std::size_t i = 0; i < count; ++i)
            offsets.push_back(static_cast<double>(r.first + i) - static_cast<double>(j));
        auto w = stencil_weights(order, offsets,
                                 slope ? std::optional<double>(static_cast<double>(M) - static_cast<double>(j))
                                       : std::nullopt);
        if (slope) {
            r.slope_weight = w.back() / std::pow(h, order - 1);
            w.pop_back();
        }
        for (double& x : w) x /= std::pow(h, order);
        r.w = std::move(w);
    }
    return rows;
}

// Uniform table of boundary traces on [t0, t1] with four-point Lagrange
// interpolation.
class TraceTable {
public:
    template <class Fn>
    TraceTable(double t0, double t1, double spacing, Fn&& sample) : t0_(t0) {
        const auto n = static_cast<std::size_t>(std::ceil((t1 - t0) / spacing));
        const std::size_t nodes = std::max<std::size_t>(n, 3) + 1;
        tau_ = (t1 - t0) / static_cast<double>(nodes - 1);
        rows_.resize(nodes);
        parallel_for(nodes, [&](std::size_t i) { rows_[i] = sample(t0 + tau_ * static_cast<double>(i)); });
    }

    std::array<double, 3> operator()(double t) const {
        const double r = (t - t0_) / tau_;
        const auto last = static_cast<std::ptrdiff_t>(rows_.size()) - 4;
        const auto base = std::clamp(static_cast<std::ptrdiff_t>(std::floor(r)) - 1, std::ptrdiff_t{0}, last);
        const double u = r - static_cast<double>(base);
        const double w[4] = {-(u - 1) * (u - 2) * (u - 3) / 6.0, u * (u - 2) * (u - 3) / 2.0,
                             -u * (u - 1) * (u - 3) / 2.0, u * (u - 1) * (u - 2) / 6.0};
        std::array<double, 3> out{};
        for (int i = 0; i < 4; ++i)
            for (int k = 0; k < 3; ++k) out[k] += w[i] * rows_[static_cast<std::size_t>(base + i)][k];
        return out;
    }

private:
    double t0_;
    double tau_ = 0.0;
    std::vector<std::array<double, 3>> rows_;
};

} // namespace

void validate(const SolverConfig& c) {
    if (!(c.domain.hi > c.domain.lo)) throw ConfigError("solver domain is empty");
    if (c.resolution < 4) throw ConfigError("solver resolution must be at least 4");
    if (!(c.t1 > c.t0)) throw ConfigError("solver horizon must satisfy t0 < t1");
    if (c.snapshots < 2) throw ConfigError("solver needs at least two snapshots");
    if (c.dt < 0.0 || !(c.courant > 0.0)) throw ConfigError("time step and courant number must be positive");
}

double residual_norm(const NSolitonSolution& sol, const SolverConfig& grid, std::size_t time_samples,
                     DifferenceRule rule) {
    validate(grid);
    if (time_samples < 1) throw DomainError("residual needs at least one time sample");
    const std::size_t nx = grid.resolution;
    const std::size_t total = nx * time_samples;
    std::vector<double> worst(total, 0.0);
    parallel_for(total, [&](std::size_t i) {
        const std::size_t ix = i % nx, it = i / nx;
        const double x = grid.domain.lo + (grid.domain.hi - grid.domain.lo) * static_cast<double>(ix) /
                                              static_cast<double>(nx - 1);
        const double t = time_samples == 1 ? grid.t0
                                           : grid.t0 + (grid.t1 - grid.t0) * static_cast<double>(it) /
                                                           static_cast<double>(time_samples - 1);
        const EtaJet j = eta_derivatives(sol, x, t);
        const double r = time_derivative_eta(sol, x, t, rule) + 6.0 * j.eta * j.eta_x +
                         third_derivative_eta(sol, x, t, {0.0, rule.order});
        if (!std::isfinite(r)) throw NumericError("non-finite residual");
        worst[i] = std::abs(r);
    });
    return *std::max_element(worst.begin(), worst.end());
}

std::vector<double> periodic_grid(const SolverConfig& c) {
    std::vector<double> xs(c.resolution);
    const double dx = (c.domain.hi - c.domain.lo) / static_cast<double>(c.resolution);
    for (std::size_t j = 0; j < c.resolution; ++j) xs[j] = c.domain.lo + dx * static_cast<double>(j);
    return xs;
}

SolverConfig periodic_config_for(const NSolitonSolution& sol, double t0, double t1, double dx) {
    if (!(dx > 0.0)) throw DomainError("grid spacing must be positive");
    SolverConfig c;
    c.t0 = t0;
    c.t1 = t1;
    const Interval a = mass_window(sol, t0), b = mass_window(sol, t1);
    c.domain = {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
    auto quiet = [&] {
        for (double t : {t0, 0.5 * (t0 + t1), t1})
            for (double x : {c.domain.lo, c.domain.hi})
                if (eta(sol, x, t) >= 1e-10) return false;
        return true;
    };
    for (int i = 0; i < 20 && !quiet(); ++i) {
        const double half = c.domain.hi - c.domain.lo;
        c.domain = {c.domain.lo - 0.5 * half, c.domain.hi + 0.5 * half};
    }
    std::size_t n = 16;
    while ((c.domain.hi - c.domain.lo) / static_cast<double>(n) > dx) n *= 2;
    c.resolution = n;
    return c;
}

GridField solve(const GridField& initial, const SolverConfig& config) {
    validate(config);
    initial.validate();
    if (config.bc != BoundaryMode::Periodic) throw ConfigError("solve runs the periodic problem; use ibvp_replay");
    if (initial.ts.size() != 1) throw DomainError("initial field must hold a single time row");
    const std::size_t n = initial.xs.size();
    const double dx = (config.domain.hi - config.domain.lo) / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j)
        if (std::abs(initial.xs[j] - (config.domain.lo + dx * static_cast<double>(j))) > 1e-9 * (1.0 + std::abs(dx)))
            throw DomainError("initial abscissae do not form the periodic grid of the domain");
    return power_of_two(n) ? solve_spectral(initial, config) : solve_difference(initial, config);
}

double discrete_mass(const GridField& field, std::size_t time_index) {
    double sum = 0.0;
    for (std::size_t j = 0; j < field.xs.size(); ++j) sum += field.at(time_index, j);
    const double dx = field.xs.size() > 1 ? field.xs[1] - field.xs[0] : 1.0;
    return sum * dx;
}

double max_deviation(const GridField& field, const NSolitonSolution& sol) {
    double worst = 0.0;
    for (std::size_t it = 0; it < field.ts.size(); ++it)
        for (std::size_t ix = 0; ix < field.xs.size(); ++ix)
            worst = std::max(worst, std::abs(field.at(it, ix) - eta(sol, field.xs[ix], field.ts[it])));
    return worst;
}

ReplayResult ibvp_replay(const NSolitonSolution& sol, double L, const SolverConfig& c) {
    validate(c);
    if (!(L > 0.0)) throw DomainError("L must be positive");
    const std::size_t M = c.resolution;
    if (M < 8) throw DomainError("trace replay needs at least 8 intervals");
    const double h = L / static_cast<double>(M);
    const double h3 = h * h * h;
    const Equation eq = equation_for(c.frame);
    const double dt_max = c.dt > 0.0 ? c.dt : c.courant * h3;

    std::vector<double> xs(M + 1);
    for (std::size_t j = 0; j <= M; ++j) xs[j] = h * static_cast<double>(j);
    auto field = [&](double x, double t) { return eta(sol, x, t, c.frame); };
    // x-derivative of the selected frame's field at x
    auto slope = [&](double x, double t) {
        if (c.frame == EvalFrame::PhysicalFrame) return 6.0 * eta_derivatives(sol, x - t, t).eta_x;
        return eta_derivatives(sol, x, t).eta_x;
    };
    // The three traces are tabulated once and interpolated at the stage times.
    const double a = std::max(sol.max_alpha(), 1.0);
    const TraceTable traces(c.t0, c.t1, 0.005 / (a * a * a), [&](double t) {
        return std::array<double, 3>{field(0.0, t), field(L, t), slope(L, t)};
    });

    // u holds all M+1 nodes; the boundary entries are overwritten from the traces
    std::vector<double> u(M + 1);
    for (std::size_t j = 0; j <= M; ++j) u[j] = field(xs[j], c.t0);
    GrowthGuard guard(max_abs(u));

    // Fourth-order centered differences inside; six-point closures at both
    // ends, the right one also using the imposed slope.
    const auto third = operator_rows(3, M, 3, 6, true, h);
    const auto first = operator_rows(1, M, 2, 5, false, h);
    std::vector<double> flux(M + 1);
    auto rhs = [&](std::vector<double>& v, double t, std::vector<double>& out) {
        const auto b = traces(t);
        v[0] = b[0];
        v[M] = b[1];
        guard.admit(v[0]);
        guard.admit(v[M]);
        for (std::size_t j = 0; j <= M; ++j) flux[j] = eq.nl * v[j] * v[j] + eq.lin * v[j];
        out.assign(M + 1, 0.0);
        for (std::size_t j = 1; j < M; ++j) {
            double d3 = third[j].slope_weight * b[2], d1 = 0.0;
            for (std::size_t i = 0; i < third[j].w.size(); ++i) d3 += third[j].w[i] * v[third[j].first + i];
            for (std::size_t i = 0; i < first[j].w.size(); ++i) d1 += first[j].w[i] * flux[first[j].first + i];
            out[j] = -d1 - d3;
        }
    };

    const auto ts = snapshot_times(c);
    ReplayResult res;
    res.field = GridField{xs, ts, {}, "oracle"};
    res.field.values.insert(res.field.values.end(), u.begin(), u.end());

    std::vector<double> k1, k2, k3, k4, stage(M + 1);
    double t = c.t0;
    for (std::size_t snap = 1; snap < ts.size(); ++snap) {
        const double target = ts[snap];
        const auto steps = static_cast<std::size_t>(std::ceil((target - t) / dt_max - 1e-9));
        const double dt = (target - t) / static_cast<double>(std::max<std::size_t>(steps, 1));
        for (std::size_t s = 0; s < steps; ++s) {
            rhs(u, t, k1);
            for (std::size_t j = 0; j <= M; ++j) stage[j] = u[j] + 0.5 * dt * k1[j];
            rhs(stage, t + 0.5 * dt, k2);
            for (std::size_t j = 0; j <= M; ++j) stage[j] = u[j] + 0.5 * dt * k2[j];
            rhs(stage, t + 0.5 * dt, k3);
            for (std::size_t j = 0; j <= M; ++j) stage[j] = u[j] + dt * k3[j];
            rhs(stage, t + dt, k4);
            for (std::size_t j = 1; j < M; ++j) u[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            t += dt;
            ++res.steps;
        }
        t = target;
        u[0] = field(0.0, t);
        u[M] = field(L, t);
        guard.check(u, t);
        res.field.values.insert(res.field.values.end(), u.begin(), u.end());
        for (std::size_t j = 0; j <= M; ++j)
            res.max_deviation = std::max(res.max_deviation, std::abs(u[j] - field(xs[j], t)));
    }
    return res;
}

void write_grid_csv(std::ostream& out, const GridField& field) {
    out << "t,x,value\n";
    for (std::size_t it = 0; it < field.ts.size(); ++it)
        for (std::size_t ix = 0; ix < field.xs.size(); ++ix)
            out << format(field.ts[it]) << ',' << format(field.xs[ix]) << ',' << format(field.at(it, ix)) << '\n';
}

} // namespace solflow
