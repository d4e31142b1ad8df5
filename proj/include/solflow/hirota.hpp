#pragma once

// Exact N-soliton solutions of eta_t + 6 eta eta_x + eta_xxx = 0 built from the
// Hirota tau function
//
//   F(x,t) = sum over subsets m of {1..N} of a(m) * prod_{i in m} f_i(x,t),
//   f_i    = exp(-alpha_i (x - s_i) + alpha_i^3 t),
//   a(m)   = prod_{k<l in m} ((alpha_k - alpha_l) / (alpha_k + alpha_l))^2,
//
// with eta = +2 (ln F)_xx. Every subset term is positive, so all sums are
// carried in log-magnitude form and no exponential is ever formed unscaled.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace solflow {

struct Soliton {
    double alpha = 1.0;  ///< amplitude parameter; peak alpha^2/2, speed alpha^2
    double s = 0.0;      ///< phase offset; peak at s + alpha^2 t
};

enum class EvalFrame {
    SolitonFrame,   ///< eta of the normalized equation
    PhysicalFrame,  ///< y(x,t) = 6 eta(x - t, t) of y_t + y_x + y_xxx + y y_x = 0
};

struct SolutionOptions {
    /// Largest accepted soliton count.
    std::size_t max_solitons = 24;
    /// Up to this many solitons the full subset table is precomputed and
    /// enumerated; above it a pruned depth-first enumeration is used.
    std::size_t full_table_limit = 16;
    /// Pruned enumeration drops subtrees whose total weight is provably below
    /// exp(-prune_log_gap) times the largest term found.
    double prune_log_gap = 60.0;
};

/// Signed value stored as sign * exp(log_abs).
struct TauValue {
    int sign = 0;  ///< -1, 0 or +1
    double log_abs = 0.0;

    [[nodiscard]] double value() const;
};

/// (eta, eta_x, eta_xx) in the soliton frame.
struct EtaJet {
    double eta = 0.0;
    double eta_x = 0.0;
    double eta_xx = 0.0;
};

/// ((alpha_k - alpha_l) / (alpha_k + alpha_l))^2. Throws DomainError unless both
/// arguments are positive and finite.
[[nodiscard]] double interaction_coefficient(double alpha_k, double alpha_l);

/// Immutable N-soliton solution. An empty soliton list is the vacuum (F = 1).
class NSolitonSolution {
public:
    explicit NSolitonSolution(std::vector<Soliton> solitons, SolutionOptions options = {});

    [[nodiscard]] std::size_t size() const { return solitons_.size(); }
    [[nodiscard]] std::span<const Soliton> solitons() const { return solitons_; }
    [[nodiscard]] const SolutionOptions& options() const { return options_; }

    /// ln a(i,j) for zero-based indices i != j.
    [[nodiscard]] double log_pair(std::size_t i, std::size_t j) const {
        return log_pair_[i * size() + j];
    }
    /// a(i,j); equals 1 for i == j (singleton convention a(i) = 1).
    [[nodiscard]] double pair_coefficient(std::size_t i, std::size_t j) const;
    /// ln a(i_1,...,i_n) = sum over pairs; zero for n <= 1.
    [[nodiscard]] double log_subset_coefficient(std::span<const std::size_t> indices) const;

    [[nodiscard]] double max_alpha() const;
    [[nodiscard]] double min_alpha() const;
    [[nodiscard]] double alpha_sum() const;

    /// Exponents theta_i = -alpha_i (x - s_i) + alpha_i^3 t of the f_i.
    void exponents(double x, double t, std::span<double> theta) const;

    [[nodiscard]] bool has_full_table() const { return !mask_log_coeff_.empty(); }
    /// ln a(mask) for every bit mask (full-table mode only).
    [[nodiscard]] std::span<const double> mask_log_coefficients() const { return mask_log_coeff_; }
    /// alpha sum of every bit mask (full-table mode only).
    [[nodiscard]] std::span<const double> mask_rates() const { return mask_rate_; }

private:
    std::vector<Soliton> solitons_;
    SolutionOptions options_;
    std::vector<double> log_pair_;
    std::vector<double> mask_log_coeff_;
    std::vector<double> mask_rate_;
};

/// d^order F / dx^order at (x,t) for order in 0..4, in log-magnitude form.
[[nodiscard]] TauValue tau_derivative(const NSolitonSolution& sol, int order, double x, double t);

/// The same derivative summed directly in double precision. Overflows for
/// large exponents; kept as an independent cross-check of the log path.
[[nodiscard]] double tau_derivative_plain(const NSolitonSolution& sol, int order, double x, double t);

/// eta = 2 (ln F)_xx in the soliton frame, or 6 eta(x - t, t) in the physical frame.
[[nodiscard]] double eta(const NSolitonSolution& sol, double x, double t,
                         EvalFrame frame = EvalFrame::SolitonFrame);

/// Exact eta, eta_x, eta_xx in the soliton frame.
[[nodiscard]] EtaJet eta_derivatives(const NSolitonSolution& sol, double x, double t);

struct DifferenceRule {
    double step = 0.0;  ///< zero selects the default for the solution
    int order = 4;      ///< 2 or 4 (centered stencils)
};

/// Default time step for centered differences: 1e-3 / alpha_max^3.
[[nodiscard]] double default_time_step(const NSolitonSolution& sol);
/// Default space step for differencing eta_xx: 1e-3 / alpha_max.
[[nodiscard]] double default_space_step(const NSolitonSolution& sol);

/// eta_t by centered differences in t (soliton frame).
[[nodiscard]] double time_derivative_eta(const NSolitonSolution& sol, double x, double t,
                                         DifferenceRule rule = {});

/// eta_xxx by centered differences of the exact eta_xx (soliton frame).
[[nodiscard]] double third_derivative_eta(const NSolitonSolution& sol, double x, double t,
                                          DifferenceRule rule = {});

} // namespace solflow
