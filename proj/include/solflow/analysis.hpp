#pragma once

// Norms, widths and the lower-bound machinery used to certify a soliton train:
// the interaction factors A_k(t), the sech^2 envelopes under eta/2, and the
// characteristic-function displacement estimate.

#include "solflow/hirota.hpp"
#include "solflow/train.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace solflow {

/// Distance between the two points where a soliton's height equals alpha/4:
/// (4/alpha) ln(sqrt(2 alpha) (1 + sqrt(1 - 1/(2 alpha)))). Requires alpha > 1/2.
[[nodiscard]] double width(double alpha);

/// Sampled scalar field on a space-time grid. values is row-major with one
/// row per time sample.
struct GridField {
    std::vector<double> xs;
    std::vector<double> ts;
    std::vector<double> values;
    std::string meta = "closed-form";

    [[nodiscard]] double at(std::size_t it, std::size_t ix) const { return values[it * xs.size() + ix]; }
    [[nodiscard]] double& at(std::size_t it, std::size_t ix) { return values[it * xs.size() + ix]; }
    /// Throws DomainError on inconsistent sizes, non-increasing axes, or
    /// non-finite values.
    void validate() const;
};

/// Samples eta of sol on the given axes.
[[nodiscard]] GridField sample_field(const NSolitonSolution& sol, std::vector<double> xs,
                                     std::vector<double> ts, EvalFrame frame = EvalFrame::SolitonFrame);

/// Evaluates (f, f_x, f_xx) at a point.
using JetFunction = std::function<EtaJet(double)>;

/// Default panel count on an interval of length len: max(64, ceil(8 len alpha)).
[[nodiscard]] std::size_t default_panels(double len, double alpha_max);

/// (integral over [a,b] of sum_{j<=order} |d^j f|^2)^(1/2) by composite
/// 16-point Gauss-Legendre on the given number of panels.
[[nodiscard]] double sobolev_norm(const JetFunction& f, double a, double b, int order, std::size_t panels);

/// H^order(0,L) norm of eta(., t), using the exact derivatives.
[[nodiscard]] double sobolev_norm(const NSolitonSolution& sol, double t, double L, int order);

/// H^order norm of one time row of a uniform grid field; derivatives by
/// centered differences, integral by the trapezoid rule.
[[nodiscard]] double sobolev_norm(const GridField& field, std::size_t time_index, int order);

/// Interval containing every soliton of sol at time t, with a margin of
/// 40 / min alpha beyond the outermost (phase-shifted) peak positions.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};
[[nodiscard]] Interval mass_window(const NSolitonSolution& sol, double t);

/// Integral of eta over the window by composite Gauss-Legendre.
[[nodiscard]] double mass(const NSolitonSolution& sol, double t, Interval window);

/// A_k(t) for zero-based soliton index k of a train ordered fastest first.
/// Evaluated entirely in log form; 1 for a single soliton.
[[nodiscard]] double interaction_factor(const NSolitonSolution& sol, std::size_t k, double t);
/// ln A_k(t); stays finite where A_k underflows.
[[nodiscard]] double log_interaction_factor(const NSolitonSolution& sol, std::size_t k, double t);

/// Neighbourhood of soliton k on which its envelope bound is asserted.
/// eps1 enters only the right end of the k = 0 interval.
[[nodiscard]] Interval envelope_neighbourhood(const NSolitonSolution& sol, std::size_t k, double t,
                                              double eps1);

/// Centre offset sigma_k(t) of the lower-bound envelope given ln A_k(t).
[[nodiscard]] double envelope_phase(const NSolitonSolution& sol, std::size_t k, double log_a_k);

/// (alpha_k^2 A_k / 4) sech^2(-alpha_k (x - sigma_k - alpha_k^2 t) / 2).
[[nodiscard]] double envelope_bound(const NSolitonSolution& sol, std::size_t k, double x, double t,
                                    double log_a_k);

struct EnvelopeResult {
    double min_margin = 0.0;  ///< min over samples of eta/2 - bound
    double at_x = 0.0;        ///< where the minimum occurred
    double a_k = 0.0;
    double log_a_k = 0.0;
    bool holds = false;       ///< min_margin >= -tolerance
};

[[nodiscard]] EnvelopeResult envelope_check(const SolitonTrain& train, std::size_t k, double t,
                                            std::size_t samples = 512, double tolerance = 1e-12);

struct DisplacementBound {
    std::vector<double> per_soliton;  ///< ln(sqrt(2a)(1+sqrt(1-1/(2a)))) / (4 a^2)
    double total = 0.0;
};

[[nodiscard]] double soliton_displacement_bound(double alpha);
[[nodiscard]] DisplacementBound char_displacement_bound(const SolitonTrain& train);

/// Sum over k of (alpha_k/16) times the indicator of
/// [alpha_k^2 t + sigma_k(t) - w(alpha_k)/2, alpha_k^2 t + sigma_k(t) + w(alpha_k)/2].
[[nodiscard]] double characteristic_field(const NSolitonSolution& sol, double x, double t);

/// Time integral over [t0,t1] of characteristic_field at fixed x (midpoint
/// rule on the given number of samples).
[[nodiscard]] double characteristic_displacement(const NSolitonSolution& sol, double x, double t0,
                                                 double t1, std::size_t samples);

} // namespace solflow
