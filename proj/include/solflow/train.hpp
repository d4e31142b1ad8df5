#pragma once

// Scenario inputs and the soliton train built from them.

#include "solflow/hirota.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

namespace solflow {

struct SynthesisSpec {
    double L = 1.0;       ///< domain length
    double T = 1.0;       ///< horizon
    double delta = 0.01;  ///< H^2 tail tolerance
    double eps1 = 0.1;    ///< quiet window at the start, in (0, T/2)
    double eps2 = 0.1;    ///< quiet window at the end, in (0, T/2)
    double eps_ladder = 0.5;      ///< alpha_1 - alpha_N
    std::optional<double> alpha1;  ///< searched when absent
};

/// Throws ConfigError when the spec violates its invariants (including a
/// non-positive transit time T - eps1 - eps2).
void validate(const SynthesisSpec& spec);

struct ConditionReport {
    double speed_margin = 0.0;          ///< (alpha_1 - eps)^2 - L / (T - eps2)
    std::vector<double> cond1_margins;  ///< alpha_i^2 eps1 + s_i, must be < 0
    std::vector<double> cond2_margins;  ///< s_i - L + alpha_i^2 (T - eps2), must be > 0
    std::optional<double> tail_norm_start;  ///< max H^2(0,L) norm over [0, eps1]
    std::optional<double> tail_norm_end;    ///< max H^2(0,L) norm over [T - eps2, T]
    std::optional<double> min_interaction_factor;  ///< min over sampled (k,t) of A_k(t)
    std::optional<double> min_log_interaction_factor;  ///< ln of the same minimum
    std::optional<double> exit_margin;  ///< min over sampled x of Phi(x,T) - L

    [[nodiscard]] bool speed_ok() const { return speed_margin > 0.0; }
    [[nodiscard]] bool cond1_ok() const;
    [[nodiscard]] bool cond2_ok() const;
    /// speed, cond1 and cond2 all hold.
    [[nodiscard]] bool feasible() const { return speed_ok() && cond1_ok() && cond2_ok(); }
};

/// Soliton train of the controllability construction. Index 0 is the fastest
/// soliton (largest alpha), placed rightmost.
struct SolitonTrain {
    SynthesisSpec spec;
    double alpha1 = 0.0;
    std::vector<double> alphas;  ///< strictly decreasing
    std::vector<double> phases;  ///< s_i
    ConditionReport report;
    std::shared_ptr<const NSolitonSolution> solution;  ///< null when N exceeds the cap

    [[nodiscard]] std::size_t size() const { return alphas.size(); }
    [[nodiscard]] const NSolitonSolution& field() const;
};

} // namespace solflow
