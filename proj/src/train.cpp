#include "solflow/train.hpp"

#include "solflow/error.hpp"

#include <algorithm>
#include <cmath>

namespace solflow {
namespace {

bool positive_finite(double v) { return v > 0.0 && std::isfinite(v); }

} // namespace

void validate(const SynthesisSpec& spec) {
    if (!positive_finite(spec.L)) throw ConfigError("L must be positive");
    if (!positive_finite(spec.T)) throw ConfigError("T must be positive");
    if (!positive_finite(spec.delta)) throw ConfigError("delta must be positive");
    if (!(spec.eps1 > 0.0 && spec.eps1 < spec.T / 2.0)) throw ConfigError("eps1 must lie in (0, T/2)");
    if (!(spec.eps2 > 0.0 && spec.eps2 < spec.T / 2.0)) throw ConfigError("eps2 must lie in (0, T/2)");
    if (!(spec.T - spec.eps1 - spec.eps2 > 0.0)) throw ConfigError("no transit time: T - eps1 - eps2 <= 0");
    if (!positive_finite(spec.eps_ladder)) throw ConfigError("eps_ladder must be positive");
    if (spec.alpha1) {
        if (!positive_finite(*spec.alpha1)) throw ConfigError("alpha1 must be positive");
        if (!(*spec.alpha1 > spec.eps_ladder)) throw ConfigError("alpha1 must exceed eps_ladder");
    }
}

bool ConditionReport::cond1_ok() const {
    return std::all_of(cond1_margins.begin(), cond1_margins.end(), [](double m) { return m < 0.0; });
}

bool ConditionReport::cond2_ok() const {
    return std::all_of(cond2_margins.begin(), cond2_margins.end(), [](double m) { return m > 0.0; });
}

const NSolitonSolution& SolitonTrain::field() const {
    if (!solution) throw DomainError("train has no evaluable solution (soliton count above the cap)");
    return *solution;
}

} // namespace solflow
