#pragma once

// Enumeration of the positive subset terms a(m) prod_{i in m} exp(theta_i)
// shared by the tau-function evaluator and the interaction factors A_k.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace solflow {
class NSolitonSolution;
}

namespace solflow::detail {

struct SubsetTerm {
    double log_weight = 0.0;  ///< ln a(m) + sum_{i in m} theta_i
    double rate = 0.0;        ///< sum_{i in m} alpha_i
};

enum class Enumeration { Automatic, FullTable, Pruned };

/// Membership flags (one per soliton) describing a subset to leave out.
using Membership = std::vector<std::uint8_t>;

/// Appends every subset term (empty subset included) except the excluded
/// subsets. The pruned strategy omits subtrees whose summed weight is below
/// exp(-prune_log_gap) times the largest term kept.
void collect_subset_terms(const NSolitonSolution& sol, std::span<const double> theta,
                          std::span<const Membership> excluded, std::vector<SubsetTerm>& out,
                          Enumeration strategy = Enumeration::Automatic);

struct SubsetMoments {
    double log_scale = 0.0;           ///< largest log weight
    double weight = 0.0;              ///< sum of exp(log_weight - log_scale)
    std::array<double, 5> power{};    ///< sum of w * rate^k, k = 0..4
    double mean = 0.0;                ///< weighted mean rate
    std::array<double, 5> central{};  ///< weighted central moments, k = 0..4
};

/// Weighted power sums and central moments of the rates. Requires at least
/// one term.
[[nodiscard]] SubsetMoments reduce_terms(std::span<const SubsetTerm> terms);

/// ln of the sum of exp(log_weight); -infinity for no terms.
[[nodiscard]] double log_sum_exp(std::span<const SubsetTerm> terms);

} // namespace solflow::detail
