#include "solflow/detail/subset_sum.hpp"

#include "solflow/error.hpp"
#include "solflow/hirota.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

namespace solflow::detail {
namespace {

double softplus(double v) {
    return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
}

void collect_full_table(const NSolitonSolution& sol, std::span<const double> theta,
                        std::span<const Membership> excluded, std::vector<SubsetTerm>& out) {
    const std::size_t n = sol.size();
    const std::size_t count = std::size_t{1} << n;
    const auto log_coeff = sol.mask_log_coefficients();
    const auto rate = sol.mask_rates();

    std::vector<std::uint32_t> skip;
    for (const auto& m : excluded) {
        std::uint32_t bits = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (m[i]) bits |= std::uint32_t{1} << i;
        skip.push_back(bits);
    }

    // theta sums built incrementally from the mask with its lowest bit cleared
    thread_local std::vector<double> theta_sum;
    theta_sum.assign(count, 0.0);
    const std::size_t base = out.size();
    out.reserve(base + count);
    for (std::size_t mask = 0; mask < count; ++mask) {
        if (mask != 0) {
            const auto low = static_cast<std::size_t>(std::countr_zero(mask));
            theta_sum[mask] = theta_sum[mask & (mask - 1)] + theta[low];
        }
        if (std::find(skip.begin(), skip.end(), static_cast<std::uint32_t>(mask)) != skip.end())
            continue;
        out.push_back({log_coeff[mask] + theta_sum[mask], rate[mask]});
    }
}

class PrunedEnumerator {
public:
    PrunedEnumerator(const NSolitonSolution& sol, std::span<const double> theta,
                     std::span<const Membership> excluded, std::vector<SubsetTerm>& out)
        : sol_(sol), excluded_(excluded), out_(out), n_(sol.size()), gap_(sol.options().prune_log_gap) {
        order_.resize(n_);
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        // decided-early indices are the ones whose membership is least in doubt
        std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
            return std::abs(theta[a]) > std::abs(theta[b]);
        });
        buffer_.resize(offset(n_) + 1);
        for (std::size_t k = 0; k < n_; ++k) buffer_[k] = theta[order_[k]];
        pair_ceiling_ = n_ >= 2 ? -std::numeric_limits<double>::infinity() : 0.0;
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = i + 1; j < n_; ++j) pair_ceiling_ = std::max(pair_ceiling_, sol.log_pair(i, j));
        esp_.resize(n_ + 1);
    }

    void run() {
        const std::uint32_t consistent = excluded_.empty() ? 0u : (1u << excluded_.size()) - 1u;
        visit(0, 0.0, 0.0, consistent);
    }

private:
    [[nodiscard]] std::size_t offset(std::size_t depth) const {
        return depth * n_ - depth * (depth - 1) / 2;
    }

    void visit(std::size_t depth, double log_weight, double rate, std::uint32_t consistent) {
        if (depth == n_) {
            if (consistent != 0) return;  // matches an excluded subset exactly
            out_.push_back({log_weight, rate});
            best_ = std::max(best_, log_weight);
            return;
        }
        const double* g = buffer_.data() + offset(depth);
        const std::size_t remaining = n_ - depth;

        double bound = log_weight;
        for (std::size_t k = 0; k < remaining; ++k) bound += softplus(g[k]);
        if (bound < best_ - gap_) return;
        if (remaining > 2) {
            const auto [all, grown] = pairwise_bound(g, remaining);
            if (log_weight + all < best_ - gap_) return;
            if (log_weight + grown < best_ - gap_) {
                // only the current subset itself survives below this node
                for (std::size_t k = 0; k < remaining; ++k) consistent = update(consistent, order_[depth + k], false);
                if (consistent == 0) {
                    out_.push_back({log_weight, rate});
                    best_ = std::max(best_, log_weight);
                }
                return;
            }
        }

        const std::size_t index = order_[depth];
        const double gain = g[0];
        auto include = [&] {
            double* child = buffer_.data() + offset(depth + 1);
            for (std::size_t k = 1; k < remaining; ++k)
                child[k - 1] = g[k] + sol_.log_pair(index, order_[depth + k]);
            visit(depth + 1, log_weight + gain, rate + sol_.solitons()[index].alpha,
                  update(consistent, index, true));
        };
        auto exclude = [&] {
            double* child = buffer_.data() + offset(depth + 1);
            for (std::size_t k = 1; k < remaining; ++k) child[k - 1] = g[k];
            visit(depth + 1, log_weight, rate, update(consistent, index, false));
        };
        if (gain > 0.0) {
            include();
            exclude();
        } else {
            exclude();
            include();
        }
    }

    // ln of sum_r e_r(exp g) exp(r(r-1)/2 * pair_ceiling) over r >= 0 and over
    // r >= 1: every pair inside an added block costs at least the largest pair
    // coefficient.
    std::pair<double, double> pairwise_bound(const double* g, std::size_t remaining) {
        const double top = *std::max_element(g, g + remaining);
        std::fill(esp_.begin(), esp_.begin() + static_cast<std::ptrdiff_t>(remaining) + 1, 0.0);
        esp_[0] = 1.0;
        for (std::size_t k = 0; k < remaining; ++k) {
            const double u = std::exp(g[k] - top);
            for (std::size_t r = k + 1; r >= 1; --r) esp_[r] += u * esp_[r - 1];
        }
        double peak = -std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r <= remaining; ++r) {
            esp_[r] = esp_[r] > 0.0 ? std::log(esp_[r]) + static_cast<double>(r) * top +
                                          0.5 * static_cast<double>(r * (r - 1)) * pair_ceiling_
                                    : -std::numeric_limits<double>::infinity();
            peak = std::max(peak, esp_[r]);
        }
        double sum = 0.0;
        for (std::size_t r = 1; r <= remaining; ++r) sum += std::exp(esp_[r] - peak);
        const double grown = peak + std::log(sum);
        return {peak + std::log(sum + std::exp(esp_[0] - peak)), grown};
    }

    [[nodiscard]] std::uint32_t update(std::uint32_t consistent, std::size_t index, bool member) const {
        for (std::size_t e = 0; e < excluded_.size(); ++e)
            if ((excluded_[e][index] != 0) != member) consistent &= ~(1u << e);
        return consistent;
    }

    const NSolitonSolution& sol_;
    std::span<const Membership> excluded_;
    std::vector<SubsetTerm>& out_;
    std::size_t n_;
    double gap_;
    std::vector<std::size_t> order_;
    std::vector<double> buffer_;
    double best_ = -std::numeric_limits<double>::infinity();
    double pair_ceiling_ = 0.0;
    std::vector<double> esp_;
};

} // namespace

void collect_subset_terms(const NSolitonSolution& sol, std::span<const double> theta,
                          std::span<const Membership> excluded, std::vector<SubsetTerm>& out,
                          Enumeration strategy) {
    if (excluded.size() > 31) throw DomainError("too many excluded subsets");
    for (const auto& m : excluded)
        if (m.size() != sol.size()) throw DomainError("excluded subset has wrong length");

    if (strategy == Enumeration::Automatic)
        strategy = sol.has_full_table() ? Enumeration::FullTable : Enumeration::Pruned;
    if (strategy == Enumeration::FullTable) {
        if (!sol.has_full_table()) throw DomainError("full subset table not available");
        collect_full_table(sol, theta, excluded, out);
        return;
    }
    PrunedEnumerator(sol, theta, excluded, out).run();
}

SubsetMoments reduce_terms(std::span<const SubsetTerm> terms) {
    if (terms.empty()) throw DomainError("no subset terms to reduce");
    SubsetMoments m;
    m.log_scale = -std::numeric_limits<double>::infinity();
    for (const auto& term : terms) m.log_scale = std::max(m.log_scale, term.log_weight);

    double weighted_rate = 0.0;
    for (const auto& term : terms) {
        const double w = std::exp(term.log_weight - m.log_scale);
        double p = w;
        for (int k = 0; k < 5; ++k) {
            m.power[k] += p;
            p *= term.rate;
        }
        weighted_rate += w * term.rate;
    }
    m.weight = m.power[0];
    m.mean = weighted_rate / m.weight;

    for (const auto& term : terms) {
        const double w = std::exp(term.log_weight - m.log_scale);
        const double d = term.rate - m.mean;
        double p = w;
        for (int k = 0; k < 5; ++k) {
            m.central[k] += p;
            p *= d;
        }
    }
    for (auto& c : m.central) c /= m.weight;
    return m;
}

double log_sum_exp(std::span<const SubsetTerm> terms) {
    if (terms.empty()) return -std::numeric_limits<double>::infinity();
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& term : terms) top = std::max(top, term.log_weight);
    double sum = 0.0;
    for (const auto& term : terms) sum += std::exp(term.log_weight - top);
    return top + std::log(sum);
}

} // namespace solflow::detail
