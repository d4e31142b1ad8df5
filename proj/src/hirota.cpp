#include "solflow/hirota.hpp"

#include "solflow/detail/subset_sum.hpp"
#include "solflow/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

namespace solflow {
namespace {

constexpr double kMinRelativeSeparation = 1e-9;

std::vector<detail::SubsetTerm>& scratch_terms() {
    thread_local std::vector<detail::SubsetTerm> terms;
    terms.clear();
    return terms;
}

std::vector<double>& scratch_theta(std::size_t n) {
    thread_local std::vector<double> theta;
    theta.resize(n);
    return theta;
}

detail::SubsetMoments moments_at(const NSolitonSolution& sol, double x, double t) {
    auto& theta = scratch_theta(sol.size());
    sol.exponents(x, t, theta);
    auto& terms = scratch_terms();
    detail::collect_subset_terms(sol, theta, {}, terms);
    return detail::reduce_terms(terms);
}

} // namespace

double TauValue::value() const {
    return sign == 0 ? 0.0 : sign * std::exp(log_abs);
}

double interaction_coefficient(double alpha_k, double alpha_l) {
    if (!(alpha_k > 0.0) || !(alpha_l > 0.0) || !std::isfinite(alpha_k) || !std::isfinite(alpha_l))
        throw DomainError("interaction coefficient needs positive finite amplitudes");
    const double r = (alpha_k - alpha_l) / (alpha_k + alpha_l);
    return r * r;
}

NSolitonSolution::NSolitonSolution(std::vector<Soliton> solitons, SolutionOptions options)
    : solitons_(std::move(solitons)), options_(options) {
    const std::size_t n = solitons_.size();
    if (n > options_.max_solitons)
        throw DomainError("soliton count " + std::to_string(n) + " exceeds the cap " +
                          std::to_string(options_.max_solitons));
    for (const auto& sol : solitons_) {
        if (!(sol.alpha > 0.0) || !std::isfinite(sol.alpha))
            throw DomainError("soliton amplitude parameter must be positive and finite");
        if (!std::isfinite(sol.s)) throw DomainError("soliton phase must be finite");
    }

    log_pair_.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double ai = solitons_[i].alpha;
            const double aj = solitons_[j].alpha;
            const double diff = std::abs(ai - aj);
            if (diff <= kMinRelativeSeparation * std::max(ai, aj))
                throw DomainError("duplicate amplitude parameters at indices " + std::to_string(i) +
                                  " and " + std::to_string(j));
            const double v = 2.0 * (std::log(diff) - std::log(ai + aj));
            log_pair_[i * n + j] = v;
            log_pair_[j * n + i] = v;
        }
    }

    if (n <= options_.full_table_limit && n < 31) {
        const std::size_t count = std::size_t{1} << n;
        mask_log_coeff_.assign(count, 0.0);
        mask_rate_.assign(count, 0.0);
        for (std::size_t mask = 1; mask < count; ++mask) {
            const auto low = static_cast<std::size_t>(std::countr_zero(mask));
            const std::size_t rest = mask & (mask - 1);
            double c = mask_log_coeff_[rest];
            for (std::size_t r = rest; r != 0; r &= r - 1)
                c += log_pair_[low * n + static_cast<std::size_t>(std::countr_zero(r))];
            mask_log_coeff_[mask] = c;
            mask_rate_[mask] = mask_rate_[rest] + solitons_[low].alpha;
        }
    }
}

double NSolitonSolution::pair_coefficient(std::size_t i, std::size_t j) const {
    return i == j ? 1.0 : std::exp(log_pair(i, j));
}

double NSolitonSolution::log_subset_coefficient(std::span<const std::size_t> indices) const {
    double c = 0.0;
    for (std::size_t k = 0; k < indices.size(); ++k)
        for (std::size_t l = k + 1; l < indices.size(); ++l) c += log_pair(indices[k], indices[l]);
    return c;
}

double NSolitonSolution::max_alpha() const {
    double m = 0.0;
    for (const auto& s : solitons_) m = std::max(m, s.alpha);
    return m;
}

double NSolitonSolution::min_alpha() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& s : solitons_) m = std::min(m, s.alpha);
    return m;
}

double NSolitonSolution::alpha_sum() const {
    double sum = 0.0;
    for (const auto& s : solitons_) sum += s.alpha;
    return sum;
}

void NSolitonSolution::exponents(double x, double t, std::span<double> theta) const {
    for (std::size_t i = 0; i < solitons_.size(); ++i) {
        const double a = solitons_[i].alpha;
        theta[i] = -a * (x - solitons_[i].s) + a * a * a * t;
    }
}

TauValue tau_derivative(const NSolitonSolution& sol, int order, double x, double t) {
    if (order < 0 || order > 4) throw DomainError("tau derivative order must be in 0..4");
    const auto m = moments_at(sol, x, t);
    const double p = m.power[order];
    if (!(p > 0.0)) return {0, -std::numeric_limits<double>::infinity()};
    return {order % 2 == 0 ? 1 : -1, m.log_scale + std::log(p)};
}

double tau_derivative_plain(const NSolitonSolution& sol, int order, double x, double t) {
    if (order < 0 || order > 4) throw DomainError("tau derivative order must be in 0..4");
    const std::size_t n = sol.size();
    if (n >= 31) throw DomainError("plain tau evaluation limited to 30 solitons");
    auto& theta = scratch_theta(n);
    sol.exponents(x, t, theta);

    double sum = 0.0;
    const std::size_t count = std::size_t{1} << n;
    std::vector<std::size_t> members;
    for (std::size_t mask = 0; mask < count; ++mask) {
        members.clear();
        double rate = 0.0;
        double f = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (std::size_t{1} << i)) {
                members.push_back(i);
                rate += sol.solitons()[i].alpha;
                f *= std::exp(theta[i]);
            }
        }
        const double a = std::exp(sol.log_subset_coefficient(members));
        sum += std::pow(-rate, order) * a * f;
    }
    return sum;
}

EtaJet eta_derivatives(const NSolitonSolution& sol, double x, double t) {
    if (sol.size() == 0) return {};
    // (ln F)_xx, _xxx, _xxxx are the 2nd, 3rd and 4th cumulants of the subset
    // rates under the normalized weights (with a sign flip on odd orders).
    const auto m = moments_at(sol, x, t);
    const double c2 = m.central[2];
    return {2.0 * c2, -2.0 * m.central[3], 2.0 * (m.central[4] - 3.0 * c2 * c2)};
}

double eta(const NSolitonSolution& sol, double x, double t, EvalFrame frame) {
    if (frame == EvalFrame::PhysicalFrame) return 6.0 * eta_derivatives(sol, x - t, t).eta;
    return eta_derivatives(sol, x, t).eta;
}

double default_time_step(const NSolitonSolution& sol) {
    const double a = std::max(sol.max_alpha(), 1.0);
    return 1e-3 / (a * a * a);
}

double default_space_step(const NSolitonSolution& sol) {
    return 1e-3 / std::max(sol.max_alpha(), 1.0);
}

namespace {

template <class Fn>
double centered_difference(Fn&& f, double at, double h, int order) {
    if (order == 2) return (f(at + h) - f(at - h)) / (2.0 * h);
    if (order == 4)
        return (-f(at + 2.0 * h) + 8.0 * f(at + h) - 8.0 * f(at - h) + f(at - 2.0 * h)) / (12.0 * h);
    throw DomainError("difference order must be 2 or 4");
}

} // namespace

double time_derivative_eta(const NSolitonSolution& sol, double x, double t, DifferenceRule rule) {
    if (sol.size() == 0) return 0.0;
    const double h = rule.step > 0.0 ? rule.step : default_time_step(sol);
    return centered_difference([&](double tau) { return eta_derivatives(sol, x, tau).eta; }, t, h,
                               rule.order);
}

double third_derivative_eta(const NSolitonSolution& sol, double x, double t, DifferenceRule rule) {
    if (sol.size() == 0) return 0.0;
    const double h = rule.step > 0.0 ? rule.step : default_space_step(sol);
    return centered_difference([&](double xi) { return eta_derivatives(sol, xi, t).eta_xx; }, x, h,
                               rule.order);
}

} // namespace solflow
