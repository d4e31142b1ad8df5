#include "solflow/analysis.hpp"

#include "solflow/detail/subset_sum.hpp"
#include "solflow/error.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace solflow {
namespace {

using Gauss16 = boost::math::quadrature::gauss<double, 16>;

double softplus(double v) {
    return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
}

// Gauss-Legendre nodes/weights on [-1,1] expanded from the symmetric half table.
struct Rule16 {
    std::array<double, 16> node{};
    std::array<double, 16> weight{};
    Rule16() {
        const auto& x = Gauss16::abscissa();
        const auto& w = Gauss16::weights();
        for (std::size_t i = 0; i < 8; ++i) {
            node[i] = -x[i];
            weight[i] = w[i];
            node[15 - i] = x[i];
            weight[15 - i] = w[i];
        }
    }
};

const Rule16& rule16() {
    static const Rule16 rule;
    return rule;
}

template <class Fn>
double composite_gauss(Fn&& f, double a, double b, std::size_t panels) {
    const auto& r = rule16();
    const double h = (b - a) / static_cast<double>(panels);
    double total = 0.0;
    for (std::size_t p = 0; p < panels; ++p) {
        const double mid = a + (static_cast<double>(p) + 0.5) * h;
        double sum = 0.0;
        for (std::size_t i = 0; i < 16; ++i) sum += r.weight[i] * f(mid + 0.5 * h * r.node[i]);
        total += 0.5 * h * sum;
    }
    return total;
}

void require_index(const NSolitonSolution& sol, std::size_t k) {
    if (k >= sol.size()) throw DomainError("soliton index out of range");
}

double speed(const Soliton& s) { return s.alpha * s.alpha; }

} // namespace

double width(double alpha) {
    if (!(alpha > 0.5) || !std::isfinite(alpha)) throw DomainError("width needs alpha > 1/2");
    return 4.0 / alpha * std::log(std::sqrt(2.0 * alpha) * (1.0 + std::sqrt(1.0 - 1.0 / (2.0 * alpha))));
}

void GridField::validate() const {
    if (xs.empty() || ts.empty()) throw DomainError("grid field has an empty axis");
    if (values.size() != xs.size() * ts.size()) throw DomainError("grid field dimensions are inconsistent");
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] > xs[i - 1])) throw DomainError("grid abscissae must be strictly increasing");
    for (std::size_t i = 1; i < ts.size(); ++i)
        if (!(ts[i] > ts[i - 1])) throw DomainError("grid times must be strictly increasing");
    for (double v : values)
        if (!std::isfinite(v)) throw DomainError("grid field holds a non-finite value");
}

GridField sample_field(const NSolitonSolution& sol, std::vector<double> xs, std::vector<double> ts,
                       EvalFrame frame) {
    GridField g{std::move(xs), std::move(ts), {}, "closed-form"};
    g.values.resize(g.xs.size() * g.ts.size());
    for (std::size_t it = 0; it < g.ts.size(); ++it)
        for (std::size_t ix = 0; ix < g.xs.size(); ++ix) g.at(it, ix) = eta(sol, g.xs[ix], g.ts[it], frame);
    return g;
}

std::size_t default_panels(double len, double alpha_max) {
    return std::max<std::size_t>(64, static_cast<std::size_t>(std::ceil(8.0 * len * alpha_max)));
}

double sobolev_norm(const JetFunction& f, double a, double b, int order, std::size_t panels) {
    if (order < 0 || order > 2) throw DomainError("Sobolev order must be 0, 1 or 2");
    if (panels == 0) throw DomainError("need at least one quadrature panel");
    const double integral = composite_gauss(
        [&](double x) {
            const EtaJet j = f(x);
            double v = j.eta * j.eta;
            if (order >= 1) v += j.eta_x * j.eta_x;
            if (order >= 2) v += j.eta_xx * j.eta_xx;
            if (!std::isfinite(v)) throw NumericError("non-finite sample in Sobolev norm");
            return v;
        },
        a, b, panels);
    return std::sqrt(integral);
}

double sobolev_norm(const NSolitonSolution& sol, double t, double L, int order) {
    if (!(L > 0.0)) throw DomainError("domain length must be positive");
    return sobolev_norm([&](double x) { return eta_derivatives(sol, x, t); }, 0.0, L, order,
                        default_panels(L, sol.max_alpha()));
}

double sobolev_norm(const GridField& field, std::size_t time_index, int order) {
    field.validate();
    if (order < 0 || order > 2) throw DomainError("Sobolev order must be 0, 1 or 2");
    const std::size_t n = field.xs.size();
    if (n < 3) throw DomainError("grid Sobolev norm needs at least three points");
    const double h = (field.xs.back() - field.xs.front()) / static_cast<double>(n - 1);
    auto u = [&](std::size_t i) { return field.at(time_index, i); };

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d1 = 0.0, d2 = 0.0;
        if (i == 0) {
            d1 = (-3 * u(0) + 4 * u(1) - u(2)) / (2 * h);
            d2 = n > 3 ? (2 * u(0) - 5 * u(1) + 4 * u(2) - u(3)) / (h * h) : (u(0) - 2 * u(1) + u(2)) / (h * h);
        } else if (i == n - 1) {
            d1 = (3 * u(i) - 4 * u(i - 1) + u(i - 2)) / (2 * h);
            d2 = n > 3 ? (2 * u(i) - 5 * u(i - 1) + 4 * u(i - 2) - u(i - 3)) / (h * h)
                       : (u(i) - 2 * u(i - 1) + u(i - 2)) / (h * h);
        } else {
            d1 = (u(i + 1) - u(i - 1)) / (2 * h);
            d2 = (u(i + 1) - 2 * u(i) + u(i - 1)) / (h * h);
        }
        double v = u(i) * u(i);
        if (order >= 1) v += d1 * d1;
        if (order >= 2) v += d2 * d2;
        total += (i == 0 || i == n - 1) ? 0.5 * v : v;
    }
    return std::sqrt(total * h);
}

Interval mass_window(const NSolitonSolution& sol, double t) {
    if (sol.size() == 0) return {-1.0, 1.0};
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    const auto solitons = sol.solitons();
    for (std::size_t i = 0; i < sol.size(); ++i) {
        double shift = 0.0;
        for (std::size_t j = 0; j < sol.size(); ++j)
            if (j != i) shift -= sol.log_pair(i, j);
        shift /= solitons[i].alpha;
        const double peak = solitons[i].s + speed(solitons[i]) * t;
        lo = std::min(lo, peak - shift);
        hi = std::max(hi, peak + shift);
    }
    const double margin = 40.0 / sol.min_alpha();
    return {lo - margin, hi + margin};
}

double mass(const NSolitonSolution& sol, double t, Interval window) {
    const std::size_t panels = default_panels(window.hi - window.lo, sol.max_alpha());
    return composite_gauss([&](double x) { return eta(sol, x, t); }, window.lo, window.hi, panels);
}

double interaction_factor(const NSolitonSolution& sol, std::size_t k, double t) {
    return std::exp(log_interaction_factor(sol, k, t));
}

double log_interaction_factor(const NSolitonSolution& sol, std::size_t k, double t) {
    require_index(sol, k);
    const std::size_t n = sol.size();
    if (n == 1) return 0.0;
    const auto sl = sol.solitons();

    std::vector<double> theta(n);
    std::vector<detail::Membership> excluded;
    double log_reference = 0.0;

    if (k == 0) {
        // all factors at the left end of the leading soliton's neighbourhood;
        // the empty subset and f_1 alone are the two leading terms
        const double x = (3.0 * sl[0].s + sl[1].s) / 4.0 + speed(sl[0]) * t;
        sol.exponents(x, t, theta);
        detail::Membership empty(n, 0), lead(n, 0);
        lead[0] = 1;
        excluded = {empty, lead};
    } else {
        const Interval nb = envelope_neighbourhood(sol, k, t, 0.0);
        std::vector<double> right(n), left(n);
        sol.exponents(nb.hi, t, right);
        sol.exponents(nb.lo, t, left);
        for (std::size_t i = 0; i < n; ++i) theta[i] = i < k ? right[i] : left[i];
        detail::Membership prefix(n, 0), prefix_k(n, 0);
        for (std::size_t i = 0; i < k; ++i) prefix[i] = prefix_k[i] = 1;
        prefix_k[k] = 1;
        excluded = {prefix, prefix_k};
        // normalisation a(1..k-1) f_1...f_{k-1} at the right end
        for (std::size_t i = 0; i < k; ++i) {
            log_reference += right[i];
            for (std::size_t j = i + 1; j < k; ++j) log_reference += sol.log_pair(i, j);
        }
    }

    thread_local std::vector<detail::SubsetTerm> terms;
    terms.clear();
    detail::collect_subset_terms(sol, theta, excluded, terms);
    const double log_rest = detail::log_sum_exp(terms) - log_reference;
    return -softplus(log_rest);
}

Interval envelope_neighbourhood(const NSolitonSolution& sol, std::size_t k, double t, double eps1) {
    require_index(sol, k);
    const auto sl = sol.solitons();
    const std::size_t n = sol.size();
    const double drift = speed(sl[k]) * t;
    if (k == 0) {
        const double hi = -speed(sl[0]) * eps1 + drift;
        // a lone soliton gets the mirror image of the right end about s_1
        const double lo = n >= 2 ? (3.0 * sl[0].s + sl[1].s) / 4.0 + drift
                                 : 2.0 * sl[0].s + speed(sl[0]) * eps1 + drift;
        return {lo, hi};
    }
    const double hi = (2.0 * sl[k].s + sl[k - 1].s) / 3.0 + drift;
    const double lo = k + 1 < n ? (2.0 * sl[k].s + sl[k + 1].s) / 3.0 + drift
                                : (4.0 * sl[k].s - sl[k - 1].s) / 3.0 + drift;
    return {lo, hi};
}

double envelope_phase(const NSolitonSolution& sol, std::size_t k, double log_a_k) {
    require_index(sol, k);
    const Soliton& s = sol.solitons()[k];
    double log_gain = log_a_k;
    for (std::size_t i = 0; i < k; ++i) log_gain += sol.log_pair(i, k);
    return s.s + log_gain / s.alpha;
}

double envelope_bound(const NSolitonSolution& sol, std::size_t k, double x, double t, double log_a_k) {
    const Soliton& s = sol.solitons()[k];
    const double sigma = envelope_phase(sol, k, log_a_k);
    // sech^2(z) = 4 exp(-2|z|) / (1 + exp(-2|z|))^2, finite for any z
    const double z = std::abs(s.alpha * (x - sigma - speed(s) * t) / 2.0);
    const double e = std::exp(-2.0 * z);
    return s.alpha * s.alpha / 4.0 * std::exp(log_a_k) * 4.0 * e / ((1.0 + e) * (1.0 + e));
}

EnvelopeResult envelope_check(const SolitonTrain& train, std::size_t k, double t, std::size_t samples,
                              double tolerance) {
    const NSolitonSolution& sol = train.field();
    if (samples < 2) throw DomainError("envelope check needs at least two samples");
    const Interval nb = envelope_neighbourhood(sol, k, t, train.spec.eps1);
    if (!(nb.hi > nb.lo)) throw DomainError("empty envelope neighbourhood");

    EnvelopeResult r;
    r.log_a_k = log_interaction_factor(sol, k, t);
    r.a_k = std::exp(r.log_a_k);
    r.min_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < samples; ++i) {
        const double x = nb.lo + (nb.hi - nb.lo) * static_cast<double>(i) / static_cast<double>(samples - 1);
        const double margin = 0.5 * eta(sol, x, t) - envelope_bound(sol, k, x, t, r.log_a_k);
        if (margin < r.min_margin) {
            r.min_margin = margin;
            r.at_x = x;
        }
    }
    r.holds = r.min_margin >= -tolerance;
    return r;
}

double soliton_displacement_bound(double alpha) {
    if (!(alpha > 0.5)) throw DomainError("displacement bound needs alpha > 1/2");
    return std::log(std::sqrt(2.0 * alpha) * (1.0 + std::sqrt(1.0 - 1.0 / (2.0 * alpha)))) /
           (4.0 * alpha * alpha);
}

DisplacementBound char_displacement_bound(const SolitonTrain& train) {
    DisplacementBound b;
    for (double a : train.alphas) {
        b.per_soliton.push_back(soliton_displacement_bound(a));
        b.total += b.per_soliton.back();
    }
    return b;
}

double characteristic_field(const NSolitonSolution& sol, double x, double t) {
    double v = 0.0;
    for (std::size_t k = 0; k < sol.size(); ++k) {
        const Soliton& s = sol.solitons()[k];
        const double centre = speed(s) * t + envelope_phase(sol, k, log_interaction_factor(sol, k, t));
        if (std::abs(x - centre) <= width(s.alpha) / 2.0) v += s.alpha / 16.0;
    }
    return v;
}

double characteristic_displacement(const NSolitonSolution& sol, double x, double t0, double t1,
                                   std::size_t samples) {
    if (samples == 0 || !(t1 > t0)) throw DomainError("bad characteristic displacement window");
    const double h = (t1 - t0) / static_cast<double>(samples);
    double total = 0.0;
    for (std::size_t i = 0; i < samples; ++i)
        total += characteristic_field(sol, x, t0 + (static_cast<double>(i) + 0.5) * h);
    return total * h;
}

} // namespace solflow
