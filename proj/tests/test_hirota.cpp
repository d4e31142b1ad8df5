#include "doctest.h"

#include "solflow/detail/subset_sum.hpp"
#include "solflow/error.hpp"
#include "solflow/hirota.hpp"

#include <cmath>
#include <random>

using namespace solflow;

namespace {

double sech2_soliton(double alpha, double s, double x, double t) {
    const double c = std::cosh((-alpha * (x - s) + alpha * alpha * alpha * t) / 2.0);
    return alpha * alpha / 2.0 / (c * c);
}

double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

// eta, eta_x, eta_xx from the quotient formulas in F and its plain derivatives.
EtaJet quotient_oracle(const NSolitonSolution& sol, double x, double t) {
    const double F = tau_derivative_plain(sol, 0, x, t);
    const double F1 = tau_derivative_plain(sol, 1, x, t);
    const double F2 = tau_derivative_plain(sol, 2, x, t);
    const double F3 = tau_derivative_plain(sol, 3, x, t);
    const double F4 = tau_derivative_plain(sol, 4, x, t);
    const double G = (F * F2 - F1 * F1) / (F * F);
    const double Gx = (F * F * F3 - 3 * F * F1 * F2 + 2 * F1 * F1 * F1) / (F * F * F);
    const double Gxx = (-4 * F * F * F1 * F3 + F * F * F * F4 + 12 * F * F1 * F1 * F2 -
                        3 * F * F * F2 * F2 - 6 * F1 * F1 * F1 * F1) /
                       (F * F * F * F);
    return {2 * G, 2 * Gx, 2 * Gxx};
}

} // namespace

TEST_CASE("interaction coefficient values") {
    CHECK(interaction_coefficient(1.0, 1.0) == 0.0);
    CHECK(interaction_coefficient(2.0, 1.0) == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
    CHECK(interaction_coefficient(3.0, 1.0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(interaction_coefficient(1.0, 3.0) == interaction_coefficient(3.0, 1.0));
    CHECK_THROWS_AS((void)interaction_coefficient(0.0, 1.0), DomainError);
    CHECK_THROWS_AS((void)interaction_coefficient(1.0, -2.0), DomainError);
}

TEST_CASE("solution construction rejects bad input") {
    using List = std::vector<Soliton>;
    CHECK_THROWS_AS((void)NSolitonSolution(List{{2.0, 0.0}, {2.0, 1.0}}), DomainError);
    CHECK_THROWS_AS((void)NSolitonSolution(List{{2.0, 0.0}, {2.0 * (1 + 1e-12), 1.0}}), DomainError);
    CHECK_THROWS_AS((void)NSolitonSolution(List{{-1.0, 0.0}}), DomainError);
    CHECK_THROWS_AS((void)NSolitonSolution(List{{1.0, NAN}}), DomainError);

    std::vector<Soliton> many;
    for (int i = 0; i < 25; ++i) many.push_back({1.0 + 0.1 * i, 0.0});
    CHECK_THROWS_AS((void)NSolitonSolution(many), DomainError);
    SolutionOptions opts;
    opts.max_solitons = 30;
    CHECK_NOTHROW((void)NSolitonSolution(many, opts));
}

TEST_CASE("subset coefficients are products of pair coefficients") {
    const NSolitonSolution sol({{3.0, 0.0}, {2.0, 1.0}, {1.0, -1.0}});
    CHECK(sol.pair_coefficient(0, 1) == doctest::Approx(interaction_coefficient(3.0, 2.0)));
    CHECK(sol.pair_coefficient(1, 1) == 1.0);
    const std::vector<std::size_t> all{0, 1, 2};
    const double expected = std::log(interaction_coefficient(3, 2) * interaction_coefficient(3, 1) *
                                     interaction_coefficient(2, 1));
    CHECK(sol.log_subset_coefficient(all) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(sol.mask_log_coefficients()[7] == doctest::Approx(expected).epsilon(1e-14));
    const std::vector<std::size_t> single{1};
    CHECK(sol.log_subset_coefficient(single) == 0.0);
}

TEST_CASE("tau derivative examples") {
    const NSolitonSolution one({{2.0, 0.0}});
    CHECK(tau_derivative(one, 0, 0.0, 0.0).value() == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(tau_derivative(one, 1, 0.0, 0.0).value() == doctest::Approx(-2.0).epsilon(1e-15));
    CHECK(tau_derivative(one, 1, 0.0, 0.0).sign == -1);

    const NSolitonSolution two({{2.0, 0.0}, {1.0, 0.0}});
    CHECK(tau_derivative(two, 0, 0.0, 0.0).value() == doctest::Approx(3.0 + 1.0 / 9.0).epsilon(1e-14));

    CHECK_THROWS_AS((void)tau_derivative(one, 5, 0.0, 0.0), DomainError);
    CHECK_THROWS_AS((void)tau_derivative(one, -1, 0.0, 0.0), DomainError);

    const NSolitonSolution vacuum({});
    CHECK(tau_derivative(vacuum, 0, 1.0, 2.0).value() == 1.0);
    CHECK(tau_derivative(vacuum, 2, 1.0, 2.0).sign == 0);
}

TEST_CASE("tau is at least one and survives huge exponents") {
    const NSolitonSolution sol({{10.0, 0.0}, {9.0, 3.0}, {7.5, -2.0}});
    for (double x : {-600.0, -10.0, 0.0, 5.0, 600.0}) {
        const auto F = tau_derivative(sol, 0, x, 0.0);
        CHECK(F.sign == 1);
        CHECK(F.log_abs >= 0.0);
        CHECK(std::isfinite(F.log_abs));
        const auto jet = eta_derivatives(sol, x, 0.0);
        CHECK(std::isfinite(jet.eta));
        CHECK(jet.eta >= 0.0);
    }
    // exponent near 6000 on the far left
    CHECK(tau_derivative(sol, 4, -600.0, 0.0).log_abs > 5000.0);
}

TEST_CASE("log and plain evaluation agree where plain does not overflow") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ux(-6.0, 6.0), ut(-0.5, 0.5);
    const NSolitonSolution sol({{2.5, 0.5}, {1.7, -1.0}, {1.1, 2.0}, {3.2, 0.0}});
    for (int i = 0; i < 200; ++i) {
        const double x = ux(rng);
        const double t = ut(rng);
        for (int k = 0; k <= 4; ++k) {
            const double plain = tau_derivative_plain(sol, k, x, t);
            if (!std::isfinite(plain)) continue;
            CHECK(rel_err(tau_derivative(sol, k, x, t).value(), plain) < 1e-12);
        }
    }
}

TEST_CASE("cumulant route matches the quotient formulas") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ux(-4.0, 4.0), ut(-0.3, 0.3);
    const NSolitonSolution sol({{2.0, 0.0}, {1.5, -1.0}, {1.0, 1.5}});
    for (int i = 0; i < 100; ++i) {
        const double x = ux(rng);
        const double t = ut(rng);
        const auto got = eta_derivatives(sol, x, t);
        const auto want = quotient_oracle(sol, x, t);
        const double scale = 1.0;  // eta values are O(1) here
        CHECK(std::abs(got.eta - want.eta) < 1e-10 * scale);
        CHECK(std::abs(got.eta_x - want.eta_x) < 1e-9 * scale);
        CHECK(std::abs(got.eta_xx - want.eta_xx) < 1e-8 * scale);
    }
}

TEST_CASE("pruned enumeration agrees with the full table") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ua(0.8, 6.0), us(-3.0, 3.0);
    std::vector<Soliton> solitons;
    for (int i = 0; i < 11; ++i) solitons.push_back({ua(rng), us(rng)});
    const NSolitonSolution sol(solitons);
    REQUIRE(sol.has_full_table());

    std::uniform_real_distribution<double> ux(-8.0, 8.0);
    std::vector<double> theta(sol.size());
    for (int i = 0; i < 50; ++i) {
        sol.exponents(ux(rng), 0.05, theta);
        std::vector<detail::SubsetTerm> full, pruned;
        detail::collect_subset_terms(sol, theta, {}, full, detail::Enumeration::FullTable);
        detail::collect_subset_terms(sol, theta, {}, pruned, detail::Enumeration::Pruned);
        CHECK(full.size() == 2048);
        CHECK(pruned.size() <= full.size());
        const auto a = detail::reduce_terms(full);
        const auto b = detail::reduce_terms(pruned);
        CHECK(rel_err(detail::log_sum_exp(pruned), detail::log_sum_exp(full)) < 1e-13);
        CHECK(rel_err(b.central[2], a.central[2]) < 1e-10);
    }
}

TEST_CASE("exclusions remove exactly the named subsets") {
    const NSolitonSolution sol({{2.0, 0.0}, {1.5, -1.0}, {1.0, 1.0}});
    std::vector<double> theta(3);
    sol.exponents(0.2, 0.0, theta);
    const std::vector<detail::Membership> skip{{0, 0, 0}, {1, 0, 0}};
    for (auto strategy : {detail::Enumeration::FullTable, detail::Enumeration::Pruned}) {
        std::vector<detail::SubsetTerm> all, kept;
        detail::collect_subset_terms(sol, theta, {}, all, strategy);
        detail::collect_subset_terms(sol, theta, skip, kept, strategy);
        const double removed = std::exp(detail::log_sum_exp(all)) - std::exp(detail::log_sum_exp(kept));
        CHECK(removed == doctest::Approx(1.0 + std::exp(theta[0])).epsilon(1e-12));
    }
}

TEST_CASE("eta examples") {
    const NSolitonSolution one({{2.0, 0.0}});
    CHECK(eta(one, 0.0, 0.0) == doctest::Approx(2.0).epsilon(1e-14));
    const double t0 = 0.3;
    CHECK(eta(one, 4.0 * t0, t0) == doctest::Approx(2.0).epsilon(1e-12));
    // physical peak sits at x - t = alpha^2 t, i.e. x = 5 t
    CHECK(eta(one, 1.5, 0.3, EvalFrame::PhysicalFrame) == doctest::Approx(12.0).epsilon(1e-12));
    CHECK(eta(one, 0.3, 0.3, EvalFrame::PhysicalFrame) == doctest::Approx(6.0 * eta(one, 0.0, 0.3)).epsilon(1e-14));
    CHECK(eta(one, 1.3, 0.3, EvalFrame::PhysicalFrame) ==
          doctest::Approx(6.0 * eta(one, 1.0, 0.3)).epsilon(1e-14));
}

TEST_CASE("eta derivative examples") {
    const NSolitonSolution one({{2.0, 0.0}});
    const auto peak = eta_derivatives(one, 0.0, 0.0);
    CHECK(std::abs(peak.eta_x) < 1e-14);
    // d2/dx2 of (a^2/2) sech^2(a x / 2) at 0 is -a^4/4
    CHECK(peak.eta_xx == doctest::Approx(-4.0).epsilon(1e-13));
    const auto far = eta_derivatives(one, 400.0, 0.0);
    CHECK(std::abs(far.eta) < 1e-300);
    CHECK(std::abs(far.eta_x) < 1e-300);
    CHECK(std::abs(far.eta_xx) < 1e-300);
}

TEST_CASE("single soliton reduction to the sech^2 profile") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ua(0.3, 8.0), us(-5.0, 5.0), uz(-20.0, 20.0), ut(-1.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const double a = ua(rng), s = us(rng), t = ut(rng);
        const double x = s + a * a * t + uz(rng) / a;
        const NSolitonSolution sol({{a, s}});
        CHECK(rel_err(eta(sol, x, t), sech2_soliton(a, s, x, t)) < 1e-12);
    }
}

TEST_CASE("positivity over random multi-soliton solutions") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> ua(0.5, 6.0), us(-4.0, 4.0), ut(-1.0, 1.0);
    std::uniform_int_distribution<int> un(1, 5);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<Soliton> solitons;
        const int n = un(rng);
        for (int i = 0; i < n; ++i) solitons.push_back({ua(rng) + 0.01 * i, us(rng)});
        const NSolitonSolution sol(solitons);
        const double t = ut(rng);
        for (const auto& s : solitons) {
            // points within a few widths of each nominal peak stay representable
            for (double off : {-3.0, -1.0, 0.0, 0.7, 2.5}) {
                const double x = s.s + s.alpha * s.alpha * t + off / s.alpha;
                CHECK(eta(sol, x, t) > 0.0);
            }
        }
    }
}

TEST_CASE("time derivative examples") {
    const NSolitonSolution two({{2.0, 0.0}});
    const double t = 0.4;
    CHECK(std::abs(time_derivative_eta(two, 4.0 * t, t)) < 1e-6);

    const NSolitonSolution unit({{1.0, 0.0}});
    const double expect = -eta_derivatives(unit, 0.5, 0.0).eta_x;  // speed 1
    CHECK(std::abs(time_derivative_eta(unit, 0.5, 0.0) - expect) < 1e-6);
    CHECK(std::abs(time_derivative_eta(unit, 0.5, 0.0, {1e-4, 2}) - expect) < 1e-6);

    const NSolitonSolution vacuum({});
    CHECK(time_derivative_eta(vacuum, 0.5, 0.3) == 0.0);
    CHECK_THROWS_AS((void)time_derivative_eta(unit, 0.0, 0.0, {1e-3, 3}), DomainError);
}

TEST_CASE("third derivative by differences matches the closed form") {
    // eta = (1/2) sech^2(x/2); eta_xx = (1/8) (4 sech^2 - 6 sech^4)(x/2), differenced analytically
    const NSolitonSolution unit({{1.0, 0.0}});
    auto exx = [](double z) {
        const double s2 = 1.0 / (std::cosh(z / 2) * std::cosh(z / 2));
        return 0.125 * (4.0 * s2 - 6.0 * s2 * s2);
    };
    const double x = 1.0;
    const double h = 1e-3;
    const double fd = (-exx(x + 2 * h) + 8 * exx(x + h) - 8 * exx(x - h) + exx(x - 2 * h)) / (12 * h);
    CHECK(third_derivative_eta(unit, x, 0.0) == doctest::Approx(fd).epsilon(1e-8));
}
