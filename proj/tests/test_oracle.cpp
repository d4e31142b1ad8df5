#include "doctest.h"

#include "solflow/error.hpp"
#include "solflow/oracle.hpp"

#include <cmath>
#include <sstream>

using namespace solflow;

namespace {

SolverConfig window(double lo, double hi, std::size_t nx, double t0, double t1) {
    SolverConfig c;
    c.domain = {lo, hi};
    c.resolution = nx;
    c.t0 = t0;
    c.t1 = t1;
    return c;
}

GridField run_periodic(const NSolitonSolution& sol, double t0, double t1, double dx, double dt = 0.0) {
    auto c = periodic_config_for(sol, t0, t1, dx);
    c.dt = dt;
    return solve(sample_field(sol, periodic_grid(c), {t0}), c);
}

} // namespace

TEST_CASE("residual of exact solutions") {
    const NSolitonSolution one({{2.0, 0.0}});
    CHECK(residual_norm(one, window(-10, 10, 400, -0.5, 0.5)) <= 1e-6);
    const NSolitonSolution two({{2.0, 0.0}, {1.0, 0.0}});
    CHECK(residual_norm(two, window(-10, 10, 200, -0.5, 0.5)) <= 1e-5);
    const NSolitonSolution vacuum({});
    CHECK(residual_norm(vacuum, window(-1, 1, 20, 0, 1)) == 0.0);
}

TEST_CASE("residual time step convergence") {
    const NSolitonSolution two({{2.0, -0.5}, {1.2, 0.5}});
    const SolverConfig c = window(-4, 4, 41, 0.0, 0.2);
    const double coarse = residual_norm(two, c, 5, {4e-2, 2});
    const double fine = residual_norm(two, c, 5, {2e-2, 2});
    CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("periodic configuration holds the solution") {
    const NSolitonSolution two({{2.0, -4.0}, {1.0, 0.0}});
    const auto c = periodic_config_for(two, 0.0, 2.0, 1.0 / 32);
    CHECK((c.resolution & (c.resolution - 1)) == 0);
    CHECK((c.domain.hi - c.domain.lo) / static_cast<double>(c.resolution) <= 1.0 / 32);
    for (double t : {0.0, 1.0, 2.0}) {
        CHECK(eta(two, c.domain.lo, t) < 1e-10);
        CHECK(eta(two, c.domain.hi, t) < 1e-10);
    }
}

TEST_CASE("spectral solve tracks a single soliton") {
    const NSolitonSolution one({{2.0, -3.0}});
    const auto out = run_periodic(one, 0.0, 1.0, 1.0 / 32);
    CHECK(out.meta == "oracle");
    CHECK(out.ts.front() == 0.0);
    CHECK(out.ts.back() == 1.0);
    CHECK(max_deviation(out, one) <= 1e-4);
    const double m0 = discrete_mass(out, 0);
    CHECK(m0 == doctest::Approx(4.0).epsilon(1e-10));
    CHECK(std::abs(discrete_mass(out, out.ts.size() - 1) - m0) <= 1e-8 * m0);
}

TEST_CASE("spectral solve converges at least at second order") {
    const NSolitonSolution one({{2.0, -3.0}});
    const double e1 = max_deviation(run_periodic(one, 0.0, 0.5, 1.0 / 16), one);
    const double e2 = max_deviation(run_periodic(one, 0.0, 0.5, 1.0 / 32), one);
    CHECK(e1 / e2 >= 4.0);
}

TEST_CASE("spectral solve through a collision") {
    const NSolitonSolution two({{2.0, -4.0}, {1.0, 0.0}});
    const auto out = run_periodic(two, 0.0, 3.0, 1.0 / 16);
    CHECK(max_deviation(out, two) <= 1e-3);
}

TEST_CASE("difference solver on non power-of-two grids") {
    const NSolitonSolution one({{1.5, -2.0}});
    SolverConfig c = window(-20, 20, 600, 0.0, 0.3);
    c.snapshots = 4;
    const auto out = solve(sample_field(one, periodic_grid(c), {0.0}), c);
    CHECK(max_deviation(out, one) <= 1e-3);
    const double m0 = discrete_mass(out, 0);
    CHECK(std::abs(discrete_mass(out, 3) - m0) <= 1e-10 * m0);
}

TEST_CASE("zero data stays zero") {
    SolverConfig c = window(-5, 5, 64, 0.0, 1.0);
    GridField zero{periodic_grid(c), {0.0}, std::vector<double>(64, 0.0)};
    const auto out = solve(zero, c);
    for (double v : out.values) CHECK(v == 0.0);

    SolverConfig r;
    r.bc = BoundaryMode::DirichletTraces;
    r.resolution = 16;
    r.t1 = 0.01;
    const auto rep = ibvp_replay(NSolitonSolution({}), 1.0, r);
    for (double v : rep.field.values) CHECK(v == 0.0);
    CHECK(rep.max_deviation == 0.0);
}

TEST_CASE("instability is detected") {
    const NSolitonSolution one({{2.0, -3.0}});
    auto c = periodic_config_for(one, 0.0, 0.5, 1.0 / 16);
    c.dealias = false;
    c.dt = 0.05;  // far past the nonlinear step limit
    CHECK_THROWS_AS((void)solve(sample_field(one, periodic_grid(c), {0.0}), c), NumericError);
}

TEST_CASE("solver configuration validation") {
    SolverConfig c;
    c.t1 = c.t0;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = SolverConfig{};
    c.snapshots = 1;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = SolverConfig{};
    c.domain = {1.0, 1.0};
    CHECK_THROWS_AS(validate(c), ConfigError);

    c = SolverConfig{};
    GridField wrong{{0.0, 1.0, 2.0, 3.0}, {0.0}, {0.0, 0.0, 0.0, 0.0}};
    CHECK_THROWS_AS((void)solve(wrong, c), DomainError);
}

TEST_CASE("trace replay of a single soliton crossing") {
    const NSolitonSolution one({{2.0, -2.0}});
    SolverConfig c;
    c.bc = BoundaryMode::DirichletTraces;
    c.t0 = 0.0;
    c.t1 = 1.5;
    c.snapshots = 16;
    c.resolution = 32;
    const auto coarse = ibvp_replay(one, 1.0, c);
    c.resolution = 64;
    const auto fine = ibvp_replay(one, 1.0, c);
    CHECK(fine.max_deviation <= 5e-3);
    CHECK(std::log2(coarse.max_deviation / fine.max_deviation) >= 2.0);
    CHECK(fine.field.xs.front() == 0.0);
    CHECK(fine.field.xs.back() == doctest::Approx(1.0));
}

TEST_CASE("trace replay in the physical frame") {
    const NSolitonSolution one({{1.5, -1.0}});
    SolverConfig c;
    c.bc = BoundaryMode::DirichletTraces;
    c.frame = EvalFrame::PhysicalFrame;
    c.t1 = 0.5;
    c.resolution = 32;
    c.snapshots = 6;
    const auto rep = ibvp_replay(one, 1.0, c);
    CHECK(rep.max_deviation <= 1e-2);
}

TEST_CASE("grid csv") {
    GridField g{{0.0, 0.5}, {0.0, 1.0}, {1.0, 2.0, 3.0, 4.5}};
    std::ostringstream out;
    write_grid_csv(out, g);
    CHECK(out.str() == "t,x,value\n0,0,1\n0,0.5,2\n1,0,3\n1,0.5,4.5\n");
}
