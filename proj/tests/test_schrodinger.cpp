#include <cmath>

#include "doctest.h"
#include "oracles.hpp"

#include "ebind/errors.hpp"
#include "ebind/potential.hpp"
#include "ebind/schrodinger.hpp"

using namespace ebind;

namespace {

double hessian_norm_sq(const BoundStateSolution& s) {
    double sum = 0.0;
    for (std::size_t i = 0; i < s.grid.r.size(); ++i) {
        const double r = s.grid.r[i];
        sum += s.grid.w[i] * r * r * (s.d2f[i] * s.d2f[i] + 2.0 * s.df[i] * s.df[i] / (r * r));
    }
    return 4.0 * oracle::pi * sum;
}

}  // namespace

TEST_CASE("critical coupling of indicator wells") {
    for (auto [depth, radius] : {std::pair{1.0, 1.0}, std::pair{2.0, 1.0}, std::pair{1.0, 2.0}, std::pair{0.5, 3.0}}) {
        const double l0 = critical_coupling(RadialPotential::indicator_well(depth, radius));
        CHECK(l0 == doctest::Approx(oracle::indicator_lambda0(depth, radius)).epsilon(1e-10));
    }
}

TEST_CASE("critical coupling scales as 1/(depth radius^2) for any shape") {
    const double base = critical_coupling(RadialPotential::smooth_well(1.0, 1.0));
    CHECK(critical_coupling(RadialPotential::smooth_well(3.0, 2.0)) == doctest::Approx(base / 12.0).epsilon(1e-9));
    // at lambda_0 the zero-energy solution has u'(R) = 0
    CHECK(prufer_angle(RadialPotential::smooth_well(1.0, 1.0), base, 0.0) ==
          doctest::Approx(0.5 * oracle::pi).epsilon(1e-9));
    CHECK_THROWS_AS(critical_coupling(RadialPotential::indicator_well(-1.0, 1.0)), NoBinding);
}

TEST_CASE("square-well bound states match the transcendental root") {
    const auto w = RadialPotential::indicator_well(1.0, 1.0);
    const double l0 = oracle::indicator_lambda0(1.0, 1.0);
    for (auto [lambda, gamma] : {std::pair{3.0, 0.1}, std::pair{6.0, 0.1}, std::pair{l0, 1e-2}, std::pair{l0, 1e-4},
                                 std::pair{1.2 * l0, 0.0}}) {
        const auto s = bound_state(w, lambda, gamma);
        const double e = oracle::square_well_energy(1.0, 1.0, lambda, gamma);
        CHECK(s.energy == doctest::Approx(e).epsilon(1e-9));
        CHECK(s.tail_rate == doctest::Approx(s.kappa).epsilon(1e-7));
        CHECK(norm_squared(s) == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(regularized_form(s, w) == doctest::Approx(s.energy).epsilon(1e-7));
        CHECK(laplacian_norm_squared(s) == doctest::Approx(hessian_norm_sq(s)).epsilon(1e-7));
        // inside the well Delta f = (lambda W - e) f / (1 - gamma)
        const double lap_in = (lambda * -1.0 - s.energy) / (1.0 - gamma);
        const std::size_t i = s.grid.interior_size / 2;
        const double r = s.grid.r[i];
        CHECK(s.d2f[i] + 2.0 * s.df[i] / r == doctest::Approx(lap_in * s.f[i]).epsilon(1e-8));
    }
}

TEST_CASE("smooth-well bound state matches a finite-difference eigensolver") {
    const auto w = RadialPotential::smooth_well(1.0, 1.0);
    const double l0 = critical_coupling(w);
    const double lambda = 2.0 * l0;
    const double gamma = 0.05;
    const auto s = bound_state(w, lambda, gamma);
    const double box = 1.0 + 30.0 / s.kappa;
    auto v = [&](double r) { return lambda * w(r) / (1.0 - gamma); };
    const double e1 = oracle::fd_ground_energy(v, box, 6000);
    const double e2 = oracle::fd_ground_energy(v, box, 12001);
    const double richardson = (4.0 * e2 - e1) / 3.0;
    CHECK((1.0 - gamma) * richardson == doctest::Approx(s.energy).epsilon(1e-5));
}

TEST_CASE("gradient norms and forms") {
    const auto w = RadialPotential::indicator_well(1.0, 1.0);
    const auto s = bound_state(w, 3.0, 0.1);
    const auto g = gradient_norms(s);
    for (double p : g.per_axis) CHECK(p == doctest::Approx(g.total / 3.0).epsilon(1e-13));
    CHECK(schrodinger_form(s, w, 3.0) == doctest::Approx(g.total + 3.0 * (schrodinger_form(s, w, 1.0) - g.total)));
    double inside = 0.0;
    for (std::size_t i = 0; i < s.grid.interior_size; ++i)
        inside += s.grid.w[i] * s.grid.r[i] * s.grid.r[i] * s.df[i] * s.df[i];
    CHECK(potential_gradient_form(s, w) == doctest::Approx(-4.0 * oracle::pi * inside).epsilon(1e-12));
}

TEST_CASE("gradient-form bound at lambda_0 with C_W") {
    const auto w = RadialPotential::indicator_well(1.0, 1.0);
    const double l0 = critical_coupling(w);
    const double c_w = c_w_constant(l0, w).c_w;
    for (double gamma : {1e-2, 1e-4, 1e-6}) {
        const auto s = bound_state(w, l0, gamma);
        const auto r = gradient_excess_check(s, w, l0, c_w, 0.0);
        CHECK(r.satisfied);
        CHECK(r.excess <= 0.0);
        CHECK(r.lhs == doctest::Approx(laplacian_norm_squared(s) + l0 * potential_gradient_form(s, w)));
    }
}

TEST_CASE("bound state preconditions") {
    const auto w = RadialPotential::indicator_well(1.0, 1.0);
    CHECK_THROWS_AS(bound_state(w, 2.0, 0.0), NoBinding);
    CHECK_THROWS_AS(bound_state(w, 3.0, 1.0), InvalidInput);
    CHECK_THROWS_AS(bound_state(w, -3.0, 0.1), InvalidInput);
    CHECK_THROWS_AS(bound_state(RadialPotential::indicator_well(-1.0, 1.0), 3.0, 0.1), NoBinding);
}
