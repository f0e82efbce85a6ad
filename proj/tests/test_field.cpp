#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"

#include "ebind/errors.hpp"
#include "ebind/field.hpp"

using namespace ebind;

namespace {

Vec3 random_direction(std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Vec3 v{g(rng), g(rng), g(rng)};
    const double n = norm(v);
    for (double& x : v) x /= n;
    return v;
}

}  // namespace

TEST_CASE("cutoff profiles") {
    const auto sharp = CutoffProfile::sharp(1.5);
    CHECK(sharp(0.0) == 1.0);
    CHECK(sharp(1.5) == 1.0);
    CHECK(sharp(1.5000001) == 0.0);
    CHECK(sharp.breakpoints().empty());

    const auto bump = CutoffProfile::smooth_bump(2.0, 0.5, 0.8);
    CHECK(bump(1.0) == doctest::Approx(0.8));
    CHECK(bump(2.0) == doctest::Approx(0.0));
    CHECK(bump(1.75) == doctest::Approx(0.4));
    CHECK(bump(3.0) == 0.0);
    REQUIRE(bump.breakpoints().size() == 1);
    CHECK(bump.breakpoints()[0] == doctest::Approx(1.5));
    // C^1 at the start of the roll-off
    const double h = 1e-6;
    CHECK(std::abs(bump(1.5 + h) - bump(1.5)) / h < 1e-4);

    CHECK_THROWS_AS(CutoffProfile::sharp(0.0), InvalidInput);
    CHECK_THROWS_AS(CutoffProfile::smooth_bump(1.0, 1.5), InvalidInput);
    CHECK_THROWS_AS(CutoffProfile::sharp(1.0, -1.0), InvalidInput);
}

TEST_CASE("model parameters") {
    CHECK_NOTHROW(ModelParams{0.0, 1}.validate());
    CHECK_NOTHROW(ModelParams{1e-2, 0}.validate());
    CHECK_THROWS_AS((ModelParams{-1e-3, 1}.validate()), InvalidInput);
    CHECK_THROWS_AS((ModelParams{1e-3, 2}.validate()), InvalidInput);
}

TEST_CASE("Pauli matrices") {
    const auto& s = pauli::matrices();
    const cplx I{0.0, 1.0};
    for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3, k = (i + 2) % 3;
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) {
                cplx sq = 0.0, prod = 0.0;
                for (int m = 0; m < 2; ++m) {
                    sq += s[i][r][m] * s[i][m][c];
                    prod += s[i][r][m] * s[j][m][c];
                }
                CHECK(std::abs(sq - cplx(r == c)) < 1e-15);
                CHECK(std::abs(prod - I * s[k][r][c]) < 1e-15);
            }
    }
}

TEST_CASE("polarization frame is a right-handed orthonormal triad") {
    std::mt19937_64 rng(42);
    for (int t = 0; t < 200; ++t) {
        const Vec3 n = random_direction(rng);
        const double r = 0.1 + 3.0 * t / 200.0;
        const Vec3 k{r * n[0], r * n[1], r * n[2]};
        const auto [e1, e2] = polarization_pair(k);
        CHECK(std::abs(dot(e1, e1) - 1.0) < 1e-14);
        CHECK(std::abs(dot(e2, e2) - 1.0) < 1e-14);
        CHECK(std::abs(dot(e1, e2)) < 1e-14);
        CHECK(std::abs(dot(e1, n)) < 1e-14);
        const Vec3 c = cross(n, e1);
        for (int i = 0; i < 3; ++i) CHECK(std::abs(c[i] - e2[i]) < 1e-14);
        const auto [o1, o2] = oracle::frame(n);
        for (int i = 0; i < 3; ++i) {
            CHECK(std::abs(o1[i] - e1[i]) < 1e-13);
            CHECK(std::abs(o2[i] - e2[i]) < 1e-13);
        }
    }
    CHECK_THROWS_AS(polarization_pair(Vec3{0.0, 0.0, 2.0}), AxisSingularity);
    CHECK_THROWS_AS(polarization(Vec3{1.0, 0.0, 0.0}, 3), InvalidInput);
}

TEST_CASE("normal ordering constant") {
    CHECK(normal_ordering_constant(CutoffProfile::sharp(1.0)) == doctest::Approx(1.0 / oracle::pi).epsilon(1e-13));
    CHECK(normal_ordering_constant(CutoffProfile::sharp(2.0, 0.5)) ==
          doctest::Approx(2.0 / oracle::pi * 0.25 * 2.0).epsilon(1e-13));
    const auto bump = CutoffProfile::smooth_bump(1.0, 0.4);
    const auto [x, w] = oracle::golub_welsch(60, 0.6, 1.0);
    double ref = 0.6 * 0.6 / 2.0;
    for (std::size_t i = 0; i < x.size(); ++i) ref += w[i] * x[i] * bump(x[i]) * bump(x[i]);
    CHECK(normal_ordering_constant(bump) == doctest::Approx(2.0 / oracle::pi * ref).epsilon(1e-12));
}

TEST_CASE("field kernels") {
    const auto zeta = CutoffProfile::sharp(1.0);
    std::mt19937_64 rng(7);
    for (int t = 0; t < 50; ++t) {
        const Vec3 n = random_direction(rng);
        const double r = 0.05 + 0.9 * t / 50.0;
        const Vec3 k{r * n[0], r * n[1], r * n[2]};
        const double pre = 1.0 / (2.0 * oracle::pi * std::sqrt(r));
        CHECK(kernel_prefactor(zeta, r) == doctest::Approx(pre).epsilon(1e-15));
        for (int lam : {1, 2}) {
            const Vec3 e = polarization(k, lam);
            const CVec3 d = d_kernel(zeta, k, lam);
            const CVec3 kk = k_kernel(zeta, k, lam);
            const Vec3 kxe = cross(k, e);
            cplx kd = 0.0;
            double knorm = 0.0;
            for (int i = 0; i < 3; ++i) {
                CHECK(std::abs(d[i] - pre * e[i]) < 1e-15);
                CHECK(std::abs(kk[i] - pre * cplx(0.0, kxe[i])) < 1e-15);
                kd += k[i] * d[i];
                knorm += std::norm(kk[i]);
            }
            CHECK(std::abs(kd) < 1e-15);
            CHECK(knorm == doctest::Approx(r / (4.0 * oracle::pi * oracle::pi)).epsilon(1e-13));
        }
    }
    CHECK(k_kernel(zeta, Vec3{2.0, 0.3, 0.1}, 1)[0] == cplx(0.0));
    CHECK_THROWS_AS(kernel_prefactor(zeta, 0.0), InvalidInput);
}

TEST_CASE("sigma_dot squares to |u|^2 for real u and is linear") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (int t = 0; t < 30; ++t) {
        const CVec3 u{g(rng), g(rng), g(rng)};
        const Spinor s{cplx(g(rng), g(rng)), cplx(g(rng), g(rng))};
        const Spinor once = sigma_dot(u, s);
        const Spinor twice = sigma_dot(u, once);
        const double u2 = std::norm(u[0]) + std::norm(u[1]) + std::norm(u[2]);
        for (int i = 0; i < 2; ++i) CHECK(std::abs(twice[i] - u2 * s[i]) < 1e-12 * (1.0 + std::abs(s[i]) * u2));
        const CVec3 iu{u[0] * cplx(0, 1), u[1] * cplx(0, 1), u[2] * cplx(0, 1)};
        const Spinor lin = sigma_dot(iu, s);
        for (int i = 0; i < 2; ++i) CHECK(std::abs(lin[i] - cplx(0, 1) * once[i]) < 1e-13);
    }
}
