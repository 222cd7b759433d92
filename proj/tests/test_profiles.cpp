#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "thinfb/field.hpp"
#include "thinfb/geometry.hpp"
#include "thinfb/profiles.hpp"

using namespace thinfb;

TEST_CASE("eval_U matches the closed form") {
    CHECK(eval_U(1.0, 0.0) == Catch::Approx(1.0).margin(1e-15));
    CHECK(eval_U(-1.0, 0.0) == Catch::Approx(0.0).margin(1e-15));
    CHECK(eval_U(0.0, 1.0) == Catch::Approx(std::cos(M_PI / 4)).margin(1e-15));
    CHECK(eval_U(0.0, 0.0) == 0.0);
    // Zero on the half-hyperplane {t <= 0, s = 0} regardless of the sign of s.
    CHECK(eval_U(-0.37, 0.0) == Catch::Approx(0.0).margin(1e-15));
    CHECK(eval_U(-0.37, -0.0) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("U is 1/2-homogeneous") {
    for (double lam : {0.25, 0.5, 2.0, 7.3}) {
        for (auto [t, s] : {std::pair{0.3, 0.4}, {-0.2, 0.7}, {1.0, 0.0}, {-0.5, 0.001}}) {
            CHECK(eval_U(lam * t, lam * s) ==
                  Catch::Approx(std::sqrt(lam) * eval_U(t, s)).margin(1e-13));
        }
    }
}

TEST_CASE("U trace slope is exactly one") {
    for (double t : {0.01, 0.1, 0.5, 0.93})
        CHECK(eval_U(t, 0.0) / std::sqrt(t) == Catch::Approx(1.0).margin(1e-14));
}

TEST_CASE("grad_U_sq is 1/(4|X|)") {
    CHECK(grad_U_sq(1.0, 0.0) == Catch::Approx(0.25).margin(1e-15));
    CHECK(grad_U_sq(0.0, 0.25) == Catch::Approx(1.0).margin(1e-15));
    CHECK(grad_U_sq(0.6, -0.8) == Catch::Approx(0.25).margin(1e-15));
    CHECK_THROWS_AS(grad_U_sq(0.0, 0.0), std::domain_error);

    // Finite-difference cross-check of |∇U|^2 away from the slit.
    double eps = 1e-6;
    for (auto [t, s] : {std::pair{0.3, 0.5}, {-0.4, 0.6}, {0.8, 0.1}}) {
        double dt = (eval_U(t + eps, s) - eval_U(t - eps, s)) / (2 * eps);
        double ds = (eval_U(t, s + eps) - eval_U(t, s - eps)) / (2 * eps);
        CHECK(dt * dt + ds * ds == Catch::Approx(grad_U_sq(t, s)).epsilon(1e-6));
    }
}

TEST_CASE("discrete Laplacian of sampled U decays like the analytic bound") {
    // Unscaled 5-point stencil residual: O(h^{1/2}) beside the tip and
    // bounded by C h^2 / d^{3/2} at distance d from it.
    for (double h : {1.0 / 32, 1.0 / 64, 1.0 / 128}) {
        Grid g = make_grid(1, 1, h, 1.0);
        std::vector<double> u(std::size_t(g.node_count()));
        for (std::int64_t i = 0; i < g.node_count(); ++i) {
            Vec X = g.point(i);
            u[std::size_t(i)] = eval_U(X[0], X[1]);
        }
        auto stencil = [&](int ix, int j) {
            return u[std::size_t(g.lin(ix - 1, 0, j))] + u[std::size_t(g.lin(ix + 1, 0, j))] +
                   u[std::size_t(g.lin(ix, 0, j + 1))] + u[std::size_t(g.lin(ix, 0, j - 1))] -
                   4.0 * u[std::size_t(g.lin(ix, 0, j))];
        };
        // Probe beside the tip (distance ~ h sqrt(2)).
        CHECK(std::abs(stencil(g.N + 1, 1)) <= 3.0 * std::sqrt(h));
        // Fixed probes at macroscopic distance.
        for (double d : {0.25, 0.5}) {
            int ix = g.N + int(std::lround(d / h));
            double res = std::abs(stencil(ix, 1));
            CHECK(res <= 2.0 * h * h / std::pow(d, 1.5));
        }
    }
}

TEST_CASE("eval_profile combines direction, amplitude and shift") {
    ProfileSpec spec = halfplane_profile(1.0, {1.0}, 0.0, {1.0, 0.0});
    auto v = eval_profile(spec, make_vec(1.0, 0.0), 1);
    CHECK(v[0] == Catch::Approx(1.0).margin(1e-15));
    CHECK(v[1] == 0.0);

    ProfileSpec shifted = halfplane_profile(1.0, {1.0}, 0.25, {0.0, 1.0});
    auto z = eval_profile(shifted, make_vec(0.25, 0.0), 1);
    CHECK(z[0] == 0.0);
    CHECK(z[1] == 0.0);

    ProfileSpec doubled = halfplane_profile(2.0, {1.0}, 0.0, {1.0, 0.0});
    for (auto X : {make_vec(0.3, 0.2), make_vec(-0.4, 0.6)}) {
        auto a = eval_profile(spec, X, 1);
        auto b = eval_profile(doubled, X, 1);
        CHECK(b[0] == Catch::Approx(2.0 * a[0]).margin(1e-15));
    }
}

TEST_CASE("profile validation rejects bad parameters") {
    CHECK_THROWS_AS(validate(halfplane_profile(0.0, {1.0}, 0.0, {1.0}), 1, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(validate(halfplane_profile(1.0, {0.5}, 0.0, {1.0}), 1, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(validate(halfplane_profile(1.0, {1.0}, 0.0, {0.7, 0.3}), 1, 2),
                    std::invalid_argument);
}

TEST_CASE("strictness of comparison profiles is carried by the amplitude") {
    auto sub = comparison_profile(1.1, {1.0}, 0.0, {1.0});
    CHECK(is_strict_subsolution(sub));
    CHECK_FALSE(is_strict_supersolution(sub));

    auto super = comparison_profile(0.9, {1.0}, 0.0, {1.0});
    CHECK(is_strict_supersolution(super));
    CHECK_FALSE(is_strict_subsolution(super));

    auto neutral = comparison_profile(1.0, {1.0}, 0.0, {1.0});
    CHECK_FALSE(is_strict_subsolution(neutral));
    CHECK_FALSE(is_strict_supersolution(neutral));

    auto hp = halfplane_profile(1.0, {1.0}, 0.0, {1.0});
    CHECK_THROWS_AS(is_strict_subsolution(hp), std::invalid_argument);
}

TEST_CASE("rotated profile in the plane vanishes on its free boundary line") {
    double ang = 30.0 * M_PI / 180.0;
    ProfileSpec spec = halfplane_profile(1.0, {std::cos(ang), std::sin(ang)}, 0.0, {1.0});
    // Points on the plate with <x,nu> = 0.
    for (double t : {-0.5, 0.2, 0.8}) {
        Vec X = make_vec(-t * std::sin(ang), t * std::cos(ang), 0.0);
        auto v = eval_profile(spec, X, 2);
        CHECK(std::abs(v[0]) <= 1e-14);
    }
    // And is positive where <x,nu> > 0 on the plate.
    Vec P = make_vec(0.3 * std::cos(ang), 0.3 * std::sin(ang), 0.0);
    CHECK(eval_profile(spec, P, 2)[0] > 0.5);
}
