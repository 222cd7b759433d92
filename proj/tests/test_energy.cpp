#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "thinfb/energy.hpp"
#include "thinfb/field.hpp"
#include "thinfb/profiles.hpp"

using namespace thinfb;

namespace {

VectorField sampled_U(const Grid& g, double alpha = 1.0) {
    return sample_profile(g, halfplane_profile(alpha, {1.0}, 0.0,
                                               [&] {
                                                   std::vector<double> xi(std::size_t(g.m), 0.0);
                                                   xi[0] = 1.0;
                                                   return xi;
                                               }()));
}

} // namespace

TEST_CASE("energy of the zero field vanishes") {
    Grid g = make_grid(1, 2, 1.0 / 64, 1.0);
    VectorField f = zero_field(g);
    EnergyBreakdown e = energy(f, make_ball(make_vec(0.0, 0.0), 0.5), empty_mask(g));
    CHECK(e.dirichlet == 0.0);
    CHECK(e.plate_measure == 0.0);
    CHECK(e.total == 0.0);
    CHECK(e.boundary_l2 == 0.0);
}

TEST_CASE("energy parts of U f1 match the analytic values") {
    Grid g = make_grid(1, 2, 1.0 / 128, 1.0);
    double h = g.h, r = 0.5;
    VectorField f = sampled_U(g);
    PlateMask mask = threshold_mask(f, default_mask_threshold(g));
    EnergyBreakdown e = energy(f, make_ball(make_vec(0.0, 0.0), r), mask);

    CHECK(std::abs(e.dirichlet - M_PI * r / 2) <= 5 * h);
    CHECK(std::abs(e.plate_measure - r) <= 5 * h);
    CHECK(std::abs(e.boundary_l2 - M_PI * r * r) <= 5 * h);
    CHECK(e.total == Catch::Approx(e.dirichlet + e.plate_measure));
}

TEST_CASE("scaling the field scales the quadratic parts only") {
    Grid g = make_grid(1, 2, 1.0 / 64, 1.0);
    VectorField f = sampled_U(g);
    VectorField f2 = sampled_U(g, 2.0);
    PlateMask mask = threshold_mask(f, default_mask_threshold(g));
    Ball b = make_ball(make_vec(0.0, 0.0), 0.5);
    EnergyBreakdown e1 = energy(f, b, mask);
    EnergyBreakdown e2 = energy(f2, b, mask);
    CHECK(e2.dirichlet == Catch::Approx(4 * e1.dirichlet).epsilon(1e-12));
    CHECK(e2.boundary_l2 == Catch::Approx(4 * e1.boundary_l2).epsilon(1e-12));
    CHECK(e2.plate_measure == Catch::Approx(e1.plate_measure).epsilon(1e-12));
}

TEST_CASE("U energies converge monotonically under refinement") {
    double r = 0.5;
    double prev_d = 1e9, prev_b = 1e9;
    for (double h : {1.0 / 32, 1.0 / 64, 1.0 / 128}) {
        Grid g = make_grid(1, 1, h, 1.0);
        VectorField f = sampled_U(g);
        PlateMask mask = threshold_mask(f, default_mask_threshold(g));
        EnergyBreakdown e = energy(f, make_ball(make_vec(0.0, 0.0), r), mask);
        double derr = std::abs(e.dirichlet - M_PI * r / 2);
        double berr = std::abs(e.boundary_l2 - M_PI * r * r);
        CHECK(derr <= prev_d + 1e-12);
        // The boundary term reaches the interpolation noise floor early.
        CHECK(berr <= prev_b + 2e-5);
        prev_d = derr;
        prev_b = berr;
    }
}

TEST_CASE("Green identity on the homogeneous profile") {
    // For an exactly 1/2-homogeneous field harmonic off the plate zero set,
    // dirichlet(B_r) equals boundary_l2(∂B_r) / (2r).
    Grid g = make_grid(1, 1, 1.0 / 128, 1.0);
    VectorField f = sampled_U(g);
    PlateMask mask = threshold_mask(f, default_mask_threshold(g));
    for (double r : {0.25, 0.5}) {
        EnergyBreakdown e = energy(f, make_ball(make_vec(0.0, 0.0), r), mask);
        CHECK(std::abs(e.dirichlet - e.boundary_l2 / (2 * r)) <= 5 * g.h);
    }
}

TEST_CASE("scaling identity holds exactly at r=1 and within tolerance on U") {
    Grid g = make_grid(1, 2, 1.0 / 128, 1.0);
    VectorField f = sampled_U(g);
    PlateMask mask = threshold_mask(f, default_mask_threshold(g));

    auto [lhs1, rhs1] = scaling_check(f, mask, make_vec(0.0, 0.0), 1.0, 0.5);
    CHECK(std::abs(lhs1 - rhs1) <= 1e-9);

    for (auto [r, R] : {std::pair{0.5, 0.5}, {0.25, 0.5}}) {
        auto [lhs, rhs] = scaling_check(f, mask, make_vec(0.0, 0.0), r, R);
        double closed = M_PI * R / 2 + R; // J(U, B_R) for n = 1
        CHECK(std::abs(lhs - rhs) <= 10 * g.h);
        CHECK(std::abs(lhs - closed) <= 10 * g.h);
    }
}

TEST_CASE("scaling identity on the zero field") {
    Grid g = make_grid(1, 1, 1.0 / 32, 1.0);
    VectorField f = zero_field(g);
    auto [lhs, rhs] = scaling_check(f, empty_mask(g), make_vec(0.0, 0.0), 0.5, 0.5);
    CHECK(lhs == 0.0);
    CHECK(rhs == 0.0);
}

TEST_CASE("homogeneous extension fixes 1/2-homogeneous fields") {
    Grid g = make_grid(1, 1, 1.0 / 128, 1.0);
    VectorField f = sampled_U(g);
    PlateMask mask = threshold_mask(f, default_mask_threshold(g));
    RescaledState ext = homogeneous_extension(f, mask, 0.5);
    double worst = 0.0;
    for (std::int64_t i = 0; i < g.node_count(); ++i)
        worst = std::max(worst, std::abs(ext.field.comp[0][std::size_t(i)] -
                                         f.comp[0][std::size_t(i)]));
    CHECK(worst <= 2 * std::sqrt(g.h) * g.h + 0.02); // interpolation floor
    // Halfway to the boundary the extension is exactly sqrt(1/4) = 1/2 of the
    // trace value pulled back along the ray.
    Vec X = make_vec(0.1, 0.05);
    double rho = std::hypot(X[0], X[1]);
    double r = 4 * rho;
    RescaledState ext2 = homogeneous_extension(f, mask, r);
    Vec Y = make_vec(X[0] * r / rho, X[1] * r / rho);
    double expect = 0.5 * interpolate(g, f.comp[0], Y);
    CHECK(interpolate(g, ext2.field.comp[0], X) == Catch::Approx(expect).margin(5e-3));
}

TEST_CASE("homogeneous extension bound is an equality on U") {
    Grid g = make_grid(1, 1, 1.0 / 128, 1.0);
    VectorField f = sampled_U(g);
    PlateMask mask = threshold_mask(f, default_mask_threshold(g));
    EnergyContext ctx = make_energy_context(f, mask);
    for (double r : {0.25, 0.5}) {
        HomExtBound hb = homogeneous_extension_bound(ctx, r);
        double closed = M_PI * r / 2 + r;
        CHECK(std::abs(hb.lhs - closed) <= 10 * g.h);
        CHECK(std::abs(hb.rhs - closed) <= 10 * g.h);
    }
}
