#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "thinfb/solver.hpp"
#include "thinfb/weiss.hpp"

using namespace thinfb;

namespace {

VectorField sampled_profile(const Grid& g, double alpha, double shift = 0.0) {
    std::vector<double> xi(std::size_t(g.m), 0.0);
    xi[0] = 1.0;
    return sample_profile(g, halfplane_profile(alpha, {1.0}, shift, xi));
}

} // namespace

TEST_CASE("Weiss value of U f1 is one at every admissible radius") {
    Grid g = make_grid(1, 2, 1.0 / 128, 1.0);
    VectorField f = sampled_profile(g, 1.0);
    PlateMask mask = threshold_mask(f, default_mask_threshold(g));
    EnergyContext ctx = make_energy_context(f, mask);
    for (double r : {0.125, 0.25, 0.5})
        CHECK(std::abs(weiss_value(ctx, make_vec(0.0, 0.0), r) - 1.0) <= 5 * g.h);
}

TEST_CASE("Weiss value is independent of the amplitude") {
    Grid g = make_grid(1, 1, 1.0 / 128, 1.0);
    VectorField f1 = sampled_profile(g, 1.0);
    VectorField f2 = sampled_profile(g, 2.0);
    PlateMask mask = threshold_mask(f1, default_mask_threshold(g));
    for (double r : {0.25, 0.5}) {
        double w1 = weiss_value(f1, mask, make_vec(0.0, 0.0), r);
        double w2 = weiss_value(f2, mask, make_vec(0.0, 0.0), r);
        CHECK(std::abs(w2 - 1.0) <= 5 * g.h);
        CHECK(std::abs(w2 - w1) <= 5 * g.h);
    }
}

TEST_CASE("Weiss value of the empty state is zero") {
    Grid g = make_grid(1, 2, 1.0 / 64, 1.0);
    VectorField f = zero_field(g);
    CHECK(weiss_value(f, empty_mask(g), make_vec(0.0, 0.0), 0.25) == 0.0);
}

TEST_CASE("radius floor and degenerate series are rejected") {
    Grid g = make_grid(1, 1, 1.0 / 32, 1.0);
    VectorField f = sampled_profile(g, 1.0);
    PlateMask mask = threshold_mask(f, default_mask_threshold(g));
    EnergyContext ctx = make_energy_context(f, mask);
    CHECK_THROWS_AS(weiss_value(ctx, make_vec(0.0, 0.0), 2 * g.h), std::invalid_argument);
    CHECK_THROWS_AS(weiss_series(ctx, make_vec(0.0, 0.0), 0.25, 0.25, 2),
                    std::invalid_argument);
    CHECK_THROWS_AS(weiss_series(ctx, make_vec(0.0, 0.0), 0.125, 0.25, 1),
                    std::invalid_argument);
}

TEST_CASE("series on the exact profile is constant with no violations") {
    Grid g = make_grid(1, 1, 1.0 / 128, 1.0);
    VectorField f = sampled_profile(g, 1.0);
    PlateMask mask = threshold_mask(f, default_mask_threshold(g));
    WeissSeries s = weiss_series(f, mask, make_vec(0.0, 0.0), 0.125, 0.5, 8);
    CHECK(s.violations == 0);
    CHECK(s.lb_violations == 0);
    for (double w : s.W) CHECK(std::abs(w - 1.0) <= 5 * g.h);

    // Down at the 8h floor the mask offset costs h/(2r); only the density
    // identity scale survives there.
    EnergyContext ctx = make_energy_context(f, mask);
    WeissSeries fine = weiss_series(ctx, make_vec(0.0, 0.0), 8 * g.h, 0.25, 8);
    CHECK(fine.violations == 0);
    double w8 = weiss_value(ctx, make_vec(0.0, 0.0), 8 * g.h);
    CHECK(std::abs(w8 / unit_ball_volume(g.n) - 0.5) <= 0.05);
}

TEST_CASE("derivative lower bound vanishes on homogeneous data and not on translates") {
    Grid g = make_grid(1, 1, 1.0 / 128, 1.0);
    VectorField f = sampled_profile(g, 1.0);
    PlateMask mask = threshold_mask(f, default_mask_threshold(g));
    EnergyContext ctx = make_energy_context(f, mask);
    CHECK(deriv_lowerbound(ctx, make_vec(0.0, 0.0), 0.25) <= 10 * g.h);

    VectorField ft = sampled_profile(g, 1.0, 0.1); // free boundary at 0.1
    PlateMask maskt = threshold_mask(ft, default_mask_threshold(g));
    EnergyContext ctxt = make_energy_context(ft, maskt);
    double lb = deriv_lowerbound(ctxt, make_vec(0.0, 0.0), 0.25);
    CHECK(lb > 0.05);
}

TEST_CASE("Weiss series of a computed minimizer is monotone within tolerance") {
    Grid g = make_grid(1, 2, 1.0 / 128, 1.0);
    SolverConfig cfg;
    cfg.relax_tol = 1e-9;
    SolveState st = solve_profile(g, halfplane_profile(0.786, {1.0}, 0.0, {1.0, 0.0}), cfg);
    REQUIRE_FALSE(st.budget_exhausted);

    // Free boundary midpoint of the converged mask.
    double x0 = 0.0;
    for (std::int64_t p = 0; p + 1 < g.plate_count(); ++p)
        if (!st.mask.at(p) && st.mask.at(p + 1))
            x0 = 0.5 * (g.plate_point(p)[0] + g.plate_point(p + 1)[0]);

    EnergyContext ctx = make_energy_context(st.G, st.mask);
    WeissSeries s = weiss_series(ctx, make_vec(x0, 0.0), 8 * g.h, 0.25, 10);
    CHECK(s.violations == 0);
    CHECK(s.lb_violations == 0);

    // The density identity: W near zero approaches omega_n times the density
    // of the half-plane, which is omega_1 / 2 = 1.
    double w_small = weiss_value(ctx, make_vec(x0, 0.0), 8 * g.h);
    CHECK(std::abs(w_small / unit_ball_volume(g.n) - 0.5) <= 0.05);
}
