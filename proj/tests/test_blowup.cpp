#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "thinfb/blowup.hpp"
#include "thinfb/solver.hpp"

using namespace thinfb;

namespace {

ProfileSpec axis_profile(double alpha, int m, int comp = 0, double shift = 0.0) {
    std::vector<double> xi(std::size_t(m), 0.0);
    xi[std::size_t(comp)] = 1.0;
    return halfplane_profile(alpha, {1.0}, shift, xi);
}

double sup_diff(const VectorField& a, const VectorField& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.comp.size(); ++i)
        for (std::size_t k = 0; k < a.comp[i].size(); ++k)
            worst = std::max(worst, std::abs(a.comp[i][k] - b.comp[i][k]));
    return worst;
}

} // namespace

TEST_CASE("rescale at r=1 is the identity resampling") {
    Grid g = make_grid(1, 2, 1.0 / 64, 2.0);
    VectorField f = sample_profile(g, axis_profile(1.3, 2));
    VectorField r = rescale(f, make_vec(0.0, 0.0), 1.0, 1.0);
    // On the common nodes the values agree exactly.
    Grid ref = r.grid;
    for (std::int64_t idx = 0; idx < ref.node_count(); ++idx) {
        Vec X = ref.point(idx);
        CHECK(std::abs(r.comp[0][std::size_t(idx)] - interpolate(g, f.comp[0], X)) <= 1e-12);
    }
}

TEST_CASE("half-plane profiles are fixed points of rescaling, amplitude preserved") {
    Grid g = make_grid(1, 2, 1.0 / 128, 1.0);
    for (double alpha : {1.0, 0.7}) {
        VectorField f = sample_profile(g, axis_profile(alpha, 2));
        for (double r : {0.5, 0.25}) {
            VectorField resc = rescale(f, make_vec(0.0, 0.0), r, 1.0);
            VectorField exact = sample_profile(resc.grid, axis_profile(alpha, 2));
            // Interpolation floor scales like alpha sqrt(h); allow twice that.
            CHECK(sup_diff(resc, exact) <= 2.0 * alpha * std::sqrt(g.h) * 0.5);
        }
    }
}

TEST_CASE("rescaling composes multiplicatively") {
    Grid g = make_grid(1, 1, 1.0 / 128, 1.0);
    VectorField f = sample_profile(g, axis_profile(1.0, 1));
    VectorField two_step = rescale(rescale(f, make_vec(0.0, 0.0), 0.5, 1.9), make_vec(0.0, 0.0),
                                   0.25, 1.0);
    VectorField one_step = rescale(f, make_vec(0.0, 0.0), 0.125, 1.0);
    CHECK(sup_diff(two_step, one_step) <= 0.05);
}

TEST_CASE("rescale refuses scales under the floor and out-of-box samples") {
    Grid g = make_grid(1, 1, 1.0 / 32, 1.0);
    VectorField f = sample_profile(g, axis_profile(1.0, 1));
    CHECK_THROWS_AS(rescale(f, make_vec(0.0, 0.0), 4 * g.h, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(rescale(f, make_vec(0.9, 0.0), 0.5, 1.0), std::invalid_argument);
}

TEST_CASE("fit_profile recovers members of the family") {
    Grid g = make_grid(1, 3, 1.0 / 128, 1.0);
    VectorField f = sample_profile(g, axis_profile(0.7, 3, 1));
    ProfileFit fit = fit_profile(f);
    CHECK(std::abs(fit.xi[1]) > 0.999);
    CHECK(fit.nu[0] == 1.0);
    CHECK(fit.alpha == Catch::Approx(0.7).margin(0.01));
    CHECK(fit.dist_inf <= 0.02);
}

TEST_CASE("fit_profile is amplitude covariant") {
    Grid g = make_grid(1, 2, 1.0 / 64, 1.0);
    VectorField f = sample_profile(g, axis_profile(0.8, 2));
    VectorField f2 = f;
    for (auto& c : f2.comp)
        for (auto& v : c) v *= 3.0;
    ProfileFit a = fit_profile(f), b = fit_profile(f2);
    CHECK(b.alpha == Catch::Approx(3.0 * a.alpha).epsilon(1e-9));
    CHECK(b.nu[0] == a.nu[0]);
    CHECK(b.xi[0] == Catch::Approx(a.xi[0]).margin(1e-12));
    CHECK(b.dist_inf == Catch::Approx(3.0 * a.dist_inf).margin(1e-10));
}

TEST_CASE("fit_profile finds a rotated direction within the sweep resolution") {
    Grid g = make_grid(2, 2, 1.0 / 32, 1.0);
    double ang = 30.0 * M_PI / 180.0;
    ProfileSpec spec = halfplane_profile(1.0, {std::cos(ang), std::sin(ang)}, 0.0, {1.0, 0.0});
    VectorField f = sample_profile(g, spec);
    ProfileFit fit = fit_profile(f);
    double got = std::atan2(fit.nu[1], fit.nu[0]);
    CHECK(std::abs(got - ang) * 180.0 / M_PI <= 1.5);
    CHECK(fit.alpha == Catch::Approx(1.0).margin(0.05));
}

TEST_CASE("fields far from the family keep a large residual") {
    Grid g = make_grid(1, 2, 1.0 / 64, 1.0);
    // Two well separated plate components.
    VectorField f = sample_field(g, [](const Vec& X, std::vector<double>& out) {
        out.assign(2, 0.0);
        out[0] = eval_U(X[0] - 0.5, X[1]) + eval_U(-X[0] - 0.5, X[1]);
    });
    ProfileFit fit = fit_profile(f);
    CHECK(fit.dist_inf > 0.2);
}

TEST_CASE("fit_profile rejects the zero field") {
    Grid g = make_grid(1, 1, 1.0 / 32, 1.0);
    VectorField f = zero_field(g);
    CHECK_THROWS_AS(fit_profile(f), std::invalid_argument);
}

TEST_CASE("blowup series on the exact profile stays at the interpolation floor") {
    Grid g = make_grid(1, 2, 1.0 / 128, 1.0);
    VectorField f = sample_profile(g, axis_profile(1.0, 2));
    PlateMask mask = threshold_mask(f, default_mask_threshold(g));
    BlowupSeries s = blowup_series(f, mask, make_vec(0.0, 0.0), {0.25, 0.125, 0.0625});
    CHECK(s.parameters_stable);
    CHECK(s.alpha_osc <= 0.05);
    for (const auto& fit : s.fits) {
        CHECK(fit.dist_inf <= 0.05);
        CHECK(std::abs(fit.alpha - 1.0) <= 0.05);
    }
}

TEST_CASE("blowup series rejects interior points") {
    Grid g = make_grid(1, 1, 1.0 / 64, 1.0);
    VectorField f = sample_profile(g, axis_profile(1.0, 1));
    PlateMask mask = threshold_mask(f, default_mask_threshold(g));
    CHECK_THROWS_AS(blowup_series(f, mask, make_vec(0.5, 0.0), {0.25, 0.125}),
                    std::invalid_argument);
}

TEST_CASE("blowup series of a computed minimizer converges to the profile family") {
    Grid g = make_grid(1, 2, 1.0 / 128, 1.0);
    SolverConfig cfg;
    SolveState st = solve_profile(g, axis_profile(0.786, 2), cfg);
    double x0 = 0.0;
    for (std::int64_t p = 0; p + 1 < g.plate_count(); ++p)
        if (!st.mask.at(p) && st.mask.at(p + 1))
            x0 = 0.5 * (g.plate_point(p)[0] + g.plate_point(p + 1)[0]);
    BlowupSeries s = blowup_series(st.G, st.mask, make_vec(x0, 0.0), {0.25, 0.125, 0.0625});
    CHECK(s.fits.back().dist_inf <= 0.1 * 0.786);
    CHECK(s.fits.back().alpha == Catch::Approx(0.786).margin(0.08));
}
