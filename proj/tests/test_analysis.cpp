#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "thinfb/analysis.hpp"
#include "thinfb/solver.hpp"

using namespace thinfb;

namespace {

ProfileSpec axis_profile(double alpha, int m, double shift = 0.0) {
    std::vector<double> xi(std::size_t(m), 0.0);
    xi[0] = 1.0;
    return halfplane_profile(alpha, {1.0}, shift, xi);
}

} // namespace

TEST_CASE("extract_fb finds the half-plane transition") {
    Grid g = make_grid(1, 1, 1.0 / 128, 1.0);
    PlateMask mask = mask_where(g, [](const Vec& x) { return x[0] > 0.0; });
    FreeBoundary fb = extract_fb(mask);
    REQUIRE(fb.points.size() == 1);
    CHECK(std::abs(fb.points[0].x[0]) <= 0.5 * g.h + 1e-12);
    CHECK(fb.points[0].normal[0] == 1.0);

    PlateMask shifted = mask_where(g, [](const Vec& x) { return x[0] > 0.25; });
    FreeBoundary fb2 = extract_fb(shifted);
    REQUIRE(fb2.points.size() == 1);
    CHECK(std::abs(fb2.points[0].x[0] - 0.25) <= 0.5 * g.h + 1e-12);

    CHECK_THROWS_AS(extract_fb(full_mask(g)), std::invalid_argument);
    CHECK_THROWS_AS(extract_fb(empty_mask(g)), std::invalid_argument);
}

TEST_CASE("extract_fb normals point into the positive phase for n=2") {
    Grid g = make_grid(2, 1, 1.0 / 16, 1.0);
    PlateMask mask = mask_where(g, [](const Vec& x) { return x[0] > 0.0; });
    FreeBoundary fb = extract_fb(mask);
    CHECK(fb.points.size() > 10);
    for (const auto& q : fb.points) {
        CHECK(std::abs(q.x[0]) <= 0.5 * g.h + 1e-12);
        CHECK(q.normal[0] > 0.95);
        CHECK(std::abs(q.normal[1]) < 0.3);
    }
}

TEST_CASE("density ratio of half-plane and full masks") {
    Grid g = make_grid(1, 1, 1.0 / 128, 1.0);
    PlateMask half = mask_where(g, [](const Vec& x) { return x[0] > 0.0; });
    FreeBoundary fb = extract_fb(half);
    double r = 0.25;
    CHECK(std::abs(density_ratio(half, fb.points[0].x, r) - 0.5) <= 2 * g.h / r);
    PlateMask full = full_mask(g);
    CHECK(density_ratio(full, make_vec(0.3, 0.0), 0.25) == Catch::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(density_ratio(half, make_vec(0.9, 0.0), 0.25), std::invalid_argument);
}

TEST_CASE("density of a 270 degree sector is three quarters") {
    Grid g = make_grid(2, 1, 1.0 / 32, 1.0);
    PlateMask sector = mask_where(g, [](const Vec& x) {
        return !(x[0] < 0.0 && x[1] < 0.0); // remove one quadrant
    });
    // Axis rows carry their dual half-cells, nudging the discrete value up.
    double d = density_ratio(sector, make_vec(0.0, 0.0, 0.0), 0.25);
    CHECK(d == Catch::Approx(0.75).margin(0.05));
    CHECK(d >= 0.55);
}

TEST_CASE("holder and nondeg fits on the exact profile") {
    Grid g = make_grid(1, 2, 1.0 / 128, 1.0);
    VectorField f = sample_profile(g, axis_profile(1.0, 2));
    std::vector<double> radii = {8 * g.h, 16 * g.h, 32 * g.h, 64 * g.h};
    GrowthFit up = holder_fit(f, make_vec(0.0, 0.0), radii);
    GrowthFit low = nondeg_fit(f, make_vec(0.0, 0.0), radii);
    CHECK(up.slope == Catch::Approx(0.5).margin(0.02));
    CHECK(low.slope == Catch::Approx(0.5).margin(0.02));
    CHECK(up.constant == Catch::Approx(1.0).margin(0.05));
    CHECK(low.constant == Catch::Approx(1.0).margin(0.05));

    VectorField f2 = sample_profile(g, axis_profile(2.0, 2));
    GrowthFit up2 = holder_fit(f2, make_vec(0.0, 0.0), radii);
    CHECK(up2.slope == Catch::Approx(up.slope).margin(1e-9));
    CHECK(up2.constant == Catch::Approx(2.0 * up.constant).epsilon(1e-9));

    CHECK_THROWS_AS(holder_fit(f, make_vec(0.0, 0.0), {0.1, 0.2}), std::invalid_argument);
}

TEST_CASE("flatness of the exact profile is at the interpolation floor") {
    Grid g = make_grid(1, 2, 1.0 / 128, 1.0);
    VectorField f = sample_profile(g, axis_profile(1.0, 2));
    PlateMask mask = threshold_mask(f, default_mask_threshold(g));
    Flatness fl = flatness(f, mask, make_ball(make_vec(0.0, 0.0), 0.5), {1.0, 0.0}, {1.0});
    CHECK(fl.eps <= 0.05);
    Flatness best = best_flatness(f, mask, make_ball(make_vec(0.0, 0.0), 0.5));
    CHECK(best.eps <= fl.eps + 1e-12);
    CHECK(best.nu[0] == 1.0);
    CHECK(std::abs(best.f[0]) > 0.999);
}

TEST_CASE("flatness of a translate matches the closed-form defect") {
    Grid g = make_grid(1, 1, 1.0 / 128, 2.0);
    double tau = 0.1;
    VectorField f = sample_profile(g, axis_profile(1.0, 1, tau)); // vanishes for x < tau
    PlateMask mask = threshold_mask(f, default_mask_threshold(g));
    // Analytic oracle: sup over the plate of |U(t - tau) - U(t)| on the unit
    // ball, attained near the shifted tip.
    double oracle = 0.0;
    for (double t = -1.0; t <= 1.0; t += 1e-4)
        oracle = std::max(oracle, std::abs(eval_U(t - tau, 0.0) - eval_U(t, 0.0)));
    Flatness fl = flatness(f, mask, make_ball(make_vec(0.0, 0.0), 1.0), {1.0}, {1.0});
    CHECK(fl.eps == Catch::Approx(oracle).margin(0.05));
    CHECK(fl.mask_term <= 1e-12); // trace vanishes past the origin already

    // The opposite translate leaves positivity on the wrong side and the
    // one-sided term sees it.
    VectorField fm = sample_profile(g, axis_profile(1.0, 1, -tau));
    PlateMask maskm = threshold_mask(fm, default_mask_threshold(g));
    Flatness flm = flatness(fm, maskm, make_ball(make_vec(0.0, 0.0), 1.0), {1.0}, {1.0});
    CHECK(flm.mask_term == Catch::Approx(tau).margin(2 * g.h));
}

TEST_CASE("a far positivity island is seen by the one-sided term") {
    Grid g = make_grid(1, 1, 1.0 / 64, 1.0);
    VectorField f = sample_profile(g, axis_profile(1.0, 1));
    PlateMask mask = threshold_mask(f, default_mask_threshold(g));
    // Inject an island around x = -0.5.
    for (std::int64_t p = 0; p < g.plate_count(); ++p) {
        double x = g.plate_point(p)[0];
        if (x > -0.52 && x < -0.48) mask.v[std::size_t(p)] = 1;
    }
    Flatness fl = flatness(f, mask, make_ball(make_vec(0.0, 0.0), 0.75), {1.0}, {1.0});
    CHECK(fl.mask_term >= 0.5 / 0.75 - 0.05);
}

TEST_CASE("domain variation recovers constant and variable translations") {
    Grid g = make_grid(1, 1, 1.0 / 128, 1.0);
    double eps = 0.1;
    std::vector<std::int64_t> region;
    for (std::int64_t idx = 0; idx < g.node_count(); ++idx) {
        Vec X = g.point(idx);
        if (dist2(X, make_vec(0.0, 0.0), 2) <= 0.25 * 0.25) region.push_back(idx);
    }

    // g = U: w vanishes identically.
    VectorField u = sample_profile(g, axis_profile(1.0, 1));
    DomainVariation dv0 = domain_variation(g, u.comp[0], eps, region);
    CHECK(dv0.monotone);
    for (double w : dv0.w) CHECK(std::abs(w) <= 1e-6);

    // g = U(. + tau e_n): w == tau.
    double tau = 0.05;
    VectorField ut = sample_profile(g, axis_profile(1.0, 1, -tau));
    DomainVariation dv1 = domain_variation(g, ut.comp[0], eps, region);
    for (double w : dv1.w) CHECK(w == Catch::Approx(tau).margin(2 * std::sqrt(g.h)));

    // Smooth variable translation: sup |w - tau(x)| <= 2 sqrt(h) and the trap
    // bounds hold at every node.
    auto tau_fn = [&](double x) { return 0.05 * std::cos(M_PI * x); };
    VectorField uv = sample_field(g, [&](const Vec& X, std::vector<double>& out) {
        out.assign(1, eval_U(X[0] + tau_fn(X[0]), X[1]));
    });
    DomainVariation dv2 = domain_variation(g, uv.comp[0], eps, region);
    double a = 1e9, b = -1e9, sup_err = 0.0;
    for (std::size_t k = 0; k < dv2.nodes.size(); ++k) {
        double x = g.point(dv2.nodes[k])[0];
        a = std::min(a, tau_fn(x));
        b = std::max(b, tau_fn(x));
        sup_err = std::max(sup_err, std::abs(dv2.w[k] - tau_fn(x)));
    }
    CHECK(sup_err <= 2 * std::sqrt(g.h));
    for (double w : dv2.w) {
        CHECK(w >= a - 2 * std::sqrt(g.h));
        CHECK(w <= b + 2 * std::sqrt(g.h));
        CHECK(std::abs(w) <= eps + 1e-12);
    }

    // Trapping violation is rejected.
    VectorField big = sample_profile(g, axis_profile(2.0, 1));
    CHECK_THROWS_AS(domain_variation(g, big.comp[0], 0.01, region), std::domain_error);
}

TEST_CASE("trace slope estimates the amplitude") {
    Grid g = make_grid(1, 2, 1.0 / 128, 1.0);
    VectorField f = sample_profile(g, axis_profile(1.0, 2));
    CHECK(slope(f, make_vec(0.0, 0.0), {1.0}) == Catch::Approx(1.0).margin(0.05));
    VectorField f7 = sample_profile(g, axis_profile(0.7, 2));
    CHECK(slope(f7, make_vec(0.0, 0.0), {1.0}) == Catch::Approx(0.7).margin(0.05));

    // Exact linearity of the fit.
    VectorField f3 = f;
    for (auto& c : f3.comp)
        for (auto& v : c) v *= 3.0;
    CHECK(slope(f3, make_vec(0.0, 0.0), {1.0}) ==
          Catch::Approx(3.0 * slope(f, make_vec(0.0, 0.0), {1.0})).epsilon(1e-12));
}

TEST_CASE("harnack traps collapse on exact profiles") {
    Grid g = make_grid(1, 2, 1.0 / 128, 1.0);
    VectorField f = sample_profile(g, axis_profile(1.0, 2));
    HarnackDecay hd = harnack_decay(f, make_vec(0.0, 0.0), {1.0, 0.0}, {1.0},
                                    {0.5, 0.25, 0.125});
    CHECK(hd.failure_scale == -1);
    for (double w : hd.width) CHECK(w <= 2 * g.h);
}

TEST_CASE("iof passes trivially on the exact profile and guards its entry") {
    Grid g = make_grid(1, 2, 1.0 / 128, 1.0);
    VectorField f = sample_profile(g, axis_profile(1.0, 2));
    PlateMask mask = threshold_mask(f, default_mask_threshold(g));
    IofResult res = iof_check(f, mask, make_vec(0.0, 0.0), 0.125, 0.5);
    CHECK(res.pass);
    CHECK(res.comp_ok);

    VectorField far = sample_profile(g, axis_profile(1.0, 2, 0.3));
    PlateMask maskf = threshold_mask(far, default_mask_threshold(g));
    CHECK_THROWS_AS(iof_check(far, maskf, make_vec(0.0, 0.0), 0.125, 0.5),
                    std::invalid_argument);
}

TEST_CASE("classification: regular, singular, unresolved") {
    Grid g = make_grid(1, 2, 1.0 / 128, 1.0);
    VectorField f = sample_profile(g, axis_profile(1.0, 2));
    PlateMask mask = threshold_mask(f, default_mask_threshold(g));
    FreeBoundary fb = extract_fb(mask);
    CHECK(classify(f, mask, fb.points[0].x, 1.0) == PointLabel::regular);

    // 270 degree sector in the plane: density 3/4 at both radii.
    Grid g2 = make_grid(2, 1, 1.0 / 32, 1.0);
    VectorField f2 = sample_field(g2, [](const Vec& X, std::vector<double>& out) {
        out.assign(1, eval_U(std::hypot(X[0], X[1]) * 0.5, X[2]));
    });
    PlateMask sector = mask_where(g2, [](const Vec& x) {
        return !(x[0] < 0.0 && x[1] < 0.0);
    });
    CHECK(classify(f2, sector, make_vec(0.0, 0.0, 0.0), 1.0) == PointLabel::singular);

    // Regular-band density with a field far from the profile family.
    VectorField twobump = sample_field(g, [](const Vec& X, std::vector<double>& out) {
        out.assign(2, 0.0);
        out[0] = eval_U(X[0], X[1]);
        out[1] = 0.8 * eval_U(-X[0] - 0.4, X[1]);
    });
    PlateMask halfm = mask_where(g, [](const Vec& x) { return x[0] > 0.0 || x[0] < -0.4; });
    FreeBoundary fbu = extract_fb(halfm);
    CHECK(classify(twobump, halfm, fbu.points[0].x, 1.0) == PointLabel::unresolved);
}

TEST_CASE("slope median over the free boundary estimates the solver constant") {
    Grid g = make_grid(1, 2, 1.0 / 64, 1.0);
    SolverConfig cfg;
    SolveState st = solve_profile(g, axis_profile(0.79, 2), cfg);
    FreeBoundary fb = extract_fb(st.mask);
    double astar = estimate_slope_constant(st.G, fb);
    CHECK(astar > 0.6);
    CHECK(astar < 1.0);
}
