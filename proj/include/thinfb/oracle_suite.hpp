// Built-in oracle suite behind the verify subcommand: one named check per
// example family, all at n=1, h=1/128. Shared fixtures (sampled profiles,
// bootstrap solves) are built lazily and reused across checks.
#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "thinfb/analysis.hpp"
#include "thinfb/blowup.hpp"
#include "thinfb/energy.hpp"
#include "thinfb/io.hpp"
#include "thinfb/pipeline.hpp"
#include "thinfb/solver.hpp"
#include "thinfb/weiss.hpp"

namespace thinfb {

struct CheckOutcome {
    bool pass = false;
    std::string detail;
};

struct OracleContext {
    Grid grid = make_grid(1, 2, 1.0 / 128, 1.0);
    SolverConfig solver;

    std::optional<VectorField> u_field_;
    std::optional<PlateMask> u_mask_;
    std::optional<SolveState> boot_;
    std::optional<double> a_star_;
    std::optional<SolveState> main_;

    ProfileSpec u_spec(double alpha = 1.0, double shift = 0.0) {
        return halfplane_profile(alpha, {1.0}, shift, {1.0, 0.0});
    }
    const VectorField& u_field() {
        if (!u_field_) u_field_ = sample_profile(grid, u_spec());
        return *u_field_;
    }
    const PlateMask& u_mask() {
        if (!u_mask_) u_mask_ = threshold_mask(u_field(), default_mask_threshold(grid));
        return *u_mask_;
    }
    const SolveState& bootstrap() {
        if (!boot_) boot_ = solve_profile(grid, u_spec(1.0), solver);
        return *boot_;
    }
    double a_star() {
        if (!a_star_) a_star_ = estimate_slope_constant(bootstrap().G, extract_fb(bootstrap().mask));
        return *a_star_;
    }
    const SolveState& main_solve() {
        if (!main_) main_ = solve_profile(grid, u_spec(a_star()), solver);
        return *main_;
    }
    double fb_edge(const SolveState& st) {
        FreeBoundary fb = extract_fb(st.mask);
        return fb.points.front().x[0];
    }
};

struct OracleCheck {
    std::string name;
    std::function<CheckOutcome(OracleContext&)> fn;
};

namespace oracle {

inline CheckOutcome ok(const std::string& d = "") { return {true, d}; }
inline CheckOutcome fail(const std::string& d) { return {false, d}; }

inline CheckOutcome expect(bool cond, const std::string& d) { return {cond, d}; }

template <class F>
bool throws_invalid(F&& f) {
    try {
        f();
    } catch (const std::exception&) {
        return true;
    }
    return false;
}

inline std::string num(double v) {
    std::ostringstream ss;
    ss.precision(6);
    ss << v;
    return ss.str();
}

} // namespace oracle

inline std::vector<OracleCheck> oracle_suite() {
    using oracle::expect;
    using oracle::fail;
    using oracle::num;
    using oracle::ok;
    using oracle::throws_invalid;

    std::vector<OracleCheck> checks;
    auto add = [&](std::string name, std::function<CheckOutcome(OracleContext&)> fn) {
        checks.push_back({std::move(name), std::move(fn)});
    };

    // --- geometry ---
    add("geometry.grid_counts", [](OracleContext&) {
        Grid a = make_grid(1, 2, 1.0 / 128, 1.0);
        if (a.lateral_points() != 257 || a.vertical_points() != 129)
            return fail("1d grid sized wrong");
        Grid b = make_grid(2, 2, 1.0 / 32, 1.0);
        if (b.node_count() != 65 * 65 * 33) return fail("2d grid sized wrong");
        if (!throws_invalid([] { make_grid(1, 2, 0.3, 1.0); }))
            return fail("non-integral spacing accepted");
        return ok();
    });
    add("geometry.interpolation", [](OracleContext& cx) {
        Grid g = make_grid(1, 1, 0.01, 1.0);
        std::vector<double> lin(std::size_t(g.node_count())), cst(std::size_t(g.node_count()), 3.0);
        for (std::int64_t i = 0; i < g.node_count(); ++i) lin[std::size_t(i)] = g.point(i)[0];
        if (std::abs(interpolate(g, lin, make_vec(0.005, 0.0)) - 0.005) > 1e-13)
            return fail("linear data not reproduced");
        if (std::abs(interpolate(g, cst, make_vec(0.37, -0.2)) - 3.0) > 1e-13)
            return fail("constant not reproduced");
        const VectorField& u = cx.u_field();
        double above = interpolate(cx.grid, u.comp[0], make_vec(0.0, 0.25));
        double below = interpolate(cx.grid, u.comp[0], make_vec(0.0, -0.25));
        if (above != below) return fail("even reflection broken");
        return ok();
    });
    add("geometry.ball_quadrature", [](OracleContext&) {
        Grid g = make_grid(1, 1, 1.0 / 128, 1.0);
        BallQuadrature q = ball_quadrature(g, make_ball(make_vec(0.0, 0.0), 0.5));
        double vol = 0.0, len = 0.0;
        for (auto& [i, w] : q.vol) {
            (void)i;
            vol += w;
        }
        for (auto& [X, w] : q.surf) {
            (void)X;
            len += w;
        }
        if (std::abs(vol - M_PI * 0.25) > 2.0 * g.h) return fail("disk area " + num(vol));
        if (std::abs(len - M_PI) > 2.0 * g.h) return fail("circle length " + num(len));
        return ok("area err " + num(std::abs(vol - M_PI * 0.25)));
    });

    // --- profiles ---
    add("profiles.U_values", [](OracleContext&) {
        if (std::abs(eval_U(1, 0) - 1) > 1e-14) return fail("U(1,0)");
        if (std::abs(eval_U(-1, 0)) > 1e-14) return fail("U(-1,0)");
        if (std::abs(eval_U(0, 1) - std::cos(M_PI / 4)) > 1e-14) return fail("U(0,1)");
        return ok();
    });
    add("profiles.U_homogeneity_and_slope", [](OracleContext&) {
        for (double lam : {0.25, 2.0})
            for (auto [t, s] : {std::pair{0.3, 0.4}, {-0.2, 0.7}})
                if (std::abs(eval_U(lam * t, lam * s) - std::sqrt(lam) * eval_U(t, s)) > 1e-12)
                    return fail("homogeneity");
        for (double t : {0.04, 0.25, 0.81})
            if (std::abs(eval_U(t, 0) / std::sqrt(t) - 1.0) > 1e-12) return fail("trace slope");
        return ok();
    });
    add("profiles.grad_U_sq", [](OracleContext&) {
        if (std::abs(grad_U_sq(1, 0) - 0.25) > 1e-14) return fail("|X|=1");
        if (std::abs(grad_U_sq(0.25, 0) - 1.0) > 1e-14) return fail("|X|=1/4");
        return ok();
    });
    add("profiles.eval_profile", [](OracleContext&) {
        auto s = halfplane_profile(1.0, {1.0}, 0.0, {1.0, 0.0});
        auto v = eval_profile(s, make_vec(1.0, 0.0), 1);
        if (std::abs(v[0] - 1.0) > 1e-14 || v[1] != 0.0) return fail("axis value");
        auto sh = halfplane_profile(1.0, {1.0}, 0.25, {0.0, 1.0});
        auto z = eval_profile(sh, make_vec(0.25, 0.0), 1);
        if (z[0] != 0.0 || z[1] != 0.0) return fail("free boundary value");
        auto d = halfplane_profile(2.0, {1.0}, 0.0, {1.0, 0.0});
        if (std::abs(eval_profile(d, make_vec(0.3, 0.2), 1)[0] -
                     2 * eval_profile(s, make_vec(0.3, 0.2), 1)[0]) > 1e-14)
            return fail("amplitude linearity");
        return ok();
    });
    add("profiles.comparison_strictness", [](OracleContext&) {
        auto mk = [](double a) { return comparison_profile(a, {1.0}, 0.0, {1.0, 0.0}); };
        if (!is_strict_subsolution(mk(1.1)) || is_strict_supersolution(mk(1.1)))
            return fail("alpha=1.1");
        if (!is_strict_supersolution(mk(0.9))) return fail("alpha=0.9");
        if (is_strict_subsolution(mk(1.0)) || is_strict_supersolution(mk(1.0)))
            return fail("alpha=1.0");
        return ok();
    });

    // --- energy ---
    add("energy.zero_field", [](OracleContext& cx) {
        EnergyBreakdown e = energy(zero_field(cx.grid), make_ball(make_vec(0.0, 0.0), 0.5),
                                   empty_mask(cx.grid));
        return expect(e.total == 0.0 && e.boundary_l2 == 0.0, "");
    });
    add("energy.U_parts", [](OracleContext& cx) {
        double h = cx.grid.h, r = 0.5;
        EnergyBreakdown e = energy(cx.u_field(), make_ball(make_vec(0.0, 0.0), r), cx.u_mask());
        // Reflection-doubled convention: dirichlet pi r/2, boundary pi r^2.
        std::string d = "dirichlet=" + num(e.dirichlet) + " measure=" + num(e.plate_measure) +
                        " boundary=" + num(e.boundary_l2);
        bool pass = std::abs(e.dirichlet - M_PI * r / 2) <= 5 * h &&
                    std::abs(e.plate_measure - r) <= 5 * h &&
                    std::abs(e.boundary_l2 - M_PI * r * r) <= 5 * h;
        return expect(pass, d);
    });
    add("energy.quadratic_scaling", [](OracleContext& cx) {
        VectorField f2 = sample_profile(cx.grid, cx.u_spec(2.0));
        Ball b = make_ball(make_vec(0.0, 0.0), 0.5);
        EnergyBreakdown e1 = energy(cx.u_field(), b, cx.u_mask());
        EnergyBreakdown e2 = energy(f2, b, cx.u_mask());
        bool pass = std::abs(e2.dirichlet - 4 * e1.dirichlet) < 1e-9 &&
                    std::abs(e2.boundary_l2 - 4 * e1.boundary_l2) < 1e-9 &&
                    e2.plate_measure == e1.plate_measure;
        return expect(pass, "");
    });
    add("energy.scaling_identity_U", [](OracleContext& cx) {
        auto [l1, r1] = scaling_check(cx.u_field(), cx.u_mask(), make_vec(0.0, 0.0), 1.0, 0.5);
        if (std::abs(l1 - r1) > 1e-9) return fail("identity rescaling");
        for (auto [r, R] : {std::pair{0.5, 0.5}, {0.25, 0.5}}) {
            auto [lhs, rhs] = scaling_check(cx.u_field(), cx.u_mask(), make_vec(0.0, 0.0), r, R);
            if (std::abs(lhs - rhs) > 10 * cx.grid.h)
                return fail("r=" + num(r) + " lhs=" + num(lhs) + " rhs=" + num(rhs));
            if (std::abs(lhs - (M_PI * R / 2 + R)) > 10 * cx.grid.h)
                return fail("closed form off: " + num(lhs));
        }
        auto [lz, rz] = scaling_check(zero_field(cx.grid), empty_mask(cx.grid),
                                      make_vec(0.0, 0.0), 0.5, 0.5);
        return expect(lz == 0.0 && rz == 0.0, "");
    });
    add("energy.homogeneous_extension", [](OracleContext& cx) {
        RescaledState ext = homogeneous_extension(cx.u_field(), cx.u_mask(), 0.5);
        double worst = 0.0;
        for (std::size_t k = 0; k < ext.field.comp[0].size(); ++k)
            worst = std::max(worst,
                             std::abs(ext.field.comp[0][k] - cx.u_field().comp[0][k]));
        if (worst > 0.03) return fail("not a fixed point: " + num(worst));
        EnergyContext ctx = make_energy_context(cx.u_field(), cx.u_mask());
        HomExtBound hb = homogeneous_extension_bound(ctx, 0.5);
        return expect(std::abs(hb.lhs - hb.rhs) <= 10 * cx.grid.h,
                      "lhs=" + num(hb.lhs) + " rhs=" + num(hb.rhs));
    });

    // --- solver ---
    add("solver.harmonic_replacement", [](OracleContext&) {
        Grid g = make_grid(1, 1, 1.0 / 128, 1.0);
        VectorField f = zero_field(g);
        for (std::int64_t i = 0; i < g.node_count(); ++i) {
            Vec X = g.point(i);
            f.comp[0][std::size_t(i)] = X[0] * X[0] + X[1] * X[1];
        }
        auto rep = harmonic_replacement(f, 0, make_ball(make_vec(0.0, 0.0), 0.5), 1e-9);
        double e0 = edge_bilinear(g, f.comp[0], f.comp[0]);
        double e1 = edge_bilinear(g, rep, rep);
        if (e1 >= e0) return fail("energy did not decrease");
        std::vector<double> diff(rep.size());
        for (std::size_t k = 0; k < rep.size(); ++k) diff[k] = f.comp[0][k] - rep[k];
        double cross = edge_bilinear(g, rep, diff);
        if (std::abs(cross) > 1e-5) return fail("orthogonality " + num(cross));
        VectorField c = zero_field(g);
        for (auto& v : c.comp[0]) v = 2.5;
        auto repc = harmonic_replacement(c, 0, make_ball(make_vec(0.0, 0.0), 0.5), 1e-9);
        for (double v : repc)
            if (std::abs(v - 2.5) > 1e-8) return fail("constant moved");
        return ok();
    });
    add("solver.relax_reproduces_U", [](OracleContext& cx) {
        SolveState st;
        st.G = cx.u_field();
        st.mask = mask_where(cx.grid, [](const Vec& x) { return x[0] > 0.0; });
        st.roles = node_roles(cx.grid, st.mask);
        for (std::int64_t p = 0; p < cx.grid.plate_count(); ++p)
            if (!st.mask.at(p))
                for (int i = 0; i < cx.grid.m; ++i)
                    st.G.comp[std::size_t(i)][std::size_t(cx.grid.plate_to_node(p))] = 0.0;
        relax_components(st, cx.solver);
        double worst = 0.0;
        for (std::int64_t i = 0; i < cx.grid.node_count(); ++i) {
            Vec X = cx.grid.point(i);
            worst = std::max(worst, std::abs(st.G.comp[0][std::size_t(i)] - eval_U(X[0], X[1])));
        }
        if (worst > std::sqrt(cx.grid.h)) return fail("sup error " + num(worst));
        VectorField before = st.G;
        relax_components(st, cx.solver);
        for (std::size_t k = 0; k < before.comp[0].size(); ++k)
            if (std::abs(before.comp[0][k] - st.G.comp[0][k]) > 1e-6)
                return fail("not idempotent");
        return ok("sup error " + num(worst));
    });
    add("solver.zero_data_short_circuit", [](OracleContext& cx) {
        SolveState st = solve(cx.grid, [](const Vec&, std::vector<double>& out) {
            out.assign(2, 0.0);
        }, cx.solver);
        return expect(st.mask.count_positive() == 0 && st.energy_trace.back() == 0.0, "");
    });
    add("solver.isolated_flip_measure_only", [](OracleContext& cx) {
        SolveState st;
        st.G = zero_field(cx.grid);
        st.mask = empty_mask(cx.grid);
        st.mask.v[std::size_t(cx.grid.plate_lin(cx.grid.N + 5, 0))] = 1;
        st.roles = node_roles(cx.grid, st.mask);
        double before = objective(st);
        int flips = flip_pass(st, cx.solver);
        double after = objective(st);
        bool pass = flips == 1 && std::abs((after - before) + cx.grid.h) < 1e-12;
        return expect(pass, "dJ=" + num(after - before));
    });
    add("solver.halfplane_near_stability", [](OracleContext& cx) {
        SolveState st;
        st.G = sample_profile(cx.grid, cx.u_spec(cx.a_star()));
        st.mask = mask_where(cx.grid, [](const Vec& x) { return x[0] > 0.0; });
        st.roles = node_roles(cx.grid, st.mask);
        for (std::int64_t p = 0; p < cx.grid.plate_count(); ++p)
            if (!st.mask.at(p))
                for (int i = 0; i < cx.grid.m; ++i)
                    st.G.comp[std::size_t(i)][std::size_t(cx.grid.plate_to_node(p))] = 0.0;
        relax_components(st, cx.solver);
        int flips = flip_pass(st, cx.solver);
        return expect(flips <= 3, std::to_string(flips) + " boundary flips");
    });
    add("solver.solve_astar_data", [](OracleContext& cx) {
        const SolveState& st = cx.main_solve();
        if (st.budget_exhausted) return fail("budget exhausted");
        double edge = cx.fb_edge(st);
        if (std::abs(edge) > 3 * cx.grid.h) return fail("free boundary at " + num(edge));
        for (std::size_t k = 1; k < st.energy_trace.size(); ++k)
            if (st.energy_trace[k] > st.energy_trace[k - 1] + 1e-10)
                return fail("energy trace increased");
        return ok("edge " + num(edge) + ", A*=" + num(cx.a_star()));
    });
    add("solver.subharmonic_norm", [](OracleContext& cx) {
        const SolveState& st = cx.main_solve();
        const Grid& g = cx.grid;
        std::vector<double> norm(std::size_t(g.node_count()));
        for (std::int64_t i = 0; i < g.node_count(); ++i)
            norm[std::size_t(i)] = st.G.norm_at_node(i);
        double worst = 0.0;
        for (std::int64_t i = 0; i < g.node_count(); ++i) {
            if (st.roles[std::size_t(i)] != NodeRole::Interior &&
                st.roles[std::size_t(i)] != NodeRole::PlateFree)
                continue;
            int ix, iy, j;
            g.decode(i, ix, iy, j);
            double acc = norm[std::size_t(g.lin(ix - 1, iy, j))] +
                         norm[std::size_t(g.lin(ix + 1, iy, j))];
            acc += (j == 0) ? 2.0 * norm[std::size_t(g.lin(ix, iy, 1))]
                            : norm[std::size_t(g.lin(ix, iy, j - 1))] +
                                  norm[std::size_t(g.lin(ix, iy, j + 1))];
            worst = std::min(worst, acc - 4.0 * norm[std::size_t(i)]);
        }
        return expect(worst >= -10 * cx.solver.relax_tol, "min residual " + num(worst));
    });

    // --- weiss ---
    add("weiss.U_constant_one", [](OracleContext& cx) {
        EnergyContext ctx = make_energy_context(cx.u_field(), cx.u_mask());
        for (double r : {0.125, 0.25, 0.5}) {
            double w = weiss_value(ctx, make_vec(0.0, 0.0), r);
            if (std::abs(w - 1.0) > 5 * cx.grid.h) return fail("W(" + num(r) + ")=" + num(w));
        }
        return ok();
    });
    add("weiss.amplitude_degeneracy", [](OracleContext& cx) {
        VectorField f2 = sample_profile(cx.grid, cx.u_spec(2.0));
        double w = weiss_value(f2, cx.u_mask(), make_vec(0.0, 0.0), 0.25);
        return expect(std::abs(w - 1.0) <= 5 * cx.grid.h, "W=" + num(w));
    });
    add("weiss.zero_state", [](OracleContext& cx) {
        double w = weiss_value(zero_field(cx.grid), empty_mask(cx.grid), make_vec(0.0, 0.0),
                               0.25);
        return expect(w == 0.0, "");
    });
    add("weiss.series_guards", [](OracleContext& cx) {
        EnergyContext ctx = make_energy_context(cx.u_field(), cx.u_mask());
        bool a = throws_invalid([&] { weiss_series(ctx, make_vec(0.0, 0.0), 0.25, 0.25, 2); });
        bool b = throws_invalid([&] { weiss_value(ctx, make_vec(0.0, 0.0), 2 * cx.grid.h); });
        return expect(a && b, "");
    });
    add("weiss.deriv_lowerbound", [](OracleContext& cx) {
        EnergyContext ctx = make_energy_context(cx.u_field(), cx.u_mask());
        double lb0 = deriv_lowerbound(ctx, make_vec(0.0, 0.0), 0.25);
        if (lb0 < 0.0) return fail("negative integrand");
        if (lb0 > 10 * cx.grid.h) return fail("homogeneous case: " + num(lb0));
        VectorField ft = sample_profile(cx.grid, cx.u_spec(1.0, 0.1));
        PlateMask mt = threshold_mask(ft, default_mask_threshold(cx.grid));
        EnergyContext ctxt = make_energy_context(ft, mt);
        double lbt = deriv_lowerbound(ctxt, make_vec(0.0, 0.0), 0.25);
        return expect(lbt > 0.01, "translate lb=" + num(lbt));
    });
    add("weiss.minimizer_monotone", [](OracleContext& cx) {
        const SolveState& st = cx.main_solve();
        FreeBoundary fb = extract_fb(st.mask);
        EnergyContext ctx = make_energy_context(st.G, st.mask);
        WeissSeries s = weiss_series(ctx, fb.points.front().x, 8 * cx.grid.h, 0.25, 10);
        return expect(s.violations == 0 && s.lb_violations == 0,
                      std::to_string(s.violations) + " violations");
    });

    // --- blowup ---
    add("blowup.rescale_fixed_point", [](OracleContext& cx) {
        for (double alpha : {1.0, 0.7}) {
            VectorField f = sample_profile(cx.grid, cx.u_spec(alpha));
            VectorField resc = rescale(f, make_vec(0.0, 0.0), 0.25, 1.0);
            VectorField exact = sample_profile(resc.grid, cx.u_spec(alpha));
            double worst = 0.0;
            for (std::size_t k = 0; k < resc.comp[0].size(); ++k)
                worst = std::max(worst, std::abs(resc.comp[0][k] - exact.comp[0][k]));
            if (worst > std::sqrt(cx.grid.h)) return fail("amplitude " + num(alpha));
        }
        return ok();
    });
    add("blowup.fit_family_member", [](OracleContext& cx) {
        VectorField f = sample_profile(cx.grid,
                                       halfplane_profile(0.7, {1.0}, 0.0, {0.0, 1.0}));
        ProfileFit fit = fit_profile(f, 1.0);
        bool pass = std::abs(fit.xi[1]) > 0.999 && fit.nu[0] == 1.0 &&
                    std::abs(fit.alpha - 0.7) < 0.01 && fit.dist_inf < 0.02;
        return expect(pass, "alpha=" + num(fit.alpha) + " residual=" + num(fit.dist_inf));
    });
    add("blowup.fit_rejects_two_components", [](OracleContext& cx) {
        VectorField f = sample_field(cx.grid, [](const Vec& X, std::vector<double>& out) {
            out.assign(2, 0.0);
            out[0] = eval_U(X[0] - 0.5, X[1]) + eval_U(-X[0] - 0.5, X[1]);
        });
        ProfileFit fit = fit_profile(f, 1.0);
        return expect(fit.dist_inf > 0.2, "residual=" + num(fit.dist_inf));
    });
    add("blowup.series_on_minimizer", [](OracleContext& cx) {
        const SolveState& st = cx.main_solve();
        FreeBoundary fb = extract_fb(st.mask);
        BlowupSeries s = blowup_series(st.G, st.mask, fb.points.front().x,
                                       {0.25, 0.125, 0.0625});
        bool pass = s.fits.back().dist_inf <= 0.1 * cx.a_star();
        return expect(pass, "final residual " + num(s.fits.back().dist_inf) + ", alpha " +
                                num(s.fits.back().alpha));
    });
    add("blowup.interior_point_rejected", [](OracleContext& cx) {
        bool threw = throws_invalid([&] {
            blowup_series(cx.u_field(), cx.u_mask(), make_vec(0.5, 0.0), {0.25, 0.125});
        });
        return expect(threw, "");
    });

    // --- analysis ---
    add("analysis.extract_fb", [](OracleContext& cx) {
        PlateMask half = mask_where(cx.grid, [](const Vec& x) { return x[0] > 0.0; });
        FreeBoundary fb = extract_fb(half);
        if (fb.points.size() != 1) return fail("point count");
        if (std::abs(fb.points[0].x[0]) > 0.5 * cx.grid.h + 1e-12) return fail("location");
        if (fb.points[0].normal[0] != 1.0) return fail("normal sign");
        PlateMask sh = mask_where(cx.grid, [](const Vec& x) { return x[0] > 0.25; });
        if (std::abs(extract_fb(sh).points[0].x[0] - 0.25) > 0.5 * cx.grid.h + 1e-12)
            return fail("translated location");
        if (!throws_invalid([&] { extract_fb(full_mask(cx.grid)); }))
            return fail("full mask accepted");
        return ok();
    });
    add("analysis.density_ratio", [](OracleContext& cx) {
        PlateMask half = mask_where(cx.grid, [](const Vec& x) { return x[0] > 0.0; });
        FreeBoundary fb = extract_fb(half);
        double r = 0.25;
        double d = density_ratio(half, fb.points[0].x, r);
        if (std::abs(d - 0.5) > 2 * cx.grid.h / r) return fail("half-plane " + num(d));
        if (std::abs(density_ratio(full_mask(cx.grid), make_vec(0.3, 0.0), r) - 1.0) > 1e-12)
            return fail("full mask");
        return ok();
    });
    add("analysis.growth_fits", [](OracleContext& cx) {
        std::vector<double> radii = {8 * cx.grid.h, 16 * cx.grid.h, 32 * cx.grid.h,
                                     64 * cx.grid.h};
        GrowthFit up = holder_fit(cx.u_field(), make_vec(0.0, 0.0), radii);
        GrowthFit low = nondeg_fit(cx.u_field(), make_vec(0.0, 0.0), radii);
        bool pass = std::abs(up.slope - 0.5) <= 0.02 && std::abs(low.slope - 0.5) <= 0.02 &&
                    std::abs(up.constant - 1.0) <= 0.05 && std::abs(low.constant - 1.0) <= 0.05;
        if (!pass) return fail("slope " + num(up.slope) + " C1 " + num(up.constant));
        VectorField f2 = sample_profile(cx.grid, cx.u_spec(2.0));
        GrowthFit up2 = holder_fit(f2, make_vec(0.0, 0.0), radii);
        return expect(std::abs(up2.constant - 2 * up.constant) < 1e-9, "");
    });
    add("analysis.flatness", [](OracleContext& cx) {
        Flatness fl = flatness(cx.u_field(), cx.u_mask(), make_ball(make_vec(0.0, 0.0), 0.5),
                               {1.0, 0.0}, {1.0});
        if (fl.eps > 0.05) return fail("exact profile eps=" + num(fl.eps));
        Flatness best = best_flatness(cx.u_field(), cx.u_mask(),
                                      make_ball(make_vec(0.0, 0.0), 0.5));
        if (best.eps > fl.eps + 1e-12) return fail("best worse than fixed directions");
        return ok("eps=" + num(fl.eps));
    });
    add("analysis.domain_variation", [](OracleContext& cx) {
        const Grid& g = cx.grid;
        double eps = 0.1, tau = 0.05;
        std::vector<std::int64_t> region;
        for (std::int64_t idx = 0; idx < g.node_count(); ++idx)
            if (dist2(g.point(idx), make_vec(0.0, 0.0), 2) <= 0.0625) region.push_back(idx);
        DomainVariation dv0 = domain_variation(g, cx.u_field().comp[0], eps, region);
        for (double w : dv0.w)
            if (std::abs(w) > 1e-6) return fail("U gives w=" + num(w));
        VectorField ut = sample_profile(g, cx.u_spec(1.0, -tau));
        DomainVariation dv1 = domain_variation(g, ut.comp[0], eps, region);
        for (double w : dv1.w)
            if (std::abs(w - tau) > 2 * std::sqrt(g.h)) return fail("translate w=" + num(w));
        VectorField big = sample_profile(g, cx.u_spec(2.0));
        bool threw = throws_invalid([&] { domain_variation(g, big.comp[0], 0.01, region); });
        return expect(threw, "");
    });
    add("analysis.slope", [](OracleContext& cx) {
        double s1 = slope(cx.u_field(), make_vec(0.0, 0.0), {1.0});
        if (std::abs(s1 - 1.0) > 0.05) return fail("U slope " + num(s1));
        VectorField f7 = sample_profile(cx.grid, cx.u_spec(0.7));
        double s7 = slope(f7, make_vec(0.0, 0.0), {1.0});
        return expect(std::abs(s7 - 0.7) <= 0.05, "0.7U slope " + num(s7));
    });
    add("analysis.harnack_exact_profile", [](OracleContext& cx) {
        HarnackDecay hd = harnack_decay(cx.u_field(), make_vec(0.0, 0.0), {1.0, 0.0}, {1.0},
                                        {0.5, 0.25, 0.125});
        if (hd.failure_scale != -1) return fail("trapping failed");
        for (double w : hd.width)
            if (w > 2 * cx.grid.h) return fail("width " + num(w));
        return ok();
    });
    add("analysis.iof_exact_profile", [](OracleContext& cx) {
        IofResult res = iof_check(cx.u_field(), cx.u_mask(), make_vec(0.0, 0.0), 0.125, 0.5);
        if (!res.pass || !res.comp_ok) return fail("eps " + num(res.eps_after));
        VectorField far = sample_profile(cx.grid, cx.u_spec(1.0, 0.3));
        PlateMask mf = threshold_mask(far, default_mask_threshold(cx.grid));
        bool threw = throws_invalid([&] {
            iof_check(far, mf, make_vec(0.0, 0.0), 0.125, 0.5);
        });
        return expect(threw, "");
    });
    add("analysis.classify", [](OracleContext& cx) {
        FreeBoundary fb = extract_fb(cx.u_mask());
        PointLabel l = classify(cx.u_field(), cx.u_mask(), fb.points[0].x, 1.0);
        return expect(l == PointLabel::regular, to_string(l));
    });

    // --- io / cli ---
    add("io.field_roundtrip", [](OracleContext& cx) {
        std::string buf = encode_field_file(cx.u_field(), cx.u_mask());
        LoadedField lf = decode_field_file(buf);
        bool pass = lf.field.comp == cx.u_field().comp && lf.mask.v == cx.u_mask().v &&
                    encode_field_file(lf.field, lf.mask) == buf;
        return expect(pass, "");
    });
    add("io.corrupt_rejected", [](OracleContext& cx) {
        std::string buf = encode_field_file(cx.u_field(), cx.u_mask());
        bool a = throws_invalid([&] { decode_field_file(buf.substr(0, buf.size() / 2)); });
        std::string bad = buf;
        bad[3] = 'x';
        bool b = throws_invalid([&] { decode_field_file(bad); });
        return expect(a && b, "");
    });
    add("io.deterministic_verdict", [](OracleContext& cx) {
        const SolveState& st = cx.main_solve();
        DiagnosticsConfig dc;
        dc.checks = {"weiss", "density", "regularity"};
        DiagnosticsReport r1 = run_diagnostics(st.G, st.mask, dc);
        DiagnosticsReport r2 = run_diagnostics(st.G, st.mask, dc);
        return expect(verdict_json(r1, cx.grid, dc).dump() == verdict_json(r2, cx.grid, dc).dump(),
                      "");
    });

    return checks;
}

// Runs the suite, printing one line per check. Returns the failure count.
inline int run_oracle_suite(std::ostream& out) {
    OracleContext cx;
    int failures = 0;
    auto t0 = std::chrono::steady_clock::now();
    for (const auto& check : oracle_suite()) {
        CheckOutcome res;
        try {
            res = check.fn(cx);
        } catch (const std::exception& e) {
            res = {false, std::string("exception: ") + e.what()};
        }
        if (!res.pass) ++failures;
        out << (res.pass ? "[ ok ] " : "[FAIL] ") << check.name;
        if (!res.detail.empty()) out << "  (" << res.detail << ")";
        out << "\n";
    }
    auto t1 = std::chrono::steady_clock::now();
    out << (failures == 0 ? "verify: all checks passed" : "verify: FAILURES") << " ("
        << oracle_suite().size() << " checks, "
        << std::chrono::duration<double>(t1 - t0).count() << " s)\n";
    return failures;
}

} // namespace thinfb
