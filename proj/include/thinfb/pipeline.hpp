// Run orchestration shared by the CLI and the acceptance suite: JSON config
// parsing, the solve -> diagnose -> report pipeline, and the verdict/manifest
// files. Verdict serialization is deterministic; wall times go to the
// manifest only.
#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "thinfb/analysis.hpp"
#include "thinfb/blowup.hpp"
#include "thinfb/energy.hpp"
#include "thinfb/io.hpp"
#include "thinfb/solver.hpp"
#include "thinfb/weiss.hpp"

namespace thinfb {

using ordered_json = nlohmann::ordered_json;

struct DiagnosticsConfig {
    std::vector<std::string> checks = {"weiss",    "scaling",  "density", "regularity",
                                       "flatness", "blowup",   "harnack", "iof"};
    // Weiss series window in cells and absolute radius.
    int weiss_rmin_cells = 8;
    double weiss_rmax = 0.25;
    int weiss_count = 10;
    // Density radii run dyadically from rmin_cells*h to rmax.
    int density_rmin_cells = 8;
    double density_rmax = 0.25;
    double density_low = 0.05, density_high = 0.95;
    double regular_low = 0.45, regular_high = 0.55;
    // Growth fits.
    std::vector<int> growth_radii_cells = {8, 16, 32, 64};
    double slope_low = 0.45, slope_high = 0.55;
    // Flatness / Harnack / improvement of flatness.
    double flat_base_r = 0.5;
    double eps_bar = 0.1;
    double iof_rho = 0.125;
    double envelope_cap = 20.0;
    // Blow-up scales.
    std::vector<double> blowup_scales = {0.25, 0.125, 0.0625};
    // Scaling identity pairs (r, R).
    std::vector<std::pair<double, double>> scaling_pairs = {{0.5, 0.5}, {0.25, 0.5}};
    // Classification.
    ClassifyThresholds classify_th;
    // Fixed amplitude; 0 means estimate from the trace slopes.
    double amplitude = 0.0;
};

struct BoundaryData {
    // Sum of half-plane profiles, or a field file whose values provide the
    // Dirichlet data directly.
    std::vector<ProfileSpec> profiles;
    std::string field_file;
};

struct RunConfig {
    int n = 1, m = 2;
    double h = 1.0 / 128, extent = 1.0;
    BoundaryData data;
    SolverConfig solver;
    DiagnosticsConfig diag;
    std::string out_dir = "out";
};

inline ProfileSpec parse_profile(const ordered_json& j) {
    ProfileSpec s;
    std::string kind = j.value("kind", "halfplane");
    if (kind == "halfplane")
        s.kind = ProfileSpec::Kind::halfplane;
    else if (kind == "comparison")
        s.kind = ProfileSpec::Kind::comparison;
    else
        throw std::invalid_argument("config: unknown profile kind: " + kind);
    s.alpha = j.at("alpha").get<double>();
    s.nu = j.at("nu").get<std::vector<double>>();
    s.shift = j.value("shift", 0.0);
    s.xi = j.at("xi").get<std::vector<double>>();
    return s;
}

inline ordered_json profile_json(const ProfileSpec& s) {
    ordered_json j;
    j["kind"] = s.kind == ProfileSpec::Kind::halfplane ? "halfplane" : "comparison";
    j["alpha"] = s.alpha;
    j["nu"] = s.nu;
    j["shift"] = s.shift;
    j["xi"] = s.xi;
    return j;
}

inline RunConfig parse_config(const ordered_json& j) {
    RunConfig c;
    const auto& grid = j.at("grid");
    c.n = grid.at("n").get<int>();
    c.m = grid.at("m").get<int>();
    c.h = grid.at("h").get<double>();
    c.extent = grid.value("extent", 1.0);

    if (j.contains("boundary_data")) {
        const auto& bd = j.at("boundary_data");
        if (bd.contains("field_file")) {
            c.data.field_file = bd.at("field_file").get<std::string>();
        } else if (bd.contains("profiles")) {
            for (const auto& p : bd.at("profiles")) c.data.profiles.push_back(parse_profile(p));
        } else {
            c.data.profiles.push_back(parse_profile(bd));
        }
    }

    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        c.solver.max_outer = s.value("max_outer", c.solver.max_outer);
        c.solver.relax_tol = s.value("relax_tol", c.solver.relax_tol);
        c.solver.sweep = s.value("sweep", c.solver.sweep);
        c.solver.flip_pass_order = s.value("flip_pass_order", c.solver.flip_pass_order);
        c.solver.seed = s.value("seed", c.solver.seed);
        c.solver.patch_radius = s.value("patch_radius", c.solver.patch_radius);
        c.solver.max_sweeps = s.value("max_sweeps", c.solver.max_sweeps);
        c.solver.patch_sweeps = s.value("patch_sweeps", c.solver.patch_sweeps);
        if (c.solver.relax_tol <= 0.0)
            throw std::invalid_argument("config: relax_tol must be positive");
        if (c.solver.sweep != "rbsor")
            throw std::invalid_argument("config: unknown sweep scheme: " + c.solver.sweep);
        if (c.solver.flip_pass_order != "lex" && c.solver.flip_pass_order != "random")
            throw std::invalid_argument("config: unknown flip_pass_order");
    }

    if (j.contains("diagnostics")) {
        const auto& d = j.at("diagnostics");
        if (d.contains("checks")) c.diag.checks = d.at("checks").get<std::vector<std::string>>();
        c.diag.weiss_rmin_cells = d.value("weiss_rmin_cells", c.diag.weiss_rmin_cells);
        c.diag.weiss_rmax = d.value("weiss_rmax", c.diag.weiss_rmax);
        c.diag.weiss_count = d.value("weiss_count", c.diag.weiss_count);
        c.diag.density_rmin_cells = d.value("density_rmin_cells", c.diag.density_rmin_cells);
        c.diag.density_rmax = d.value("density_rmax", c.diag.density_rmax);
        c.diag.flat_base_r = d.value("flat_base_r", c.diag.flat_base_r);
        c.diag.eps_bar = d.value("eps_bar", c.diag.eps_bar);
        c.diag.iof_rho = d.value("iof_rho", c.diag.iof_rho);
        c.diag.envelope_cap = d.value("envelope_cap", c.diag.envelope_cap);
        if (d.contains("blowup_scales"))
            c.diag.blowup_scales = d.at("blowup_scales").get<std::vector<double>>();
        if (d.contains("growth_radii_cells"))
            c.diag.growth_radii_cells = d.at("growth_radii_cells").get<std::vector<int>>();
        c.diag.classify_th.density_band =
            d.value("density_band", c.diag.classify_th.density_band);
        c.diag.classify_th.singular_floor =
            d.value("singular_floor", c.diag.classify_th.singular_floor);
        c.diag.classify_th.fit_fraction =
            d.value("fit_fraction", c.diag.classify_th.fit_fraction);
        c.diag.amplitude = d.value("amplitude", c.diag.amplitude);
    }

    if (j.contains("output")) c.out_dir = j.at("output").value("dir", c.out_dir);
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    ordered_json j = ordered_json::parse(in);
    return parse_config(j);
}

// --- solve ------------------------------------------------------------------

struct SolveOutcome {
    SolveState state;
    std::string field_path;
    double wall_seconds = 0.0;
};

inline SolveOutcome run_solve(const RunConfig& cfg) {
    Grid grid = make_grid(cfg.n, cfg.m, cfg.h, cfg.extent);
    auto t0 = std::chrono::steady_clock::now();

    SolveOutcome out;
    if (!cfg.data.field_file.empty()) {
        LoadedField lf = read_field_file(cfg.data.field_file);
        if (lf.field.grid.n != cfg.n || lf.field.grid.m != cfg.m)
            throw std::invalid_argument("solve: field file dimensions do not match the grid");
        VectorField data = lf.field;
        out.state = solve(grid, [&](const Vec& X, std::vector<double>& vals) {
            data.eval(X, vals);
        }, cfg.solver);
    } else {
        if (cfg.data.profiles.empty())
            throw std::invalid_argument("solve: boundary_data is required");
        for (const auto& p : cfg.data.profiles) validate(p, cfg.n, cfg.m);
        const auto& profiles = cfg.data.profiles;
        out.state = solve(grid, [&](const Vec& X, std::vector<double>& vals) {
            vals.assign(std::size_t(grid.m), 0.0);
            std::vector<double> tmp;
            for (const auto& p : profiles) {
                eval_profile(p, X, grid.n, tmp);
                for (int i = 0; i < grid.m; ++i) vals[std::size_t(i)] += tmp[std::size_t(i)];
            }
        }, cfg.solver);
    }
    auto t1 = std::chrono::steady_clock::now();
    out.wall_seconds = std::chrono::duration<double>(t1 - t0).count();

    std::filesystem::create_directories(cfg.out_dir);
    out.field_path = cfg.out_dir + "/field.bin";
    write_field_file(out.field_path, out.state.G, out.state.mask);
    write_energy_trace_csv(cfg.out_dir + "/energy_trace.csv", out.state.energy_trace);
    return out;
}

// --- diagnostics ------------------------------------------------------------

struct PointRecord {
    Vec x{0, 0, 0};
    std::vector<double> normal;
    std::vector<double> density_radii;
    std::vector<double> density;
    double holder_slope = 0.0, holder_c1 = 0.0;
    double nondeg_slope = 0.0, nondeg_c = 0.0;
    double alpha_hat = 0.0;
    double flat_eps = -1.0;
    std::vector<double> flat_f, flat_nu;
    std::string label = "unresolved";
};

struct CheckVerdict {
    bool ran = false;
    bool pass = false;
    std::vector<std::string> details;
};

struct DiagnosticsReport {
    double a_star = 0.0;
    std::vector<PointRecord> points;
    std::vector<WeissSeries> weiss;
    std::vector<BlowupSeries> blowups;
    std::vector<std::size_t> blowup_point; // report index per blow-up series
    std::vector<HarnackDecay> harnack;
    std::map<std::string, CheckVerdict> criteria;
    std::string error; // nonempty when diagnostics could not run at all
};

namespace detail {

inline bool wants(const DiagnosticsConfig& d, const std::string& name) {
    return std::find(d.checks.begin(), d.checks.end(), name) != d.checks.end();
}

inline std::vector<double> dyadic_radii(double lo, double hi) {
    std::vector<double> out;
    for (double r = lo; r <= hi * (1 + 1e-12); r *= 2.0) out.push_back(r);
    return out;
}

inline VectorField scaled_copy(const VectorField& f, double factor) {
    VectorField out = f;
    for (auto& c : out.comp)
        for (auto& v : c) v *= factor;
    return out;
}

inline bool plate_ball_admissible(const Grid& g, const Vec& x0, double r) {
    for (int k = 0; k < g.n; ++k)
        if (std::abs(x0[k]) + r >= g.extent - 1e-12) return false;
    return true;
}

inline bool ambient_ball_admissible(const Grid& g, const Vec& x0, double r) {
    return ball_inside_box(g, make_ball(x0, r));
}

} // namespace detail

inline DiagnosticsReport run_diagnostics(const VectorField& G, const PlateMask& mask,
                                         const DiagnosticsConfig& cfg) {
    const Grid& g = G.grid;
    DiagnosticsReport rep;
    if (cfg.checks.empty()) return rep;

    FreeBoundary fb;
    try {
        fb = extract_fb(mask);
    } catch (const std::exception& e) {
        rep.error = e.what();
        for (const auto& c : cfg.checks) rep.criteria[c] = CheckVerdict{false, false, {e.what()}};
        return rep;
    }

    // Amplitude: configured or the median trace slope over the free boundary.
    rep.a_star = cfg.amplitude > 0.0 ? cfg.amplitude : estimate_slope_constant(G, fb);

    std::vector<double> growth_radii;
    for (int c : cfg.growth_radii_cells) growth_radii.push_back(c * g.h);
    std::vector<double> dens_radii =
        detail::dyadic_radii(cfg.density_rmin_cells * g.h, cfg.density_rmax);

    for (const auto& q : fb.points) {
        PointRecord pr;
        pr.x = q.x;
        pr.normal = q.normal;
        pr.alpha_hat = slope(G, q.x, q.normal);
        for (double r : dens_radii) {
            if (!detail::plate_ball_admissible(g, q.x, r)) break;
            pr.density_radii.push_back(r);
            pr.density.push_back(density_ratio(mask, q.x, r));
        }
        std::vector<double> adm_radii;
        for (double r : growth_radii)
            if (detail::ambient_ball_admissible(g, q.x, r)) adm_radii.push_back(r);
        if (adm_radii.size() >= 3) {
            GrowthFit up = holder_fit(G, q.x, adm_radii);
            GrowthFit low = nondeg_fit(G, q.x, adm_radii);
            pr.holder_slope = up.slope;
            pr.holder_c1 = up.constant;
            pr.nondeg_slope = low.slope;
            pr.nondeg_c = low.constant;
        }
        pr.label = to_string(classify(G, mask, q.x, rep.a_star, cfg.classify_th));
        rep.points.push_back(pr);
    }

    VectorField Gn = detail::scaled_copy(G, 1.0 / rep.a_star);

    if (detail::wants(cfg, "weiss")) {
        CheckVerdict v;
        v.ran = true;
        v.pass = true;
        for (std::size_t k = 0; k < fb.points.size(); ++k) {
            const Vec& x0 = fb.points[k].x;
            double rmin = cfg.weiss_rmin_cells * g.h;
            double rmax = cfg.weiss_rmax;
            while (rmax > rmin && !detail::ambient_ball_admissible(g, x0, rmax)) rmax *= 0.5;
            if (rmax <= rmin || !detail::ambient_ball_admissible(g, x0, rmax)) {
                v.details.push_back("point " + std::to_string(k) +
                                    ": radial window empty at this resolution");
                continue;
            }
            EnergyContext ctx = make_energy_context(G, mask);
            WeissSeries s = weiss_series(ctx, x0, rmin, rmax, cfg.weiss_count);
            rep.weiss.push_back(s);
            if (s.violations > 0 || s.lb_violations > 0) {
                v.pass = false;
                v.details.push_back("point " + std::to_string(k) + ": " +
                                    std::to_string(s.violations) + " slope and " +
                                    std::to_string(s.lb_violations) + " bound violations");
            }
        }
        rep.criteria["weiss"] = v;
    }

    if (detail::wants(cfg, "scaling")) {
        CheckVerdict v;
        v.ran = true;
        v.pass = true;
        Vec x0 = fb.points.front().x;
        for (auto [r, R] : cfg.scaling_pairs) {
            double pad = std::max(0.25, 4.0 * g.h);
            bool ok_ball = detail::ambient_ball_admissible(g, x0, R);
            bool ok_reach = true;
            for (int k = 0; k < g.n; ++k)
                if (std::abs(x0[k]) + r * std::ceil((R / r + pad) / g.h) * g.h > g.extent)
                    ok_reach = false;
            if (!ok_ball || !ok_reach) {
                v.details.push_back("pair skipped: balls leave the box");
                continue;
            }
            auto [lhs, rhs] = scaling_check(G, mask, x0, r, R);
            bool ok = std::abs(lhs - rhs) <= 10.0 * g.h;
            if (!ok) v.pass = false;
            v.details.push_back("r=" + std::to_string(r) + " R=" + std::to_string(R) +
                                " lhs=" + std::to_string(lhs) + " rhs=" + std::to_string(rhs));
        }
        rep.criteria["scaling"] = v;
    }

    if (detail::wants(cfg, "density")) {
        CheckVerdict v;
        v.ran = true;
        v.pass = true;
        for (std::size_t k = 0; k < rep.points.size(); ++k) {
            const PointRecord& pr = rep.points[k];
            for (std::size_t j = 0; j < pr.density.size(); ++j)
                if (pr.density[j] < cfg.density_low || pr.density[j] > cfg.density_high) {
                    v.pass = false;
                    v.details.push_back("point " + std::to_string(k) + " r=" +
                                        std::to_string(pr.density_radii[j]) + " density=" +
                                        std::to_string(pr.density[j]));
                }
            if (pr.label == "regular" && !pr.density.empty() &&
                (pr.density.front() < cfg.regular_low || pr.density.front() > cfg.regular_high)) {
                v.pass = false;
                v.details.push_back("regular point " + std::to_string(k) +
                                    " smallest-radius density " +
                                    std::to_string(pr.density.front()));
            }
        }
        rep.criteria["density"] = v;
    }

    if (detail::wants(cfg, "regularity")) {
        CheckVerdict v;
        v.ran = true;
        v.pass = true;
        for (std::size_t k = 0; k < rep.points.size(); ++k) {
            const PointRecord& pr = rep.points[k];
            bool ok = pr.holder_slope >= cfg.slope_low && pr.holder_slope <= cfg.slope_high &&
                      pr.nondeg_slope >= cfg.slope_low && pr.nondeg_slope <= cfg.slope_high &&
                      pr.nondeg_c > 0.0;
            if (!ok) {
                v.pass = false;
                v.details.push_back("point " + std::to_string(k) + " slopes " +
                                    std::to_string(pr.holder_slope) + "/" +
                                    std::to_string(pr.nondeg_slope) + " c=" +
                                    std::to_string(pr.nondeg_c));
            }
        }
        rep.criteria["regularity"] = v;
    }

    if (detail::wants(cfg, "flatness")) {
        CheckVerdict v;
        v.ran = true;
        v.pass = true;
        for (std::size_t k = 0; k < rep.points.size(); ++k) {
            PointRecord& pr = rep.points[k];
            double base = cfg.flat_base_r;
            while (base > 16 * g.h && !detail::ambient_ball_admissible(g, pr.x, base))
                base *= 0.5;
            if (!detail::ambient_ball_admissible(g, pr.x, base)) continue;
            Flatness fl = best_flatness(Gn, mask, make_ball(pr.x, base));
            pr.flat_eps = fl.eps;
            pr.flat_f = fl.f;
            pr.flat_nu = fl.nu;
            if (fl.eps > cfg.eps_bar) continue; // vector structure only on flat states

            // Lead positivity over B^+ within the base ball.
            bool positive = true;
            for (std::int64_t idx = 0; idx < g.node_count(); ++idx) {
                if (dist2(g.point(idx), pr.x, g.n + 1) > base * base) continue;
                int ix, iy, j;
                g.decode(idx, ix, iy, j);
                if (j == 0 && !mask.at(g.plate_lin(ix, iy))) continue;
                double lead = 0.0;
                for (int i = 0; i < g.m; ++i)
                    lead += fl.f[std::size_t(i)] * Gn.comp[std::size_t(i)][std::size_t(idx)];
                if (lead <= 0.0) {
                    positive = false;
                    break;
                }
            }

            // Envelope constant of the orthogonal components on the half ball
            // in the rescaled frame.
            RescaledState rs = rescale_state(Gn, mask, pr.x, base, 1.0);
            const Grid& ref = rs.field.grid;
            double cap = 0.0;
            double floor_u = std::sqrt(g.h) / 4.0;
            if (fl.eps > 0.0) {
                for (std::int64_t idx = 0; idx < ref.node_count(); ++idx) {
                    Vec X = ref.point(idx);
                    if (dist2(X, make_vec(0.0, 0.0, 0.0), ref.n + 1) > 0.25) continue;
                    double t = fl.eps;
                    for (int d = 0; d < ref.n; ++d) t += fl.nu[std::size_t(d)] * X[d];
                    double u = eval_U(t, X[ref.n]);
                    if (u < floor_u) continue;
                    double lead = 0.0;
                    for (int i = 0; i < ref.m; ++i)
                        lead += fl.f[std::size_t(i)] *
                                rs.field.comp[std::size_t(i)][std::size_t(idx)];
                    double orth2 = 0.0;
                    for (int i = 0; i < ref.m; ++i) {
                        double d = rs.field.comp[std::size_t(i)][std::size_t(idx)] -
                                   lead * fl.f[std::size_t(i)];
                        orth2 += d * d;
                    }
                    cap = std::max(cap, std::sqrt(orth2) / (fl.eps * u));
                }
            }
            bool ok = positive && cap <= cfg.envelope_cap;
            if (!ok) {
                v.pass = false;
                v.details.push_back("point " + std::to_string(k) +
                                    (positive ? "" : " lead component not positive") +
                                    " envelope=" + std::to_string(cap));
            } else {
                v.details.push_back("point " + std::to_string(k) + " eps=" +
                                    std::to_string(fl.eps) + " envelope=" + std::to_string(cap));
            }
        }
        rep.criteria["flatness"] = v;
    }

    if (detail::wants(cfg, "blowup")) {
        CheckVerdict v;
        v.ran = true;
        v.pass = true;
        for (std::size_t k = 0; k < rep.points.size(); ++k) {
            if (rep.points[k].label != "regular") continue;
            const Vec& x0 = rep.points[k].x;
            std::vector<double> scales;
            for (double r : cfg.blowup_scales) {
                if (r < blowup_scale_floor(g)) continue;
                bool fits = true;
                for (int d = 0; d < g.n; ++d)
                    if (std::abs(x0[d]) + r > g.extent) fits = false;
                if (r <= g.extent && fits) scales.push_back(r);
            }
            if (scales.size() < 2) continue;
            BlowupSeries s = blowup_series(G, mask, x0, scales);
            rep.blowups.push_back(s);
            rep.blowup_point.push_back(k);
            bool ok = s.dist_nonincreasing && s.fits.back().dist_inf <= 0.1 * rep.a_star;
            if (!ok) {
                v.pass = false;
                v.details.push_back("point " + std::to_string(k) + " final residual " +
                                    std::to_string(s.fits.back().dist_inf) +
                                    (s.dist_nonincreasing ? "" : " (residuals not decreasing)"));
            }
        }
        rep.criteria["blowup"] = v;
    }

    if (detail::wants(cfg, "harnack")) {
        CheckVerdict v;
        v.ran = true;
        v.pass = true;
        for (std::size_t k = 0; k < rep.points.size(); ++k) {
            const PointRecord& pr = rep.points[k];
            if (pr.label != "regular" || pr.flat_eps < 0.0 || pr.flat_eps > cfg.eps_bar)
                continue;
            std::vector<double> scales;
            for (double r : {0.5, 0.25, 0.125, 0.0625})
                if (detail::ambient_ball_admissible(g, pr.x, r)) scales.push_back(r);
            if (scales.size() < 3) continue;
            HarnackDecay hd = harnack_decay(Gn, pr.x, pr.flat_f, pr.flat_nu, scales);
            rep.harnack.push_back(hd);
            bool ok = hd.failure_scale == -1;
            v.details.push_back("point " + std::to_string(k) + " eta_hat=" +
                                std::to_string(hd.eta_hat));
            if (!ok) {
                v.pass = false;
                v.details.push_back("point " + std::to_string(k) + " trapping failed at scale " +
                                    std::to_string(hd.failure_scale));
            }
        }
        rep.criteria["harnack"] = v;
    }

    if (detail::wants(cfg, "iof")) {
        CheckVerdict v;
        v.ran = true;
        int tried = 0, passed = 0;
        for (std::size_t k = 0; k < rep.points.size(); ++k) {
            const PointRecord& pr = rep.points[k];
            if (pr.label != "regular" || pr.flat_eps < 0.0 || pr.flat_eps > cfg.eps_bar)
                continue;
            double base = cfg.flat_base_r;
            while (base > 16 * g.h && !detail::ambient_ball_admissible(g, pr.x, base))
                base *= 0.5;
            if (!detail::ambient_ball_admissible(g, pr.x, base)) continue;
            ++tried;
            IofResult res = iof_check(Gn, mask, pr.x, cfg.iof_rho, base, cfg.eps_bar);
            if (res.pass) {
                ++passed;
            } else {
                v.details.push_back("point " + std::to_string(k) + " eps_before=" +
                                    std::to_string(res.eps_before) + " eps_after=" +
                                    std::to_string(res.eps_after));
            }
        }
        v.pass = tried == 0 || passed * 10 >= tried * 9; // at least 90%
        v.details.push_back(std::to_string(passed) + "/" + std::to_string(tried) + " passed");
        rep.criteria["iof"] = v;
    }

    return rep;
}

// --- reports ----------------------------------------------------------------

inline ordered_json verdict_json(const DiagnosticsReport& rep, const Grid& g,
                                 const DiagnosticsConfig& cfg) {
    ordered_json v;
    v["a_star"] = rep.a_star;
    v["thresholds"] = {{"weiss_slope_tol", 5.0 * g.h},
                       {"weiss_bound_tol", 10.0 * g.h},
                       {"scaling_tol", 10.0 * g.h},
                       {"density_band", {cfg.density_low, cfg.density_high}},
                       {"regular_band", {cfg.regular_low, cfg.regular_high}},
                       {"slope_band", {cfg.slope_low, cfg.slope_high}},
                       {"eps_bar", cfg.eps_bar},
                       {"envelope_cap", cfg.envelope_cap},
                       {"iof_rho", cfg.iof_rho},
                       {"iof_floor", 4.0 * std::sqrt(g.h)},
                       {"fit_fraction", cfg.classify_th.fit_fraction},
                       {"singular_floor", cfg.classify_th.singular_floor}};
    if (!rep.error.empty()) v["error"] = rep.error;
    ordered_json crit;
    for (const auto& [name, cv] : rep.criteria) {
        ordered_json c;
        c["ran"] = cv.ran;
        c["pass"] = cv.pass;
        c["details"] = cv.details;
        crit[name] = c;
    }
    v["criteria"] = crit;
    return v;
}

inline ordered_json diagnostics_json(const DiagnosticsReport& rep) {
    ordered_json out;
    out["a_star"] = rep.a_star;
    ordered_json pts = ordered_json::array();
    for (const auto& p : rep.points) {
        ordered_json q;
        q["x"] = std::vector<double>(p.x.begin(), p.x.end());
        q["normal"] = p.normal;
        q["density_radii"] = p.density_radii;
        q["density"] = p.density;
        q["holder_slope"] = p.holder_slope;
        q["holder_c1"] = p.holder_c1;
        q["nondeg_slope"] = p.nondeg_slope;
        q["nondeg_c"] = p.nondeg_c;
        q["alpha_hat"] = p.alpha_hat;
        q["flat_eps"] = p.flat_eps;
        q["flat_f"] = p.flat_f;
        q["flat_nu"] = p.flat_nu;
        q["label"] = p.label;
        pts.push_back(q);
    }
    out["points"] = pts;
    return out;
}

inline void write_summary_csv(const std::string& path, const DiagnosticsReport& rep) {
    std::ofstream out(path);
    out << "x,normal,alpha_hat,holder_slope,holder_c1,nondeg_slope,nondeg_c,flat_eps,label\n";
    for (const auto& p : rep.points) {
        out << csv_number(p.x[0]);
        if (p.normal.size() > 1) out << ";" << csv_number(p.x[1]);
        out << "," << join_vec(p.normal) << "," << csv_number(p.alpha_hat) << ","
            << csv_number(p.holder_slope) << "," << csv_number(p.holder_c1) << ","
            << csv_number(p.nondeg_slope) << "," << csv_number(p.nondeg_c) << ","
            << csv_number(p.flat_eps) << "," << p.label << "\n";
    }
}

inline void write_diagnostic_files(const std::string& dir, const DiagnosticsReport& rep,
                                   const Grid& g, const DiagnosticsConfig& cfg) {
    std::filesystem::create_directories(dir);
    for (std::size_t k = 0; k < rep.weiss.size(); ++k)
        write_weiss_csv(dir + "/weiss_point" + std::to_string(k) + ".csv", rep.weiss[k]);
    for (std::size_t k = 0; k < rep.blowups.size(); ++k)
        write_blowup_csv(dir + "/blowup_point" + std::to_string(rep.blowup_point[k]) + ".csv",
                         rep.blowups[k]);
    std::ofstream dj(dir + "/diagnostics.json");
    dj << diagnostics_json(rep).dump(2) << "\n";
    write_summary_csv(dir + "/summary.csv", rep);
    std::ofstream vj(dir + "/verdict.json");
    vj << verdict_json(rep, g, cfg).dump(2) << "\n";
}

inline ordered_json manifest_json(const RunConfig& cfg, const SolveOutcome* solve_out) {
    ordered_json m;
    m["tool"] = "thinfb";
    m["version"] = "0.1.0";
    ordered_json grid;
    grid["n"] = cfg.n;
    grid["m"] = cfg.m;
    grid["h"] = cfg.h;
    grid["extent"] = cfg.extent;
    m["grid"] = grid;
    if (!cfg.data.field_file.empty()) {
        m["boundary_data"] = {{"field_file", cfg.data.field_file}};
    } else {
        ordered_json arr = ordered_json::array();
        for (const auto& p : cfg.data.profiles) arr.push_back(profile_json(p));
        m["boundary_data"] = {{"profiles", arr}};
    }
    m["solver"] = {{"max_outer", cfg.solver.max_outer},
                   {"relax_tol", cfg.solver.relax_tol},
                   {"sweep", cfg.solver.sweep},
                   {"flip_pass_order", cfg.solver.flip_pass_order},
                   {"seed", cfg.solver.seed},
                   {"patch_radius", cfg.solver.patch_radius},
                   {"patch_sweeps", cfg.solver.patch_sweeps},
                   {"max_sweeps", cfg.solver.max_sweeps}};
    m["diagnostics"] = {{"checks", cfg.diag.checks},
                        {"weiss_rmin_cells", cfg.diag.weiss_rmin_cells},
                        {"weiss_rmax", cfg.diag.weiss_rmax},
                        {"weiss_count", cfg.diag.weiss_count},
                        {"density_rmin_cells", cfg.diag.density_rmin_cells},
                        {"density_rmax", cfg.diag.density_rmax},
                        {"growth_radii_cells", cfg.diag.growth_radii_cells},
                        {"flat_base_r", cfg.diag.flat_base_r},
                        {"eps_bar", cfg.diag.eps_bar},
                        {"iof_rho", cfg.diag.iof_rho},
                        {"envelope_cap", cfg.diag.envelope_cap},
                        {"blowup_scales", cfg.diag.blowup_scales},
                        {"density_band", cfg.diag.classify_th.density_band},
                        {"singular_floor", cfg.diag.classify_th.singular_floor},
                        {"fit_fraction", cfg.diag.classify_th.fit_fraction},
                        {"amplitude", cfg.diag.amplitude},
                        {"mask_threshold_scale", "sqrt(h)/4"}};
    if (solve_out) {
        m["result"] = {{"wall_seconds", solve_out->wall_seconds},
                       {"outer_iterations", solve_out->state.outer_iters},
                       {"flips", solve_out->state.flips_total},
                       {"sweeps", solve_out->state.sweeps_total},
                       {"budget_exhausted", solve_out->state.budget_exhausted},
                       {"final_energy", solve_out->state.energy_trace.empty()
                                            ? 0.0
                                            : solve_out->state.energy_trace.back()}};
    }
    return m;
}

} // namespace thinfb
