// Free boundary extraction and the pointwise diagnostics: densities, Hölder
// and non-degeneracy fits, flatness, ε-domain variations, trace slopes,
// Harnack trap decay, improvement of flatness, and the regular/singular
// classification. Everything here measures; nothing asserts.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "thinfb/blowup.hpp"
#include "thinfb/energy.hpp"
#include "thinfb/field.hpp"
#include "thinfb/geometry.hpp"
#include "thinfb/profiles.hpp"
#include "thinfb/quadrature.hpp"

namespace thinfb {

struct FreeBoundaryPoint {
    Vec x{0, 0, 0};                  // on the plate
    std::vector<double> normal;      // unit vector in R^n, pointing into mask=1
};

struct FreeBoundary {
    std::vector<FreeBoundaryPoint> points;
};

// Midpoints of plate edges joining nodes of opposite mask value, with normals
// from a least-squares fit of the local mask transition (sign into mask=1).
inline FreeBoundary extract_fb(const PlateMask& mask) {
    const Grid& g = mask.grid;
    std::int64_t pos = mask.count_positive();
    if (pos == 0 || pos == g.plate_count())
        throw std::invalid_argument("extract_fb: mask has no transition");
    FreeBoundary fb;

    auto normal_at = [&](double cx, double cy) {
        // Covariance of the mask against position over a 5-node window.
        int icx = std::clamp(int(std::lround((cx + g.extent) / g.h)), 0, 2 * g.N);
        int icy = g.n == 2 ? std::clamp(int(std::lround((cy + g.extent) / g.h)), 0, 2 * g.N) : 0;
        double sw = 0.0, mx = 0.0, my = 0.0, mm = 0.0;
        std::vector<std::array<double, 3>> pts;
        for (int dx = -2; dx <= 2; ++dx)
            for (int dy = (g.n == 2 ? -2 : 0); dy <= (g.n == 2 ? 2 : 0); ++dy) {
                int ix = icx + dx, iy = icy + dy;
                if (ix < 0 || ix > 2 * g.N) continue;
                if (g.n == 2 && (iy < 0 || iy > 2 * g.N)) continue;
                double v = mask.at(g.plate_lin(ix, iy)) ? 1.0 : 0.0;
                double px = g.lateral_coord(ix);
                double py = g.n == 2 ? g.lateral_coord(iy) : 0.0;
                pts.push_back({px, py, v});
                sw += 1.0;
                mx += px;
                my += py;
                mm += v;
            }
        mx /= sw;
        my /= sw;
        mm /= sw;
        double gx = 0.0, gy = 0.0;
        for (auto& q : pts) {
            gx += (q[2] - mm) * (q[0] - mx);
            gy += (q[2] - mm) * (q[1] - my);
        }
        double norm = std::hypot(gx, gy);
        std::vector<double> nu(std::size_t(g.n), 0.0);
        if (norm > 0.0) {
            nu[0] = gx / norm;
            if (g.n == 2) nu[1] = gy / norm;
        }
        return nu;
    };

    for (std::int64_t p = 0; p < g.plate_count(); ++p) {
        int ix, iy;
        g.plate_decode(p, ix, iy);
        bool v = mask.at(p);
        // Edge toward +x.
        if (ix + 1 <= 2 * g.N && mask.at(g.plate_lin(ix + 1, iy)) != v) {
            FreeBoundaryPoint q;
            double cx = g.lateral_coord(ix) + 0.5 * g.h;
            double cy = g.n == 2 ? g.lateral_coord(iy) : 0.0;
            q.x = g.n == 1 ? make_vec(cx, 0.0) : make_vec(cx, cy, 0.0);
            q.normal = g.n == 1 ? std::vector<double>{v ? -1.0 : 1.0} : normal_at(cx, cy);
            fb.points.push_back(q);
        }
        if (g.n == 2 && iy + 1 <= 2 * g.N && mask.at(g.plate_lin(ix, iy + 1)) != v) {
            FreeBoundaryPoint q;
            double cx = g.lateral_coord(ix);
            double cy = g.lateral_coord(iy) + 0.5 * g.h;
            q.x = make_vec(cx, cy, 0.0);
            q.normal = normal_at(cx, cy);
            fb.points.push_back(q);
        }
    }
    return fb;
}

// Fraction of 𝓑_r(x0) covered by the mask, normalized by omega_n r^n.
inline double density_ratio(const PlateMask& mask, const Vec& x0, double r) {
    const Grid& g = mask.grid;
    for (int k = 0; k < g.n; ++k)
        if (std::abs(x0[k]) + r >= g.extent - 1e-12)
            throw std::invalid_argument("density_ratio: plate ball leaves the box");
    double acc = 0.0;
    for (const auto& [p, w] : plate_ball_weights(g, x0, r))
        if (mask.at(p)) acc += w;
    return acc / (unit_ball_volume(g.n) * std::pow(r, g.n));
}

struct GrowthFit {
    double slope = 0.0; // log-log exponent, 1/2 for clean states
    double constant = 0.0;
    std::vector<double> radii;
    std::vector<double> sup_values;
};

namespace detail {

inline GrowthFit growth_fit(const std::vector<double>& radii, const std::vector<double>& sup,
                            bool upper_envelope) {
    if (radii.size() < 3) throw std::invalid_argument("growth fit: need at least 3 radii");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int n = 0;
    for (std::size_t k = 0; k < radii.size(); ++k) {
        if (sup[k] <= 0.0) continue;
        double x = std::log(radii[k]), y = std::log(sup[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    GrowthFit fit;
    fit.radii = radii;
    fit.sup_values = sup;
    if (n >= 2) fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    double env = upper_envelope ? 0.0 : 1e300;
    for (std::size_t k = 0; k < radii.size(); ++k) {
        double c = sup[k] / std::sqrt(radii[k]);
        env = upper_envelope ? std::max(env, c) : std::min(env, c);
    }
    fit.constant = env;
    return fit;
}

} // namespace detail

// sup_{B_r(X0)} |G| against r: slope of the log-log regression and the upper
// envelope constant of |G| <= C r^{1/2}.
inline GrowthFit holder_fit(const VectorField& f, const Vec& X0, const std::vector<double>& radii) {
    const Grid& g = f.grid;
    std::vector<double> sup(radii.size(), 0.0);
    double rmax = *std::max_element(radii.begin(), radii.end());
    for (std::int64_t idx = 0; idx < g.node_count(); ++idx) {
        Vec X = g.point(idx);
        double d2 = dist2(X, X0, g.n + 1);
        if (d2 > rmax * rmax) continue;
        double v = f.norm_at_node(idx);
        for (std::size_t k = 0; k < radii.size(); ++k)
            if (d2 <= radii[k] * radii[k]) sup[k] = std::max(sup[k], v);
    }
    return detail::growth_fit(radii, sup, true);
}

// sup_{𝓑_r(X0)} |G| against r with the lower envelope constant of the
// non-degeneracy bound sup >= c r^{1/2}.
inline GrowthFit nondeg_fit(const VectorField& f, const Vec& X0,
                            const std::vector<double>& radii) {
    const Grid& g = f.grid;
    std::vector<double> sup(radii.size(), 0.0);
    double rmax = *std::max_element(radii.begin(), radii.end());
    for (std::int64_t p = 0; p < g.plate_count(); ++p) {
        Vec X = g.plate_point(p);
        double d2 = dist2(X, X0, g.n);
        if (d2 > rmax * rmax) continue;
        double v = f.norm_at_node(g.plate_to_node(p));
        for (std::size_t k = 0; k < radii.size(); ++k)
            if (d2 <= radii[k] * radii[k]) sup[k] = std::max(sup[k], v);
    }
    return detail::growth_fit(radii, sup, false);
}

struct Flatness {
    double eps = 0.0;       // the ε of ε-flatness at unit scale
    double sup_term = 0.0;  // sup |G - U f| part
    double mask_term = 0.0; // one-sided vanishing defect
    std::vector<double> f;  // unit vector in R^m
    std::vector<double> nu; // unit vector in R^n
};

// ε-flatness of G on the given ball in the (f, nu)-directions, measured after
// rescaling the ball to unit size.
inline Flatness flatness(const VectorField& field, const PlateMask& mask, const Ball& ball,
                         const std::vector<double>& f, const std::vector<double>& nu) {
    const Grid& g = field.grid;
    if (!ball_inside_box(g, ball))
        throw std::invalid_argument("flatness: ball touches the box boundary");
    RescaledState rs = rescale_state(field, mask, ball.center, ball.radius, 1.0);
    const Grid& ref = rs.field.grid;

    double sup = 0.0;
    for (std::int64_t idx = 0; idx < ref.node_count(); ++idx) {
        Vec X = ref.point(idx);
        if (dist2(X, make_vec(0.0, 0.0, 0.0), ref.n + 1) > 1.0) continue;
        double t = 0.0;
        for (int k = 0; k < ref.n; ++k) t += nu[std::size_t(k)] * X[k];
        double u = eval_U(t, X[ref.n]);
        double d2 = 0.0;
        for (int i = 0; i < ref.m; ++i) {
            double d = rs.field.comp[std::size_t(i)][std::size_t(idx)] - u * f[std::size_t(i)];
            d2 += d * d;
        }
        sup = std::max(sup, std::sqrt(d2));
    }

    double mask_term = 0.0;
    for (std::int64_t p = 0; p < ref.plate_count(); ++p) {
        if (!rs.mask.at(p)) continue;
        Vec x = ref.plate_point(p);
        if (dist2(x, make_vec(0.0, 0.0, 0.0), ref.n) > 1.0) continue;
        double t = 0.0;
        for (int k = 0; k < ref.n; ++k) t += nu[std::size_t(k)] * x[k];
        if (t < 0.0) mask_term = std::max(mask_term, -t);
    }

    Flatness out;
    out.sup_term = sup;
    out.mask_term = mask_term;
    out.eps = std::max(sup, mask_term);
    out.f = f;
    out.nu = nu;
    return out;
}

// Minimizes the flatness over f (principal component, both signs) and nu
// (two directions for n=1, 1-degree sweep with golden refinement for n=2).
inline Flatness best_flatness(const VectorField& field, const PlateMask& mask, const Ball& ball) {
    const Grid& g = field.grid;
    if (!ball_inside_box(g, ball))
        throw std::invalid_argument("best_flatness: ball touches the box boundary");
    RescaledState rs = rescale_state(field, mask, ball.center, ball.radius, 1.0);
    const Grid& ref = rs.field.grid;

    std::vector<std::int64_t> nodes;
    for (std::int64_t idx = 0; idx < ref.node_count(); ++idx)
        if (dist2(ref.point(idx), make_vec(0.0, 0.0, 0.0), ref.n + 1) <= 1.0)
            nodes.push_back(idx);
    std::vector<double> fdir = detail::principal_component(rs.field, nodes);

    auto eval = [&](const std::vector<double>& fv, const std::vector<double>& nv) {
        return flatness(field, mask, ball, fv, nv);
    };

    std::vector<std::vector<double>> nus;
    if (g.n == 1) {
        nus = {{1.0}, {-1.0}};
    } else {
        // Coarse sweep on the rescaled samples, refined below.
        nus.reserve(360);
        for (int deg = 0; deg < 360; ++deg) {
            double a = deg * M_PI / 180.0;
            nus.push_back({std::cos(a), std::sin(a)});
        }
    }

    Flatness best;
    best.eps = 1e300;
    std::vector<double> fneg(fdir.size());
    for (std::size_t i = 0; i < fdir.size(); ++i) fneg[i] = -fdir[i];
    for (const auto& nv : nus)
        for (const auto& fv : {fdir, fneg}) {
            Flatness cand = eval(fv, nv);
            if (cand.eps < best.eps) best = cand;
        }
    if (g.n == 2) {
        double ang = std::atan2(best.nu[1], best.nu[0]);
        double lo = ang - M_PI / 180.0, hi = ang + M_PI / 180.0;
        for (int it = 0; it < 12; ++it) {
            double c1 = lo + (hi - lo) / 3.0, c2 = hi - (hi - lo) / 3.0;
            Flatness a = eval(best.f, {std::cos(c1), std::sin(c1)});
            Flatness b = eval(best.f, {std::cos(c2), std::sin(c2)});
            if (a.eps < b.eps) {
                hi = c2;
                if (a.eps < best.eps) best = a;
            } else {
                lo = c1;
                if (b.eps < best.eps) best = b;
            }
        }
    }
    return best;
}

struct DomainVariation {
    std::vector<std::int64_t> nodes;
    std::vector<double> w;
    bool monotone = true; // false flags a possibly multivalued variation
};

// Horizontal displacement field: solves g(X - w e_n) = U(X) by bisection in
// [-eps, eps] at every node of the region off the half-hyperplane P. The
// trapping U(X - eps e_n) <= g <= U(X + eps e_n) is verified first.
inline DomainVariation domain_variation(const Grid& g, const std::vector<double>& g_scalar,
                                        double eps, const std::vector<std::int64_t>& region) {
    DomainVariation out;
    const int en = g.n - 1; // e_n is the last plate axis
    for (std::int64_t idx : region) {
        Vec X = g.point(idx);
        bool on_P = (X[g.n] == 0.0) && (X[en] <= 0.0);
        if (on_P) continue;
        double lo_ref = eval_U(X[en] - eps, X[g.n]);
        double hi_ref = eval_U(X[en] + eps, X[g.n]);
        double val = g_scalar[std::size_t(idx)];
        if (val < lo_ref - 1e-9 || val > hi_ref + 1e-9)
            throw std::domain_error("domain_variation: trapping inequality violated");
        // Monotonicity of g in the e_n direction on its positivity set.
        if (val > 0.0) {
            Vec Xp = X;
            Xp[en] += g.h;
            if (g.inside_box(Xp)) {
                double vp = interpolate(g, g_scalar, Xp);
                if (vp < val - 1e-9) out.monotone = false;
            }
        }
        double target = eval_U(X[en], X[g.n]);
        auto shifted = [&](double w) {
            Vec Y = X;
            Y[en] -= w;
            return interpolate(g, g_scalar, Y);
        };
        double a = -eps, b = eps;
        double fa = shifted(a) - target, fb = shifted(b) - target;
        if (fa < 0.0 && fa >= -1e-12) fa = 0.0;
        if (fb > 0.0 && fb <= 1e-12) fb = 0.0;
        if (fa < 0.0 || fb > 0.0)
            throw std::domain_error("domain_variation: root not bracketed");
        for (int it = 0; it < 60; ++it) {
            double mid = 0.5 * (a + b);
            double fm = shifted(mid) - target;
            if (fm >= 0.0)
                a = mid;
            else
                b = mid;
        }
        out.nodes.push_back(idx);
        out.w.push_back(0.5 * (a + b));
    }
    return out;
}

// Least-squares slope of |G| along the ray x0 + t nu on the plate against
// sqrt(t), over the window t in [4h, 32h].
inline double slope(const VectorField& f, const Vec& x0, const std::vector<double>& nu) {
    const Grid& g = f.grid;
    double num = 0.0, den = 0.0;
    std::vector<double> vals;
    for (int k = 4; k <= 32; ++k) {
        double t = k * g.h;
        Vec X = x0;
        for (int d = 0; d < g.n; ++d) X[d] += t * nu[std::size_t(d)];
        X[g.n] = 0.0;
        if (!g.inside_box(X)) break;
        f.eval(X, vals);
        double s = 0.0;
        for (double v : vals) s += v * v;
        num += std::sqrt(s) * std::sqrt(t);
        den += t;
    }
    if (den == 0.0) throw std::invalid_argument("slope: empty fit window");
    return num / den;
}

// Median trace slope over the free boundary: the operational estimate of the
// dimensional slope constant of the problem.
inline double estimate_slope_constant(const VectorField& f, const FreeBoundary& fb) {
    if (fb.points.empty()) throw std::invalid_argument("estimate_slope_constant: no points");
    std::vector<double> slopes;
    for (const auto& q : fb.points) slopes.push_back(slope(f, q.x, q.normal));
    std::sort(slopes.begin(), slopes.end());
    std::size_t n = slopes.size();
    return (n % 2) ? slopes[n / 2] : 0.5 * (slopes[n / 2 - 1] + slopes[n / 2]);
}

struct HarnackDecay {
    std::vector<double> scales;
    std::vector<double> a, b;  // tightest trap shifts per scale
    std::vector<double> width; // b - a
    double eta_hat = 0.0;      // fitted geometric decay rate of the widths
    int failure_scale = -1;    // first scale where trapping broke, -1 if none
};

// Tightest translate traps U(<x-x0,nu> + a) <= <G,f> <= |G| <= U(<x-x0,nu> + b)
// over shrinking balls, and the geometric decay rate of their widths.
inline HarnackDecay harnack_decay(const VectorField& field, const Vec& x0,
                                  const std::vector<double>& f, const std::vector<double>& nu,
                                  std::vector<double> scales, double band = 0.5) {
    const Grid& g = field.grid;
    std::sort(scales.begin(), scales.end(), std::greater<>());
    HarnackDecay out;
    out.scales = scales;

    for (std::size_t k = 0; k < scales.size(); ++k) {
        double rho = scales[k];
        std::vector<std::int64_t> nodes;
        for (std::int64_t idx = 0; idx < g.node_count(); ++idx)
            if (dist2(g.point(idx), x0, g.n + 1) <= rho * rho) nodes.push_back(idx);

        auto lower_ok = [&](double a) {
            for (std::int64_t idx : nodes) {
                Vec X = g.point(idx);
                double t = a;
                for (int d = 0; d < g.n; ++d) t += nu[std::size_t(d)] * (X[d] - x0[d]);
                double lead = 0.0;
                for (int i = 0; i < g.m; ++i)
                    lead += f[std::size_t(i)] * field.comp[std::size_t(i)][std::size_t(idx)];
                if (eval_U(t, X[g.n]) > lead + 1e-12) return false;
            }
            return true;
        };
        auto upper_ok = [&](double b) {
            for (std::int64_t idx : nodes) {
                Vec X = g.point(idx);
                double t = b;
                for (int d = 0; d < g.n; ++d) t += nu[std::size_t(d)] * (X[d] - x0[d]);
                if (field.norm_at_node(idx) > eval_U(t, X[g.n]) + 1e-12) return false;
            }
            return true;
        };

        if (!lower_ok(-band) || !upper_ok(band)) {
            out.failure_scale = int(k);
            break;
        }
        double lo = -band, hi = band;
        for (int it = 0; it < 50; ++it) { // largest valid lower shift
            double mid = 0.5 * (lo + hi);
            (lower_ok(mid) ? lo : hi) = mid;
        }
        double a = lo;
        lo = -band;
        hi = band;
        for (int it = 0; it < 50; ++it) { // smallest valid upper shift
            double mid = 0.5 * (lo + hi);
            (upper_ok(mid) ? hi : lo) = mid;
        }
        double b = hi;
        out.a.push_back(a);
        out.b.push_back(b);
        out.width.push_back(b - a);
    }

    // Geometric decay rate over the scales with width above the grid floor.
    double sum = 0.0;
    int cnt = 0;
    for (std::size_t k = 0; k + 1 < out.width.size(); ++k) {
        if (out.width[k] <= 0.5 * g.h || out.width[k + 1] <= 0.0) continue;
        sum += std::log(std::max(out.width[k + 1], 1e-14) / out.width[k]);
        ++cnt;
    }
    if (cnt > 0) out.eta_hat = 1.0 - std::exp(sum / cnt);
    return out;
}

struct IofResult {
    double eps_before = 0.0;
    double eps_after = 0.0;
    bool pass = false;     // eps_after <= eps_before / 2 + 4 sqrt(h)
    bool comp_ok = false;  // orthogonal components inside the (ε/2)^{3/4} bound
    double comp_sup = 0.0;
    Flatness before, after;
};

// Improvement of flatness measured at scale rho relative to the base ball.
inline IofResult iof_check(const VectorField& field, const PlateMask& mask, const Vec& x0,
                           double rho, double base_r, double eps_bar = 0.1) {
    const Grid& g = field.grid;
    IofResult out;
    out.before = best_flatness(field, mask, make_ball(x0, base_r));
    out.eps_before = out.before.eps;
    if (out.eps_before > eps_bar)
        throw std::invalid_argument("iof_check: state is not flat enough to enter");
    out.after = best_flatness(field, mask, make_ball(x0, base_r * rho));
    out.eps_after = out.after.eps;
    double floor = 4.0 * std::sqrt(g.h);
    out.pass = out.eps_after <= 0.5 * out.eps_before + floor;

    // Component bound on the rescaled small ball.
    RescaledState rs = rescale_state(field, mask, x0, base_r * rho, 1.0);
    const Grid& ref = rs.field.grid;
    double sup = 0.0;
    for (std::int64_t idx = 0; idx < ref.node_count(); ++idx) {
        if (dist2(ref.point(idx), make_vec(0.0, 0.0, 0.0), ref.n + 1) > 1.0) continue;
        double lead = 0.0;
        for (int i = 0; i < ref.m; ++i)
            lead += out.after.f[std::size_t(i)] * rs.field.comp[std::size_t(i)][std::size_t(idx)];
        double d2 = 0.0;
        for (int i = 0; i < ref.m; ++i) {
            double d = rs.field.comp[std::size_t(i)][std::size_t(idx)] -
                       lead * out.after.f[std::size_t(i)];
            d2 += d * d;
        }
        sup = std::max(sup, std::sqrt(d2));
    }
    out.comp_sup = sup;
    out.comp_ok = sup <= std::pow(0.5 * out.eps_before, 0.75) + floor;
    return out;
}

struct ClassifyThresholds {
    double density_band = 0.05;  // |density - 1/2| tolerance for regular
    double singular_floor = 0.55;
    double fit_fraction = 0.1;   // residual < fit_fraction * A*
};

enum class PointLabel { regular, singular, unresolved };

inline const char* to_string(PointLabel l) {
    switch (l) {
        case PointLabel::regular: return "regular";
        case PointLabel::singular: return "singular";
        default: return "unresolved";
    }
}

// Density at the two smallest reliable radii plus the blow-up fit residual.
inline PointLabel classify(const VectorField& f, const PlateMask& mask, const Vec& x0,
                           double a_star, const ClassifyThresholds& th = {}) {
    const Grid& g = f.grid;
    double d1 = density_ratio(mask, x0, 8.0 * g.h);
    double d2 = density_ratio(mask, x0, 16.0 * g.h);
    if (d1 >= th.singular_floor && d2 >= th.singular_floor) return PointLabel::singular;
    bool density_regular = std::abs(d1 - 0.5) <= th.density_band &&
                           std::abs(d2 - 0.5) <= th.density_band;
    if (!density_regular) return PointLabel::unresolved;

    // Blow-up residual at the admissible subset of {1/4, 1/8, 1/16}.
    std::vector<double> scales;
    for (double r : {0.25, 0.125, 0.0625}) {
        if (r < blowup_scale_floor(g)) continue;
        bool fits = r <= g.extent;
        for (int k = 0; k < g.n; ++k)
            if (std::abs(x0[k]) + r > g.extent) fits = false;
        if (fits) scales.push_back(r);
    }
    if (scales.empty()) return PointLabel::unresolved;
    BlowupSeries s = blowup_series(f, mask, x0, scales);
    if (s.fits.back().dist_inf < th.fit_fraction * a_star) return PointLabel::regular;
    return PointLabel::unresolved;
}

} // namespace thinfb
