// Blow-up rescaling G_{X0,r}(X) = r^{-1/2} G(X0 + rX) onto a fixed reference
// grid, least-squares fits against the half-plane family alpha U(<x,nu>,
// x_{n+1}) xi, and the per-scale convergence report used to certify regular
// points.
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "thinfb/energy.hpp"
#include "thinfb/field.hpp"
#include "thinfb/geometry.hpp"
#include "thinfb/profiles.hpp"

namespace thinfb {

inline double blowup_scale_floor(const Grid& g) { return 8.0 * g.h; }

// Samples r^{-1/2} G(X0 + rX) on a reference grid of the given extent with
// the same spacing.
inline VectorField rescale(const VectorField& f, const Vec& X0, double r,
                           double ref_extent = 1.0) {
    const Grid& g = f.grid;
    if (r < blowup_scale_floor(g))
        throw std::invalid_argument("rescale: scale below the interpolation floor");
    double reach_lat = r * ref_extent, reach_ver = r * ref_extent;
    for (int k = 0; k < g.n; ++k)
        if (std::abs(X0[k]) + reach_lat > g.extent + 1e-12)
            throw std::invalid_argument("rescale: rescaled samples leave the box");
    if (reach_ver > g.extent + 1e-12)
        throw std::invalid_argument("rescale: rescaled samples leave the box");
    return rescale_state(f, empty_mask(g), X0, r, ref_extent).field;
}

struct ProfileFit {
    std::vector<double> xi; // unit vector in R^m
    std::vector<double> nu; // unit vector in R^n
    double alpha = 0.0;
    double dist_inf = 0.0;  // sup distance off the 4h tube around the fit line
    double tube_radius = 0.0;
};

namespace detail {

// Dominant direction of the m x m second-moment matrix over the given nodes.
inline std::vector<double> principal_component(const VectorField& f,
                                               const std::vector<std::int64_t>& nodes) {
    const int m = f.grid.m;
    std::vector<double> M(std::size_t(m * m), 0.0);
    for (std::int64_t idx : nodes)
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
                M[std::size_t(a * m + b)] += f.comp[std::size_t(a)][std::size_t(idx)] *
                                             f.comp[std::size_t(b)][std::size_t(idx)];
    // Deterministic power iteration seeded with the largest diagonal entry.
    int seed = 0;
    for (int a = 1; a < m; ++a)
        if (M[std::size_t(a * m + a)] > M[std::size_t(seed * m + seed)]) seed = a;
    std::vector<double> v(std::size_t(m), 0.0), w(std::size_t(m), 0.0);
    v[std::size_t(seed)] = 1.0;
    for (int it = 0; it < 200; ++it) {
        for (int a = 0; a < m; ++a) {
            double s = 0.0;
            for (int b = 0; b < m; ++b) s += M[std::size_t(a * m + b)] * v[std::size_t(b)];
            w[std::size_t(a)] = s;
        }
        double norm = 0.0;
        for (double x : w) norm += x * x;
        norm = std::sqrt(norm);
        if (norm == 0.0) break;
        for (int a = 0; a < m; ++a) v[std::size_t(a)] = w[std::size_t(a)] / norm;
    }
    return v;
}

struct NuObjective {
    const VectorField* f;
    const std::vector<std::int64_t>* nodes;
    const std::vector<double>* proj; // <F(X), xi> per node
    double sum_ff = 0.0;

    // Least-squares misfit with the optimal amplitude for this direction.
    double operator()(const std::vector<double>& nu, double* alpha_out = nullptr) const {
        const Grid& g = f->grid;
        double su = 0.0, uu = 0.0;
        for (std::size_t k = 0; k < nodes->size(); ++k) {
            Vec X = g.point((*nodes)[k]);
            double t = 0.0;
            for (int d = 0; d < g.n; ++d) t += nu[std::size_t(d)] * X[d];
            double u = eval_U(t, X[g.n]);
            su += (*proj)[k] * u;
            uu += u * u;
        }
        double alpha = (uu > 0.0) ? std::max(0.0, su / uu) : 0.0;
        if (alpha_out) *alpha_out = alpha;
        return sum_ff - 2.0 * alpha * su + alpha * alpha * uu;
    }
};

} // namespace detail

// Least-squares fit over the centered half-plane family. xi is the dominant
// component direction (closed form), alpha the optimal amplitude given
// (xi, nu), and nu found by an angular sweep (1 degree for n=2, the two axis
// directions for n=1) refined by golden section. tube_radius is the exclusion
// band around the fitted line for the sup residual; callers fitting rescaled
// fields pass the effective sample spacing there.
inline ProfileFit fit_profile(const VectorField& f, double fit_radius = 0.0,
                              double tube_radius = 0.0) {
    const Grid& g = f.grid;
    if (fit_radius <= 0.0) fit_radius = g.extent;
    if (tube_radius <= 0.0) tube_radius = 4.0 * g.h;
    tube_radius = std::min(tube_radius, 0.5 * fit_radius);
    std::vector<std::int64_t> nodes;
    for (std::int64_t idx = 0; idx < g.node_count(); ++idx) {
        Vec X = g.point(idx);
        double r2 = 0.0;
        for (int k = 0; k <= g.n; ++k) r2 += X[k] * X[k];
        if (r2 <= fit_radius * fit_radius) nodes.push_back(idx);
    }

    double sum_ff = 0.0;
    for (std::int64_t idx : nodes)
        for (int i = 0; i < g.m; ++i) {
            double v = f.comp[std::size_t(i)][std::size_t(idx)];
            sum_ff += v * v;
        }
    if (sum_ff == 0.0) throw std::invalid_argument("fit_profile: zero field");

    ProfileFit fit;
    fit.xi = detail::principal_component(f, nodes);
    std::vector<double> proj(nodes.size());
    double psum = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        double s = 0.0;
        for (int i = 0; i < g.m; ++i)
            s += fit.xi[std::size_t(i)] * f.comp[std::size_t(i)][std::size_t(nodes[k])];
        proj[k] = s;
        psum += s;
    }
    if (psum < 0.0) {
        for (auto& x : fit.xi) x = -x;
        for (auto& s : proj) s = -s;
    }

    detail::NuObjective obj{&f, &nodes, &proj, sum_ff};
    if (g.n == 1) {
        double ap, am;
        double rp = obj({1.0}, &ap), rm = obj({-1.0}, &am);
        fit.nu = {rp <= rm ? 1.0 : -1.0};
        fit.alpha = rp <= rm ? ap : am;
    } else {
        double best = 1e300, best_ang = 0.0;
        for (int deg = 0; deg < 360; ++deg) {
            double a = deg * M_PI / 180.0;
            double r = obj({std::cos(a), std::sin(a)});
            if (r < best) {
                best = r;
                best_ang = a;
            }
        }
        // Golden-section refinement in the bracketing 2-degree window.
        double lo = best_ang - M_PI / 180.0, hi = best_ang + M_PI / 180.0;
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
        double fc = obj({std::cos(c), std::sin(c)}), fd = obj({std::cos(d), std::sin(d)});
        for (int it = 0; it < 40; ++it) {
            if (fc < fd) {
                hi = d;
                d = c;
                fd = fc;
                c = hi - gr * (hi - lo);
                fc = obj({std::cos(c), std::sin(c)});
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + gr * (hi - lo);
                fd = obj({std::cos(d), std::sin(d)});
            }
        }
        double ang = 0.5 * (lo + hi);
        fit.nu = {std::cos(ang), std::sin(ang)};
        obj(fit.nu, &fit.alpha);
    }

    // Sup distance outside the tube where the root singularity dominates the
    // interpolation error.
    fit.tube_radius = tube_radius;
    double worst = 0.0;
    for (std::int64_t idx : nodes) {
        Vec X = g.point(idx);
        double t = 0.0;
        for (int d = 0; d < g.n; ++d) t += fit.nu[std::size_t(d)] * X[d];
        if (t * t + X[g.n] * X[g.n] <= fit.tube_radius * fit.tube_radius) continue;
        double u = fit.alpha * eval_U(t, X[g.n]);
        double d2 = 0.0;
        for (int i = 0; i < g.m; ++i) {
            double dvi = f.comp[std::size_t(i)][std::size_t(idx)] - u * fit.xi[std::size_t(i)];
            d2 += dvi * dvi;
        }
        worst = std::max(worst, d2);
    }
    fit.dist_inf = std::sqrt(worst);
    return fit;
}

struct BlowupSeries {
    Vec center{0, 0, 0};
    std::vector<double> scales; // decreasing
    std::vector<ProfileFit> fits;
    bool dist_nonincreasing = true;
    bool parameters_stable = true;
    double alpha_osc = 0.0; // max |alpha_{k+1} - alpha_k|
};

// True when some neighborhood of the plate point carries both mask values.
inline bool is_free_boundary_point(const PlateMask& mask, const Vec& x0, int cells = 2) {
    const Grid& g = mask.grid;
    int c[2] = {0, 0};
    for (int k = 0; k < g.n; ++k)
        c[k] = std::clamp(int(std::lround((x0[k] + g.extent) / g.h)), 0, 2 * g.N);
    bool has1 = false, has0 = false;
    for (int dx = -cells; dx <= cells; ++dx)
        for (int dy = (g.n == 2 ? -cells : 0); dy <= (g.n == 2 ? cells : 0); ++dy) {
            int ix = std::clamp(c[0] + dx, 0, 2 * g.N);
            int iy = g.n == 2 ? std::clamp(c[1] + dy, 0, 2 * g.N) : 0;
            (mask.at(g.plate_lin(ix, iy)) ? has1 : has0) = true;
        }
    return has1 && has0;
}

inline BlowupSeries blowup_series(const VectorField& f, const PlateMask& mask, const Vec& X0,
                                  std::vector<double> scales, double ref_extent = 1.0,
                                  double stability_tol = 0.05) {
    if (!is_free_boundary_point(mask, X0))
        throw std::invalid_argument("blowup_series: center is not a free boundary point");
    std::sort(scales.begin(), scales.end(), std::greater<>());
    BlowupSeries s;
    s.center = X0;
    s.scales = scales;
    for (double r : scales) {
        VectorField resc = rescale(f, X0, r, ref_extent);
        // Effective sample spacing of the rescaled field is h/r.
        s.fits.push_back(fit_profile(resc, ref_extent, 4.0 * f.grid.h / r));
    }
    for (std::size_t k = 0; k + 1 < s.fits.size(); ++k) {
        if (s.fits[k + 1].dist_inf > s.fits[k].dist_inf + 1e-9) s.dist_nonincreasing = false;
        double da = std::abs(s.fits[k + 1].alpha - s.fits[k].alpha);
        s.alpha_osc = std::max(s.alpha_osc, da);
        double dxi = 0.0, dnu = 0.0;
        for (std::size_t i = 0; i < s.fits[k].xi.size(); ++i) {
            double d = s.fits[k + 1].xi[i] - s.fits[k].xi[i];
            dxi += d * d;
        }
        for (std::size_t i = 0; i < s.fits[k].nu.size(); ++i) {
            double d = s.fits[k + 1].nu[i] - s.fits[k].nu[i];
            dnu += d * d;
        }
        if (da > stability_tol || std::sqrt(dxi) > stability_tol ||
            std::sqrt(dnu) > stability_tol)
            s.parameters_stable = false;
    }
    return s;
}

} // namespace thinfb
