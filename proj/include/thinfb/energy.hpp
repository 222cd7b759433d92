// The functional J(G,B) = ∫_B |∇G|^2 + L_n(𝓑 ∩ {mask}) split into its parts,
// the boundary L^2 term of the Weiss functional, the blow-up scaling identity
// check, and the 1/2-homogeneous extension competitor of the trace.
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "thinfb/field.hpp"
#include "thinfb/geometry.hpp"
#include "thinfb/quadrature.hpp"

namespace thinfb {

struct EnergyBreakdown {
    double dirichlet = 0.0;     // ∫_B |∇G|^2, reflection doubled
    double plate_measure = 0.0; // L_n(𝓑 ∩ {mask = 1})
    double total = 0.0;         // dirichlet + plate_measure
    double boundary_l2 = 0.0;   // ∫_{∂B} |G|^2 dσ
};

// Precomputed per-state data shared by the ball integrals; rebuild after any
// change to the field or the mask.
struct EnergyContext {
    const VectorField* field = nullptr;
    const PlateMask* mask = nullptr;
    std::vector<GradientField> grads;
};

inline EnergyContext make_energy_context(const VectorField& f, const PlateMask& mask) {
    EnergyContext ctx;
    ctx.field = &f;
    ctx.mask = &mask;
    ctx.grads = gradient_fields(f, mask);
    return ctx;
}

inline EnergyBreakdown energy(const EnergyContext& ctx, const Ball& ball) {
    const Grid& g = ctx.field->grid;
    BallQuadrature q = ball_quadrature(g, ball);
    EnergyBreakdown e;

    for (const auto& [idx, w] : q.vol) {
        double s = 0.0;
        for (const auto& gf : ctx.grads)
            for (int k = 0; k <= g.n; ++k) {
                double d = gf.d[std::size_t(k)][std::size_t(idx)];
                s += d * d;
            }
        e.dirichlet += w * s;
    }
    for (const auto& [p, w] : q.plate)
        if (ctx.mask->at(p)) e.plate_measure += w;
    std::vector<double> vals;
    for (const auto& [X, w] : q.surf) {
        ctx.field->eval(X, vals);
        double s = 0.0;
        for (double v : vals) s += v * v;
        e.boundary_l2 += w * s;
    }
    e.total = e.dirichlet + e.plate_measure;
    return e;
}

inline EnergyBreakdown energy(const VectorField& f, const Ball& ball, const PlateMask& mask) {
    return energy(make_energy_context(f, mask), ball);
}

// Blow-up of a state: samples r^{-1/2} G(X0 + rX) on a grid of the given
// extent (same spacing), mask carried over by nearest plate node.
struct RescaledState {
    VectorField field;
    PlateMask mask;
};

inline RescaledState rescale_state(const VectorField& f, const PlateMask& mask, const Vec& X0,
                                   double r, double ref_extent) {
    const Grid& g = f.grid;
    Grid ref = make_grid(g.n, g.m, g.h, std::round(ref_extent / g.h) * g.h);
    double amp = 1.0 / std::sqrt(r);
    RescaledState out;
    out.field = zero_field(ref);
    for (std::int64_t idx = 0; idx < ref.node_count(); ++idx) {
        Vec Y = ref.point(idx);
        Vec X;
        for (int k = 0; k <= g.n; ++k) X[k] = X0[k] + r * Y[k];
        for (int i = 0; i < g.m; ++i)
            out.field.comp[std::size_t(i)][std::size_t(idx)] =
                amp * interpolate(g, f.comp[std::size_t(i)], X);
    }
    out.mask = empty_mask(ref);
    for (std::int64_t p = 0; p < ref.plate_count(); ++p) {
        Vec y = ref.plate_point(p);
        int near[2] = {0, 0};
        for (int k = 0; k < g.n; ++k) {
            double c = X0[k] + r * y[k];
            near[k] = std::clamp(int(std::lround((c + g.extent) / g.h)), 0, 2 * g.N);
        }
        out.mask.v[std::size_t(p)] = mask.v[std::size_t(g.plate_lin(near[0], near[1]))];
    }
    return out;
}

// Scaling identity of the functional: J(G, B_R(X0)) against
// r^n J(G_{X0,r}, B_{R/r}). Returns (lhs, rhs).
inline std::pair<double, double> scaling_check(const VectorField& f, const PlateMask& mask,
                                               const Vec& X0, double r, double R) {
    const Grid& g = f.grid;
    Ball big = make_ball(X0, R);
    if (!ball_inside_box(g, big))
        throw std::invalid_argument("scaling_check: B_R(X0) leaves the box");
    EnergyBreakdown lhs = energy(f, big, mask);

    double target = R / r;
    double pad = std::max(0.25, 4.0 * g.h);
    double ref_extent = std::ceil((target + pad) / g.h) * g.h;
    // The rescaled samples must stay inside the original box.
    double reach = r * ref_extent;
    for (int k = 0; k < g.n; ++k)
        if (std::abs(X0[k]) + reach > g.extent)
            throw std::invalid_argument("scaling_check: rescaled samples leave the box");
    RescaledState rs = rescale_state(f, mask, X0, r, ref_extent);
    Ball unit = make_ball(make_vec(0.0, 0.0, 0.0), target);
    EnergyBreakdown rhs = energy(rs.field, unit, rs.mask);

    double rn = std::pow(r, g.n);
    return {lhs.total, rn * rhs.total};
}

// G̃(X) = (|X|/r)^{1/2} G(r X/|X|) inside B_r(0); G outside. The returned
// state agrees with G on ∂B_r, so it is an admissible competitor there.
inline RescaledState homogeneous_extension(const VectorField& f, const PlateMask& mask,
                                           double r) {
    if (!(r > 0.0)) throw std::invalid_argument("homogeneous_extension: r must be positive");
    const Grid& g = f.grid;
    RescaledState out;
    out.field = f;
    out.mask = mask;
    for (std::int64_t idx = 0; idx < g.node_count(); ++idx) {
        Vec X = g.point(idx);
        double rho = 0.0;
        for (int k = 0; k <= g.n; ++k) rho += X[k] * X[k];
        rho = std::sqrt(rho);
        if (rho >= r) continue;
        if (rho == 0.0) {
            for (int i = 0; i < g.m; ++i) out.field.comp[std::size_t(i)][std::size_t(idx)] = 0.0;
            continue;
        }
        Vec Y;
        for (int k = 0; k <= g.n; ++k) Y[k] = X[k] * (r / rho);
        double amp = std::sqrt(rho / r);
        for (int i = 0; i < g.m; ++i)
            out.field.comp[std::size_t(i)][std::size_t(idx)] =
                amp * interpolate(g, f.comp[std::size_t(i)], Y);
    }
    for (std::int64_t p = 0; p < g.plate_count(); ++p) {
        Vec x = g.plate_point(p);
        double rho = 0.0;
        for (int k = 0; k < g.n; ++k) rho += x[k] * x[k];
        rho = std::sqrt(rho);
        if (rho >= r || rho == 0.0) continue;
        int near[2] = {0, 0};
        for (int k = 0; k < g.n; ++k) {
            double c = x[k] * (r / rho);
            near[k] = std::clamp(int(std::lround((c + g.extent) / g.h)), 0, 2 * g.N);
        }
        out.mask.v[std::size_t(p)] = mask.v[std::size_t(g.plate_lin(near[0], near[1]))];
    }
    return out;
}

// Trace competitor bound: J(G,B_r) on the left against the boundary-only
// expression (1/n)∫_{∂B_r}(r|∇_S G|^2 + |G|^2/(4r)) + (r/n) H^{n-1}(∂𝓑_r ∩
// {|G|>0}). Minimizers satisfy lhs <= rhs; the exact half-plane profiles make
// it an equality.
struct HomExtBound {
    double lhs = 0.0;
    double rhs = 0.0;
};

inline HomExtBound homogeneous_extension_bound(const EnergyContext& ctx, double r) {
    const Grid& g = ctx.field->grid;
    Ball ball = make_ball(make_vec(0.0, 0.0, 0.0), r);
    BallQuadrature q = ball_quadrature(g, ball);
    EnergyBreakdown e = energy(ctx, ball);

    HomExtBound out;
    out.lhs = e.total;
    double surf = 0.0;
    std::vector<double> vals;
    double grad[3];
    for (const auto& [X, w] : q.surf) {
        double rho = std::hypot(X[0], g.n == 2 ? std::hypot(X[1], X[2]) : X[g.n]);
        double g2 = 0.0, radial2 = 0.0, val2 = 0.0;
        ctx.field->eval(X, vals);
        for (int i = 0; i < g.m; ++i) {
            ctx.grads[std::size_t(i)].eval(X, grad);
            double dot = 0.0, norm2 = 0.0;
            for (int k = 0; k <= g.n; ++k) {
                dot += grad[k] * X[k];
                norm2 += grad[k] * grad[k];
            }
            g2 += norm2;
            radial2 += (dot / rho) * (dot / rho);
            val2 += vals[std::size_t(i)] * vals[std::size_t(i)];
        }
        double tangential = std::max(0.0, g2 - radial2);
        surf += w * (r * tangential + val2 / (4.0 * r));
    }
    double per_mask = 0.0;
    for (const auto& [X, w] : q.plate_bdry) {
        int near[2] = {0, 0};
        for (int k = 0; k < g.n; ++k)
            near[k] = std::clamp(int(std::lround((X[k] + g.extent) / g.h)), 0, 2 * g.N);
        if (ctx.mask->at(g.plate_lin(near[0], near[1]))) per_mask += w;
    }
    out.rhs = surf / g.n + (r / g.n) * per_mask;
    return out;
}

} // namespace thinfb
