// Weiss-type monotonicity functional W(X0,G,r) = r^{-n} J(G,B_r(X0))
// - (1/2) r^{-(n+1)} ∫_{∂B_r}|G|^2, its radial series, and the derivative
// lower-bound integrand r^{-(n+2)} Σ_i ∫_{∂B_r} (<∇g^i, X-X0> - g^i/2)^2.
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "thinfb/energy.hpp"
#include "thinfb/field.hpp"
#include "thinfb/geometry.hpp"
#include "thinfb/quadrature.hpp"

namespace thinfb {

inline double weiss_reliability_floor(const Grid& g) { return 4.0 * g.h; }

inline double weiss_value(const EnergyContext& ctx, const Vec& X0, double r) {
    const Grid& g = ctx.field->grid;
    if (r < weiss_reliability_floor(g))
        throw std::invalid_argument("weiss_value: radius below the reliability floor");
    EnergyBreakdown e = energy(ctx, make_ball(X0, r));
    double rn = std::pow(r, g.n);
    return e.total / rn - 0.5 * e.boundary_l2 / (rn * r);
}

inline double weiss_value(const VectorField& f, const PlateMask& mask, const Vec& X0, double r) {
    return weiss_value(make_energy_context(f, mask), X0, r);
}

inline double deriv_lowerbound(const EnergyContext& ctx, const Vec& X0, double r) {
    const Grid& g = ctx.field->grid;
    if (r < weiss_reliability_floor(g))
        throw std::invalid_argument("deriv_lowerbound: radius below the reliability floor");
    BallQuadrature q = ball_quadrature(g, make_ball(X0, r));
    double acc = 0.0;
    double grad[3];
    std::vector<double> vals;
    for (const auto& [X, w] : q.surf) {
        ctx.field->eval(X, vals);
        for (int i = 0; i < g.m; ++i) {
            ctx.grads[std::size_t(i)].eval(X, grad);
            double dot = 0.0;
            for (int k = 0; k <= g.n; ++k) dot += grad[k] * (X[k] - X0[k]);
            double term = dot - 0.5 * vals[std::size_t(i)];
            acc += w * term * term;
        }
    }
    return acc / std::pow(r, g.n + 2);
}

struct WeissSeries {
    Vec center{0, 0, 0};
    std::vector<double> radii;
    std::vector<double> W;
    std::vector<double> slope;    // (W[j+1]-W[j])/(r[j+1]-r[j]), size k-1
    std::vector<double> deriv_lb; // lower-bound integrand per radius
    double tol = 0.0;             // 5h monotonicity tolerance
    int violations = 0;           // slopes below -tol
    int lb_violations = 0;        // slopes below min(lb_j, lb_j+1) - 10h
};

inline WeissSeries weiss_series(const EnergyContext& ctx, const Vec& X0, double r_min,
                                double r_max, int k) {
    const Grid& g = ctx.field->grid;
    if (k < 2 || !(r_min < r_max))
        throw std::invalid_argument("weiss_series: need k >= 2 and r_min < r_max");
    WeissSeries s;
    s.center = X0;
    s.tol = 5.0 * g.h;
    double ratio = std::pow(r_max / r_min, 1.0 / (k - 1));
    for (int j = 0; j < k; ++j) {
        double r = r_min * std::pow(ratio, j);
        s.radii.push_back(r);
        s.W.push_back(weiss_value(ctx, X0, r));
        s.deriv_lb.push_back(deriv_lowerbound(ctx, X0, r));
    }
    for (int j = 0; j + 1 < k; ++j) {
        double sl = (s.W[std::size_t(j + 1)] - s.W[std::size_t(j)]) /
                    (s.radii[std::size_t(j + 1)] - s.radii[std::size_t(j)]);
        s.slope.push_back(sl);
        if (sl < -s.tol) ++s.violations;
        double lb = std::min(s.deriv_lb[std::size_t(j)], s.deriv_lb[std::size_t(j + 1)]);
        if (sl < lb - 10.0 * g.h) ++s.lb_violations;
    }
    return s;
}

inline WeissSeries weiss_series(const VectorField& f, const PlateMask& mask, const Vec& X0,
                                double r_min, double r_max, int k) {
    return weiss_series(make_energy_context(f, mask), X0, r_min, r_max, k);
}

// Weiss limit at the center, reported at r = 8h with one Richardson step from
// the pair {8h, 16h}.
inline double weiss_limit(const EnergyContext& ctx, const Vec& X0) {
    const Grid& g = ctx.field->grid;
    double w8 = weiss_value(ctx, X0, 8.0 * g.h);
    double w16 = weiss_value(ctx, X0, 16.0 * g.h);
    return 2.0 * w8 - w16;
}

} // namespace thinfb
