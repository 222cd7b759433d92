// Sampled m-component fields on a grid, the plate positivity mask, and the
// nodal gradient fields used by every ball integral. Gradients are centered
// in the interior, one-sided on the box faces; on the plate row the vertical
// derivative is zero by even reflection on the positivity set and one-sided
// upward across the zero set.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "thinfb/geometry.hpp"
#include "thinfb/profiles.hpp"

namespace thinfb {

struct PlateMask {
    Grid grid;
    std::vector<std::uint8_t> v; // one byte per plate node

    bool at(std::int64_t p) const { return v[std::size_t(p)] != 0; }
    std::int64_t count_positive() const {
        std::int64_t c = 0;
        for (auto b : v) c += (b != 0);
        return c;
    }
};

inline PlateMask empty_mask(const Grid& g) {
    PlateMask mk;
    mk.grid = g;
    mk.v.assign(std::size_t(g.plate_count()), 0);
    return mk;
}

inline PlateMask full_mask(const Grid& g) {
    PlateMask mk = empty_mask(g);
    mk.v.assign(mk.v.size(), 1);
    return mk;
}

// mask = 1 where pred(plate point) holds.
inline PlateMask mask_where(const Grid& g, const std::function<bool(const Vec&)>& pred) {
    PlateMask mk = empty_mask(g);
    for (std::int64_t p = 0; p < g.plate_count(); ++p)
        mk.v[std::size_t(p)] = pred(g.plate_point(p)) ? 1 : 0;
    return mk;
}

struct VectorField {
    Grid grid;
    std::vector<std::vector<double>> comp; // m arrays of node_count values

    std::vector<double>& operator[](int i) { return comp[std::size_t(i)]; }
    const std::vector<double>& operator[](int i) const { return comp[std::size_t(i)]; }

    // Interpolated component values at X (even reflection applies).
    void eval(const Vec& X, std::vector<double>& out) const {
        out.resize(comp.size());
        for (std::size_t i = 0; i < comp.size(); ++i) out[i] = interpolate(grid, comp[i], X);
    }
    double norm_at_node(std::int64_t idx) const {
        double s = 0.0;
        for (const auto& c : comp) {
            double v = c[std::size_t(idx)];
            s += v * v;
        }
        return std::sqrt(s);
    }
};

inline VectorField zero_field(const Grid& g) {
    VectorField f;
    f.grid = g;
    f.comp.assign(std::size_t(g.m), std::vector<double>(std::size_t(g.node_count()), 0.0));
    return f;
}

inline VectorField sample_field(const Grid& g,
                                const std::function<void(const Vec&, std::vector<double>&)>& fn) {
    VectorField f = zero_field(g);
    std::vector<double> vals;
    for (std::int64_t idx = 0; idx < g.node_count(); ++idx) {
        fn(g.point(idx), vals);
        for (int i = 0; i < g.m; ++i) f.comp[std::size_t(i)][std::size_t(idx)] = vals[std::size_t(i)];
    }
    return f;
}

inline VectorField sample_profile(const Grid& g, const ProfileSpec& spec) {
    validate(spec, g.n, g.m);
    return sample_field(g, [&](const Vec& X, std::vector<double>& out) {
        eval_profile(spec, X, g.n, out);
    });
}

// Plate positivity by thresholding |G| on the plate trace. Used only for
// closed-form profiles in diagnostics; solver states carry their own mask.
inline PlateMask threshold_mask(const VectorField& f, double tau) {
    const Grid& g = f.grid;
    PlateMask mk = empty_mask(g);
    for (std::int64_t p = 0; p < g.plate_count(); ++p)
        mk.v[std::size_t(p)] = f.norm_at_node(g.plate_to_node(p)) > tau ? 1 : 0;
    return mk;
}

inline double default_mask_threshold(const Grid& g) { return std::sqrt(g.h) / 4.0; }

// Nodal gradient field of one component: dims (n+1) arrays over nodes.
struct GradientField {
    Grid grid;
    std::vector<std::vector<double>> d; // d[k][node], k = 0..n

    void eval(const Vec& X, double* out) const {
        // Even reflection: lateral derivatives are even, the vertical
        // derivative is odd in the vertical coordinate.
        double sign = (X[grid.n] < 0.0) ? -1.0 : 1.0;
        for (int k = 0; k <= grid.n; ++k) {
            double v = interpolate(grid, d[std::size_t(k)], X);
            out[k] = (k == grid.n) ? sign * v : v;
        }
    }
};

inline GradientField gradient_field(const Grid& g, const std::vector<double>& u,
                                    const PlateMask& mask) {
    GradientField gf;
    gf.grid = g;
    gf.d.assign(std::size_t(g.n + 1), std::vector<double>(std::size_t(g.node_count()), 0.0));
    const double inv2h = 0.5 / g.h, invh = 1.0 / g.h;
    const int L = g.lateral_points();
    for (std::int64_t idx = 0; idx < g.node_count(); ++idx) {
        int ix, iy, j;
        g.decode(idx, ix, iy, j);
        // lateral x
        {
            std::int64_t ip = g.lin(std::min(ix + 1, L - 1), iy, j);
            std::int64_t im = g.lin(std::max(ix - 1, 0), iy, j);
            double den = (ix > 0 && ix < L - 1) ? inv2h : invh;
            gf.d[0][std::size_t(idx)] = (u[std::size_t(ip)] - u[std::size_t(im)]) * den;
        }
        if (g.n == 2) {
            std::int64_t ip = g.lin(ix, std::min(iy + 1, L - 1), j);
            std::int64_t im = g.lin(ix, std::max(iy - 1, 0), j);
            double den = (iy > 0 && iy < L - 1) ? inv2h : invh;
            gf.d[1][std::size_t(idx)] = (u[std::size_t(ip)] - u[std::size_t(im)]) * den;
        }
        // vertical
        double dz;
        if (j == 0) {
            std::int64_t p = g.plate_lin(ix, iy);
            if (mask.at(p)) {
                dz = 0.0; // even reflection across the positivity set
            } else {
                dz = (u[std::size_t(g.lin(ix, iy, 1))] - u[std::size_t(idx)]) * invh;
            }
        } else if (j == g.N) {
            dz = (u[std::size_t(idx)] - u[std::size_t(g.lin(ix, iy, j - 1))]) * invh;
        } else {
            dz = (u[std::size_t(g.lin(ix, iy, j + 1))] - u[std::size_t(g.lin(ix, iy, j - 1))]) *
                 inv2h;
        }
        gf.d[std::size_t(g.n)][std::size_t(idx)] = dz;
    }
    return gf;
}

inline std::vector<GradientField> gradient_fields(const VectorField& f, const PlateMask& mask) {
    std::vector<GradientField> out;
    out.reserve(f.comp.size());
    for (const auto& c : f.comp) out.push_back(gradient_field(f.grid, c, mask));
    return out;
}

} // namespace thinfb
