// Structured grids on the upper half box [-R,R]^n x [0,R], balls centered on
// the plate {x_{n+1}=0}, and multilinear interpolation with even reflection
// across the plate. Everything downstream (energy, solver, diagnostics) works
// in these coordinates.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace thinfb {

// Point in R^{n+1}; entries past n are ignored for n=1.
using Vec = std::array<double, 3>;

inline Vec make_vec(double x, double z) { return {x, z, 0.0}; }
inline Vec make_vec(double x, double y, double z) { return {x, y, z}; }

// Volume of the unit n-ball (plate-dimensional measure normalization).
inline double unit_ball_volume(int n) {
    switch (n) {
        case 1: return 2.0;
        case 2: return M_PI;
        case 3: return 4.0 * M_PI / 3.0;
        default: throw std::invalid_argument("unit_ball_volume: unsupported dimension");
    }
}

struct Grid {
    int n = 1;         // plate dimension (1 or 2); ambient dimension is n+1
    int m = 1;         // number of vector components carried by fields
    double h = 0.0;    // spacing
    double extent = 0; // half-width R of the box
    int N = 0;         // extent / h

    // Lateral axes hold 2N+1 nodes on [-R, R]; the vertical axis holds N+1
    // nodes on [0, R]. Only the upper half is stored; the lower half is the
    // even reflection.
    int lateral_points() const { return 2 * N + 1; }
    int vertical_points() const { return N + 1; }

    std::int64_t node_count() const {
        std::int64_t lat = lateral_points();
        std::int64_t cnt = vertical_points();
        for (int k = 0; k < n; ++k) cnt *= lat;
        return cnt;
    }
    std::int64_t plate_count() const {
        std::int64_t lat = lateral_points();
        std::int64_t cnt = 1;
        for (int k = 0; k < n; ++k) cnt *= lat;
        return cnt;
    }

    // Linear node index; vertical axis fastest, then y (n=2), then x.
    std::int64_t lin(int ix, int iy, int j) const {
        if (n == 1) return std::int64_t(ix) * vertical_points() + j;
        return (std::int64_t(ix) * lateral_points() + iy) * vertical_points() + j;
    }
    std::int64_t plate_lin(int ix, int iy) const {
        if (n == 1) return ix;
        return std::int64_t(ix) * lateral_points() + iy;
    }
    std::int64_t plate_to_node(std::int64_t p) const {
        return p * vertical_points();
    }

    void decode(std::int64_t idx, int& ix, int& iy, int& j) const {
        j = int(idx % vertical_points());
        idx /= vertical_points();
        if (n == 1) {
            iy = 0;
            ix = int(idx);
        } else {
            iy = int(idx % lateral_points());
            ix = int(idx / lateral_points());
        }
    }
    void plate_decode(std::int64_t p, int& ix, int& iy) const {
        if (n == 1) {
            ix = int(p);
            iy = 0;
        } else {
            iy = int(p % lateral_points());
            ix = int(p / lateral_points());
        }
    }

    double lateral_coord(int i) const { return -extent + i * h; }
    double vertical_coord(int j) const { return j * h; }

    Vec point(std::int64_t idx) const {
        int ix, iy, j;
        decode(idx, ix, iy, j);
        if (n == 1) return make_vec(lateral_coord(ix), vertical_coord(j));
        return make_vec(lateral_coord(ix), lateral_coord(iy), vertical_coord(j));
    }
    Vec plate_point(std::int64_t p) const {
        int ix, iy;
        plate_decode(p, ix, iy);
        if (n == 1) return make_vec(lateral_coord(ix), 0.0);
        return make_vec(lateral_coord(ix), lateral_coord(iy), 0.0);
    }

    bool on_lateral_boundary(int ix, int iy) const {
        if (ix == 0 || ix == 2 * N) return true;
        if (n == 2 && (iy == 0 || iy == 2 * N)) return true;
        return false;
    }

    // Inside the box after even reflection of the vertical coordinate.
    bool inside_box(const Vec& X, double tol = 1e-12) const {
        for (int k = 0; k < n; ++k)
            if (std::abs(X[k]) > extent + tol) return false;
        return std::abs(X[n]) <= extent + tol;
    }
};

inline Grid make_grid(int n, int m, double h, double extent) {
    if (n != 1 && n != 2) throw std::invalid_argument("make_grid: n must be 1 or 2");
    if (m < 1) throw std::invalid_argument("make_grid: m must be >= 1");
    if (!(h > 0.0)) throw std::invalid_argument("make_grid: h must be positive");
    if (!(extent > 0.0)) throw std::invalid_argument("make_grid: extent must be positive");
    double ratio = extent / h;
    double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio) || rounded < 1.0)
        throw std::invalid_argument("make_grid: extent/h must be a positive integer");
    Grid g;
    g.n = n;
    g.m = m;
    g.h = h;
    g.extent = extent;
    g.N = int(rounded);
    return g;
}

struct Ball {
    Vec center{0.0, 0.0, 0.0}; // on the plate: center[n] == 0
    double radius = 0.0;
};

inline Ball make_ball(const Vec& center, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("make_ball: radius must be positive");
    Ball b;
    b.center = center;
    b.radius = radius;
    return b;
}

// True when B_r(center) stays strictly inside the box (touching counts as
// outside; quadrature and energies refuse touching balls).
inline bool ball_inside_box(const Grid& g, const Ball& b, double tol = 1e-12) {
    for (int k = 0; k < g.n; ++k)
        if (std::abs(b.center[k]) + b.radius >= g.extent - tol) return false;
    return b.radius < g.extent - tol;
}

inline double dist2(const Vec& a, const Vec& b, int dims) {
    double s = 0.0;
    for (int k = 0; k < dims; ++k) {
        double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

// Multilinear interpolation of nodal values with even reflection in the
// vertical coordinate. Exact on multilinear data and on even reflections.
inline double interpolate(const Grid& g, const std::vector<double>& nodal, const Vec& X) {
    if (!g.inside_box(X))
        throw std::out_of_range("interpolate: point outside the grid box");
    const double invh = 1.0 / g.h;

    int base[3] = {0, 0, 0};
    double frac[3] = {0.0, 0.0, 0.0};
    for (int k = 0; k < g.n; ++k) {
        double s = (X[k] + g.extent) * invh;
        int i = int(std::floor(s));
        if (i < 0) i = 0;
        if (i > 2 * g.N - 1) i = 2 * g.N - 1;
        base[k] = i;
        frac[k] = s - i;
    }
    {
        double t = std::abs(X[g.n]) * invh; // even reflection
        int j = int(std::floor(t));
        if (j < 0) j = 0;
        if (j > g.N - 1) j = g.N - 1;
        base[g.n] = j;
        frac[g.n] = t - j;
    }

    const int dims = g.n + 1;
    const int corners = 1 << dims;
    double acc = 0.0;
    for (int c = 0; c < corners; ++c) {
        double w = 1.0;
        int idx[3];
        for (int k = 0; k < dims; ++k) {
            int bit = (c >> k) & 1;
            idx[k] = base[k] + bit;
            w *= bit ? frac[k] : (1.0 - frac[k]);
        }
        if (w == 0.0) continue;
        std::int64_t node = (g.n == 1) ? g.lin(idx[0], 0, idx[1]) : g.lin(idx[0], idx[1], idx[2]);
        acc += w * nodal[std::size_t(node)];
    }
    return acc;
}

} // namespace thinfb
