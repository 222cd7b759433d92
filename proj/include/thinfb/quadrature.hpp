// Quadrature rules over plate-centered balls: nodal dual-cell weights for
// volume integrals (reflection doubled), midpoint polar rules for sphere
// integrals, and plate-ball weights for the thin measure term. Cells cut by
// the sphere get their exact cell-disk overlap for n=1 (closed form) and an
// 8-point subsample for n=2.
#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "thinfb/geometry.hpp"

namespace thinfb {

namespace detail {

// Antiderivative of sqrt(r^2 - u^2).
inline double circle_segment_antideriv(double u, double r) {
    double c = std::clamp(u / r, -1.0, 1.0);
    return 0.5 * (u * std::sqrt(std::max(0.0, r * r - u * u)) + r * r * std::asin(c));
}

} // namespace detail

// Exact area of [x0,x1] x [y0,y1] intersected with the disk of radius r
// centered at the origin. Piecewise closed form; breakpoints are where the
// chord heights cross the rectangle sides.
inline double rect_disk_area(double x0, double x1, double y0, double y1, double r) {
    if (x0 >= x1 || y0 >= y1 || r <= 0.0) return 0.0;
    x0 = std::max(x0, -r);
    x1 = std::min(x1, r);
    if (x0 >= x1) return 0.0;

    double bps[8];
    int nb = 0;
    bps[nb++] = x0;
    bps[nb++] = x1;
    auto add = [&](double v) {
        if (v > x0 && v < x1) bps[nb++] = v;
    };
    if (std::abs(y0) < r) {
        double u = std::sqrt(r * r - y0 * y0);
        add(-u);
        add(u);
    }
    if (std::abs(y1) < r) {
        double u = std::sqrt(r * r - y1 * y1);
        add(-u);
        add(u);
    }
    std::sort(bps, bps + nb);

    double area = 0.0;
    for (int p = 0; p + 1 < nb; ++p) {
        double a = bps[p], b = bps[p + 1];
        if (b - a <= 0.0) continue;
        double mid = 0.5 * (a + b);
        double s = std::sqrt(std::max(0.0, r * r - mid * mid));
        double lo = std::max(y0, -s);
        double hi = std::min(y1, s);
        if (hi <= lo) continue;
        // Each branch is constant or +-sqrt(r^2-u^2) on the whole piece.
        double hi_int = (y1 <= s) ? y1 * (b - a)
                                  : detail::circle_segment_antideriv(b, r) -
                                        detail::circle_segment_antideriv(a, r);
        double lo_int = (y0 >= -s) ? y0 * (b - a)
                                   : -(detail::circle_segment_antideriv(b, r) -
                                       detail::circle_segment_antideriv(a, r));
        area += hi_int - lo_int;
    }
    return area;
}

// 8-point subsample estimate of |box ∩ ball| in three dimensions.
inline double box_ball_volume_subsampled(const double lo[3], const double hi[3], const Vec& c,
                                         double r) {
    double vol = 1.0;
    for (int k = 0; k < 3; ++k) vol *= (hi[k] - lo[k]);
    if (vol <= 0.0) return 0.0;
    double r2 = r * r;
    // Quick accept/reject on the bounding box corners.
    int inside = 0;
    for (int s = 0; s < 8; ++s) {
        double d2 = 0.0;
        for (int k = 0; k < 3; ++k) {
            double v = ((s >> k) & 1) ? hi[k] : lo[k];
            double d = v - c[k];
            d2 += d * d;
        }
        if (d2 <= r2) ++inside;
    }
    if (inside == 8) return vol;
    double nearest = 0.0;
    for (int k = 0; k < 3; ++k) {
        double d = std::max({lo[k] - c[k], c[k] - hi[k], 0.0});
        nearest += d * d;
    }
    if (nearest > r2) return 0.0;

    int cnt = 0;
    for (int s = 0; s < 8; ++s) {
        double d2 = 0.0;
        for (int k = 0; k < 3; ++k) {
            double q = ((s >> k) & 1) ? 0.75 : 0.25;
            double v = lo[k] + q * (hi[k] - lo[k]);
            double d = v - c[k];
            d2 += d * d;
        }
        if (d2 <= r2) ++cnt;
    }
    return vol * cnt / 8.0;
}

// Dual-cell weights for integrals over the plate ball 𝓑_r(center): one entry
// per plate node with positive overlap.
inline std::vector<std::pair<std::int64_t, double>> plate_ball_weights(const Grid& g,
                                                                       const Vec& center,
                                                                       double r) {
    std::vector<std::pair<std::int64_t, double>> out;
    const double h = g.h;
    auto clamp_idx = [&](double coord) {
        return std::clamp(int(std::floor((coord + g.extent) / h)), 0, 2 * g.N);
    };
    int ix0 = clamp_idx(center[0] - r - h), ix1 = clamp_idx(center[0] + r + h);
    for (int ix = ix0; ix <= ix1; ++ix) {
        double x = g.lateral_coord(ix);
        double xlo = std::max(x - 0.5 * h, -g.extent);
        double xhi = std::min(x + 0.5 * h, g.extent);
        if (g.n == 1) {
            double lo = std::max(xlo, center[0] - r);
            double hi = std::min(xhi, center[0] + r);
            if (hi > lo) out.emplace_back(g.plate_lin(ix, 0), hi - lo);
        } else {
            int iy0 = clamp_idx(center[1] - r - h), iy1 = clamp_idx(center[1] + r + h);
            for (int iy = iy0; iy <= iy1; ++iy) {
                double y = g.lateral_coord(iy);
                double ylo = std::max(y - 0.5 * h, -g.extent);
                double yhi = std::min(y + 0.5 * h, g.extent);
                double w =
                    rect_disk_area(xlo - center[0], xhi - center[0], ylo - center[1],
                                   yhi - center[1], r);
                if (w > 0.0) out.emplace_back(g.plate_lin(ix, iy), w);
            }
        }
    }
    return out;
}

struct BallQuadrature {
    // Volume rule: node index -> weight (= 2 |dual cell ∩ B_r ∩ upper half|).
    std::vector<std::pair<std::int64_t, double>> vol;
    // Sphere rule: sample point (upper half) -> weight, reflection doubled.
    std::vector<std::pair<Vec, double>> surf;
    // Plate rule: plate node index -> |dual plate cell ∩ 𝓑_r|.
    std::vector<std::pair<std::int64_t, double>> plate;
    // ∂𝓑_r rule: endpoints with unit counting weight for n=1, circle samples
    // with arclength weights for n=2.
    std::vector<std::pair<Vec, double>> plate_bdry;
};

inline BallQuadrature ball_quadrature(const Grid& g, const Ball& b) {
    if (!ball_inside_box(g, b))
        throw std::invalid_argument("ball_quadrature: ball touches the box boundary");
    BallQuadrature q;
    const double h = g.h, r = b.radius;
    const Vec& c = b.center;
    const int N = g.N;

    auto clamp_idx = [&](double coord) {
        return std::clamp(int(std::floor((coord + g.extent) / h)), 0, 2 * N);
    };
    int ix0 = clamp_idx(c[0] - r - h), ix1 = clamp_idx(c[0] + r + h);
    int iy0 = 0, iy1 = 0;
    if (g.n == 2) {
        iy0 = clamp_idx(c[1] - r - h);
        iy1 = clamp_idx(c[1] + r + h);
    }
    int j1 = std::clamp(int(std::floor((r + h) / h)), 0, N);

    for (int ix = ix0; ix <= ix1; ++ix) {
        double x = g.lateral_coord(ix);
        double xlo = std::max(x - 0.5 * h, -g.extent);
        double xhi = std::min(x + 0.5 * h, g.extent);
        for (int iy = iy0; iy <= iy1; ++iy) {
            double y = 0.0, ylo = 0.0, yhi = 0.0;
            if (g.n == 2) {
                y = g.lateral_coord(iy);
                ylo = std::max(y - 0.5 * h, -g.extent);
                yhi = std::min(y + 0.5 * h, g.extent);
            }
            for (int j = 0; j <= j1; ++j) {
                double z = g.vertical_coord(j);
                double zlo = std::max(z - 0.5 * h, 0.0);
                double zhi = std::min(z + 0.5 * h, g.extent);
                double w = 0.0;
                if (g.n == 1) {
                    w = rect_disk_area(xlo - c[0], xhi - c[0], zlo, zhi, r);
                } else {
                    double lo[3] = {xlo, ylo, zlo};
                    double hi[3] = {xhi, yhi, zhi};
                    w = box_ball_volume_subsampled(lo, hi, c, r);
                }
                if (w > 0.0) q.vol.emplace_back(g.lin(ix, iy, j), 2.0 * w);
            }
        }
    }

    // Sphere samples, midpoint rule in the angles.
    if (g.n == 1) {
        int K = std::max(8, int(std::ceil(M_PI * r / h)));
        double dth = M_PI / K;
        for (int k = 0; k < K; ++k) {
            double th = (k + 0.5) * dth;
            Vec p = make_vec(c[0] + r * std::cos(th), r * std::sin(th));
            q.surf.emplace_back(p, 2.0 * r * dth);
        }
    } else {
        int Kp = std::max(4, int(std::ceil(0.5 * M_PI * r / h)));
        int Kl = std::max(8, int(std::ceil(2.0 * M_PI * r / h)));
        double dps = 0.5 * M_PI / Kp, dla = 2.0 * M_PI / Kl;
        for (int kp = 0; kp < Kp; ++kp) {
            double ps = (kp + 0.5) * dps; // polar angle from the vertical axis
            double sp = std::sin(ps), cp = std::cos(ps);
            // Band weight from the exact cosine difference so that constants
            // integrate exactly.
            double band = std::cos(kp * dps) - std::cos((kp + 1) * dps);
            for (int kl = 0; kl < Kl; ++kl) {
                double la = (kl + 0.5) * dla;
                Vec p = make_vec(c[0] + r * sp * std::cos(la), c[1] + r * sp * std::sin(la),
                                 r * cp);
                q.surf.emplace_back(p, 2.0 * r * r * band * dla);
            }
        }
    }

    // Plate rule over 𝓑_r.
    q.plate = plate_ball_weights(g, c, r);

    // ∂𝓑_r rule.
    if (g.n == 1) {
        q.plate_bdry.emplace_back(make_vec(c[0] - r, 0.0), 1.0);
        q.plate_bdry.emplace_back(make_vec(c[0] + r, 0.0), 1.0);
    } else {
        int K = std::max(8, int(std::ceil(2.0 * M_PI * r / h)));
        double dph = 2.0 * M_PI / K;
        for (int k = 0; k < K; ++k) {
            double ph = (k + 0.5) * dph;
            Vec p = make_vec(c[0] + r * std::cos(ph), c[1] + r * std::sin(ph), 0.0);
            q.plate_bdry.emplace_back(p, r * dph);
        }
    }
    return q;
}

} // namespace thinfb
