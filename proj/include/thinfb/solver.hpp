// Discrete local minimization of J: red-black SOR relaxation of the
// components at fixed plate mask, alternated with greedy single-node mask
// flips that re-relax a local patch and accept only strict energy descent.
// The objective descended is the edge-based Dirichlet energy (reflection
// doubled, plate edges counted once) plus the dual-cell measure of the mask.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "thinfb/energy.hpp"
#include "thinfb/field.hpp"
#include "thinfb/geometry.hpp"

namespace thinfb {

enum class NodeRole : std::uint8_t { Interior, PlateFree, PlateZero, Dirichlet };

struct SolverConfig {
    int max_outer = 60;
    double relax_tol = 1e-8;
    std::string sweep = "rbsor";
    std::string flip_pass_order = "lex"; // "lex" or "random"
    unsigned seed = 0;
    int patch_radius = 8;   // in cells, for the flip re-solve
    int max_sweeps = 40000; // global relaxation budget per call
    int patch_sweeps = 400; // local relaxation budget per candidate flip
};

struct SolveState {
    VectorField G;
    PlateMask mask;
    std::vector<NodeRole> roles;
    std::vector<double> energy_trace; // J after each outer iteration
    int outer_iters = 0;
    std::int64_t sweeps_total = 0;
    std::int64_t flips_total = 0;
    bool budget_exhausted = false;
    bool relax_warning = false;
};

inline std::vector<NodeRole> node_roles(const Grid& g, const PlateMask& mask) {
    std::vector<NodeRole> roles(std::size_t(g.node_count()), NodeRole::Interior);
    for (std::int64_t idx = 0; idx < g.node_count(); ++idx) {
        int ix, iy, j;
        g.decode(idx, ix, iy, j);
        if (ix == 0 || ix == 2 * g.N || j == g.N || (g.n == 2 && (iy == 0 || iy == 2 * g.N))) {
            roles[std::size_t(idx)] = NodeRole::Dirichlet;
        } else if (j == 0) {
            roles[std::size_t(idx)] = mask.at(g.plate_lin(ix, iy)) ? NodeRole::PlateFree
                                                                   : NodeRole::PlateZero;
        }
    }
    return roles;
}

// Uniform relaxation stencil: the plate row duplicates the upward neighbor,
// which is the even-reflection boundary condition.
struct StencilNode {
    std::int64_t idx = 0;
    std::int64_t nbr[6] = {0, 0, 0, 0, 0, 0};
    int nnbr = 0;
    std::uint8_t color = 0;
};

inline void build_stencil(const Grid& g, const std::vector<NodeRole>& roles,
                          const std::function<bool(std::int64_t, int, int, int)>& keep,
                          std::vector<StencilNode>& out) {
    out.clear();
    for (std::int64_t idx = 0; idx < g.node_count(); ++idx) {
        int ix, iy, j;
        g.decode(idx, ix, iy, j);
        NodeRole r = roles[std::size_t(idx)];
        if (r == NodeRole::Dirichlet || r == NodeRole::PlateZero) continue;
        if (!keep(idx, ix, iy, j)) continue;
        StencilNode s;
        s.idx = idx;
        s.color = std::uint8_t((ix + iy + j) & 1);
        s.nbr[s.nnbr++] = g.lin(ix - 1, iy, j);
        s.nbr[s.nnbr++] = g.lin(ix + 1, iy, j);
        if (g.n == 2) {
            s.nbr[s.nnbr++] = g.lin(ix, iy - 1, j);
            s.nbr[s.nnbr++] = g.lin(ix, iy + 1, j);
        }
        if (j == 0) {
            s.nbr[s.nnbr++] = g.lin(ix, iy, 1);
            s.nbr[s.nnbr++] = g.lin(ix, iy, 1);
        } else {
            s.nbr[s.nnbr++] = g.lin(ix, iy, j - 1);
            s.nbr[s.nnbr++] = g.lin(ix, iy, j + 1);
        }
        out.push_back(s);
    }
}

inline double sor_omega(const Grid& g) {
    return 2.0 / (1.0 + std::sin(M_PI * g.h / (2.0 * g.extent)));
}

// Relaxes the listed nodes of every component until the unscaled stencil
// residual falls below tol. Returns true on convergence within the budget.
inline bool relax_nodes(VectorField& f, const std::vector<StencilNode>& nodes, double omega,
                        double tol, int max_sweeps, std::int64_t* sweeps_out = nullptr) {
    const double inv_diag = 1.0 / (nodes.empty() ? 1 : nodes.front().nnbr);
    bool converged = nodes.empty();
    std::int64_t sweeps = 0;
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        for (auto& comp : f.comp) {
            double* u = comp.data();
            for (int color = 0; color < 2; ++color) {
                for (const auto& s : nodes) {
                    if (s.color != color) continue;
                    double acc = 0.0;
                    for (int k = 0; k < s.nnbr; ++k) acc += u[s.nbr[k]];
                    double res = acc - s.nnbr * u[s.idx];
                    u[s.idx] += omega * res * inv_diag;
                }
            }
        }
        ++sweeps;
        if ((sweep & 7) == 7 || sweep == max_sweeps - 1) {
            double worst = 0.0;
            for (const auto& comp : f.comp) {
                const double* u = comp.data();
                for (const auto& s : nodes) {
                    double acc = 0.0;
                    for (int k = 0; k < s.nnbr; ++k) acc += u[s.nbr[k]];
                    worst = std::max(worst, std::abs(acc - s.nnbr * u[s.idx]));
                }
            }
            if (worst <= tol) converged = true;
        }
    }
    if (sweeps_out) *sweeps_out += sweeps;
    return converged;
}

inline double max_stencil_residual(const VectorField& f, const std::vector<StencilNode>& nodes) {
    double worst = 0.0;
    for (const auto& comp : f.comp) {
        const double* u = comp.data();
        for (const auto& s : nodes) {
            double acc = 0.0;
            for (int k = 0; k < s.nnbr; ++k) acc += u[s.nbr[k]];
            worst = std::max(worst, std::abs(acc - s.nnbr * u[s.idx]));
        }
    }
    return worst;
}

// Edge-based Dirichlet energy of the even extension: plate-lateral edges
// weigh once, everything else twice.
inline double edge_dirichlet_energy(const VectorField& f) {
    const Grid& g = f.grid;
    const int L = g.lateral_points(), V = g.vertical_points();
    double hpow = std::pow(g.h, g.n - 1);
    double total = 0.0;
    for (const auto& comp : f.comp) {
        const double* u = comp.data();
        double acc = 0.0;
        for (std::int64_t idx = 0; idx < g.node_count(); ++idx) {
            int ix, iy, j;
            g.decode(idx, ix, iy, j);
            double w_lat = (j == 0) ? 1.0 : 2.0;
            if (ix + 1 < L) {
                double d = u[g.lin(ix + 1, iy, j)] - u[idx];
                acc += w_lat * d * d;
            }
            if (g.n == 2 && iy + 1 < L) {
                double d = u[g.lin(ix, iy + 1, j)] - u[idx];
                acc += w_lat * d * d;
            }
            if (j + 1 < V) {
                double d = u[g.lin(ix, iy, j + 1)] - u[idx];
                acc += 2.0 * d * d;
            }
        }
        total += acc;
    }
    return total * hpow;
}

// Same bilinear form, evaluated for two scalar fields (used by the harmonic
// replacement orthogonality check).
inline double edge_bilinear(const Grid& g, const std::vector<double>& a,
                            const std::vector<double>& b) {
    const int L = g.lateral_points(), V = g.vertical_points();
    double hpow = std::pow(g.h, g.n - 1);
    double acc = 0.0;
    for (std::int64_t idx = 0; idx < g.node_count(); ++idx) {
        int ix, iy, j;
        g.decode(idx, ix, iy, j);
        double w_lat = (j == 0) ? 1.0 : 2.0;
        if (ix + 1 < L)
            acc += w_lat * (a[g.lin(ix + 1, iy, j)] - a[idx]) * (b[g.lin(ix + 1, iy, j)] - b[idx]);
        if (g.n == 2 && iy + 1 < L)
            acc += w_lat * (a[g.lin(ix, iy + 1, j)] - a[idx]) * (b[g.lin(ix, iy + 1, j)] - b[idx]);
        if (j + 1 < V)
            acc += 2.0 * (a[g.lin(ix, iy, j + 1)] - a[idx]) * (b[g.lin(ix, iy, j + 1)] - b[idx]);
    }
    return acc * hpow;
}

inline double plate_dual_area(const Grid& g, std::int64_t p) {
    int ix, iy;
    g.plate_decode(p, ix, iy);
    auto side = [&](int i) {
        if (i == 0 || i == 2 * g.N) return 0.5 * g.h;
        return g.h;
    };
    double a = side(ix);
    if (g.n == 2) a *= side(iy);
    return a;
}

inline double measure_term(const Grid& g, const PlateMask& mask) {
    double total = 0.0;
    for (std::int64_t p = 0; p < g.plate_count(); ++p)
        if (mask.at(p)) total += plate_dual_area(g, p);
    return total;
}

inline double objective(const SolveState& st) {
    return edge_dirichlet_energy(st.G) + measure_term(st.G.grid, st.mask);
}

namespace detail {

// Local edge energy over all edges incident to the marked nodes. Iterates the
// node list; each marked-marked edge is owned by its smaller endpoint.
inline double local_edge_energy(const VectorField& f, const std::vector<std::uint8_t>& marked,
                                const std::vector<std::int64_t>& marked_list) {
    const Grid& g = f.grid;
    const int L = g.lateral_points(), V = g.vertical_points();
    double hpow = std::pow(g.h, g.n - 1);
    double total = 0.0;
    for (const auto& comp : f.comp) {
        const double* u = comp.data();
        double acc = 0.0;
        for (std::int64_t idx : marked_list) {
            int ix, iy, j;
            g.decode(idx, ix, iy, j);
            double w_lat = (j == 0) ? 1.0 : 2.0;
            auto add = [&](std::int64_t other, double w) {
                double d = u[other] - u[idx];
                acc += w * d * d;
            };
            if (ix + 1 < L) add(g.lin(ix + 1, iy, j), w_lat);
            if (ix > 0 && !marked[std::size_t(g.lin(ix - 1, iy, j))])
                add(g.lin(ix - 1, iy, j), w_lat);
            if (g.n == 2) {
                if (iy + 1 < L) add(g.lin(ix, iy + 1, j), w_lat);
                if (iy > 0 && !marked[std::size_t(g.lin(ix, iy - 1, j))])
                    add(g.lin(ix, iy - 1, j), w_lat);
            }
            if (j + 1 < V) add(g.lin(ix, iy, j + 1), 2.0);
            if (j > 0 && !marked[std::size_t(g.lin(ix, iy, j - 1))]) add(g.lin(ix, iy, j - 1), 2.0);
        }
        total += acc;
    }
    return total * hpow;
}

// Edge energy carried by the edges incident to one node.
inline double incident_edge_energy(const VectorField& f, std::int64_t idx) {
    const Grid& g = f.grid;
    int ix, iy, j;
    g.decode(idx, ix, iy, j);
    double w_lat = (j == 0) ? 1.0 : 2.0;
    double hpow = std::pow(g.h, g.n - 1);
    double acc = 0.0;
    for (const auto& comp : f.comp) {
        const double* u = comp.data();
        auto add = [&](std::int64_t other, double w) {
            double d = u[other] - u[idx];
            acc += w * d * d;
        };
        if (ix > 0) add(g.lin(ix - 1, iy, j), w_lat);
        if (ix + 1 < g.lateral_points()) add(g.lin(ix + 1, iy, j), w_lat);
        if (g.n == 2) {
            if (iy > 0) add(g.lin(ix, iy - 1, j), w_lat);
            if (iy + 1 < g.lateral_points()) add(g.lin(ix, iy + 1, j), w_lat);
        }
        if (j > 0) add(g.lin(ix, iy, j - 1), 2.0);
        if (j + 1 < g.vertical_points()) add(g.lin(ix, iy, j + 1), 2.0);
    }
    return acc * hpow;
}

// Exact edge-energy change of pinning one node to zero with no re-relaxation.
inline double zeroing_delta_norelax(const VectorField& f, std::int64_t idx) {
    const Grid& g = f.grid;
    int ix, iy, j;
    g.decode(idx, ix, iy, j);
    double w_lat = (j == 0) ? 1.0 : 2.0;
    double hpow = std::pow(g.h, g.n - 1);
    double acc = 0.0;
    for (const auto& comp : f.comp) {
        const double* u = comp.data();
        auto add = [&](std::int64_t other, double w) {
            double d0 = u[other] - u[idx];
            acc += w * (u[other] * u[other] - d0 * d0);
        };
        if (ix > 0) add(g.lin(ix - 1, iy, j), w_lat);
        if (ix + 1 < g.lateral_points()) add(g.lin(ix + 1, iy, j), w_lat);
        if (g.n == 2) {
            if (iy > 0) add(g.lin(ix, iy - 1, j), w_lat);
            if (iy + 1 < g.lateral_points()) add(g.lin(ix, iy + 1, j), w_lat);
        }
        if (j > 0) add(g.lin(ix, iy, j - 1), 2.0);
        if (j + 1 < g.vertical_points()) add(g.lin(ix, iy, j + 1), 2.0);
    }
    return acc * hpow;
}

// Stencil restricted to an explicit node list (relaxable roles only).
inline void build_stencil_list(const Grid& g, const std::vector<NodeRole>& roles,
                               const std::vector<std::int64_t>& list,
                               std::vector<StencilNode>& out) {
    out.clear();
    for (std::int64_t idx : list) {
        NodeRole r = roles[std::size_t(idx)];
        if (r == NodeRole::Dirichlet || r == NodeRole::PlateZero) continue;
        int ix, iy, j;
        g.decode(idx, ix, iy, j);
        StencilNode s;
        s.idx = idx;
        s.color = std::uint8_t((ix + iy + j) & 1);
        s.nbr[s.nnbr++] = g.lin(ix - 1, iy, j);
        s.nbr[s.nnbr++] = g.lin(ix + 1, iy, j);
        if (g.n == 2) {
            s.nbr[s.nnbr++] = g.lin(ix, iy - 1, j);
            s.nbr[s.nnbr++] = g.lin(ix, iy + 1, j);
        }
        if (j == 0) {
            s.nbr[s.nnbr++] = g.lin(ix, iy, 1);
            s.nbr[s.nnbr++] = g.lin(ix, iy, 1);
        } else {
            s.nbr[s.nnbr++] = g.lin(ix, iy, j - 1);
            s.nbr[s.nnbr++] = g.lin(ix, iy, j + 1);
        }
        out.push_back(s);
    }
}

} // namespace detail

// Harmonic replacement of component i inside a plate-centered ball: solves
// the discrete Laplace equation on the strictly interior nodes (even
// reflection on the plate, no positivity constraint) with the original
// values outside as boundary data.
inline std::vector<double> harmonic_replacement(const VectorField& f, int i, const Ball& ball,
                                                double relax_tol = 1e-9, int max_sweeps = 40000) {
    const Grid& g = f.grid;
    if (!ball_inside_box(g, ball))
        throw std::invalid_argument("harmonic_replacement: ball touches the box boundary");
    std::vector<NodeRole> roles(std::size_t(g.node_count()), NodeRole::Interior);
    for (std::int64_t idx = 0; idx < g.node_count(); ++idx) {
        int ix, iy, j;
        g.decode(idx, ix, iy, j);
        if (ix == 0 || ix == 2 * g.N || j == g.N || (g.n == 2 && (iy == 0 || iy == 2 * g.N)))
            roles[std::size_t(idx)] = NodeRole::Dirichlet;
    }
    const double r2 = ball.radius * ball.radius;
    std::vector<StencilNode> nodes;
    build_stencil(g, roles, [&](std::int64_t idx, int, int, int) {
        return dist2(g.point(idx), ball.center, g.n + 1) < r2;
    }, nodes);

    VectorField tmp;
    tmp.grid = g;
    tmp.comp.push_back(f.comp[std::size_t(i)]);
    bool ok = relax_nodes(tmp, nodes, sor_omega(g), relax_tol, max_sweeps);
    if (!ok) throw std::runtime_error("harmonic_replacement: relaxation budget exhausted");
    return tmp.comp[0];
}

// Relax all components at fixed mask. Residual contract only; J does not
// increase because the relaxed state minimizes the edge energy at fixed
// constraints.
inline void relax_components(SolveState& st, const SolverConfig& cfg) {
    const Grid& g = st.G.grid;
    std::vector<StencilNode> nodes;
    build_stencil(g, st.roles, [](std::int64_t, int, int, int) { return true; }, nodes);
    bool ok = relax_nodes(st.G, nodes, sor_omega(g), cfg.relax_tol, cfg.max_sweeps,
                          &st.sweeps_total);
    if (!ok) st.relax_warning = true;
}

namespace detail {

struct FlipScratch {
    std::vector<std::uint8_t> marked;
    std::vector<std::int64_t> marked_list;
    std::vector<std::vector<double>> saved;
    std::vector<StencilNode> patch;
};

// Toggle plate node p, re-relax the surrounding patch, and return the exact
// objective change of the modified state. The flip is kept only when the
// change is below the keep threshold; otherwise the state is restored.
inline double tentative_flip(SolveState& st, const SolverConfig& cfg, std::int64_t p,
                             double keep_below, FlipScratch& ws, bool* kept = nullptr) {
    const Grid& g = st.G.grid;
    int px, py;
    g.plate_decode(p, px, py);
    std::uint8_t oldbit = st.mask.v[std::size_t(p)];
    std::uint8_t newbit = oldbit ? 0 : 1;
    std::int64_t pnode = g.plate_to_node(p);

    if (ws.marked.size() != std::size_t(g.node_count()))
        ws.marked.assign(std::size_t(g.node_count()), 0);
    ws.saved.resize(std::size_t(g.m));
    ws.marked_list.clear();

    int R = cfg.patch_radius;
    int x0 = std::max(1, px - R), x1 = std::min(2 * g.N - 1, px + R);
    int y0 = 0, y1 = 0;
    if (g.n == 2) {
        y0 = std::max(1, py - R);
        y1 = std::min(2 * g.N - 1, py + R);
    }
    int j1 = std::min(g.N - 1, R);
    for (int ix = x0; ix <= x1; ++ix)
        for (int iy = y0; iy <= y1; ++iy)
            for (int j = 0; j <= j1; ++j) {
                std::int64_t idx = g.lin(ix, iy, j);
                NodeRole r = st.roles[std::size_t(idx)];
                if (r == NodeRole::Dirichlet) continue;
                if (r == NodeRole::PlateZero && idx != pnode) continue;
                ws.marked[std::size_t(idx)] = 1;
                ws.marked_list.push_back(idx);
            }
    if (!ws.marked[std::size_t(pnode)]) {
        ws.marked[std::size_t(pnode)] = 1;
        ws.marked_list.push_back(pnode);
    }

    for (int i = 0; i < g.m; ++i) {
        ws.saved[std::size_t(i)].resize(ws.marked_list.size());
        for (std::size_t k = 0; k < ws.marked_list.size(); ++k)
            ws.saved[std::size_t(i)][k] =
                st.G.comp[std::size_t(i)][std::size_t(ws.marked_list[k])];
    }

    double e_before = local_edge_energy(st.G, ws.marked, ws.marked_list);

    st.mask.v[std::size_t(p)] = newbit;
    st.roles[std::size_t(pnode)] = newbit ? NodeRole::PlateFree : NodeRole::PlateZero;
    if (!newbit)
        for (int i = 0; i < g.m; ++i) st.G.comp[std::size_t(i)][std::size_t(pnode)] = 0.0;

    build_stencil_list(g, st.roles, ws.marked_list, ws.patch);
    relax_nodes(st.G, ws.patch, sor_omega(g), cfg.relax_tol, cfg.patch_sweeps, &st.sweeps_total);

    double e_after = local_edge_energy(st.G, ws.marked, ws.marked_list);
    double dJ = (e_after - e_before) + (newbit ? 1.0 : -1.0) * plate_dual_area(g, p);

    bool keep = dJ < keep_below;
    if (!keep) {
        st.mask.v[std::size_t(p)] = oldbit;
        st.roles[std::size_t(pnode)] = oldbit ? NodeRole::PlateFree : NodeRole::PlateZero;
        for (int i = 0; i < g.m; ++i)
            for (std::size_t k = 0; k < ws.marked_list.size(); ++k)
                st.G.comp[std::size_t(i)][std::size_t(ws.marked_list[k])] =
                    ws.saved[std::size_t(i)][k];
    }
    if (kept) *kept = keep;
    for (std::int64_t idx : ws.marked_list) ws.marked[std::size_t(idx)] = 0;
    return dJ;
}

} // namespace detail

// Patch-local objective change of toggling one plate node; the state is left
// untouched. This is the quantity flip_pass accepts on.
inline double flip_delta_patch(SolveState& st, const SolverConfig& cfg, std::int64_t p) {
    detail::FlipScratch ws;
    return detail::tentative_flip(st, cfg, p, -std::numeric_limits<double>::infinity(), ws);
}

// One deterministic pass of tentative mask flips. Each candidate toggles one
// interior plate node, re-relaxes a patch of radius patch_radius cells, and
// keeps the flip only when the objective drops by more than relax_tol.
inline int flip_pass(SolveState& st, const SolverConfig& cfg) {
    const Grid& g = st.G.grid;

    std::vector<std::int64_t> order;
    order.reserve(std::size_t(g.plate_count()));
    for (std::int64_t p = 0; p < g.plate_count(); ++p) {
        int ix, iy;
        g.plate_decode(p, ix, iy);
        if (g.on_lateral_boundary(ix, iy)) continue;
        order.push_back(p);
    }
    if (cfg.flip_pass_order == "random") {
        std::mt19937 rng(cfg.seed + unsigned(st.outer_iters));
        std::shuffle(order.begin(), order.end(), rng);
    }

    detail::FlipScratch ws;
    int accepted = 0;
    for (std::int64_t p : order) {
        std::uint8_t oldbit = st.mask.v[std::size_t(p)];
        std::int64_t pnode = g.plate_to_node(p);
        double dual = plate_dual_area(g, p);

        // Pre-screen hopeless candidates before paying for a patch re-solve.
        // Pinning a node to zero costs at least 4% of its no-relaxation energy
        // increment; freeing a node relieves at most a small multiple of its
        // incident edge energy.
        if (oldbit) {
            double d0 = detail::zeroing_delta_norelax(st.G, pnode);
            if (0.04 * d0 - dual > cfg.relax_tol) continue;
        } else {
            if (detail::incident_edge_energy(st.G, pnode) < 0.25 * dual) continue;
        }

        bool kept = false;
        detail::tentative_flip(st, cfg, p, -cfg.relax_tol, ws, &kept);
        if (kept) ++accepted;
    }
    st.flips_total += accepted;
    return accepted;
}

// Exact objective change of a single forced flip followed by a full
// re-relaxation; used to audit the local patch estimate.
inline double full_flip_delta(const SolveState& st, const SolverConfig& cfg, std::int64_t p) {
    SolveState copy = st;
    const Grid& g = copy.G.grid;
    double before = objective(copy);
    std::uint8_t bit = copy.mask.v[std::size_t(p)] ? 0 : 1;
    copy.mask.v[std::size_t(p)] = bit;
    std::int64_t pnode = g.plate_to_node(p);
    copy.roles[std::size_t(pnode)] = bit ? NodeRole::PlateFree : NodeRole::PlateZero;
    if (!bit)
        for (int i = 0; i < g.m; ++i) copy.G.comp[std::size_t(i)][std::size_t(pnode)] = 0.0;
    relax_components(copy, cfg);
    return objective(copy) - before;
}

inline SolveState solve(const Grid& grid,
                        const std::function<void(const Vec&, std::vector<double>&)>& phi,
                        const SolverConfig& cfg,
                        std::optional<PlateMask> init_mask = std::nullopt) {
    SolveState st;
    st.G = sample_field(grid, phi);
    st.mask = init_mask.value_or(full_mask(grid));

    // Degenerate data short-circuits to the zero state.
    double data_max = 0.0;
    for (std::int64_t idx = 0; idx < grid.node_count(); ++idx) {
        int ix, iy, j;
        grid.decode(idx, ix, iy, j);
        if (ix == 0 || ix == 2 * grid.N || j == grid.N ||
            (grid.n == 2 && (iy == 0 || iy == 2 * grid.N)))
            for (int i = 0; i < grid.m; ++i)
                data_max = std::max(data_max, std::abs(st.G.comp[std::size_t(i)][std::size_t(idx)]));
    }
    if (data_max == 0.0) {
        st.G = zero_field(grid);
        st.mask = empty_mask(grid);
        st.roles = node_roles(grid, st.mask);
        st.energy_trace.push_back(0.0);
        return st;
    }

    if (!init_mask) {
        // Harmonic extension of the data (free plate), then threshold the trace.
        st.roles = node_roles(grid, full_mask(grid));
        relax_components(st, cfg);
        st.mask = threshold_mask(st.G, default_mask_threshold(grid));
    }
    st.roles = node_roles(grid, st.mask);
    for (std::int64_t p = 0; p < grid.plate_count(); ++p) {
        std::int64_t pnode = grid.plate_to_node(p);
        if (st.roles[std::size_t(pnode)] == NodeRole::PlateZero)
            for (int i = 0; i < grid.m; ++i) st.G.comp[std::size_t(i)][std::size_t(pnode)] = 0.0;
    }

    bool done = false;
    for (int outer = 0; outer < cfg.max_outer && !done; ++outer) {
        st.outer_iters = outer + 1;
        relax_components(st, cfg);
        st.energy_trace.push_back(objective(st));
        int flips = flip_pass(st, cfg);
        if (flips == 0 && !st.relax_warning) done = true;
    }
    if (!done) st.budget_exhausted = true;
    return st;
}

inline SolveState solve_profile(const Grid& grid, const ProfileSpec& spec,
                                const SolverConfig& cfg) {
    validate(spec, grid.n, grid.m);
    return solve(grid, [&](const Vec& X, std::vector<double>& out) {
        eval_profile(spec, X, grid.n, out);
    }, cfg);
}

} // namespace thinfb
