// Closed-form reference fields: the half-plane ground state U (real part of
// sqrt(z)), its translates/rotations/amplitudes times a unit vector in R^m,
// and the translate-family comparison sub/supersolutions.
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "thinfb/geometry.hpp"

namespace thinfb {

// U(t,s) = Re sqrt(t+is) = r^{1/2} cos(theta/2), theta = atan2(s,t) in
// [-pi,pi]. Vanishes exactly on {t <= 0, s = 0}.
inline double eval_U(double t, double s) {
    double r = std::hypot(t, s);
    if (r == 0.0) return 0.0;
    double theta = std::atan2(s, t);
    return std::sqrt(r) * std::cos(0.5 * theta);
}

// |∇U|^2 at distance rho from the tip in the (t,s) plane: |(sqrt z)'|^2 = 1/(4|z|).
inline double grad_U_sq(double t, double s) {
    double r = std::hypot(t, s);
    if (r == 0.0) throw std::domain_error("grad_U_sq: singular at the origin");
    return 0.25 / r;
}

struct ProfileSpec {
    enum class Kind { halfplane, comparison };
    Kind kind = Kind::halfplane;
    double alpha = 1.0;          // amplitude, > 0
    std::vector<double> nu;      // unit direction in R^n
    double shift = 0.0;          // free boundary at <x,nu> = shift
    std::vector<double> xi;      // unit direction in R^m
};

inline void validate(const ProfileSpec& s, int n, int m) {
    if (!(s.alpha > 0.0)) throw std::invalid_argument("profile: alpha must be positive");
    if (int(s.nu.size()) != n) throw std::invalid_argument("profile: nu must have n entries");
    if (int(s.xi.size()) != m) throw std::invalid_argument("profile: xi must have m entries");
    double nn = 0.0, nx = 0.0;
    for (double v : s.nu) nn += v * v;
    for (double v : s.xi) nx += v * v;
    if (std::abs(nn - 1.0) > 1e-9) throw std::invalid_argument("profile: nu must be a unit vector");
    if (std::abs(nx - 1.0) > 1e-9) throw std::invalid_argument("profile: xi must be a unit vector");
}

inline ProfileSpec halfplane_profile(double alpha, std::vector<double> nu, double shift,
                                     std::vector<double> xi) {
    ProfileSpec s;
    s.kind = ProfileSpec::Kind::halfplane;
    s.alpha = alpha;
    s.nu = std::move(nu);
    s.shift = shift;
    s.xi = std::move(xi);
    return s;
}

inline ProfileSpec comparison_profile(double alpha, std::vector<double> nu, double shift,
                                      std::vector<double> xi) {
    ProfileSpec s = halfplane_profile(alpha, std::move(nu), shift, std::move(xi));
    s.kind = ProfileSpec::Kind::comparison;
    return s;
}

// xi * alpha * U(<x,nu> - shift, x_{n+1}).
inline void eval_profile(const ProfileSpec& s, const Vec& X, int n, std::vector<double>& out) {
    double t = -s.shift;
    for (int k = 0; k < n; ++k) t += s.nu[k] * X[k];
    double u = s.alpha * eval_U(t, X[n]);
    out.resize(s.xi.size());
    for (std::size_t i = 0; i < s.xi.size(); ++i) out[i] = s.xi[i] * u;
}

inline std::vector<double> eval_profile(const ProfileSpec& s, const Vec& X, int n) {
    std::vector<double> out;
    eval_profile(s, X, n, out);
    return out;
}

// For the translate family the profiles are harmonic off their zero set, so
// strictness is carried entirely by the amplitude.
inline bool is_strict_subsolution(const ProfileSpec& s) {
    if (s.kind != ProfileSpec::Kind::comparison)
        throw std::invalid_argument("is_strict_subsolution: comparison profiles only");
    return s.alpha > 1.0;
}

inline bool is_strict_supersolution(const ProfileSpec& s) {
    if (s.kind != ProfileSpec::Kind::comparison)
        throw std::invalid_argument("is_strict_supersolution: comparison profiles only");
    return s.alpha < 1.0;
}

} // namespace thinfb
