// Binary field files and the CSV emitters. The field format is fixed:
// magic "THINFB1\0", little-endian u32 header (version, n, m, points per
// axis), f64 h and extent, m row-major f64 blocks (last axis fastest), then
// the plate mask as one byte per plate node.
#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "thinfb/analysis.hpp"
#include "thinfb/blowup.hpp"
#include "thinfb/energy.hpp"
#include "thinfb/field.hpp"
#include "thinfb/weiss.hpp"

namespace thinfb {

inline constexpr char kFieldMagic[8] = {'T', 'H', 'I', 'N', 'F', 'B', '1', '\0'};
inline constexpr std::uint32_t kFieldVersion = 1;

namespace detail {

inline void put_u32(std::string& buf, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = char((v >> (8 * i)) & 0xff);
    buf.append(b, 4);
}

inline void put_f64(std::string& buf, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = char((bits >> (8 * i)) & 0xff);
    buf.append(b, 8);
}

struct Cursor {
    const char* p;
    std::size_t left;
    void need(std::size_t k) {
        if (left < k) throw std::runtime_error("field file: truncated payload");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(std::uint8_t(p[i])) << (8 * i);
        p += 4;
        left -= 4;
        return v;
    }
    double f64() {
        need(8);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= std::uint64_t(std::uint8_t(p[i])) << (8 * i);
        double v;
        std::memcpy(&v, &bits, 8);
        p += 8;
        left -= 8;
        return v;
    }
};

} // namespace detail

inline std::string encode_field_file(const VectorField& f, const PlateMask& mask) {
    const Grid& g = f.grid;
    std::string buf;
    buf.append(kFieldMagic, 8);
    detail::put_u32(buf, kFieldVersion);
    detail::put_u32(buf, std::uint32_t(g.n));
    detail::put_u32(buf, std::uint32_t(g.m));
    for (int k = 0; k < g.n; ++k) detail::put_u32(buf, std::uint32_t(g.lateral_points()));
    detail::put_u32(buf, std::uint32_t(g.vertical_points()));
    detail::put_f64(buf, g.h);
    detail::put_f64(buf, g.extent);
    for (int i = 0; i < g.m; ++i)
        for (std::int64_t idx = 0; idx < g.node_count(); ++idx)
            detail::put_f64(buf, f.comp[std::size_t(i)][std::size_t(idx)]);
    for (std::int64_t p = 0; p < g.plate_count(); ++p)
        buf.push_back(mask.v[std::size_t(p)] ? '\1' : '\0');
    return buf;
}

inline void write_field_file(const std::string& path, const VectorField& f,
                             const PlateMask& mask) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("field file: cannot open for writing: " + path);
    std::string buf = encode_field_file(f, mask);
    out.write(buf.data(), std::streamsize(buf.size()));
    if (!out) throw std::runtime_error("field file: write failed: " + path);
}

struct LoadedField {
    VectorField field;
    PlateMask mask;
};

inline LoadedField decode_field_file(const std::string& buf) {
    if (buf.size() < 8 || std::memcmp(buf.data(), kFieldMagic, 8) != 0)
        throw std::runtime_error("field file: bad magic");
    detail::Cursor c{buf.data() + 8, buf.size() - 8};
    std::uint32_t version = c.u32();
    if (version != kFieldVersion) throw std::runtime_error("field file: unsupported version");
    std::uint32_t n = c.u32(), m = c.u32();
    if ((n != 1 && n != 2) || m < 1 || m > 64)
        throw std::runtime_error("field file: invalid dimensions");
    std::vector<std::uint32_t> axis(n + 1);
    for (std::uint32_t k = 0; k <= n; ++k) axis[k] = c.u32();
    double h = c.f64(), extent = c.f64();
    Grid g = make_grid(int(n), int(m), h, extent);
    for (std::uint32_t k = 0; k < n; ++k)
        if (axis[k] != std::uint32_t(g.lateral_points()))
            throw std::runtime_error("field file: axis count does not match h and extent");
    if (axis[n] != std::uint32_t(g.vertical_points()))
        throw std::runtime_error("field file: axis count does not match h and extent");

    LoadedField lf;
    lf.field = zero_field(g);
    for (int i = 0; i < g.m; ++i)
        for (std::int64_t idx = 0; idx < g.node_count(); ++idx)
            lf.field.comp[std::size_t(i)][std::size_t(idx)] = c.f64();
    lf.mask = empty_mask(g);
    c.need(std::size_t(g.plate_count()));
    for (std::int64_t p = 0; p < g.plate_count(); ++p) {
        char b = c.p[p];
        if (b != 0 && b != 1) throw std::runtime_error("field file: mask byte out of range");
        lf.mask.v[std::size_t(p)] = std::uint8_t(b);
    }
    c.p += g.plate_count();
    c.left -= std::size_t(g.plate_count());
    if (c.left != 0) throw std::runtime_error("field file: trailing bytes");
    return lf;
}

inline LoadedField read_field_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("field file: cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return decode_field_file(ss.str());
}

// --- CSV emitters -----------------------------------------------------------

inline std::string csv_number(double v) {
    std::ostringstream ss;
    ss << std::setprecision(17) << v;
    return ss.str();
}

inline std::string energy_csv_row(double r, const EnergyBreakdown& e) {
    return csv_number(r) + "," + csv_number(e.dirichlet) + "," + csv_number(e.plate_measure) +
           "," + csv_number(e.total) + "," + csv_number(e.boundary_l2);
}

inline void write_energy_csv(const std::string& path,
                             const std::vector<std::pair<double, EnergyBreakdown>>& rows) {
    std::ofstream out(path);
    out << "r,dirichlet,plate_measure,total,boundary_l2\n";
    for (const auto& [r, e] : rows) out << energy_csv_row(r, e) << "\n";
}

inline void write_energy_trace_csv(const std::string& path, const std::vector<double>& trace) {
    std::ofstream out(path);
    out << "iter,total_energy\n";
    for (std::size_t k = 0; k < trace.size(); ++k)
        out << k << "," << csv_number(trace[k]) << "\n";
}

inline void write_weiss_csv(const std::string& path, const WeissSeries& s) {
    std::ofstream out(path);
    out << "r,W,slope,deriv_lb\n";
    for (std::size_t k = 0; k < s.radii.size(); ++k) {
        out << csv_number(s.radii[k]) << "," << csv_number(s.W[k]) << ",";
        out << (k + 1 < s.radii.size() ? csv_number(s.slope[k]) : std::string(""));
        out << "," << csv_number(s.deriv_lb[k]) << "\n";
    }
}

inline std::string join_vec(const std::vector<double>& v, char sep = ';') {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s.push_back(sep);
        s += csv_number(v[i]);
    }
    return s;
}

inline void write_blowup_csv(const std::string& path, const BlowupSeries& s) {
    std::ofstream out(path);
    out << "r,alpha,nu,xi,dist_inf\n";
    for (std::size_t k = 0; k < s.scales.size(); ++k) {
        const ProfileFit& f = s.fits[k];
        out << csv_number(s.scales[k]) << "," << csv_number(f.alpha) << "," << join_vec(f.nu)
            << "," << join_vec(f.xi) << "," << csv_number(f.dist_inf) << "\n";
    }
}

} // namespace thinfb
