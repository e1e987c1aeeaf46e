#pragma once

#include "pmt/error.hpp"
#include "pmt/grid.hpp"
#include "pmt/imaging.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace pmt {

enum class SeriesKind { intensity, contrast };

inline std::string_view to_string(SeriesKind k) { return k == SeriesKind::intensity ? "intensity" : "contrast"; }

inline SeriesKind parse_series_kind(std::string_view s) {
    if (s == "intensity") return SeriesKind::intensity;
    if (s == "contrast") return SeriesKind::contrast;
    throw ParseError("unknown series kind '" + std::string(s) + "'");
}

/// A stack of transverse images, one per plane of grid.z_planes.
struct DefocusSeries {
    Grid3 grid;
    Field3 values;
    SeriesKind kind = SeriesKind::contrast;
    ImagingConfig config;
    int orientation_id = 0;

    DefocusSeries() = default;
    DefocusSeries(Grid3 g, SeriesKind k, ImagingConfig c, double fill = 0.0, int orientation = 0)
        : grid(std::move(g)), values(grid.nx(), grid.ny(), grid.nz(), fill), kind(k), config(c),
          orientation_id(orientation) {}

    double at(std::size_t i, std::size_t j, std::size_t k) const { return values(i, j, k); }
};

/// K = 1 - I/I_in and its inverse.
inline DefocusSeries convert_kind(const DefocusSeries& s, SeriesKind target) {
    if (s.kind == target) return s;
    DefocusSeries out = s;
    out.kind = target;
    const double iin = s.config.incident_intensity;
    if (target == SeriesKind::contrast) {
        for (auto& v : out.values.values) v = 1.0 - v / iin;
    } else {
        for (auto& v : out.values.values) v = (1.0 - v) * iin;
    }
    return out;
}

// ---- .dsf container -------------------------------------------------------

namespace detail {
inline std::string format_number(double v) {
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
}

inline void append_le_float(std::string& out, float f) {
    auto bits = std::bit_cast<std::uint32_t>(f);
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFFu));
}

inline float read_le_float(const unsigned char* p) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(p[b]) << (8 * b);
    return std::bit_cast<float>(bits);
}
}  // namespace detail

/// Header of `key=value` lines, an empty line, then nx*ny*nz little-endian float32 values
/// with k outermost and i innermost.
inline std::string encode_dsf(const DefocusSeries& s) {
    using detail::format_number;
    const auto& g = s.grid;
    std::ostringstream h;
    h << "nx=" << g.nx() << "\nny=" << g.ny() << "\nnz=" << g.nz() << "\nx_step=" << format_number(g.x_step())
      << "\ny_step=" << format_number(g.y_step()) << "\nx_min=" << format_number(g.x_min())
      << "\ny_min=" << format_number(g.y_min()) << "\nz_planes=";
    for (std::size_t k = 0; k < g.nz(); ++k) h << (k ? "," : "") << format_number(g.z(k));
    const auto& c = s.config;
    h << "\nkind=" << to_string(s.kind) << "\nenergy_keV=" << format_number(c.energy_keV)
      << "\naperture_mrad=" << (c.aperture_mrad ? format_number(*c.aperture_mrad) : "unlimited")
      << "\nthermal_rms=" << format_number(c.thermal_rms)
      << "\ndose=" << (c.dose ? format_number(*c.dose) : "noiseless") << "\nseed=" << c.rng_seed
      << "\norientation_id=" << s.orientation_id << "\nincident_intensity=" << format_number(c.incident_intensity)
      << "\nforward_method=" << to_string(c.forward_method) << "\n\n";
    std::string out = h.str();
    out.reserve(out.size() + 4 * s.values.size());
    for (double v : s.values.values) detail::append_le_float(out, static_cast<float>(v));
    return out;
}

inline DefocusSeries decode_dsf(std::string_view bytes) {
    const auto split = bytes.find("\n\n");
    if (split == std::string_view::npos) throw ParseError("dsf: missing blank line after header");
    std::map<std::string, std::string, std::less<>> kv;
    std::istringstream header{std::string(bytes.substr(0, split + 1))};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(header, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("dsf: expected key=value", line_no);
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    auto get = [&](std::string_view key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw ParseError("dsf: missing key " + std::string(key));
        return it->second;
    };
    auto num = [&](std::string_view key) {
        const auto& v = get(key);
        try {
            std::size_t used = 0;
            double d = std::stod(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
            return d;
        } catch (const std::exception&) {
            throw ParseError("dsf: bad number for " + std::string(key) + ": " + v);
        }
    };
    auto count = [&](std::string_view key) {
        const double d = num(key);
        if (d < 1 || d != std::floor(d)) throw ParseError("dsf: bad count for " + std::string(key));
        return static_cast<std::size_t>(d);
    };
    std::vector<double> z;
    {
        std::istringstream zs(get("z_planes"));
        std::string item;
        while (std::getline(zs, item, ',')) z.push_back(std::stod(item));
    }
    const auto nx = count("nx"), ny = count("ny"), nz = count("nz");
    if (z.size() != nz) throw ParseError("dsf: z_planes length differs from nz");

    ImagingConfig c;
    c.energy_keV = num("energy_keV");
    if (get("aperture_mrad") != "unlimited") c.aperture_mrad = num("aperture_mrad");
    c.thermal_rms = num("thermal_rms");
    if (get("dose") != "noiseless") c.dose = num("dose");
    c.rng_seed = static_cast<std::uint64_t>(std::stoull(get("seed")));
    if (kv.count("incident_intensity")) c.incident_intensity = num("incident_intensity");
    if (kv.count("forward_method")) c.forward_method = parse_forward_method(kv["forward_method"]);

    DefocusSeries s(Grid3(nx, ny, num("x_step"), num("y_step"), num("x_min"), num("y_min"), std::move(z)),
                    parse_series_kind(get("kind")), c, 0.0, static_cast<int>(num("orientation_id")));
    const auto payload = bytes.substr(split + 2);
    if (payload.size() != 4 * s.values.size())
        throw ParseError("dsf: payload holds " + std::to_string(payload.size()) + " bytes, expected " +
                         std::to_string(4 * s.values.size()));
    const auto* p = reinterpret_cast<const unsigned char*>(payload.data());
    for (std::size_t n = 0; n < s.values.size(); ++n) s.values.values[n] = detail::read_le_float(p + 4 * n);
    return s;
}

// ---- PGM slice export -----------------------------------------------------

/// 8-bit binary PGM of a width x height image given row-major, min-max normalized.
inline std::string encode_pgm(const std::vector<double>& image, std::size_t width, std::size_t height) {
    const auto [lo_it, hi_it] = std::minmax_element(image.begin(), image.end());
    const double lo = *lo_it, span = *hi_it - *lo_it;
    std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    for (double v : image) {
        const double t = span > 0 ? (v - lo) / span : 0.0;
        out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * t))));
    }
    return out;
}

/// (x, y) slice at plane k; rows run along y.
inline std::string pgm_xy_slice(const DefocusSeries& s, std::size_t k) {
    const auto p = s.values.plane(k);
    return encode_pgm(std::vector<double>(p.begin(), p.end()), s.grid.nx(), s.grid.ny());
}

/// (x, z) slice at row j; rows run along z.
inline std::string pgm_xz_slice(const DefocusSeries& s, std::size_t j) {
    std::vector<double> img;
    img.reserve(s.grid.nx() * s.grid.nz());
    for (std::size_t k = 0; k < s.grid.nz(); ++k)
        for (std::size_t i = 0; i < s.grid.nx(); ++i) img.push_back(s.values(i, j, k));
    return encode_pgm(img, s.grid.nx(), s.grid.nz());
}

}  // namespace pmt
