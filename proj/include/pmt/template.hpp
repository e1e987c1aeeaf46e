#pragma once

#include "pmt/error.hpp"
#include "pmt/forward.hpp"
#include "pmt/grid.hpp"
#include "pmt/io.hpp"
#include "pmt/series.hpp"
#include "pmt/species.hpp"
#include "pmt/structure.hpp"

#include <cmath>
#include <optional>
#include <sstream>
#include <string>

namespace pmt {

/// Truncated single-atom defocus pattern. center is the voxel of the atom inside block.
struct Template {
    std::size_t species_index = 0;
    Field3 block;
    Index3 center;
    double x_step = 0, y_step = 0, z_step = 0;
    SeriesKind kind = SeriesKind::contrast;

    std::size_t wx() const { return block.nx; }
    std::size_t wy() const { return block.ny; }
    std::size_t wz() const { return block.nz; }

    /// Physical extents in Angstrom, (w - 1) * step per axis.
    double extent_x() const { return static_cast<double>(wx() - 1) * x_step; }
    double extent_z() const { return static_cast<double>(wz() - 1) * z_step; }
};

/// Parameters of template generation.
struct TemplateSettings {
    double transverse_halfwidth = 0.5;  // Angstrom
    double axial_range = 30.0;          // template series spans center +- axial_range
    /// Axial truncation never exceeds center +- this many Angstrom; nullopt: no cap.
    std::optional<double> max_axial_halfwidth = 3.0;
};

/// Grid for a single-atom template series: the test grid's transverse sampling over a square
/// of the given side, with planes at the test spacing spanning side/2 +- axial_range. The
/// atom sits on the center voxel (side/2, side/2, side/2).
inline Grid3 template_grid(const Grid3& test, double side, double axial_range) {
    if (!test.uniform_z() || test.nz() < 2) throw ConfigError("template grid needs uniformly spaced test planes");
    const double dz = test.z_step();
    const auto half_x = static_cast<std::size_t>(std::llround(0.5 * side / test.x_step()));
    const auto half_y = static_cast<std::size_t>(std::llround(0.5 * side / test.y_step()));
    const auto half_z = static_cast<std::size_t>(std::ceil(axial_range / dz - 1e-9));
    const double c = 0.5 * side;
    std::vector<double> z(2 * half_z + 1);
    for (std::size_t k = 0; k < z.size(); ++k) z[k] = c + (static_cast<double>(k) - static_cast<double>(half_z)) * dz;
    return Grid3(2 * half_x, 2 * half_y, test.x_step(), test.y_step(), c - static_cast<double>(half_x) * test.x_step(),
                 c - static_cast<double>(half_y) * test.y_step(), std::move(z));
}

/// Index of the voxel nearest to the grid's transverse center and middle plane.
inline Index3 center_voxel(const Grid3& g) { return {g.nx() / 2, g.ny() / 2, g.nz() / 2}; }

/// Noiseless defocus series of one atom of species n placed on the grid's center voxel,
/// returned as contrast.
inline DefocusSeries generate_template(const SpeciesTable& table, std::size_t n, ImagingConfig config,
                                       const Grid3& grid) {
    if (n >= table.size()) throw DomainError("species index out of range");
    config.dose.reset();
    const Vec3 p = grid.coordinate(center_voxel(grid));
    if (config.forward_method != ForwardMethod::multislice) {
        const Structure s{2 * std::max({p.x, p.y, p.z}), {{n, p}}};
        return convert_kind(forward_series(s, table, config, grid), SeriesKind::contrast);
    }
    // Multislice needs a slab holding the atom at its middle and a whole number of slices;
    // free-space propagation is invariant under a common z shift of atom and planes.
    const double d = config.slice_thickness;
    const double slab = 2 * std::ceil(p.z / d - 1e-9) * d;
    const double shift = 0.5 * slab - p.z;
    const Structure s{slab, {{n, {p.x, p.y, p.z + shift}}}};
    std::vector<double> z(grid.z_planes().begin(), grid.z_planes().end());
    for (auto& v : z) v += shift;
    const Grid3 shifted(grid.nx(), grid.ny(), grid.x_step(), grid.y_step(), grid.x_min(), grid.y_min(), std::move(z));
    auto out = convert_kind(multislice_series(s, table, config, shifted), SeriesKind::contrast);
    out.grid = grid;
    return out;
}

/// Crops a single-atom series around center_voxel. Axially the block runs from the first
/// local extremum of the on-axis profile below the center to the first above it, padded by
/// one plane on each side (and limited by max_axial_halfwidth when given); transversely it
/// spans +- transverse_halfwidth rounded up to whole voxels.
inline Template auto_truncate(const DefocusSeries& series, Index3 center, double transverse_halfwidth,
                              std::optional<double> max_axial_halfwidth = std::nullopt, std::size_t species_index = 0) {
    const auto& g = series.grid;
    if (center.i >= g.nx() || center.j >= g.ny() || center.k >= g.nz()) throw DomainError("center voxel outside series");
    if (!g.uniform_z() || g.nz() < 3) throw TruncationError("template series needs at least 3 uniform planes");

    std::vector<double> profile(g.nz());
    for (std::size_t k = 0; k < g.nz(); ++k) profile[k] = series.values(center.i, center.j, k);
    auto is_extremum = [&](std::size_t k) {
        const double a = profile[k - 1], b = profile[k], c = profile[k + 1];
        return (b > a && b > c) || (b < a && b < c);
    };
    std::optional<std::size_t> below, above;
    for (std::size_t k = center.k; k-- > 1;)
        if (k + 1 < g.nz() && is_extremum(k)) {
            below = k;
            break;
        }
    for (std::size_t k = center.k + 1; k + 1 < g.nz(); ++k)
        if (is_extremum(k)) {
            above = k;
            break;
        }
    if (!below || !above)
        throw TruncationError("no axial extremum on " + std::string(!below ? "the lower" : "the upper") +
                              " side of the atom; extend the template z range");

    std::size_t k_lo = *below > 0 ? *below - 1 : 0;
    std::size_t k_hi = std::min(*above + 1, g.nz() - 1);
    if (max_axial_halfwidth) {
        const auto cap = static_cast<std::size_t>(std::floor(*max_axial_halfwidth / g.z_step() + 1e-9));
        k_lo = std::max(k_lo, center.k >= cap ? center.k - cap : 0);
        k_hi = std::min(k_hi, center.k + cap);
    }

    const auto hx = static_cast<std::size_t>(std::ceil(transverse_halfwidth / g.x_step() - 1e-9));
    const auto hy = static_cast<std::size_t>(std::ceil(transverse_halfwidth / g.y_step() - 1e-9));
    if (center.i < hx || center.i + hx >= g.nx() || center.j < hy || center.j + hy >= g.ny())
        throw DomainError("transverse template window exceeds the series");

    Template t;
    t.species_index = species_index;
    t.kind = series.kind;
    t.x_step = g.x_step();
    t.y_step = g.y_step();
    t.z_step = g.z_step();
    t.block = Field3(2 * hx + 1, 2 * hy + 1, k_hi - k_lo + 1);
    t.center = {hx, hy, center.k - k_lo};
    for (std::size_t k = 0; k < t.block.nz; ++k)
        for (std::size_t j = 0; j < t.block.ny; ++j)
            for (std::size_t i = 0; i < t.block.nx; ++i)
                t.block(i, j, k) = series.values(center.i - hx + i, center.j - hy + j, k_lo + k);
    return t;
}

/// Template for species n matching a test grid: generated on template_grid and truncated.
inline Template make_template(const SpeciesTable& table, std::size_t n, const ImagingConfig& config,
                              const Grid3& test_grid, double side, const TemplateSettings& settings = {}) {
    const auto grid = template_grid(test_grid, side, settings.axial_range);
    const auto series = generate_template(table, n, config, grid);
    return auto_truncate(series, center_voxel(grid), settings.transverse_halfwidth, settings.max_axial_halfwidth, n);
}

// ---- serialization ---------------------------------------------------------

/// The block as a .dsf series whose origin places the center voxel at the origin.
inline DefocusSeries template_as_series(const Template& t, const ImagingConfig& config) {
    std::vector<double> z(t.wz());
    for (std::size_t k = 0; k < z.size(); ++k)
        z[k] = (static_cast<double>(k) - static_cast<double>(t.center.k)) * t.z_step;
    Grid3 g(t.wx(), t.wy(), t.x_step, t.y_step, -static_cast<double>(t.center.i) * t.x_step,
            -static_cast<double>(t.center.j) * t.y_step, std::move(z));
    DefocusSeries s(std::move(g), t.kind, config);
    s.values = t.block;
    return s;
}

inline std::string encode_template_header(const Template& t, const SpeciesTable& table) {
    std::ostringstream h;
    h << "species_index=" << t.species_index << "\nspecies=" << table[t.species_index].symbol << "\ncenter="
      << t.center.i << "," << t.center.j << "," << t.center.k << "\nextents=" << t.wx() << "," << t.wy() << ","
      << t.wz() << "\n";
    return h.str();
}

/// Writes path (.dsf block) and path + ".tpl" (species and center sidecar).
inline void write_template(const std::filesystem::path& path, const Template& t, const SpeciesTable& table,
                           const ImagingConfig& config) {
    write_file_atomic(path, encode_dsf(template_as_series(t, config)));
    auto side = path;
    side += ".tpl";
    write_file_atomic(side, encode_template_header(t, table));
}

inline Template read_template(const std::filesystem::path& path, const SpeciesTable& table) {
    const auto series = decode_dsf(read_file(path));
    auto side = path;
    side += ".tpl";
    std::istringstream in(read_file(side));
    std::string line, symbol;
    Index3 center;
    bool have_center = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto eq = line.find('=');
        if (line.empty()) continue;
        if (eq == std::string::npos) throw ParseError("template header: expected key=value", line_no);
        const auto key = line.substr(0, eq), value = line.substr(eq + 1);
        if (key == "species") symbol = value;
        if (key == "center") {
            char c1, c2;
            std::istringstream v(value);
            if (!(v >> center.i >> c1 >> center.j >> c2 >> center.k)) throw ParseError("template header: bad center", line_no);
            have_center = true;
        }
    }
    if (symbol.empty() || !have_center) throw ParseError("template header needs species and center");
    Template t;
    t.species_index = table.index_of(symbol);
    t.block = series.values;
    t.center = center;
    t.kind = series.kind;
    t.x_step = series.grid.x_step();
    t.y_step = series.grid.y_step();
    t.z_step = series.grid.nz() > 1 ? series.grid.z_step() : 1.0;
    if (center.i >= t.wx() || center.j >= t.wy() || center.k >= t.wz()) throw ParseError("template center outside block");
    return t;
}

}  // namespace pmt
