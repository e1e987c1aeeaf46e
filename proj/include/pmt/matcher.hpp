#pragma once

// Pattern-matching search: the L1 similarity coefficient between a test series and a
// shifted single-atom template, its map over all admissible shifts, and the greedy
// exclusion-aware search for a known number of atoms per species.

#include "pmt/error.hpp"
#include "pmt/grid.hpp"
#include "pmt/parallel.hpp"
#include "pmt/series.hpp"
#include "pmt/species.hpp"
#include "pmt/template.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace pmt {

/// intensity: C = 1 - sum|I_t - I_T| / sum(I_t + I_T).
/// contrast_abs: C = 1 - sum|K_t - K_T| / sum(|K_t| + |K_T|).
enum class ComparisonMode { intensity, contrast_abs };

inline std::string_view to_string(ComparisonMode m) {
    return m == ComparisonMode::intensity ? "intensity" : "contrast-abs";
}

inline ComparisonMode parse_comparison_mode(std::string_view s) {
    if (s == "intensity") return ComparisonMode::intensity;
    if (s == "contrast-abs" || s == "contrast_abs") return ComparisonMode::contrast_abs;
    throw ConfigError("unknown comparison mode '" + std::string(s) + "'");
}

inline SeriesKind kind_for(ComparisonMode m) {
    return m == ComparisonMode::intensity ? SeriesKind::intensity : SeriesKind::contrast;
}

/// Value marking excluded or inadmissible shifts in a similarity map.
inline constexpr double excluded_similarity = -1.0;

struct MatchResult {
    std::size_t species_index = 0;
    Vec3 position;  // Angstrom
    double similarity = 0;
    int orientation_id = 0;
    int source_orientation = 0;
};

struct SearchPlan {
    std::vector<std::size_t> counts;  // atoms per species, table order
    double exclusion_radius = 1.0;    // Angstrom
    ComparisonMode comparison = ComparisonMode::contrast_abs;
    bool refine = false;              // sub-voxel parabolic refinement of reported positions

    void validate(std::size_t n_species) const {
        if (counts.size() != n_species) throw ConfigError("search plan counts do not match the species table");
        if (!(exclusion_radius > 0)) throw ConfigError("exclusion radius must be positive");
    }
};

/// Template block converted to the comparison kind.
inline Field3 template_values(const Template& t, ComparisonMode mode, double incident_intensity) {
    Field3 f = t.block;
    const SeriesKind want = kind_for(mode);
    if (t.kind == want) return f;
    for (auto& v : f.values)
        v = want == SeriesKind::contrast ? 1.0 - v / incident_intensity : (1.0 - v) * incident_intensity;
    return f;
}

namespace detail {

inline void check_compatible(const DefocusSeries& test, const Template& t) {
    const auto& g = test.grid;
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-6 * std::max(std::abs(a), std::abs(b)); };
    if (!close(g.x_step(), t.x_step) || !close(g.y_step(), t.y_step))
        throw DomainError("template and test series use different transverse sampling");
    if (t.wz() > 1 && (!g.uniform_z() || !close(g.z_step(), t.z_step)))
        throw DomainError("template and test series use different plane spacing");
}

struct ShiftRange {
    std::size_t lo_i, hi_i, lo_j, hi_j, lo_k, hi_k;  // inclusive; empty when lo > hi
    bool empty() const { return lo_i > hi_i || lo_j > hi_j || lo_k > hi_k; }
};

inline ShiftRange admissible(const Grid3& g, const Template& t) {
    auto axis = [](std::size_t n, std::size_t w, std::size_t c, std::size_t& lo, std::size_t& hi) {
        lo = c;
        hi = n >= w ? n - w + c : 0;
        if (n < w) lo = 1, hi = 0;
    };
    ShiftRange r{};
    axis(g.nx(), t.wx(), t.center.i, r.lo_i, r.hi_i);
    axis(g.ny(), t.wy(), t.center.j, r.lo_j, r.hi_j);
    axis(g.nz(), t.wz(), t.center.k, r.lo_k, r.hi_k);
    return r;
}

/// Similarity with the template center on test voxel (i, j, k); the caller guarantees fit.
/// Sums run over the template block in (k, j, i) order.
inline double similarity_kernel(const Field3& test, const Field3& tpl, Index3 center, std::size_t i, std::size_t j,
                                std::size_t k, ComparisonMode mode) {
    const std::size_t i0 = i - center.i, j0 = j - center.j, k0 = k - center.k;
    double num = 0, den = 0;
    for (std::size_t c = 0; c < tpl.nz; ++c)
        for (std::size_t b = 0; b < tpl.ny; ++b) {
            const double* a_row = &test.values[test.offset(i0, j0 + b, k0 + c)];
            const double* t_row = &tpl.values[tpl.offset(0, b, c)];
            if (mode == ComparisonMode::contrast_abs) {
                for (std::size_t a = 0; a < tpl.nx; ++a) {
                    num += std::abs(a_row[a] - t_row[a]);
                    den += std::abs(a_row[a]) + std::abs(t_row[a]);
                }
            } else {
                for (std::size_t a = 0; a < tpl.nx; ++a) {
                    num += std::abs(a_row[a] - t_row[a]);
                    den += a_row[a] + t_row[a];
                }
            }
        }
    if (den == 0) return 1.0;  // both blocks vanish: a perfect match
    return 1.0 - num / den;
}

}  // namespace detail

/// Similarity coefficient for the template center placed on test voxel shift.
/// The test series must already be in the comparison kind of mode.
inline double similarity(const DefocusSeries& test, const Template& t, Index3 shift,
                         ComparisonMode mode = ComparisonMode::contrast_abs) {
    detail::check_compatible(test, t);
    if (test.kind != kind_for(mode)) throw DomainError("test series kind does not match the comparison mode");
    const auto r = detail::admissible(test.grid, t);
    if (r.empty() || shift.i < r.lo_i || shift.i > r.hi_i || shift.j < r.lo_j || shift.j > r.hi_j || shift.k < r.lo_k ||
        shift.k > r.hi_k)
        throw DomainError("template shifted outside the test series");
    const Field3 tpl = template_values(t, mode, test.config.incident_intensity);
    return detail::similarity_kernel(test.values, tpl, t.center, shift.i, shift.j, shift.k, mode);
}

/// Similarity at every admissible, non-excluded shift; other voxels hold excluded_similarity.
/// exclusion, when non-empty, has one byte per test voxel (nonzero = excluded).
inline Field3 similarity_map(const DefocusSeries& test, const Template& t, std::span<const std::uint8_t> exclusion = {},
                             ComparisonMode mode = ComparisonMode::contrast_abs) {
    detail::check_compatible(test, t);
    if (test.kind != kind_for(mode)) throw DomainError("test series kind does not match the comparison mode");
    const auto& g = test.grid;
    if (!exclusion.empty() && exclusion.size() != g.size()) throw DomainError("exclusion mask has the wrong size");
    Field3 map(g.nx(), g.ny(), g.nz(), excluded_similarity);
    const auto r = detail::admissible(g, t);
    if (r.empty()) return map;
    const Field3 tpl = template_values(t, mode, test.config.incident_intensity);
    const std::size_t rows_j = r.hi_j - r.lo_j + 1;
    const std::size_t rows = (r.hi_k - r.lo_k + 1) * rows_j;
    parallel_for(0, rows, [&](std::size_t row) {
        const std::size_t k = r.lo_k + row / rows_j, j = r.lo_j + row % rows_j;
        for (std::size_t i = r.lo_i; i <= r.hi_i; ++i) {
            const std::size_t off = g.offset(i, j, k);
            if (!exclusion.empty() && exclusion[off]) continue;
            map.values[off] = detail::similarity_kernel(test.values, tpl, t.center, i, j, k, mode);
        }
    });
    return map;
}

/// Largest admissible map value; ties go to the smallest (k, j, i). nullopt when none remains.
inline std::optional<std::size_t> argmax(const Field3& map, std::span<const std::uint8_t> exclusion = {}) {
    std::optional<std::size_t> best;
    for (std::size_t n = 0; n < map.values.size(); ++n) {
        const double v = map.values[n];
        if (v <= excluded_similarity) continue;
        if (!exclusion.empty() && exclusion[n]) continue;
        if (!best || v > map.values[*best]) best = n;
    }
    return best;
}

/// Marks every voxel within radius (Angstrom, inclusive) of p.
inline void exclude_ball(std::vector<std::uint8_t>& mask, const Grid3& g, Vec3 p, double radius) {
    const double r2 = radius * radius;
    for (std::size_t k = 0; k < g.nz(); ++k) {
        const double dz = g.z(k) - p.z;
        if (dz * dz > r2) continue;
        for (std::size_t j = 0; j < g.ny(); ++j) {
            const double dy = g.y(j) - p.y;
            if (dy * dy + dz * dz > r2) continue;
            for (std::size_t i = 0; i < g.nx(); ++i) {
                const double dx = g.x(i) - p.x;
                if (dx * dx + dy * dy + dz * dz <= r2) mask[g.offset(i, j, k)] = 1;
            }
        }
    }
}

struct SubvoxelPeak {
    Vec3 position;
    bool refined = false;
};

/// Vertex offset (in samples, clamped to +-0.5) of the parabola through (-1, a), (0, b), (1, c).
inline double parabolic_offset(double a, double b, double c) {
    const double den = a - 2 * b + c;
    if (den == 0) return 0.0;
    return std::clamp((a - c) / (2 * den), -0.5, 0.5);
}

/// Separable 3-point parabolic refinement of a map peak. A peak on the map boundary or next
/// to an excluded value is returned unrefined.
inline SubvoxelPeak refine_subvoxel(const Field3& map, const Grid3& g, Index3 peak) {
    SubvoxelPeak out{g.coordinate(peak), false};
    if (peak.i == 0 || peak.j == 0 || peak.k == 0 || peak.i + 1 >= g.nx() || peak.j + 1 >= g.ny() ||
        peak.k + 1 >= g.nz())
        return out;
    const double b = map(peak.i, peak.j, peak.k);
    const double xs[2] = {map(peak.i - 1, peak.j, peak.k), map(peak.i + 1, peak.j, peak.k)};
    const double ys[2] = {map(peak.i, peak.j - 1, peak.k), map(peak.i, peak.j + 1, peak.k)};
    const double zs[2] = {map(peak.i, peak.j, peak.k - 1), map(peak.i, peak.j, peak.k + 1)};
    for (double v : {xs[0], xs[1], ys[0], ys[1], zs[0], zs[1]})
        if (v <= excluded_similarity) return out;
    const double ox = parabolic_offset(xs[0], b, xs[1]);
    const double oy = parabolic_offset(ys[0], b, ys[1]);
    const double oz = parabolic_offset(zs[0], b, zs[1]);
    out.position.x += ox * g.x_step();
    out.position.y += oy * g.y_step();
    out.position.z += oz * (oz >= 0 ? g.z(peak.k + 1) - g.z(peak.k) : g.z(peak.k) - g.z(peak.k - 1));
    out.refined = true;
    return out;
}

/// Greedy search: for each species in table order, M_n successive maxima of its similarity
/// map. Every maximum excludes a ball of plan.exclusion_radius from all later steps, for the
/// same and for later species. The test series is converted to the comparison kind first.
/// Results are ordered by species, then by decreasing similarity.
inline std::vector<MatchResult> find_atoms(const DefocusSeries& test_in, std::span<const Template> templates,
                                           const SearchPlan& plan, const SpeciesTable& table) {
    plan.validate(table.size());
    const DefocusSeries test = convert_kind(test_in, kind_for(plan.comparison));
    const auto& g = test.grid;
    std::vector<std::uint8_t> excluded(g.size(), 0);
    std::vector<MatchResult> results;
    for (std::size_t n = 0; n < table.size(); ++n) {
        if (plan.counts[n] == 0) continue;
        const auto it = std::find_if(templates.begin(), templates.end(),
                                     [&](const Template& t) { return t.species_index == n; });
        if (it == templates.end()) throw ConfigError("no template for species " + table[n].symbol);
        const Field3 map = similarity_map(test, *it, {}, plan.comparison);
        for (std::size_t m = 0; m < plan.counts[n]; ++m) {
            const auto best = argmax(map, excluded);
            if (!best) throw ExhaustionError(table[n].symbol, m, plan.counts[n]);
            const Index3 peak = g.unravel(*best);
            MatchResult r;
            r.species_index = n;
            r.similarity = map.values[*best];
            r.position = plan.refine ? refine_subvoxel(map, g, peak).position : g.coordinate(peak);
            r.orientation_id = r.source_orientation = test.orientation_id;
            results.push_back(r);
            exclude_ball(excluded, g, g.coordinate(peak), plan.exclusion_radius);
        }
    }
    std::stable_sort(results.begin(), results.end(), [](const MatchResult& a, const MatchResult& b) {
        if (a.species_index != b.species_index) return a.species_index < b.species_index;
        return a.similarity > b.similarity;
    });
    return results;
}

// ---- match CSV ---------------------------------------------------------------

inline std::string encode_matches_csv(std::span<const MatchResult> results, const SpeciesTable& table,
                                      bool with_source = false) {
    std::ostringstream out;
    out << "species,x,y,z,similarity,orientation_id" << (with_source ? ",source_orientation" : "") << '\n';
    out << std::fixed << std::setprecision(4);
    for (const auto& r : results) {
        out << table[r.species_index].symbol << ',' << r.position.x << ',' << r.position.y << ',' << r.position.z << ','
            << r.similarity << ',' << r.orientation_id;
        if (with_source) out << ',' << r.source_orientation;
        out << '\n';
    }
    return out.str();
}

inline std::vector<MatchResult> decode_matches_csv(std::string_view text, const SpeciesTable& table) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError("empty match CSV", 1);
    ++line_no;
    if (line.rfind("species,x,y,z,similarity,orientation_id", 0) != 0) throw ParseError("unexpected CSV header", 1);
    const bool with_source = line.find("source_orientation") != std::string::npos;
    std::vector<MatchResult> out;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) f.push_back(cell);
        if (f.size() != (with_source ? 7u : 6u)) throw ParseError("wrong number of CSV fields", line_no);
        MatchResult r;
        try {
            r.species_index = table.index_of(f[0]);
            r.position = {std::stod(f[1]), std::stod(f[2]), std::stod(f[3])};
            r.similarity = std::stod(f[4]);
            r.orientation_id = std::stoi(f[5]);
            r.source_orientation = with_source ? std::stoi(f[6]) : r.orientation_id;
        } catch (const ParseError& e) {
            throw ParseError(e.what(), line_no);
        } catch (const std::exception&) {
            throw ParseError("bad number in CSV", line_no);
        }
        out.push_back(r);
    }
    return out;
}

}  // namespace pmt
