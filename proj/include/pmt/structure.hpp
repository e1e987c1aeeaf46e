#pragma once

#include "pmt/error.hpp"
#include "pmt/grid.hpp"
#include "pmt/species.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace pmt {

struct Atom {
    std::size_t species = 0;  // index into a SpeciesTable
    Vec3 position;            // Angstrom
};

/// Atoms inside the simulation cube [0, cube_side]^3. A freshly parsed structure has
/// cube_side == 0 until it is centered.
struct Structure {
    double cube_side = 0;
    std::vector<Atom> atoms;

    Vec3 cube_center() const { return {0.5 * cube_side, 0.5 * cube_side, 0.5 * cube_side}; }

    bool inside_cube(double tol = 1e-9) const {
        return std::all_of(atoms.begin(), atoms.end(), [&](const Atom& a) {
            const auto in = [&](double v) { return v >= -tol && v <= cube_side + tol; };
            return in(a.position.x) && in(a.position.y) && in(a.position.z);
        });
    }

    std::vector<std::size_t> species_counts(std::size_t n_species) const {
        std::vector<std::size_t> counts(n_species, 0);
        for (const auto& a : atoms) ++counts.at(a.species);
        return counts;
    }
};

/// Rigid rotation by angle_deg about a unit axis through the cube center.
/// Positive angles are counterclockwise looking down the axis toward the origin.
struct Orientation {
    Vec3 axis{0, 1, 0};
    double angle_deg = 0;
    int id = 0;

    static Orientation about(Vec3 axis, double angle_deg, int id = 0) {
        const double n = norm(axis);
        if (!(n > 0)) throw DomainError("rotation axis must be nonzero");
        return {(1.0 / n) * axis, angle_deg, id};
    }
    Orientation inverse() const { return {axis, -angle_deg, id}; }
};

/// Rodrigues rotation of v about a unit axis.
inline Vec3 rotate_vector(Vec3 v, Vec3 axis, double angle_deg) {
    const double t = angle_deg * 3.14159265358979323846 / 180.0;
    const double c = std::cos(t), s = std::sin(t);
    const Vec3 k = axis;
    const Vec3 kxv{k.y * v.z - k.z * v.y, k.z * v.x - k.x * v.z, k.x * v.y - k.y * v.x};
    return c * v + s * kxv + ((1 - c) * dot(k, v)) * k;
}

inline Vec3 rotate_point(Vec3 p, const Orientation& o, Vec3 center) {
    return center + rotate_vector(p - center, o.axis, o.angle_deg);
}

/// Reads `count / comment / Symbol x y z` XYZ text. Errors name the offending line.
inline Structure parse_xyz(std::istream& in, const SpeciesTable& table) {
    std::string line;
    std::size_t line_no = 0;
    auto next = [&]() -> bool {
        if (!std::getline(in, line)) return false;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    };
    if (!next()) throw ParseError("empty XYZ input", 1);
    std::size_t declared = 0;
    {
        std::istringstream s(line);
        long long n;
        std::string extra;
        if (!(s >> n) || n < 0 || (s >> extra)) throw ParseError("first line must be the atom count", line_no);
        declared = static_cast<std::size_t>(n);
    }
    if (!next()) throw ParseError("missing comment line", 2);

    Structure out;
    while (next()) {
        std::istringstream s(line);
        std::string symbol;
        if (!(s >> symbol)) continue;  // blank line
        if (out.atoms.size() == declared)
            throw ParseError("more atom lines than the declared count " + std::to_string(declared), line_no);
        Vec3 p;
        if (!(s >> p.x >> p.y >> p.z)) throw ParseError("expected: Symbol x y z", line_no);
        std::string extra;
        if (s >> extra) throw ParseError("trailing text '" + extra + "'", line_no);
        const auto n = table.find(symbol);
        if (!n) throw ParseError("unknown element symbol '" + symbol + "'", line_no);
        out.atoms.push_back({*n, p});
    }
    if (out.atoms.size() != declared)
        throw ParseError("declared " + std::to_string(declared) + " atoms but found " + std::to_string(out.atoms.size()),
                         line_no + 1);
    return out;
}

inline Structure parse_xyz(std::string_view text, const SpeciesTable& table) {
    std::istringstream in{std::string(text)};
    return parse_xyz(in, table);
}

inline std::string write_xyz(const Structure& s, const SpeciesTable& table, std::string_view comment = "") {
    std::ostringstream out;
    out << s.atoms.size() << '\n' << comment << '\n' << std::fixed << std::setprecision(6);
    for (const auto& a : s.atoms)
        out << table[a.species].symbol << ' ' << a.position.x << ' ' << a.position.y << ' ' << a.position.z << '\n';
    return out.str();
}

/// Translates the structure so that its bounding-box center sits at the center of a cube of
/// the given side.
inline Structure center_in_cube(const Structure& s, double side) {
    if (s.atoms.empty()) throw DomainError("cannot center an empty structure");
    if (!(side > 0)) throw DomainError("cube side must be positive");
    Vec3 lo = s.atoms.front().position, hi = lo;
    for (const auto& a : s.atoms) {
        lo = {std::min(lo.x, a.position.x), std::min(lo.y, a.position.y), std::min(lo.z, a.position.z)};
        hi = {std::max(hi.x, a.position.x), std::max(hi.y, a.position.y), std::max(hi.z, a.position.z)};
    }
    const Vec3 extent = hi - lo;
    if (extent.x > side || extent.y > side || extent.z > side)
        throw CapacityError("structure extent exceeds the cube side " + std::to_string(side));
    const Vec3 shift = Vec3{0.5 * side, 0.5 * side, 0.5 * side} - 0.5 * (lo + hi);
    Structure out{side, s.atoms};
    for (auto& a : out.atoms) a.position = a.position + shift;
    return out;
}

/// Rotates every atom about the cube center. Throws CapacityError when an atom leaves the cube.
inline Structure rotate(const Structure& s, const Orientation& o) {
    Structure out = s;
    if (o.angle_deg == 0) return out;
    const Vec3 c = s.cube_center();
    for (auto& a : out.atoms) a.position = rotate_point(a.position, o, c);
    if (!out.inside_cube(1e-9)) throw CapacityError("rotated structure leaves the cube; choose a larger cube");
    return out;
}

/// Random sequential placement of atoms inside a ball around the cube center with a
/// minimum pairwise spacing. counts[n] atoms of species n are placed; the atom list is
/// shuffled so species are interleaved.
inline Structure random_sparse_structure(const std::vector<std::size_t>& counts, double cube_side, double ball_radius,
                                         double min_spacing, std::uint64_t seed, int max_attempts = 200000) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-ball_radius, ball_radius);
    std::vector<std::size_t> labels;
    for (std::size_t n = 0; n < counts.size(); ++n) labels.insert(labels.end(), counts[n], n);
    std::shuffle(labels.begin(), labels.end(), rng);
    Structure s{cube_side, {}};
    const Vec3 c = s.cube_center();
    for (std::size_t label : labels) {
        bool placed = false;
        for (int attempt = 0; attempt < max_attempts && !placed; ++attempt) {
            const Vec3 d{u(rng), u(rng), u(rng)};
            if (norm(d) > ball_radius) continue;
            const Vec3 p = c + d;
            placed = std::all_of(s.atoms.begin(), s.atoms.end(),
                                 [&](const Atom& a) { return distance(a.position, p) >= min_spacing; });
            if (placed) s.atoms.push_back({label, p});
        }
        if (!placed) throw CapacityError("could not place all atoms with the requested spacing");
    }
    return s;
}

}  // namespace pmt
