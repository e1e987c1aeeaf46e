#pragma once

// Experiment configuration: one JSON document holding imaging, grid, species table, template,
// search, orientation, merge and evaluation parameters plus the output directory. Every key is
// optional; missing keys take the defaults below.

#include "pmt/default_species.hpp"
#include "pmt/error.hpp"
#include "pmt/grid.hpp"
#include "pmt/imaging.hpp"
#include "pmt/io.hpp"
#include "pmt/matcher.hpp"
#include "pmt/species.hpp"
#include "pmt/structure.hpp"
#include "pmt/template.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pmt {

/// Test-series sampling of a cube [0, side]^3.
struct GridSettings {
    double cube_side = 10.0;       // Angstrom
    double transverse_step = 0.1;  // Angstrom
    double plane_step = 1.0;       // Angstrom; planes run from 0 to cube_side inclusive

    Grid3 make() const {
        if (!(cube_side > 0) || !(transverse_step > 0) || !(plane_step > 0))
            throw ConfigError("grid side and steps must be positive");
        const auto n = static_cast<std::size_t>(std::llround(cube_side / transverse_step));
        return Grid3(n, n, transverse_step, transverse_step, 0.0, 0.0,
                     Grid3::uniform_planes(0.0, cube_side, plane_step));
    }
};

struct MergeSettings {
    double radius = 1.0;  // Angstrom
    double cutoff = 0.5;
};

struct EvaluationSettings {
    double max_distance = 1.0;  // Angstrom
    std::vector<std::string> ignore_species{"H"};
};

struct ExperimentConfig {
    std::filesystem::path base_dir = ".";  // relative paths resolve against this
    std::string species_table = "default";
    std::string structure;  // XYZ path; empty when not needed
    ImagingConfig imaging;
    GridSettings grid;
    TemplateSettings templates;
    double template_side = 8.0;  // Angstrom, transverse side of the template simulation
    std::map<std::string, std::size_t> counts;
    double exclusion_radius = 1.0;
    ComparisonMode comparison = ComparisonMode::contrast_abs;
    bool refine = false;
    std::vector<Orientation> orientations{Orientation{}};
    MergeSettings merge;
    EvaluationSettings evaluation;
    std::string output_dir = "pmt_out";

    std::filesystem::path resolve(const std::string& p) const {
        const std::filesystem::path path(p);
        return path.is_absolute() ? path : base_dir / path;
    }

    SpeciesTable load_species() const {
        if (species_table == "default") return default_species_table();
        return parse_species_table(read_file(resolve(species_table)));
    }

    /// Search plan in table order; species absent from counts get zero.
    SearchPlan plan(const SpeciesTable& table) const {
        SearchPlan p;
        p.counts.assign(table.size(), 0);
        for (const auto& [symbol, n] : counts) p.counts[table.index_of(symbol)] = n;
        p.exclusion_radius = exclusion_radius;
        p.comparison = comparison;
        p.refine = refine;
        p.validate(table.size());
        return p;
    }

    std::vector<std::size_t> ignored_indices(const SpeciesTable& table) const {
        std::vector<std::size_t> out;
        for (const auto& s : evaluation.ignore_species) out.push_back(table.index_of(s));
        return out;
    }

    void validate() const {
        imaging.validate();
        (void)grid.make();
        if (!(template_side > 0)) throw ConfigError("template_side must be positive");
        if (!(templates.transverse_halfwidth > 0)) throw ConfigError("transverse_halfwidth must be positive");
        if (!(templates.axial_range > 0)) throw ConfigError("axial_range must be positive");
        if (!(exclusion_radius > 0)) throw ConfigError("exclusion_radius must be positive");
        if (!(merge.radius > 0)) throw ConfigError("merge radius must be positive");
        if (!(merge.cutoff >= 0 && merge.cutoff <= 1)) throw ConfigError("merge cutoff must lie in [0, 1]");
        if (!(evaluation.max_distance > 0)) throw ConfigError("max_distance must be positive");
        if (orientations.empty()) throw ConfigError("at least one orientation is required");
    }
};

namespace detail {

using nlohmann::json;

template <class T>
void read_key(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

/// number -> value, null or the string given by none -> nullopt.
inline void read_optional(const json& j, const char* key, std::optional<double>& out, std::string_view none) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (v.is_null() || (v.is_string() && v.get<std::string>() == none)) out.reset();
    else if (v.is_number()) out = v.get<double>();
    else throw ConfigError(std::string("config key '") + key + "' must be a number or \"" + std::string(none) + "\"");
}

inline const json& section(const json& j, const char* key) {
    static const json empty = json::object();
    if (!j.contains(key)) return empty;
    if (!j.at(key).is_object()) throw ConfigError(std::string("config section '") + key + "' must be an object");
    return j.at(key);
}

}  // namespace detail

inline ExperimentConfig parse_config(std::string_view text, std::filesystem::path base_dir = ".") {
    using detail::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    ExperimentConfig c;
    c.base_dir = std::move(base_dir);
    detail::read_key(j, "species_table", c.species_table);
    detail::read_key(j, "structure", c.structure);
    detail::read_key(j, "output_dir", c.output_dir);

    const auto& im = detail::section(j, "imaging");
    detail::read_key(im, "energy_keV", c.imaging.energy_keV);
    detail::read_key(im, "incident_intensity", c.imaging.incident_intensity);
    detail::read_optional(im, "aperture_mrad", c.imaging.aperture_mrad, "unlimited");
    detail::read_key(im, "thermal_rms", c.imaging.thermal_rms);
    detail::read_optional(im, "dose", c.imaging.dose, "noiseless");
    if (im.contains("forward_method")) {
        std::string m;
        detail::read_key(im, "forward_method", m);
        c.imaging.forward_method = parse_forward_method(m);
    }
    detail::read_key(im, "slice_thickness", c.imaging.slice_thickness);
    detail::read_key(im, "target_resolution", c.imaging.target_resolution);
    detail::read_key(im, "seed", c.imaging.rng_seed);

    const auto& g = detail::section(j, "grid");
    detail::read_key(g, "cube_side", c.grid.cube_side);
    detail::read_key(g, "transverse_step", c.grid.transverse_step);
    detail::read_key(g, "plane_step", c.grid.plane_step);

    const auto& t = detail::section(j, "template");
    detail::read_key(t, "transverse_halfwidth", c.templates.transverse_halfwidth);
    detail::read_key(t, "axial_range", c.templates.axial_range);
    detail::read_optional(t, "max_axial_halfwidth", c.templates.max_axial_halfwidth, "none");
    detail::read_key(t, "side", c.template_side);

    const auto& s = detail::section(j, "search");
    detail::read_key(s, "counts", c.counts);
    detail::read_key(s, "exclusion_radius", c.exclusion_radius);
    detail::read_key(s, "refine", c.refine);
    if (s.contains("comparison")) {
        std::string m;
        detail::read_key(s, "comparison", m);
        c.comparison = parse_comparison_mode(m);
    }

    if (j.contains("orientations")) {
        if (!j.at("orientations").is_array()) throw ConfigError("'orientations' must be an array");
        c.orientations.clear();
        int next_id = 0;
        for (const auto& o : j.at("orientations")) {
            std::vector<double> axis{0, 1, 0};
            double angle = 0;
            int id = next_id;
            detail::read_key(o, "axis", axis);
            detail::read_key(o, "angle_deg", angle);
            detail::read_key(o, "id", id);
            if (axis.size() != 3) throw ConfigError("orientation axis needs 3 components");
            c.orientations.push_back(Orientation::about({axis[0], axis[1], axis[2]}, angle, id));
            next_id = id + 1;
        }
    }

    const auto& m = detail::section(j, "merge");
    detail::read_key(m, "radius", c.merge.radius);
    detail::read_key(m, "cutoff", c.merge.cutoff);

    const auto& e = detail::section(j, "evaluation");
    detail::read_key(e, "max_distance", c.evaluation.max_distance);
    detail::read_key(e, "ignore_species", c.evaluation.ignore_species);

    c.validate();
    return c;
}

/// Reads a config file; relative paths inside it resolve against its directory.
inline ExperimentConfig load_config(const std::filesystem::path& path) {
    return parse_config(read_file(path), path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

}  // namespace pmt
