#pragma once

#include "pmt/config.hpp"
#include "pmt/evaluation.hpp"
#include "pmt/matcher.hpp"
#include "pmt/merge.hpp"
#include "pmt/structure.hpp"
#include "pmt/template.hpp"

#include <filesystem>
#include <vector>

namespace pmt {

/// Reads an XYZ file whose coordinates are already cube coordinates.
inline Structure load_structure(const std::filesystem::path& path, const SpeciesTable& table, double cube_side) {
    if (!std::filesystem::exists(path)) throw ConfigError("structure file not found: " + path.string());
    Structure s = parse_xyz(read_file(path), table);
    s.cube_side = cube_side;
    if (!s.inside_cube()) throw CapacityError("structure " + path.string() + " does not fit inside the cube");
    return s;
}

/// Imaging for the orientation at the given position in the configuration. Orientations'
/// noise seeds differ so that their shot noise is independent.
inline ImagingConfig imaging_for(const ExperimentConfig& c, std::size_t orientation_index) {
    ImagingConfig im = c.imaging;
    im.rng_seed = c.imaging.rng_seed + orientation_index;
    return im;
}

/// One template per species named in the search counts, in table order.
inline std::vector<Template> make_templates(const ExperimentConfig& c, const SpeciesTable& table) {
    const auto grid = c.grid.make();
    std::vector<Template> out;
    for (std::size_t n = 0; n < table.size(); ++n)
        if (c.counts.contains(table[n].symbol))
            out.push_back(make_template(table, n, c.imaging, grid, c.template_side, c.templates));
    return out;
}

struct OrientationRun {
    Orientation orientation;
    DefocusSeries series;
    std::vector<MatchResult> found;    // in the rotated frame
    std::vector<MatchResult> rotated;  // back in the common frame
    EvaluationReport report;
};

struct ExperimentRun {
    Structure truth;
    std::vector<Template> templates;
    std::vector<OrientationRun> orientations;
    std::vector<MatchResult> merged;  // only with more than one orientation
    EvaluationReport merged_report;
};

/// Simulates, searches and evaluates every configured orientation, then merges them.
inline ExperimentRun run_experiment(const ExperimentConfig& c, const SpeciesTable& table) {
    if (c.structure.empty()) throw ConfigError("the configuration names no 'structure'");
    ExperimentRun run;
    run.truth = load_structure(c.resolve(c.structure), table, c.grid.cube_side);
    run.templates = make_templates(c, table);
    const auto grid = c.grid.make();
    const auto plan = c.plan(table);
    const auto ignored = c.ignored_indices(table);
    std::vector<std::vector<MatchResult>> sets;
    for (std::size_t index = 0; index < c.orientations.size(); ++index) {
        OrientationRun o;
        o.orientation = c.orientations[index];
        o.series = simulate_series(rotate(run.truth, o.orientation), table, imaging_for(c, index), grid,
                                   o.orientation.id);
        o.found = find_atoms(o.series, run.templates, plan, table);
        o.rotated = rotate_back(o.found, o.orientation, c.grid.cube_side);
        o.report = assign(run.truth, o.rotated, c.evaluation.max_distance, ignored);
        sets.push_back(o.rotated);
        run.orientations.push_back(std::move(o));
    }
    if (sets.size() > 1) {
        run.merged = merge_orientations(sets, c.merge.radius, c.merge.cutoff);
        run.merged_report = assign(run.truth, run.merged, c.evaluation.max_distance, ignored);
    }
    return run;
}

}  // namespace pmt
