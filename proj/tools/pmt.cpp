// Command-line front end: simulate, template, reconstruct, merge, evaluate, pipeline.
//
// Exit codes: 0 success, 2 input or configuration error, 3 search exhaustion.

#include "pmt/pmt.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace pmt;

namespace {

constexpr int exit_input_error = 2;
constexpr int exit_exhausted = 3;

struct GlobalOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    bool dump_slices = false;
    std::string out_dir;
};

ExperimentConfig load(const GlobalOptions& g) {
    ExperimentConfig c = g.config_path.empty() ? parse_config("{}") : load_config(g.config_path);
    if (g.seed) c.imaging.rng_seed = *g.seed;
    if (!g.out_dir.empty()) c.output_dir = g.out_dir;
    c.validate();
    return c;
}

void dump_series_slices(const DefocusSeries& s, const fs::path& stem) {
    write_file_atomic(stem.string() + "_xy.pgm", pgm_xy_slice(s, s.grid.nz() / 2));
    write_file_atomic(stem.string() + "_xz.pgm", pgm_xz_slice(s, s.grid.ny() / 2));
}

double template_peak(const Template& t) {
    double peak = 0;
    for (double v : t.block.values) peak = std::max(peak, std::abs(v));
    return peak;
}

/// Warns when a template's strongest contrast is below the shot-noise floor 1/sqrt(dose);
/// a noiseless configuration is compared with the default 1% floor.
void warn_noise_floor(const Template& t, const SpeciesTable& table, const ImagingConfig& im) {
    const double dose = im.dose.value_or(1e4);
    const double floor = 1.0 / std::sqrt(dose);
    const double peak = template_peak(t);
    if (peak < floor)
        std::cerr << "warning: " << table[t.species_index].symbol << " template peak contrast " << peak
                  << " is below the noise floor " << floor << "; this species is unlikely to be localized\n";
}

std::string describe(const Template& t, const SpeciesTable& table) {
    std::ostringstream out;
    out << table[t.species_index].symbol << " template: " << t.wx() << " x " << t.wy() << " x " << t.wz()
        << " voxels (" << t.extent_x() << " x " << t.extent_x() << " x " << t.extent_z() << " A), center (" << t.center.i
        << ", " << t.center.j << ", " << t.center.k << ")";
    if (t.extent_z() >= t.extent_x()) out << ", elongated along z";
    return out.str();
}

std::map<std::string, std::size_t> parse_counts(const std::string& text) {
    std::map<std::string, std::size_t> counts;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw ConfigError("counts entry '" + item + "' must be SYMBOL:N");
        try {
            const long long n = std::stoll(item.substr(colon + 1));
            if (n < 0) throw ConfigError("counts must be non-negative");
            counts[item.substr(0, colon)] = static_cast<std::size_t>(n);
        } catch (const std::logic_error&) {
            throw ConfigError("counts entry '" + item + "' has a bad number");
        }
    }
    return counts;
}

std::vector<MatchResult> read_matches(const fs::path& path, const SpeciesTable& table) {
    if (!fs::exists(path)) throw ConfigError("results file not found: " + path.string());
    return decode_matches_csv(read_file(path), table);
}

const Orientation& orientation_by_id(const ExperimentConfig& c, int id) {
    for (const auto& o : c.orientations)
        if (o.id == id) return o;
    throw ConfigError("orientation id " + std::to_string(id) + " is not defined in the configuration");
}

// ---- subcommands ---------------------------------------------------------------

int cmd_simulate(const GlobalOptions& g, const std::string& structure_path, const std::string& out_path,
                 int orientation_id) {
    const auto c = load(g);
    const auto table = c.load_species();
    const auto truth = load_structure(structure_path.empty() ? c.resolve(c.structure) : fs::path(structure_path), table,
                                      c.grid.cube_side);
    std::size_t index = 0;
    while (index < c.orientations.size() && c.orientations[index].id != orientation_id) ++index;
    if (index == c.orientations.size()) throw ConfigError("orientation id " + std::to_string(orientation_id) + " is not defined");
    const auto& o = c.orientations[index];
    const auto series = simulate_series(rotate(truth, o), table, imaging_for(c, index), c.grid.make(), o.id);
    write_file_atomic(out_path, encode_dsf(series));
    if (g.dump_slices) dump_series_slices(series, fs::path(out_path).replace_extension());
    std::cout << "wrote " << out_path << " (" << series.grid.nx() << " x " << series.grid.ny() << " x "
              << series.grid.nz() << ")\n";
    return 0;
}

int cmd_template(const GlobalOptions& g, const std::string& symbol, const std::string& out_path) {
    const auto c = load(g);
    const auto table = c.load_species();
    const auto n = table.index_of(symbol);
    const auto t = make_template(table, n, c.imaging, c.grid.make(), c.template_side, c.templates);
    write_template(out_path, t, table, c.imaging);
    if (g.dump_slices) dump_series_slices(template_as_series(t, c.imaging), fs::path(out_path).replace_extension());
    std::cout << describe(t, table) << '\n';
    warn_noise_floor(t, table, c.imaging);
    return 0;
}

int cmd_reconstruct(const GlobalOptions& g, const std::string& series_path, const std::vector<std::string>& template_paths,
                    const std::string& counts_text, const std::string& out_path) {
    auto c = load(g);
    const auto table = c.load_species();
    if (!counts_text.empty()) c.counts = parse_counts(counts_text);
    if (!fs::exists(series_path)) throw ConfigError("series file not found: " + series_path);
    const auto series = decode_dsf(read_file(series_path));
    std::vector<Template> templates;
    for (const auto& p : template_paths) {
        if (!fs::exists(p)) throw ConfigError("template file not found: " + p);
        templates.push_back(read_template(p, table));
    }
    const auto results = find_atoms(series, templates, c.plan(table), table);
    write_file_atomic(out_path, encode_matches_csv(results, table));
    std::cout << "wrote " << results.size() << " matches to " << out_path << '\n';
    return 0;
}

int cmd_merge(const GlobalOptions& g, const std::vector<std::string>& inputs, std::optional<double> radius,
              std::optional<double> cutoff, bool already_rotated, const std::string& out_path) {
    auto c = load(g);
    if (radius) c.merge.radius = *radius;
    if (cutoff) c.merge.cutoff = *cutoff;
    c.validate();
    const auto table = c.load_species();
    std::vector<std::vector<MatchResult>> sets;
    for (const auto& p : inputs) {
        auto set = read_matches(p, table);
        if (!already_rotated && !set.empty())
            set = rotate_back(set, orientation_by_id(c, set.front().orientation_id), c.grid.cube_side);
        sets.push_back(std::move(set));
    }
    const auto merged = merge_orientations(sets, c.merge.radius, c.merge.cutoff);
    write_file_atomic(out_path, encode_matches_csv(merged, table, true));
    std::cout << "merged " << inputs.size() << " sets into " << merged.size() << " results: " << out_path << '\n';
    return 0;
}

int cmd_evaluate(const GlobalOptions& g, const std::string& truth_path, const std::string& results_path,
                 std::optional<double> max_distance, const std::vector<std::string>& ignore, bool ignore_given,
                 const std::string& out_path) {
    auto c = load(g);
    if (max_distance) c.evaluation.max_distance = *max_distance;
    if (ignore_given) c.evaluation.ignore_species = ignore;
    c.validate();
    const auto table = c.load_species();
    const auto truth = load_structure(truth_path, table, c.grid.cube_side);
    const auto results = read_matches(results_path, table);
    const auto report = assign(truth, results, c.evaluation.max_distance, c.ignored_indices(table));
    if (!out_path.empty()) write_file_atomic(out_path, encode_report_csv(report, table));
    std::cout << format_report(report, table);
    return 0;
}

int cmd_pipeline(const GlobalOptions& g) {
    const auto c = load(g);
    const auto table = c.load_species();
    const auto run = run_experiment(c, table);
    const fs::path out = c.output_dir;
    std::ostringstream summary;

    write_file_atomic(out / "truth.xyz", write_xyz(run.truth, table, "ground truth in cube coordinates"));
    for (const auto& t : run.templates) {
        const fs::path path = out / "templates" / (table[t.species_index].symbol + ".dsf");
        write_template(path, t, table, c.imaging);
        if (g.dump_slices) dump_series_slices(template_as_series(t, c.imaging), fs::path(path).replace_extension());
        summary << describe(t, table) << '\n';
        warn_noise_floor(t, table, c.imaging);
    }
    for (const auto& o : run.orientations) {
        const fs::path dir = out / ("orientation_" + std::to_string(o.orientation.id));
        write_file_atomic(dir / "series.dsf", encode_dsf(o.series));
        if (g.dump_slices) dump_series_slices(o.series, dir / "series");
        write_file_atomic(dir / "matches.csv", encode_matches_csv(o.found, table));
        write_file_atomic(dir / "report.csv", encode_report_csv(o.report, table));
        const auto text = format_report(o.report, table);
        write_file_atomic(dir / "report.txt", text);
        summary << "\n== orientation " << o.orientation.id << " (" << o.orientation.angle_deg << " deg) ==\n" << text;
    }
    if (run.orientations.size() > 1) {
        write_file_atomic(out / "merged.csv", encode_matches_csv(run.merged, table, true));
        write_file_atomic(out / "merged_report.csv", encode_report_csv(run.merged_report, table));
        const auto text = format_report(run.merged_report, table);
        write_file_atomic(out / "merged_report.txt", text);
        summary << "\n== merged ==\n" << text;
    }
    write_file_atomic(out / "summary.txt", summary.str());
    std::cout << summary.str() << "artifacts in " << out.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pattern-matching tomography: simulate defocus series and localize atoms"};
    app.require_subcommand(1);
    app.fallthrough();
    GlobalOptions g;
    std::uint64_t seed = 0;
    app.add_option("--config", g.config_path, "JSON configuration file");
    auto* seed_opt = app.add_option("--seed", seed, "noise seed (overrides the configuration)");
    app.add_option("--threads", g.threads, "worker threads (0 = hardware concurrency)");
    app.add_flag("--dump-slices", g.dump_slices, "also write PGM slice images");
    app.add_option("--out-dir", g.out_dir, "output directory (overrides the configuration)");

    std::string structure, out, species, series, counts, truth, results;
    std::vector<std::string> templates, inputs, ignore;
    int orientation_id = 0;
    std::optional<double> radius, cutoff, max_distance;
    bool already_rotated = false;

    auto* sim = app.add_subcommand("simulate", "simulate a defocus series of a structure");
    sim->add_option("--structure", structure, "XYZ file (default: the configuration's structure)");
    sim->add_option("--orientation", orientation_id, "orientation id from the configuration");
    sim->add_option("--out", out, "output .dsf")->required();

    auto* tpl = app.add_subcommand("template", "generate a single-atom template");
    tpl->add_option("--species", species, "element symbol")->required();
    tpl->add_option("--out", out, "output .dsf (a .tpl sidecar is written next to it)")->required();

    auto* rec = app.add_subcommand("reconstruct", "localize atoms in a series");
    rec->add_option("--series", series, "input .dsf series")->required();
    rec->add_option("--template", templates, "template .dsf files")->required();
    rec->add_option("--counts", counts, "atoms per species, e.g. O:4,N:1,C:4 (default: configuration)");
    rec->add_option("--out", out, "output CSV")->required();

    auto* mrg = app.add_subcommand("merge", "merge results from several orientations");
    mrg->add_option("--input", inputs, "match CSV files")->required();
    mrg->add_option("--radius", radius, "duplicate radius in A");
    mrg->add_option("--cutoff", cutoff, "similarity cutoff");
    mrg->add_flag("--already-rotated", already_rotated, "inputs are already in the common frame");
    mrg->add_option("--out", out, "output CSV")->required();

    auto* ev = app.add_subcommand("evaluate", "score results against ground truth");
    ev->add_option("--truth", truth, "ground-truth XYZ")->required();
    ev->add_option("--results", results, "match CSV")->required();
    ev->add_option("--max-distance", max_distance, "pairing distance in A");
    auto* ignore_opt = ev->add_option("--ignore-species", ignore, "species excluded from recall");
    ev->add_option("--out", out, "per-pair report CSV");

    auto* pipe = app.add_subcommand("pipeline", "run simulation, templates, search, merge and evaluation");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_input_error;
    }
    if (*seed_opt) g.seed = seed;
    set_threads(g.threads);

    try {
        if (*sim) return cmd_simulate(g, structure, out, orientation_id);
        if (*tpl) return cmd_template(g, species, out);
        if (*rec) return cmd_reconstruct(g, series, templates, counts, out);
        if (*mrg) return cmd_merge(g, inputs, radius, cutoff, already_rotated, out);
        if (*ev) return cmd_evaluate(g, truth, results, max_distance, ignore, static_cast<bool>(*ignore_opt), out);
        if (*pipe) return cmd_pipeline(g);
    } catch (const ExhaustionError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_exhausted;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_input_error;
    }
    return exit_input_error;
}
