// Acceptance run: one PASS/FAIL line per criterion with the measured numbers.
// Exit status is nonzero when any criterion fails.

#include "pmt/pmt.hpp"
#include "../common/aspartate_reference.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

using namespace pmt;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void check(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << "[failed: " << what << "] ";
        }
    }
};

const SpeciesTable& table() { return default_species_table(); }
std::size_t sym(const char* s) { return table().index_of(s); }

Grid3 cube10(double step = 0.1, double plane_step = 1.0) {
    const auto n = static_cast<std::size_t>(std::llround(10 / step));
    return Grid3(n, n, step, step, 0, 0, Grid3::uniform_planes(0, 10, plane_step));
}

double rel_l2(const Field3& a, const Field3& ref) {
    double num = 0, den = 0;
    for (std::size_t n = 0; n < a.size(); ++n) {
        num += (a.values[n] - ref.values[n]) * (a.values[n] - ref.values[n]);
        den += ref.values[n] * ref.values[n];
    }
    return std::sqrt(num / den);
}

double peak_abs(const Field3& f) {
    double m = 0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
}

// ---- 1 ---------------------------------------------------------------------------

void forward_cross_consistency(Outcome& o) {
    const auto g = cube10();
    const Structure s{10, {{sym("O"), {5, 5, 5}}}};
    const auto analytic = contrast_analytic(s, table(), {}, g);
    const auto fourier = contrast_fourier(s, table(), {}, g);
    const auto multislice = convert_kind(multislice_series(s, table(), {}, g), SeriesKind::contrast);
    const double ef = rel_l2(fourier.values, analytic.values);
    const double em = rel_l2(multislice.values, analytic.values);
    o.detail << "fourier vs analytic " << ef << " (<= 1e-3), multislice vs analytic " << em << " (<= 5e-2) ";
    o.check(ef <= 1e-3, "fourier");
    o.check(em <= 5e-2, "multislice");
}

// ---- 2 ---------------------------------------------------------------------------

void contrast_reversal(Outcome& o) {
    const auto g = cube10();
    double worst_rel = 0, worst_abs = 0;
    for (std::size_t n = 0; n < table().size(); ++n) {
        const Structure s{10, {{n, {5, 5, 5}}}};
        for (auto method : {ForwardMethod::analytic, ForwardMethod::fourier}) {
            const auto k = method == ForwardMethod::analytic ? contrast_analytic(s, table(), {}, g)
                                                             : contrast_fourier(s, table(), {}, g);
            const double at = std::abs(k.values(50, 50, 5));
            worst_abs = std::max(worst_abs, at);
            worst_rel = std::max(worst_rel, at / peak_abs(k.values));
        }
    }
    o.detail << "worst |K(atom)|/peak " << worst_rel << " (<= 1e-3), worst |K(atom)| " << worst_abs << " (<= 1e-9) ";
    o.check(worst_rel <= 1e-3, "relative");
    o.check(worst_abs <= 1e-9, "absolute");
}

// ---- 3 ---------------------------------------------------------------------------

void paraboloid_support(Outcome& o) {
    constexpr double threshold = 0.8;  // calibrated on the default O atom
    const Grid3 g(100, 100, 0.1, 0.1, 0, 0, Grid3::uniform_planes(-11, 20, 1));
    const auto atom = spectral_paraboloid_check(contrast_analytic({10, {{sym("O"), {5, 5, 5}}}}, table(), {}, g));
    DefocusSeries noise(g, SeriesKind::contrast, {});
    std::mt19937_64 rng(1);
    std::normal_distribution<double> d(0, 1);
    for (auto& v : noise.values.values) v = d(rng);
    const auto white = spectral_paraboloid_check(noise);
    o.detail << "atom mass fraction " << atom.mass_fraction << " (>= " << threshold << "), white-noise fraction "
             << white.mass_fraction << " (band volume " << white.band_fraction << "), ratio "
             << atom.mass_fraction / white.mass_fraction << " (>= 10) ";
    o.check(atom.mass_fraction >= threshold, "threshold");
    o.check(atom.mass_fraction >= 10 * white.mass_fraction, "10x white noise");
}

// ---- 4 ---------------------------------------------------------------------------

double oracle(const Field3& test, const Template& t, std::size_t si, std::size_t sj, std::size_t sk) {
    double num = 0, den = 0;
    for (std::size_t c = 0; c < t.wz(); ++c)
        for (std::size_t b = 0; b < t.wy(); ++b)
            for (std::size_t a = 0; a < t.wx(); ++a) {
                const double x = test(si - t.center.i + a, sj - t.center.j + b, sk - t.center.k + c);
                const double y = t.block(a, b, c);
                num += std::abs(x - y);
                den += std::abs(x) + std::abs(y);
            }
    return den == 0 ? 1.0 : 1.0 - num / den;
}

void similarity_properties(Outcome& o) {
    std::mt19937_64 rng(2024);
    auto uniform = [&](std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
    };
    std::normal_distribution<double> normal(0, 1);
    std::size_t range_violations = 0, identity_violations = 0, oracle_mismatches = 0, equivariance_failures = 0;
    std::size_t evaluated = 0;
    const int trials = 200;
    for (int trial = 0; trial < trials; ++trial) {
        const std::size_t nx = uniform(6, 16), ny = uniform(6, 16), nz = uniform(3, 16);
        DefocusSeries test(Grid3(nx, ny, 0.1, 0.1, 0, 0, Grid3::uniform_planes(0, static_cast<double>(nz - 1), 1)),
                           SeriesKind::contrast, {});
        for (auto& v : test.values.values) v = normal(rng);
        Template t;
        t.block = Field3(uniform(1, 5), uniform(1, 5), uniform(1, std::min<std::size_t>(nz, 5)));
        t.center = {uniform(0, t.wx() - 1), uniform(0, t.wy() - 1), uniform(0, t.wz() - 1)};
        t.x_step = t.y_step = 0.1;
        t.z_step = 1;
        // Template copied from a random sub-block.
        const Index3 src{uniform(t.center.i, nx - t.wx() + t.center.i), uniform(t.center.j, ny - t.wy() + t.center.j),
                         uniform(t.center.k, nz - t.wz() + t.center.k)};
        for (std::size_t c = 0; c < t.wz(); ++c)
            for (std::size_t b = 0; b < t.wy(); ++b)
                for (std::size_t a = 0; a < t.wx(); ++a)
                    t.block(a, b, c) = test.values(src.i - t.center.i + a, src.j - t.center.j + b, src.k - t.center.k + c);

        const auto map = similarity_map(test, t);
        for (std::size_t n = 0; n < map.size(); ++n) {
            const double v = map.values[n];
            if (v == excluded_similarity) continue;
            ++evaluated;
            const Index3 s = test.grid.unravel(n);
            if (v < 0 || v > 1) ++range_violations;
            if (v != oracle(test.values, t, s.i, s.j, s.k)) ++oracle_mismatches;
            const bool is_src = s.i == src.i && s.j == src.j && s.k == src.k;
            // Continuous random data: only the source block equals the template.
            if ((v == 1.0) != is_src) ++identity_violations;
        }
        Template perturbed = t;
        perturbed.block.values[uniform(0, perturbed.block.size() - 1)] += 0.5;
        if (similarity(test, perturbed, src) >= 1.0) ++identity_violations;

        // Equivariance: a pattern planted in a zero field is found where it was planted,
        // and moving the pattern moves the argmax by the same offset.
        auto planted = [&](Index3 at) {
            DefocusSeries f(test.grid, SeriesKind::contrast, {});
            for (std::size_t c = 0; c < t.wz(); ++c)
                for (std::size_t b = 0; b < t.wy(); ++b)
                    for (std::size_t a = 0; a < t.wx(); ++a)
                        f.values(at.i - t.center.i + a, at.j - t.center.j + b, at.k - t.center.k + c) = t.block(a, b, c);
            return f;
        };
        const Index3 p{uniform(t.center.i, nx - t.wx() + t.center.i), uniform(t.center.j, ny - t.wy() + t.center.j),
                       uniform(t.center.k, nz - t.wz() + t.center.k)};
        const Index3 q{uniform(t.center.i, nx - t.wx() + t.center.i), uniform(t.center.j, ny - t.wy() + t.center.j),
                       uniform(t.center.k, nz - t.wz() + t.center.k)};
        const auto at_p = argmax(similarity_map(planted(p), t));
        const auto at_q = argmax(similarity_map(planted(q), t));
        if (!at_p || !at_q || *at_p != test.grid.offset(p) || *at_q != test.grid.offset(q)) ++equivariance_failures;
    }
    o.detail << trials << " random grids <= 16^3, " << evaluated << " shifts: range violations " << range_violations
             << ", C=1 iff equal violations " << identity_violations << ", oracle mismatches " << oracle_mismatches
             << ", equivariance failures " << equivariance_failures << ' ';
    o.check(range_violations == 0, "range");
    o.check(identity_violations == 0, "identity");
    o.check(oracle_mismatches == 0, "oracle");
    o.check(equivariance_failures == 0, "equivariance");
}

// ---- 5 ---------------------------------------------------------------------------

void single_atom_localization(Outcome& o) {
    // Noiseless trials use 0.1 A transverse sampling; noisy trials use the 0.05 A sampling of
    // the shipped realistic configuration, which the z discrimination under 1% noise needs.
    const auto g_ideal = cube10(0.1), g_real = cube10(0.05);
    ImagingConfig ideal;
    ImagingConfig realistic;
    realistic.aperture_mrad = 30.0;
    realistic.thermal_rms = 0.1;
    realistic.dose = 1e4;
    const std::vector<Template> t_ideal{make_template(table(), sym("O"), ideal, g_ideal, 8.0)};
    const std::vector<Template> t_real{make_template(table(), sym("O"), realistic, g_real, 8.0)};
    SearchPlan plan;
    plan.counts.assign(table().size(), 0);
    plan.counts[sym("O")] = 1;

    // Placements on grid voxels inside the region where the template fits entirely.
    std::mt19937_64 rng(5);
    auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
    auto place = [&](const Grid3& g, const Template& t) {
        const auto fit = detail::admissible(g, t);
        return Index3{pick(fit.lo_i, fit.hi_i), pick(fit.lo_j, fit.hi_j), pick(fit.lo_k, fit.hi_k)};
    };
    std::size_t exact = 0, within = 0;
    double worst = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const Index3 v = place(g_ideal, t_ideal[0]);
        const Structure s{10, {{sym("O"), g_ideal.coordinate(v)}}};
        const auto a = find_atoms(simulate_series(s, table(), ideal, g_ideal), t_ideal, plan, table());
        if (g_ideal.nearest_index(a.at(0).position) == v) ++exact;
    }
    for (int trial = 0; trial < 100; ++trial) {
        const Structure s{10, {{sym("O"), g_real.coordinate(place(g_real, t_real[0]))}}};
        auto noisy = realistic;
        noisy.rng_seed = 1000 + static_cast<std::uint64_t>(trial);
        const auto b = find_atoms(simulate_series(s, table(), noisy, g_real), t_real, plan, table());
        const double d = distance(b.at(0).position, s.atoms[0].position);
        worst = std::max(worst, d);
        if (d <= 0.5) ++within;
    }
    o.detail << "noiseless exact " << exact << "/100 (100), realistic within 0.5 A " << within
             << "/100 (>= 95), worst realistic distance " << worst << " A ";
    o.check(exact == 100, "noiseless");
    o.check(within >= 95, "realistic");
}

// ---- 6 ---------------------------------------------------------------------------

ExperimentConfig shipped_config(const char* name) { return load_config(std::string(PMT_SOURCE_DIR "/configs/") + name); }

void aspartate_end_to_end(Outcome& o) {
    const auto c = shipped_config("aspartate_realistic.json");
    const auto run = run_experiment(c, c.load_species());
    const auto& r = run.orientations.at(0).report;
    o.detail << "seed " << c.imaging.rng_seed << ": paired " << r.pairs.size() << "/9, mean " << r.mean_distance
             << " A (<= 0.5), max " << r.max_distance << " A (<= 1.0), type mismatches " << r.type_mismatched
             << " (reference mean 0.27, max 0.62) ";
    o.check(r.pairs.size() == 9 && r.considered_truth == 9, "all 9 localized");
    o.check(r.mean_distance <= 0.5, "mean");
    o.check(r.max_distance <= 1.0, "max");

    // Informational: seed spread and the multislice forward model with the same templates.
    std::size_t full = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto cs = c;
        cs.imaging.rng_seed = seed;
        const auto series = simulate_series(run.truth, c.load_species(), cs.imaging, c.grid.make());
        const auto found = find_atoms(series, run.templates, c.plan(table()), table());
        const auto rep = assign(run.truth, found, c.evaluation.max_distance, c.ignored_indices(table()));
        if (rep.pairs.size() == 9 && rep.max_distance <= 1.0 && rep.mean_distance <= 0.5) ++full;
    }
    auto ms = c.imaging;
    ms.forward_method = ForwardMethod::multislice;
    const auto found = find_atoms(simulate_series(run.truth, table(), ms, c.grid.make()), run.templates,
                                  c.plan(table()), table());
    const auto rep = assign(run.truth, found, c.evaluation.max_distance, c.ignored_indices(table()));
    o.detail << "| info: seeds 1-10 meeting the bounds " << full << "/10; multislice test series paired "
             << rep.pairs.size() << "/9 mean " << rep.mean_distance << " A ";
}

// ---- 7 ---------------------------------------------------------------------------

void multi_orientation_merge(Outcome& o) {
    const auto c = shipped_config("synthetic_3orient.json");
    const auto run = run_experiment(c, c.load_species());
    double best_single = 0;
    for (const auto& r : run.orientations) {
        o.detail << "orientation " << r.orientation.angle_deg << " deg: " << r.report.pairs.size() << "/"
                 << r.report.considered_truth << " mean " << r.report.mean_distance << " std " << r.report.std_distance
                 << "; ";
        best_single = std::max(best_single, r.report.recall);
    }
    const auto& m = run.merged_report;
    double closest = 1e9, lowest = 1;
    for (std::size_t a = 0; a < run.merged.size(); ++a) {
        lowest = std::min(lowest, run.merged[a].similarity);
        for (std::size_t b = a + 1; b < run.merged.size(); ++b)
            closest = std::min(closest, distance(run.merged[a].position, run.merged[b].position));
    }
    o.detail << "merged: " << m.pairs.size() << "/" << m.considered_truth << " mean " << m.mean_distance << " std "
             << m.std_distance << ", closest pair " << closest << " A (>= 1), lowest similarity " << lowest
             << " (>= 0.5) ";
    o.check(m.recall >= best_single, "recall");
    o.check(closest >= 1.0, "spacing");
    o.check(lowest >= 0.5, "cutoff");
}

// ---- 8 ---------------------------------------------------------------------------

void noise_model(Outcome& o) {
    DefocusSeries flat(Grid3(400, 400, 0.1, 0.1, 0, 0, {0.0}), SeriesKind::intensity, {}, 1.0);
    const auto a = apply_poisson(flat, 1e4, 8), b = apply_poisson(flat, 1e4, 8);
    double mean = 0;
    for (double v : a.values.values) mean += v;
    mean /= static_cast<double>(a.values.size());
    double var = 0;
    for (double v : a.values.values) var += (v - mean) * (v - mean);
    const double rsd = std::sqrt(var / static_cast<double>(a.values.size() - 1)) / mean;
    o.detail << a.values.size() << " voxels: relative std " << rsd << " (in [0.0095, 0.0105]), same seed identical "
             << (a.values.values == b.values.values ? "yes" : "no") << ' ';
    o.check(rsd >= 0.0095 && rsd <= 0.0105, "relative std");
    o.check(a.values.values == b.values.values, "determinism");
}

// ---- 9 ---------------------------------------------------------------------------

void geometry(Outcome& o) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1, 1), pos(8, 22), ang(-180, 180);
    double worst = 0;
    for (int n = 0; n < 1000; ++n) {
        const auto orientation = Orientation::about({u(rng), u(rng), u(rng)}, ang(rng));
        const Vec3 p{pos(rng), pos(rng), pos(rng)}, center{15, 15, 15};
        const Vec3 back = rotate_point(rotate_point(p, orientation, center), orientation.inverse(), center);
        worst = std::max(worst, distance(back, p));
    }
    o.detail << "rotation round-trip worst " << worst << " A (<= 1e-6); published aspartate rows:";
    o.check(worst <= 1e-6, "round trip");
    for (std::size_t n = 0; n < testdata::aspartate_rows.size(); ++n) {
        const auto& row = testdata::aspartate_rows[n];
        const double d = distance(row.truth, row.result);
        const bool ok = std::abs(d - row.printed_distance) <= 0.005;
        o.detail << ' ' << n + 1 << ':' << std::round(d * 10000) / 10000;
        if (!ok) o.detail << " (printed " << row.printed_distance << ")";
        o.check(ok, "row " + std::to_string(n + 1));
    }
    o.detail << ' ';
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
        {"forward cross-consistency", forward_cross_consistency},
        {"contrast reversal", contrast_reversal},
        {"paraboloid support", paraboloid_support},
        {"similarity properties", similarity_properties},
        {"single-atom localization", single_atom_localization},
        {"aspartate end-to-end", aspartate_end_to_end},
        {"multi-orientation merge", multi_orientation_merge},
        {"noise model", noise_model},
        {"geometry", geometry},
    };
    const double limits[] = {30, 1e9, 1e9, 60, 1e9, 300, 1200, 1e9, 1e9};
    int failed = 0;
    for (std::size_t n = 0; n < criteria.size(); ++n) {
        Outcome o;
        const auto start = std::chrono::steady_clock::now();
        try {
            criteria[n].second(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "[exception: " << e.what() << "] ";
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (seconds > limits[n]) {
            o.pass = false;
            o.detail << "[failed: runtime above " << limits[n] << " s] ";
        }
        failed += o.pass ? 0 : 1;
        std::printf("%s criterion %zu (%s): %s(%.1f s)\n", o.pass ? "PASS" : "FAIL", n + 1, criteria[n].first,
                    o.detail.str().c_str(), seconds);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
