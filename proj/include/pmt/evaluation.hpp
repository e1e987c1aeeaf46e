#pragma once

// Scoring reconstructed atom sets against ground truth: greedy assignment, distance
// statistics, type agreement, and the contrast-change strength diagnostic.

#include "pmt/error.hpp"
#include "pmt/matcher.hpp"
#include "pmt/series.hpp"
#include "pmt/species.hpp"
#include "pmt/structure.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace pmt {

struct AssignedPair {
    Atom truth;
    MatchResult result;
    double distance = 0;  // Angstrom
};

struct EvaluationReport {
    std::vector<AssignedPair> pairs;  // in descending result similarity
    std::vector<Atom> unmatched_truth;
    std::vector<MatchResult> unmatched_results;
    std::size_t considered_truth = 0;  // truth atoms not of an ignored species
    double mean_distance = 0;
    double std_distance = 0;  // population standard deviation over pairs
    double max_distance = 0;
    std::size_t type_correct = 0;
    std::size_t type_mismatched = 0;
    double recall = 0;
};

/// Results, in descending similarity, pair with the nearest unpaired truth atom within
/// max_distance regardless of species. Truth atoms of an ignored species take no part in
/// pairing and do not count toward the recall denominator.
inline EvaluationReport assign(const Structure& truth, std::span<const MatchResult> results, double max_distance,
                               std::span<const std::size_t> ignore_species = {}) {
    if (!(max_distance > 0)) throw DomainError("max_distance must be positive");
    auto ignored = [&](std::size_t s) {
        return std::find(ignore_species.begin(), ignore_species.end(), s) != ignore_species.end();
    };
    EvaluationReport rep;
    std::vector<bool> taken(truth.atoms.size(), false), paired(truth.atoms.size(), false);
    for (std::size_t t = 0; t < truth.atoms.size(); ++t)
        if (ignored(truth.atoms[t].species)) taken[t] = true;
        else ++rep.considered_truth;

    std::vector<std::size_t> order(results.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return results[a].similarity > results[b].similarity; });
    for (std::size_t idx : order) {
        const auto& r = results[idx];
        std::size_t best = truth.atoms.size();
        double best_d = max_distance;
        for (std::size_t t = 0; t < truth.atoms.size(); ++t) {
            if (taken[t]) continue;
            const double d = distance(truth.atoms[t].position, r.position);
            if (d <= best_d && (best == truth.atoms.size() || d < best_d)) best = t, best_d = d;
        }
        if (best == truth.atoms.size()) {
            rep.unmatched_results.push_back(r);
            continue;
        }
        taken[best] = paired[best] = true;
        rep.pairs.push_back({truth.atoms[best], r, best_d});
        if (truth.atoms[best].species == r.species_index) ++rep.type_correct;
        else ++rep.type_mismatched;
    }
    for (std::size_t t = 0; t < truth.atoms.size(); ++t)
        if (!ignored(truth.atoms[t].species) && !paired[t]) rep.unmatched_truth.push_back(truth.atoms[t]);
    if (!rep.pairs.empty()) {
        double sum = 0;
        for (const auto& p : rep.pairs) sum += p.distance, rep.max_distance = std::max(rep.max_distance, p.distance);
        rep.mean_distance = sum / static_cast<double>(rep.pairs.size());
        double var = 0;
        for (const auto& p : rep.pairs) var += (p.distance - rep.mean_distance) * (p.distance - rep.mean_distance);
        rep.std_distance = std::sqrt(var / static_cast<double>(rep.pairs.size()));
    }
    rep.recall = rep.considered_truth ? static_cast<double>(rep.pairs.size()) / static_cast<double>(rep.considered_truth)
                                      : 0.0;
    return rep;
}

/// Series value at an arbitrary point: bilinear in (x, y), linear between planes.
inline double interpolate(const DefocusSeries& s, Vec3 p) {
    const auto& g = s.grid;
    if (!g.contains(p)) throw DomainError("position outside the series grid");
    auto split = [](double t, std::size_t n, std::size_t& i0, double& f) {
        if (n == 1) {
            i0 = 0, f = 0;
            return;
        }
        const double fl = std::floor(t);
        i0 = std::min(static_cast<std::size_t>(std::max(fl, 0.0)), n - 2);
        f = t - static_cast<double>(i0);
    };
    std::size_t i0, j0, k0;
    double fx, fy, fz;
    split((p.x - g.x_min()) / g.x_step(), g.nx(), i0, fx);
    split((p.y - g.y_min()) / g.y_step(), g.ny(), j0, fy);
    const auto z = g.z_planes();
    if (z.size() == 1) {
        k0 = 0, fz = 0;
    } else {
        k0 = static_cast<std::size_t>(std::upper_bound(z.begin(), z.end(), p.z) - z.begin());
        k0 = std::clamp<std::size_t>(k0, 1, z.size() - 1) - 1;
        fz = (p.z - z[k0]) / (z[k0 + 1] - z[k0]);
    }
    auto v = [&](std::size_t di, std::size_t dj, std::size_t dk) {
        const std::size_t i = std::min(i0 + di, g.nx() - 1), j = std::min(j0 + dj, g.ny() - 1),
                          k = std::min(k0 + dk, g.nz() - 1);
        return s.values(i, j, k);
    };
    auto plane = [&](std::size_t dk) {
        const double a = v(0, 0, dk) * (1 - fx) + v(1, 0, dk) * fx;
        const double b = v(0, 1, dk) * (1 - fx) + v(1, 1, dk) * fx;
        return a * (1 - fy) + b * fy;
    };
    return plane(0) * (1 - fz) + plane(1) * fz;
}

/// Delta K = K(r, z + eps) - K(r, z - eps) on a contrast series (intensity is converted).
inline double estimate_strength(const DefocusSeries& series, Vec3 position, double epsilon) {
    const DefocusSeries s = convert_kind(series, SeriesKind::contrast);
    return interpolate(s, {position.x, position.y, position.z + epsilon}) -
           interpolate(s, {position.x, position.y, position.z - epsilon});
}

// ---- report output ---------------------------------------------------------------

inline std::string encode_report_csv(const EvaluationReport& rep, const SpeciesTable& table) {
    std::ostringstream out;
    out << "truth_species,truth_x,truth_y,truth_z,species,x,y,z,similarity,distance\n";
    out << std::fixed << std::setprecision(4);
    for (const auto& p : rep.pairs) {
        out << table[p.truth.species].symbol << ',' << p.truth.position.x << ',' << p.truth.position.y << ','
            << p.truth.position.z << ',' << table[p.result.species_index].symbol << ',' << p.result.position.x << ','
            << p.result.position.y << ',' << p.result.position.z << ',' << p.result.similarity << ',' << p.distance
            << '\n';
    }
    return out.str();
}

/// Table-style summary: one original row and one reconstructed row per pair, then totals.
inline std::string format_report(const EvaluationReport& rep, const SpeciesTable& table) {
    std::ostringstream out;
    out << std::fixed;
    out << "         Atom      x        y        z        C      Distance\n";
    std::size_t n = 0;
    for (const auto& p : rep.pairs) {
        ++n;
        out << "Orig." << std::left << std::setw(4) << n << std::right << std::setw(3) << table[p.truth.species].symbol
            << std::setprecision(2) << std::setw(9) << p.truth.position.x << std::setw(9) << p.truth.position.y
            << std::setw(9) << p.truth.position.z << '\n';
        out << "Rec. " << std::left << std::setw(4) << n << std::right << std::setw(3)
            << table[p.result.species_index].symbol << std::setw(9) << p.result.position.x << std::setw(9)
            << p.result.position.y << std::setw(9) << p.result.position.z << std::setw(9) << p.result.similarity
            << std::setw(9) << p.distance << '\n';
    }
    for (const auto& r : rep.unmatched_results)
        out << "Rec. -  " << std::setw(4) << table[r.species_index].symbol << std::setprecision(2) << std::setw(9)
            << r.position.x << std::setw(9) << r.position.y << std::setw(9) << r.position.z << std::setw(9)
            << r.similarity << "  unmatched\n";
    out << std::setprecision(4);
    out << "paired: " << rep.pairs.size() << " of " << rep.considered_truth << " (recall " << rep.recall << ")\n";
    out << "mean distance: " << rep.mean_distance << " A, std: " << rep.std_distance << " A, max: " << rep.max_distance
        << " A\n";
    out << "type correct: " << rep.type_correct << ", type mismatched: " << rep.type_mismatched << '\n';
    out << "unmatched truth: " << rep.unmatched_truth.size() << ", unmatched results: " << rep.unmatched_results.size()
        << '\n';
    return out.str();
}

}  // namespace pmt
