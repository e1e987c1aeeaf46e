#pragma once

// Combining match results from several orientations of the same structure: similarity
// truncation, position-only duplicate filtering, back-rotation into a common frame, and
// the merged-set selection.

#include "pmt/error.hpp"
#include "pmt/matcher.hpp"
#include "pmt/structure.hpp"

#include <algorithm>
#include <numeric>
#include <span>
#include <vector>

namespace pmt {

/// Keeps the results with similarity >= cutoff, in their original order.
inline std::vector<MatchResult> truncate_by_similarity(std::span<const MatchResult> results, double cutoff) {
    if (!(cutoff >= 0 && cutoff <= 1)) throw DomainError("similarity cutoff must lie in [0, 1]");
    std::vector<MatchResult> out;
    std::copy_if(results.begin(), results.end(), std::back_inserter(out),
                 [&](const MatchResult& r) { return r.similarity >= cutoff; });
    return out;
}

namespace detail {

/// Indices of results in descending similarity; ties keep input order.
inline std::vector<std::size_t> by_descending_similarity(std::span<const MatchResult> results) {
    std::vector<std::size_t> order(results.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return results[a].similarity > results[b].similarity; });
    return order;
}

}  // namespace detail

/// Greedy clustering in descending similarity: a result survives iff no already kept result
/// of any species lies within radius. Output is in descending similarity.
inline std::vector<MatchResult> filter_duplicates(std::span<const MatchResult> results, double radius) {
    if (!(radius > 0)) throw DomainError("duplicate radius must be positive");
    std::vector<MatchResult> kept;
    for (std::size_t idx : detail::by_descending_similarity(results)) {
        const auto& r = results[idx];
        const bool near = std::any_of(kept.begin(), kept.end(),
                                      [&](const MatchResult& k) { return distance(k.position, r.position) < radius; });
        if (!near) kept.push_back(r);
    }
    return kept;
}

/// Undoes the orientation used to produce the series: positions rotate by the inverse about
/// the cube center. Species, similarity and source orientation are kept.
inline std::vector<MatchResult> rotate_back(std::span<const MatchResult> results, const Orientation& orientation,
                                            double cube_side) {
    const Vec3 center{0.5 * cube_side, 0.5 * cube_side, 0.5 * cube_side};
    std::vector<MatchResult> out(results.begin(), results.end());
    for (auto& r : out) {
        r.position = rotate_point(r.position, orientation.inverse(), center);
        r.source_orientation = orientation.id;
    }
    return out;
}

/// Per set: truncate, then filter duplicates; then the union is filtered again so that each
/// multiplet keeps its highest-similarity member. Output is in descending similarity.
inline std::vector<MatchResult> merge_orientations(std::span<const std::vector<MatchResult>> sets, double radius,
                                                   double cutoff) {
    if (!(radius > 0)) throw DomainError("duplicate radius must be positive");
    std::vector<MatchResult> pooled;
    for (const auto& set : sets) {
        const auto filtered = filter_duplicates(truncate_by_similarity(set, cutoff), radius);
        pooled.insert(pooled.end(), filtered.begin(), filtered.end());
    }
    return filter_duplicates(pooled, radius);
}

}  // namespace pmt
