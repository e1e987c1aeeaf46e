#pragma once

#include "pmt/pmt.hpp"

#include <array>
#include <string_view>

namespace pmt::testdata {

/// Published aspartate reconstruction: original and reconstructed heavy atoms with the
/// printed similarity and distance columns.
struct ReconstructionRow {
    std::string_view truth_symbol;
    Vec3 truth;
    std::string_view result_symbol;
    Vec3 result;
    double similarity;
    double printed_distance;
};

inline constexpr std::array<ReconstructionRow, 9> aspartate_rows{{
    {"O", {2.33, 3.41, 4.31}, "O", {2.34, 3.40, 4.00}, 0.78, 0.31},
    {"O", {7.70, 3.84, 5.51}, "O", {7.70, 3.83, 6.00}, 0.78, 0.49},
    {"O", {4.39, 6.36, 5.03}, "N", {4.38, 6.37, 5.00}, 0.77, 0.03},
    {"O", {2.17, 5.09, 5.75}, "O", {2.15, 5.12, 6.00}, 0.77, 0.25},
    {"N", {5.24, 4.09, 5.38}, "C", {5.20, 4.14, 5.00}, 0.77, 0.38},
    {"C", {4.23, 4.96, 4.62}, "C", {4.26, 4.96, 4.00}, 0.75, 0.62},
    {"C", {6.81, 5.35, 4.16}, "O", {6.80, 5.39, 4.00}, 0.75, 0.16},
    {"C", {6.64, 4.48, 4.97}, "C", {6.60, 4.41, 5.00}, 0.74, 0.08},
    {"C", {2.84, 4.49, 4.94}, "C", {2.93, 4.45, 5.00}, 0.74, 0.12},
}};

inline Structure aspartate_truth(const SpeciesTable& table) {
    Structure s{10, {}};
    for (const auto& r : aspartate_rows) s.atoms.push_back({table.index_of(std::string(r.truth_symbol)), r.truth});
    return s;
}

inline std::vector<MatchResult> aspartate_results(const SpeciesTable& table) {
    std::vector<MatchResult> out;
    for (const auto& r : aspartate_rows)
        out.push_back({table.index_of(std::string(r.result_symbol)), r.result, r.similarity, 0, 0});
    return out;
}

}  // namespace pmt::testdata
