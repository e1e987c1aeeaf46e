// Writes a reproducible sparse test structure: random sequential placement inside a ball
// around the cube center with a minimum pairwise spacing.
//
//   make_synthetic <out.xyz> [seed] [ball_radius]

#include "pmt/pmt.hpp"

#include <iostream>

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: make_synthetic <out.xyz> [seed]\n";
        return 2;
    }
    const std::uint64_t seed = argc > 2 ? std::stoull(argv[2]) : 2024;
    const double radius = argc > 3 ? std::stod(argv[3]) : 7.5;
    const auto& table = pmt::default_species_table();
    std::vector<std::size_t> counts(table.size(), 0);
    counts[table.index_of("S")] = 2;
    counts[table.index_of("O")] = 9;
    counts[table.index_of("N")] = 8;
    counts[table.index_of("C")] = 31;
    const auto s = pmt::random_sparse_structure(counts, 30.0, radius, 2.5, seed);
    pmt::write_file_atomic(argv[1], pmt::write_xyz(s, table,
                                                   "synthetic: S2 O9 N8 C31, spacing >= 2.5 A, ball radius " + std::to_string(radius) + " A, seed " +
                                                       std::to_string(seed)));
    return 0;
}
