#pragma once

#include "pmt/species.hpp"

#include <string_view>

namespace pmt {

/// Contents of data/species_default.txt (kept identical by a unit test).
inline constexpr std::string_view default_species_text = R"TABLE(# Default Gaussian-atom species table (generated by tools/fit_species).
# sigma: least-squares single Gaussian fit to Kirkland's potential over r <= 2 A
# c: integral of the fitted Gaussian divided by 2E
# symbol z_number c_A3 sigma_A
# reference_energy_keV = 200
S 16 0.000129572404 0.110987
O 8 9.72207012e-05 0.134423
N 7 0.000107535983 0.153175
C 6 0.000119289604 0.177459
H 1 2.74828322e-05 0.187098
)TABLE";

inline const SpeciesTable& default_species_table() {
    static const SpeciesTable table = parse_species_table(default_species_text);
    return table;
}

}  // namespace pmt
