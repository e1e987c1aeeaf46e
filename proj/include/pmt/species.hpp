#pragma once

#include "pmt/error.hpp"

#include <cmath>
#include <cstddef>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace pmt {

/// Gaussian-atom parameters: the potential is 2E c G_sigma(r - r_atom).
struct AtomSpecies {
    std::string symbol;
    int z_number = 0;
    double c = 0;      // integral coefficient, Angstrom^3
    double sigma = 0;  // Gaussian width, Angstrom
};

/// Ordered species list; the order is the search order of the matcher.
/// Coefficients c are tabulated at reference_energy_keV and scale as 1/E.
class SpeciesTable {
public:
    SpeciesTable() = default;
    explicit SpeciesTable(std::vector<AtomSpecies> species, double reference_energy_keV = 200.0)
        : species_(std::move(species)), reference_energy_keV_(reference_energy_keV) {
        if (species_.empty()) throw ConfigError("species table is empty");
        if (!(reference_energy_keV_ > 0)) throw ConfigError("reference energy must be positive");
        for (std::size_t n = 0; n < species_.size(); ++n) {
            const auto& s = species_[n];
            if (s.symbol.empty()) throw ConfigError("species symbol is empty");
            if (s.z_number <= 0) throw ConfigError("species " + s.symbol + ": z_number must be positive");
            if (!(s.c > 0) || !(s.sigma > 0)) throw ConfigError("species " + s.symbol + ": c and sigma must be positive");
            for (std::size_t m = 0; m < n; ++m)
                if (species_[m].symbol == s.symbol) throw ConfigError("duplicate species symbol " + s.symbol);
        }
    }

    std::size_t size() const { return species_.size(); }
    const AtomSpecies& operator[](std::size_t n) const { return species_[n]; }
    auto begin() const { return species_.begin(); }
    auto end() const { return species_.end(); }
    double reference_energy_keV() const { return reference_energy_keV_; }

    std::optional<std::size_t> find(std::string_view symbol) const {
        for (std::size_t n = 0; n < species_.size(); ++n)
            if (species_[n].symbol == symbol) return n;
        return std::nullopt;
    }
    std::size_t index_of(std::string_view symbol) const {
        if (auto n = find(symbol)) return *n;
        throw ParseError("unknown element symbol '" + std::string(symbol) + "'");
    }

    /// Coefficient of species n at the given beam energy.
    double c_at(std::size_t n, double energy_keV) const { return species_[n].c * reference_energy_keV_ / energy_keV; }

    /// Copy with sigma -> sqrt(sigma^2 + rms^2) for every species (isotropic thermal smearing).
    SpeciesTable with_thermal(double rms) const {
        if (!(rms >= 0)) throw DomainError("thermal rms must be >= 0");
        SpeciesTable out = *this;
        if (rms == 0) return out;
        for (auto& s : out.species_) s.sigma = std::sqrt(s.sigma * s.sigma + rms * rms);
        return out;
    }

private:
    std::vector<AtomSpecies> species_;
    double reference_energy_keV_ = 200.0;
};

inline SpeciesTable apply_thermal(const SpeciesTable& table, double thermal_rms) { return table.with_thermal(thermal_rms); }

/// Parses `symbol z_number c sigma` records. `#` starts a comment; a comment of the form
/// `# reference_energy_keV = <value>` sets the energy at which c is tabulated.
inline SpeciesTable parse_species_table(std::istream& in) {
    std::vector<AtomSpecies> species;
    double reference = 200.0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            std::istringstream comment(line.substr(hash + 1));
            std::string key, eq;
            double value;
            if (comment >> key >> eq >> value && key == "reference_energy_keV" && eq == "=") reference = value;
            line.erase(hash);
        }
        std::istringstream fields(line);
        AtomSpecies s;
        if (!(fields >> s.symbol)) continue;
        if (!(fields >> s.z_number >> s.c >> s.sigma)) throw ParseError("expected: symbol z_number c sigma", line_no);
        std::string extra;
        if (fields >> extra) throw ParseError("trailing text '" + extra + "'", line_no);
        species.push_back(std::move(s));
    }
    try {
        return SpeciesTable(std::move(species), reference);
    } catch (const ConfigError& e) {
        throw ParseError(e.what());
    }
}

inline SpeciesTable parse_species_table(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_species_table(in);
}

inline std::string format_species_table(const SpeciesTable& table) {
    std::ostringstream out;
    out << "# symbol z_number c_A3 sigma_A\n";
    out << "# reference_energy_keV = " << table.reference_energy_keV() << "\n";
    out << std::setprecision(9);
    for (const auto& s : table) out << s.symbol << ' ' << s.z_number << ' ' << s.c << ' ' << s.sigma << '\n';
    return out.str();
}

}  // namespace pmt
