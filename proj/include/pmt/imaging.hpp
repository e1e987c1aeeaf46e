#pragma once

#include "pmt/error.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace pmt {

namespace constants {
inline constexpr double pi = 3.14159265358979323846;
inline constexpr double planck = 6.62607015e-34;          // J s
inline constexpr double electron_mass = 9.1093837015e-31;  // kg
inline constexpr double elementary_charge = 1.602176634e-19;
inline constexpr double speed_of_light = 299792458.0;
}  // namespace constants

/// Relativistic electron de Broglie wavelength in Angstrom.
inline double derive_wavelength(double energy_keV) {
    using namespace constants;
    if (!(energy_keV > 0)) throw DomainError("electron energy must be positive");
    const double volts = 1000.0 * energy_keV;
    const double eU = elementary_charge * volts;
    const double p = std::sqrt(2.0 * electron_mass * eU * (1.0 + eU / (2.0 * electron_mass * speed_of_light * speed_of_light)));
    return planck / p * 1e10;
}

enum class ForwardMethod { analytic, fourier, multislice };

inline std::string_view to_string(ForwardMethod m) {
    switch (m) {
        case ForwardMethod::analytic: return "analytic";
        case ForwardMethod::fourier: return "fourier";
        case ForwardMethod::multislice: return "multislice";
    }
    return "?";
}

inline ForwardMethod parse_forward_method(std::string_view s) {
    if (s == "analytic") return ForwardMethod::analytic;
    if (s == "fourier") return ForwardMethod::fourier;
    if (s == "multislice") return ForwardMethod::multislice;
    throw ConfigError("unknown forward method '" + std::string(s) + "'");
}

/// Largest q_perp^2 * (lambda/2)^2 for which the Gaussian-beam closed form is used.
inline constexpr double paraxial_limit = 2e-4;

/// (lambda/2)^2 q_max^2 with q_max = 1/resolution.
inline double paraxial_parameter(double wavelength, double resolution) {
    const double q = 1.0 / resolution;
    return 0.25 * wavelength * wavelength * q * q;
}

struct ImagingConfig {
    double energy_keV = 200.0;
    double incident_intensity = 1.0;
    std::optional<double> aperture_mrad;  // nullopt: unlimited
    double thermal_rms = 0.0;             // Angstrom
    std::optional<double> dose;           // counts per voxel on unit background; nullopt: noiseless
    ForwardMethod forward_method = ForwardMethod::analytic;
    double slice_thickness = 0.5;          // Angstrom, multislice only
    double target_resolution = 1.0;        // Angstrom
    std::uint64_t rng_seed = 1;

    double wavelength() const { return derive_wavelength(energy_keV); }
    double energy_volts() const { return 1000.0 * energy_keV; }

    /// Throws ConfigError when an invariant is violated.
    void validate() const {
        if (!(energy_keV > 0)) throw ConfigError("energy_keV must be positive");
        if (!(incident_intensity > 0)) throw ConfigError("incident_intensity must be positive");
        if (aperture_mrad && !(*aperture_mrad > 0)) throw ConfigError("aperture_mrad must be positive");
        if (!(thermal_rms >= 0)) throw ConfigError("thermal_rms must be >= 0");
        if (dose && !(*dose > 0)) throw ConfigError("dose must be positive");
        if (forward_method == ForwardMethod::multislice && !(slice_thickness > 0))
            throw ConfigError("slice_thickness must be positive");
        if (!(target_resolution > 0)) throw ConfigError("target_resolution must be positive");
        if (forward_method != ForwardMethod::multislice &&
            paraxial_parameter(wavelength(), target_resolution) >= paraxial_limit)
            throw ConfigError("paraxial smallness (lambda/2)^2 q_max^2 exceeds 2e-4; use the multislice path");
    }
};

/// Objective-aperture cutoff theta/lambda in 1/Angstrom; nullopt when unlimited.
inline std::optional<double> aperture_cutoff(const ImagingConfig& config) {
    if (!config.aperture_mrad) return std::nullopt;
    return (*config.aperture_mrad * 1e-3) / config.wavelength();
}

}  // namespace pmt
