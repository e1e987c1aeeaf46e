#pragma once

// Forward models for defocus series of Gaussian-atom structures:
//  - closed-form paraxial Gaussian-beam contrast (analytic),
//  - linearized Fresnel contrast assembled in the 2D spectrum (fourier),
//  - weak-phase multislice with Fresnel back-propagation of the exit wave.
//
// Propagation convention: a wave spectrum propagated by a distance d is multiplied by
// exp(-i pi lambda d q^2). For a weak phase object phi this gives
//   K(q, z) = -2 phi(q) sin(pi lambda (z - z_atom) q^2),
// the linearized defocus kernel, so all three paths share one sign convention
// (K < 0 on axis downstream of an atom).

#include "pmt/error.hpp"
#include "pmt/fft.hpp"
#include "pmt/grid.hpp"
#include "pmt/imaging.hpp"
#include "pmt/parallel.hpp"
#include "pmt/series.hpp"
#include "pmt/species.hpp"
#include "pmt/structure.hpp"

#include <cmath>
#include <optional>
#include <random>
#include <vector>

namespace pmt {

/// Reduced defocus and beam width of one Gaussian atom at defocus distance dz = z - z_atom.
struct GaussianBeamState {
    double delta_z_tilde = 0;  // lambda dz / (2 pi sigma^2)
    double w_sq = 0;           // 2 sigma^2 (1 + delta_z_tilde^2)

    static GaussianBeamState at(double sigma, double wavelength, double dz) {
        const double t = wavelength * dz / (2 * constants::pi * sigma * sigma);
        return {t, 2 * sigma * sigma * (1 + t * t)};
    }
};

/// Closed-form contrast of one Gaussian atom at squared transverse distance rho_sq and
/// defocus dz. This is the exact 2D inverse transform of the linearized spectrum
/// -(4 pi c / lambda) exp(-2 pi^2 sigma^2 q^2) sin(pi lambda dz q^2); the factor
/// sqrt(1 + t^2) is the Gaussian-beam amplitude term that keeps the axial decay 1/dz.
inline double gaussian_atom_contrast(double c, double sigma, double wavelength, double rho_sq, double dz) {
    const auto b = GaussianBeamState::at(sigma, wavelength, dz);
    const double t = b.delta_z_tilde;
    const double a = rho_sq / b.w_sq;
    return 4.0 / wavelength * c * std::sqrt(1 + t * t) / b.w_sq * std::exp(-a) * std::sin(t * a - std::atan(t));
}

/// On-axis value of gaussian_atom_contrast written as a single rational function of dz.
inline double gaussian_atom_contrast_on_axis(double c, double sigma, double wavelength, double dz) {
    const double t = wavelength * dz / (2 * constants::pi * sigma * sigma);
    return -c * dz / (constants::pi * std::pow(sigma, 4) * (1 + t * t));
}

/// Point-atom contrast (sigma -> 0 limit), singular at dz = 0. Diagnostic only; never gridded.
inline double delta_atom_contrast(double c, double wavelength, double rho_sq, double dz) {
    if (dz == 0) throw DomainError("point-atom contrast is singular in the atom plane");
    return -4 * constants::pi * c / (wavelength * wavelength * dz) *
           std::cos(constants::pi * rho_sq / (wavelength * dz));
}

namespace detail {

/// Zero-pads each plane of a field, removes spatial frequencies above q_max and crops back.
inline void lowpass_planes(Field3& f, double dx, double dy, double q_max, std::size_t pad) {
    const std::size_t nx = f.nx, ny = f.ny, px = pad * nx, py = pad * ny;
    const auto qx = fft_frequencies(px, dx), qy = fft_frequencies(py, dy);
    const double q2max = q_max * q_max;
    parallel_for(0, f.nz, [&](std::size_t k) {
        FftPlan fft({static_cast<int>(py), static_cast<int>(px)});
        auto d = fft.data();
        auto plane = f.plane(k);
        for (std::size_t j = 0; j < ny; ++j)
            for (std::size_t i = 0; i < nx; ++i) d[j * px + i] = plane[j * nx + i];
        fft.forward();
        for (std::size_t j = 0; j < py; ++j)
            for (std::size_t i = 0; i < px; ++i)
                if (qx[i] * qx[i] + qy[j] * qy[j] > q2max) d[j * px + i] = 0;
        fft.backward();
        const double norm = 1.0 / static_cast<double>(px * py);
        for (std::size_t j = 0; j < ny; ++j)
            for (std::size_t i = 0; i < nx; ++i) plane[j * nx + i] = d[j * px + i].real() * norm;
    });
}

inline void check_atoms(const Structure& s, const SpeciesTable& table) {
    for (const auto& a : s.atoms)
        if (a.species >= table.size()) throw DomainError("atom species index out of range");
}

}  // namespace detail

inline constexpr std::size_t default_pad_factor = 2;

/// Closed-form Gaussian-beam contrast on every voxel, thermal rms folded into sigma;
/// an objective aperture is applied afterwards as a zero-padded per-plane low-pass.
inline DefocusSeries contrast_analytic(const Structure& s, const SpeciesTable& table, const ImagingConfig& config,
                                       const Grid3& grid, int orientation_id = 0) {
    detail::check_atoms(s, table);
    const auto widened = table.with_thermal(config.thermal_rms);
    const double lambda = config.wavelength();
    DefocusSeries out(grid, SeriesKind::contrast, config, 0.0, orientation_id);
    const std::size_t nx = grid.nx(), ny = grid.ny();
    parallel_for(0, grid.nz(), [&](std::size_t k) {
        auto plane = out.values.plane(k);
        for (const auto& atom : s.atoms) {
            const double sigma = widened[atom.species].sigma;
            const double c = widened.c_at(atom.species, config.energy_keV);
            const double dz = grid.z(k) - atom.position.z;
            const auto beam = GaussianBeamState::at(sigma, lambda, dz);
            const double t = beam.delta_z_tilde;
            const double amp = 4.0 / lambda * c * std::sqrt(1 + t * t) / beam.w_sq;
            const double phase0 = std::atan(t);
            // exp(-40) is below double resolution of the summed field.
            const double reach = std::sqrt(40.0 * beam.w_sq);
            const auto lo_i = static_cast<long>(std::ceil((atom.position.x - reach - grid.x_min()) / grid.x_step()));
            const auto hi_i = static_cast<long>(std::floor((atom.position.x + reach - grid.x_min()) / grid.x_step()));
            const auto lo_j = static_cast<long>(std::ceil((atom.position.y - reach - grid.y_min()) / grid.y_step()));
            const auto hi_j = static_cast<long>(std::floor((atom.position.y + reach - grid.y_min()) / grid.y_step()));
            for (long j = std::max(0L, lo_j); j <= std::min<long>(hi_j, static_cast<long>(ny) - 1); ++j) {
                const double ry = grid.y(static_cast<std::size_t>(j)) - atom.position.y;
                for (long i = std::max(0L, lo_i); i <= std::min<long>(hi_i, static_cast<long>(nx) - 1); ++i) {
                    const double rx = grid.x(static_cast<std::size_t>(i)) - atom.position.x;
                    const double a = (rx * rx + ry * ry) / beam.w_sq;
                    plane[static_cast<std::size_t>(j) * nx + static_cast<std::size_t>(i)] +=
                        amp * std::exp(-a) * std::sin(t * a - phase0);
                }
            }
        }
    });
    if (auto q = aperture_cutoff(config))
        detail::lowpass_planes(out.values, grid.x_step(), grid.y_step(), *q, default_pad_factor);
    return out;
}

/// Linearized Fresnel contrast: the 2D spectrum of every plane is assembled from the
/// Gaussian-atom model (z-Gaussian projected to unit weight) on a grid padded by pad,
/// aperture-limited, inverse transformed and cropped.
inline DefocusSeries contrast_fourier(const Structure& s, const SpeciesTable& table, const ImagingConfig& config,
                                      const Grid3& grid, int orientation_id = 0,
                                      std::size_t pad = default_pad_factor) {
    detail::check_atoms(s, table);
    const auto widened = table.with_thermal(config.thermal_rms);
    const double lambda = config.wavelength();
    const std::size_t nx = grid.nx(), ny = grid.ny(), px = pad * nx, py = pad * ny;
    const auto qx = fft_frequencies(px, grid.x_step()), qy = fft_frequencies(py, grid.y_step());
    const auto q_max = aperture_cutoff(config);
    const double pi = constants::pi;

    // Per-atom separable phase ramps exp(-i 2 pi q . r_atom).
    const std::size_t m_count = s.atoms.size();
    std::vector<std::vector<cplx>> ramp_x(m_count), ramp_y(m_count);
    for (std::size_t m = 0; m < m_count; ++m) {
        const auto& p = s.atoms[m].position;
        ramp_x[m].resize(px);
        ramp_y[m].resize(py);
        for (std::size_t i = 0; i < px; ++i) ramp_x[m][i] = std::polar(1.0, -2 * pi * qx[i] * (p.x - grid.x_min()));
        for (std::size_t j = 0; j < py; ++j) ramp_y[m][j] = std::polar(1.0, -2 * pi * qy[j] * (p.y - grid.y_min()));
    }

    DefocusSeries out(grid, SeriesKind::contrast, config, 0.0, orientation_id);
    parallel_for(0, grid.nz(), [&](std::size_t k) {
        FftPlan fft({static_cast<int>(py), static_cast<int>(px)});
        auto d = fft.data();
        for (std::size_t j = 0; j < py; ++j) {
            for (std::size_t i = 0; i < px; ++i) {
                const double q2 = qx[i] * qx[i] + qy[j] * qy[j];
                if (q_max && q2 > *q_max * *q_max) continue;
                cplx acc = 0;
                for (std::size_t m = 0; m < m_count; ++m) {
                    const auto& atom = s.atoms[m];
                    const double sigma = widened[atom.species].sigma;
                    const double c = widened.c_at(atom.species, config.energy_keV);
                    const double dz = grid.z(k) - atom.position.z;
                    const double amp = -(4 * pi / lambda) * c * std::exp(-2 * pi * pi * sigma * sigma * q2) *
                                       std::sin(pi * lambda * dz * q2);
                    acc += amp * ramp_x[m][i] * ramp_y[m][j];
                }
                d[j * px + i] = acc;
            }
        }
        fft.backward();
        // Continuous inverse transform: sum * dq_x dq_y = sum / (px dx py dy).
        const double norm = 1.0 / (static_cast<double>(px * py) * grid.x_step() * grid.y_step());
        auto plane = out.values.plane(k);
        for (std::size_t j = 0; j < ny; ++j)
            for (std::size_t i = 0; i < nx; ++i) plane[j * nx + i] = d[j * px + i].real() * norm;
    });
    return out;
}

/// Weak-phase multislice through the slab [0, cube_side] followed by Fresnel propagation of
/// the exit wave to every plane of grid. Each slice applies its projected Gaussian potential
/// at mid-slice (half-step, transmit, half-step); the atom's z-Gaussian mass inside the slice
/// is integrated analytically. The objective aperture acts on the exit wave.
inline DefocusSeries multislice_series(const Structure& s, const SpeciesTable& table, const ImagingConfig& config,
                                       const Grid3& grid, int orientation_id = 0,
                                       std::size_t pad = default_pad_factor) {
    detail::check_atoms(s, table);
    if (!(s.cube_side > 0)) throw ConfigError("multislice needs a structure with a positive cube side");
    const double dslice = config.slice_thickness;
    if (!(dslice > 0)) throw ConfigError("slice_thickness must be positive");
    const double n_real = s.cube_side / dslice;
    const auto n_slices = static_cast<std::size_t>(std::llround(n_real));
    if (n_slices == 0 || std::abs(n_real - static_cast<double>(n_slices)) > 1e-6 * n_real)
        throw ConfigError("slice_thickness must divide the cube side into an integer number of slices");

    const auto widened = table.with_thermal(config.thermal_rms);
    const double lambda = config.wavelength();
    const double pi = constants::pi;
    const std::size_t nx = grid.nx(), ny = grid.ny(), px = pad * nx, py = pad * ny;
    const auto qx = fft_frequencies(px, grid.x_step()), qy = fft_frequencies(py, grid.y_step());
    std::vector<double> q2(px * py);
    for (std::size_t j = 0; j < py; ++j)
        for (std::size_t i = 0; i < px; ++i) q2[j * px + i] = qx[i] * qx[i] + qy[j] * qy[j];
    const double inv_n = 1.0 / static_cast<double>(px * py);

    std::vector<cplx> half_step(px * py);
    for (std::size_t n = 0; n < q2.size(); ++n) half_step[n] = std::polar(inv_n, -pi * lambda * 0.5 * dslice * q2[n]);

    FftPlan wave({static_cast<int>(py), static_cast<int>(px)});
    FftPlan phase({static_cast<int>(py), static_cast<int>(px)});
    auto w = wave.data();
    std::fill(w.begin(), w.end(), cplx{1.0, 0.0});

    auto propagate_half = [&] {
        wave.forward();
        for (std::size_t n = 0; n < w.size(); ++n) w[n] *= half_step[n];
        wave.backward();
    };

    const double phase_norm = 1.0 / (static_cast<double>(px * py) * grid.x_step() * grid.y_step());
    for (std::size_t slice = 0; slice < n_slices; ++slice) {
        const double z0 = static_cast<double>(slice) * dslice, z1 = z0 + dslice;
        auto ph = phase.data();
        std::fill(ph.begin(), ph.end(), cplx{});
        bool any = false;
        for (const auto& atom : s.atoms) {
            const double sigma = widened[atom.species].sigma;
            const double frac = 0.5 * (std::erf((z1 - atom.position.z) / (std::sqrt(2.0) * sigma)) -
                                       std::erf((z0 - atom.position.z) / (std::sqrt(2.0) * sigma)));
            if (frac < 1e-14) continue;
            any = true;
            // phase = (pi / (lambda E)) * 2E c frac G_perp = (2 pi c / lambda) frac G_perp
            const double weight = 2 * pi * widened.c_at(atom.species, config.energy_keV) / lambda * frac;
            std::vector<cplx> rx(px), ry(py);
            for (std::size_t i = 0; i < px; ++i) rx[i] = std::polar(1.0, -2 * pi * qx[i] * (atom.position.x - grid.x_min()));
            for (std::size_t j = 0; j < py; ++j) ry[j] = std::polar(weight, -2 * pi * qy[j] * (atom.position.y - grid.y_min()));
            for (std::size_t j = 0; j < py; ++j)
                for (std::size_t i = 0; i < px; ++i)
                    ph[j * px + i] += std::exp(-2 * pi * pi * sigma * sigma * q2[j * px + i]) * rx[i] * ry[j];
        }
        propagate_half();
        if (any) {
            phase.backward();
            for (std::size_t n = 0; n < w.size(); ++n) w[n] *= std::polar(1.0, ph[n].real() * phase_norm);
        }
        propagate_half();
    }

    wave.forward();  // exit-wave spectrum, unnormalized
    if (auto q = aperture_cutoff(config)) {
        for (std::size_t n = 0; n < w.size(); ++n)
            if (q2[n] > *q * *q) w[n] = 0;
    }
    const std::vector<cplx> exit_spectrum(w.begin(), w.end());

    DefocusSeries out(grid, SeriesKind::intensity, config, 0.0, orientation_id);
    for (std::size_t k = 0; k < grid.nz(); ++k) {
        const double d = grid.z(k) - s.cube_side;
        for (std::size_t n = 0; n < w.size(); ++n) w[n] = exit_spectrum[n] * std::polar(inv_n, -pi * lambda * d * q2[n]);
        wave.backward();
        auto plane = out.values.plane(k);
        for (std::size_t j = 0; j < ny; ++j)
            for (std::size_t i = 0; i < nx; ++i) plane[j * nx + i] = config.incident_intensity * std::norm(w[j * px + i]);
    }
    return out;
}

/// Periodic per-plane low-pass removing spatial frequencies above q_max. nullopt is the identity.
inline DefocusSeries apply_aperture(const DefocusSeries& series, std::optional<double> q_max) {
    if (!q_max) return series;
    DefocusSeries out = series;
    detail::lowpass_planes(out.values, series.grid.x_step(), series.grid.y_step(), *q_max, 1);
    return out;
}

/// Replaces each voxel by Poisson(dose * I) / dose using a generator seeded with seed.
inline DefocusSeries apply_poisson(const DefocusSeries& series, double dose, std::uint64_t seed) {
    if (series.kind != SeriesKind::intensity) throw DomainError("shot noise applies to intensity series");
    if (!(dose > 0)) throw DomainError("dose must be positive");
    DefocusSeries out = series;
    std::mt19937_64 rng(seed);
    for (auto& v : out.values.values) {
        if (v < 0) throw DomainError("negative intensity cannot carry shot noise");
        const double mean = dose * v;
        if (mean == 0) continue;
        std::poisson_distribution<long long> draw(mean);
        v = static_cast<double>(draw(rng)) / dose;
    }
    out.config.dose = dose;
    out.config.rng_seed = seed;
    return out;
}

/// Noiseless series of the requested method, aperture and thermal settings applied.
/// The linear paths return contrast, multislice returns intensity.
inline DefocusSeries forward_series(const Structure& s, const SpeciesTable& table, const ImagingConfig& config,
                                    const Grid3& grid, int orientation_id = 0) {
    switch (config.forward_method) {
        case ForwardMethod::analytic: return contrast_analytic(s, table, config, grid, orientation_id);
        case ForwardMethod::fourier: return contrast_fourier(s, table, config, grid, orientation_id);
        case ForwardMethod::multislice: return multislice_series(s, table, config, grid, orientation_id);
    }
    throw ConfigError("unknown forward method");
}

/// Full simulated measurement: forward model, then shot noise when config.dose is set.
/// Always returns an intensity series.
inline DefocusSeries simulate_series(const Structure& s, const SpeciesTable& table, const ImagingConfig& config,
                                     const Grid3& grid, int orientation_id = 0) {
    config.validate();
    auto series = convert_kind(forward_series(s, table, config, grid, orientation_id), SeriesKind::intensity);
    if (config.dose) {
        for (auto& v : series.values.values) v = std::max(v, 0.0);
        series = apply_poisson(series, *config.dose, config.rng_seed);
    }
    return series;
}

// ---- reciprocal-space support check ---------------------------------------

struct ParaboloidCheck {
    double mass_fraction = 0;  // spectral energy inside the band
    double band_fraction = 0;  // fraction of DFT bins inside the band (white-noise expectation)
    bool empty = false;        // the field is identically zero
};

/// 3D DFT of a contrast series and the share of its energy within one q_z bin of the
/// surfaces q_z = +-(lambda/2) q_perp^2.
inline ParaboloidCheck spectral_paraboloid_check(const DefocusSeries& series) {
    const auto& g = series.grid;
    if (g.nz() < 8) throw ConfigError("paraboloid check needs at least 8 planes");
    if (!g.uniform_z()) throw ConfigError("paraboloid check needs uniformly spaced planes");
    const double lambda = series.config.wavelength();
    const std::size_t nx = g.nx(), ny = g.ny(), nz = g.nz();
    FftPlan fft({static_cast<int>(nz), static_cast<int>(ny), static_cast<int>(nx)});
    auto d = fft.data();
    for (std::size_t n = 0; n < d.size(); ++n) d[n] = series.values.values[n];
    fft.forward();
    const auto qx = fft_frequencies(nx, g.x_step()), qy = fft_frequencies(ny, g.y_step()),
               qz = fft_frequencies(nz, g.z_step());
    const double bin = 1.0 / (static_cast<double>(nz) * g.z_step());
    const double tol = bin * (1 + 1e-9);
    double total = 0, inside = 0;
    std::size_t band_bins = 0;
    for (std::size_t k = 0; k < nz; ++k)
        for (std::size_t j = 0; j < ny; ++j)
            for (std::size_t i = 0; i < nx; ++i) {
                const double p = 0.5 * lambda * (qx[i] * qx[i] + qy[j] * qy[j]);
                const bool in_band = std::abs(qz[k] - p) <= tol || std::abs(qz[k] + p) <= tol;
                const double e = std::norm(d[(k * ny + j) * nx + i]);
                total += e;
                if (in_band) {
                    inside += e;
                    ++band_bins;
                }
            }
    ParaboloidCheck r;
    r.band_fraction = static_cast<double>(band_bins) / static_cast<double>(d.size());
    if (total == 0) {
        r.empty = true;
        return r;
    }
    r.mass_fraction = inside / total;
    return r;
}

}  // namespace pmt
