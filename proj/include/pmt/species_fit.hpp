#pragma once

// Single-Gaussian fits to Kirkland's parametrized atomic electrostatic
// potentials. Used to regenerate data/species_default.txt and by its test.

#include "pmt/error.hpp"
#include "pmt/imaging.hpp"

#include <array>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

namespace pmt {

/// Kirkland (2010) parameters: Lorentzian terms a_i/(q^2+b_i), Gaussian terms c_i exp(-d_i q^2).
struct KirklandParams {
    std::string_view symbol;
    int z_number;
    std::array<double, 3> a, b, c, d;
};

inline constexpr std::array<KirklandParams, 5> kirkland_table{{
    {"H", 1, {0.0042029832, 0.0627762505, 0.0300907347}, {0.225350888, 0.22536695, 0.225331756},
     {0.0677756695, 0.0035660924, 0.0276135815}, {4.38854001, 0.403884823, 1.44490166}},
    {"C", 6, {0.212080767, 0.199811865, 0.168254385}, {0.208605417, 0.208610186, 5.57870773},
     {0.14204836, 0.363830672, 0.000835012}, {1.33311887, 3.80800263, 0.040398262}},
    {"N", 7, {0.533015554, 0.0529008883, 0.0924159648}, {0.290952515, 10.3547896, 10.3540028},
     {0.261799101, 0.0008802621, 0.110166555}, {2.76252723, 0.0347681236, 0.993421736}},
    {"O", 8, {0.339969204, 0.307570172, 0.130369072}, {0.38157028, 0.381571436, 19.1919745},
     {0.0883326058, 0.1965867, 0.00099622}, {0.760635525, 2.07401094, 0.0303266869}},
    {"S", 16, {1.01646916, 0.441766748, 0.121503863}, {1.69181965, 0.174180288, 167.011091},
     {0.82796667, 0.0233022533, 1.18302846}, {2.3034281, 0.15695415, 5.85782891}},
}};

inline const KirklandParams& kirkland_params(std::string_view symbol) {
    for (const auto& p : kirkland_table)
        if (p.symbol == symbol) return p;
    throw DomainError("no Kirkland parameters for element " + std::string(symbol));
}

// Bohr radius times elementary charge, in V Angstrom^2.
inline constexpr double bohr_times_charge = 0.529177210903 * 14.3996454784;

/// Electrostatic potential in volts at radius r (Angstrom).
inline double kirkland_potential(const KirklandParams& p, double r) {
    using constants::pi;
    double v = 0;
    for (int i = 0; i < 3; ++i) {
        v += 2 * pi * pi * bohr_times_charge * p.a[i] / r * std::exp(-2 * pi * r * std::sqrt(p.b[i]));
        v += 2 * std::pow(pi, 2.5) * bohr_times_charge * p.c[i] * std::pow(p.d[i], -1.5) *
             std::exp(-pi * pi * r * r / p.d[i]);
    }
    return v;
}

struct GaussianFit {
    double sigma;      // Angstrom
    double amplitude;  // volts
    double integral;   // V Angstrom^3
    double residual;
};

/// Least-squares fit of A exp(-r^2/(2 sigma^2)) to the potential over the ball r <= r_max
/// (radial weight r^2). The amplitude is solved in closed form for every trial sigma; sigma is
/// found by a coarse scan followed by a fine scan around the best coarse value.
inline GaussianFit fit_gaussian(const KirklandParams& p, double r_max = 2.0, int samples = 4000) {
    using constants::pi;
    const double dr = r_max / samples;
    std::vector<double> r2(samples), w(samples), v(samples);
    double vv = 0;
    for (int n = 0; n < samples; ++n) {
        const double r = (n + 0.5) * dr;
        r2[n] = r * r;
        w[n] = r * r;
        v[n] = kirkland_potential(p, r);
        vv += w[n] * v[n] * v[n];
    }
    auto evaluate = [&](double sigma) {
        double gv = 0, gg = 0;
        const double k = -1.0 / (2 * sigma * sigma);
        for (int n = 0; n < samples; ++n) {
            const double g = std::exp(k * r2[n]);
            gv += w[n] * g * v[n];
            gg += w[n] * g * g;
        }
        const double amp = gv / gg;
        return GaussianFit{sigma, amp, amp * std::pow(2 * pi * sigma * sigma, 1.5), (vv - amp * gv) * dr};
    };
    auto scan = [&](double lo, double hi, double step) {
        GaussianFit best = evaluate(lo);
        for (double s = lo + step; s <= hi + 0.5 * step; s += step) {
            const auto f = evaluate(s);
            if (f.residual < best.residual) best = f;
        }
        return best;
    };
    const auto coarse = scan(0.02, 1.0, 1e-3);
    return scan(coarse.sigma - 1e-3, coarse.sigma + 1e-3, 1e-6);
}

/// c such that 2E c equals the fitted integrated potential at the given energy.
inline double integral_coefficient(const GaussianFit& fit, double energy_keV) {
    return fit.integral / (2.0 * 1000.0 * energy_keV);
}

}  // namespace pmt
