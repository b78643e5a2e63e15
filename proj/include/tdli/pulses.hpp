#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "tdli/constants.hpp"

// One pulsed standing-wave grating and the three-pulse sequence. A pulse is
// characterized by where it fires in time and by the transmission profile it
// stamps on the matter wave:
//
//   t(x) = exp[ (i phi0 - n0/2) * (1 + V cos(G x)) / 2 ],   G = 2 pi / d
//
// n0   mean absorbed photon number at an antinode (absorption depth),
// phi0 peak dipole phase, V modulation depth (V = 2 sqrt(R)/(1+R) for mirror
// reflectivity R; V = 1 only for ideal retro-reflection), d = lambda/2.
//
// tilt_theta is the angle between this pulse's wave vector and the common
// mirror normal; it stretches the effective period by 1/cos(theta) and is
// only meaningful on the middle grating of a symmetric sequence.

namespace tdli {

struct GratingPulse {
    double fire_time_s = 0.0;
    double period_m = 0.0;   // d
    double n0 = 0.0;         // >= 0
    double phi0 = 0.0;
    double modulation = 1.0; // V in [0,1]
    double tilt_theta = 0.0; // rad, |theta| < 0.1 (small-angle regime)

    double grating_wavenumber() const { return constants::two_pi / period_m; } // G
};

inline GratingPulse make_pulse(double fire_time_s, double period_m, double n0,
                               double phi0, double modulation = 1.0,
                               double tilt_theta = 0.0) {
    if (!(period_m > 0.0)) throw std::domain_error("grating period must be positive");
    if (n0 < 0.0) throw std::domain_error("n0 must be >= 0, got " + std::to_string(n0));
    if (!(modulation >= 0.0 && modulation <= 1.0))
        throw std::domain_error("modulation depth V must be in [0,1]");
    if (!(std::abs(tilt_theta) < 0.1))
        throw std::domain_error("tilt angle exceeds the small-angle regime (|theta| < 0.1 rad)");
    return GratingPulse{fire_time_s, period_m, n0, phi0, modulation, tilt_theta};
}

// Modulation depth of a standing wave formed on a mirror of reflectivity R.
inline double modulation_from_reflectivity(double reflectivity) {
    if (!(reflectivity > 0.0 && reflectivity <= 1.0))
        throw std::domain_error("mirror reflectivity must be in (0,1]");
    const double r = std::sqrt(reflectivity);
    return 2.0 * r / (1.0 + reflectivity);
}

struct PulseSequence {
    std::array<GratingPulse, 3> pulses{};

    double delay_12() const { return pulses[1].fire_time_s - pulses[0].fire_time_s; } // T1
    double delay_23() const { return pulses[2].fire_time_s - pulses[1].fire_time_s; } // T2
    double pulse_delay() const { return delay_12(); }                                 // T
    double delta_t() const { return delay_23() - delay_12(); }                        // Delta T
};

inline PulseSequence make_sequence(const GratingPulse& g1, const GratingPulse& g2,
                                   const GratingPulse& g3) {
    if (!(g1.fire_time_s < g2.fire_time_s && g2.fire_time_s < g3.fire_time_s))
        throw std::domain_error("pulse fire times must be strictly increasing");
    if (g1.period_m != g2.period_m || g2.period_m != g3.period_m)
        throw std::domain_error("all three gratings must share one period");
    return PulseSequence{{g1, g2, g3}};
}

// Symmetric sequence with pulse delay T and detuning Delta T on the last leg.
inline PulseSequence make_symmetric_sequence(const GratingPulse& prototype, double delay_s,
                                             double delta_t_s = 0.0) {
    if (!(delay_s > 0.0)) throw std::domain_error("pulse delay must be positive");
    if (delay_s + delta_t_s <= 0.0)
        throw std::domain_error("detuning would reorder the pulse sequence");
    GratingPulse g1 = prototype;
    GratingPulse g2 = prototype;
    GratingPulse g3 = prototype;
    g1.fire_time_s = 0.0;
    g2.fire_time_s = delay_s;
    g3.fire_time_s = 2.0 * delay_s + delta_t_s;
    // The tilt lever is defined for the middle grating; the outer pulses of a
    // symmetric sequence stay referenced to the mirror normal.
    g1.tilt_theta = 0.0;
    g3.tilt_theta = 0.0;
    return PulseSequence{{g1, g2, g3}};
}

} // namespace tdli
