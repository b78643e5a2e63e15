#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

// Everything external to the pulses and the source that moves or damps the
// fringes: lateral grating offsets, a uniform acceleration along the grating
// axis, and the mirror-mount geometry behind the middle-pulse tilt lever.

namespace tdli {

struct Environment {
    // Standing-wave lateral offsets x_k of the three pulses. Only the echo
    // combination x1 - 2 x2 + x3 is observable.
    std::array<double, 3> offsets{0.0, 0.0, 0.0}; // m

    // Uniform acceleration along the grating axis (gravity projection,
    // vibration bias). Applied via the falling-frame substitution
    // x_k -> x_k - a t_k^2 / 2, which is exact for uniform a.
    double acceleration = 0.0; // m/s^2

    // Height of the beam reference point above the mirror pivot. A molecule
    // at height z sees a tilted pulse displaced by z (1 - cos theta).
    double mount_height = 0.0; // m

    // Phenomenological visibility decay with mean beam height; multiplies
    // the modulated (n != 0) terms by exp(-mean_height / decay_length).
    double height_decay_length = std::numeric_limits<double>::infinity(); // m

    void validate() const {
        if (!(height_decay_length > 0.0))
            throw std::domain_error("Environment: decay length must be > 0");
        if (mount_height < 0.0)
            throw std::domain_error("Environment: mount height must be >= 0");
    }
};

// Fringe displacement along x3 from uniform acceleration: the falling-frame
// shifts combine to a (t1^2 - 2 t2^2 + t3^2) / 2, which is a T^2 for a
// symmetric sequence (0, T, 2T) and a T1 T2 at leading order in dT.
inline double acceleration_echo_shift(double acceleration, double t1, double t2, double t3) {
    return 0.5 * acceleration * (t1 * t1 - 2.0 * t2 * t2 + t3 * t3);
}

// Lateral displacement of a tilted pulse's standing wave seen at height z
// above the pivot: z (1 - cos theta). Exact, not the small-angle form.
inline double tilt_displacement(double height, double tilt_theta) {
    return height * (1.0 - std::cos(tilt_theta));
}

// Height change that advances the middle-pulse tilt phase by one full fringe:
// 2 G z (1 - cos theta) = 2 pi  =>  delta z = d / (2 (1 - cos theta)).
inline double tilt_height_period(double period_m, double tilt_theta) {
    const double c = 2.0 * (1.0 - std::cos(tilt_theta));
    if (c <= 0.0) throw std::domain_error("tilt_height_period: tilt must be nonzero");
    return period_m / c;
}

} // namespace tdli
