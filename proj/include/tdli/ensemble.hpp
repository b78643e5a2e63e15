#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

#include "tdli/constants.hpp"
#include "tdli/errors.hpp"
#include "tdli/rng.hpp"

// Source model: what arrives at the first pulse. In the time domain the
// interference depends on the velocity component along the grating axis
// ("transverse"); the forward speed only sets the de Broglie wavelength
// quoted in reports and the transverse spread implied by a divergence angle.

namespace tdli {

using cplx = std::complex<double>;

// A divergence angle can mean different widths of the transverse velocity
// distribution depending on who quotes it. The conversion is explicit so the
// choice is visible in configs instead of buried in a constant.
enum class DivergenceConvention { sigma, hwhm, fwhm };

inline double divergence_to_sigma_v(double angle_rad, double forward_speed,
                                    DivergenceConvention conv = DivergenceConvention::sigma) {
    if (angle_rad < 0.0) throw std::domain_error("divergence_to_sigma_v: angle must be >= 0");
    if (forward_speed <= 0.0) throw std::domain_error("divergence_to_sigma_v: forward speed must be > 0");
    const double vt = angle_rad * forward_speed;
    const double half_width_sigmas = std::sqrt(2.0 * std::log(2.0)); // HWHM of a unit Gaussian
    switch (conv) {
        case DivergenceConvention::sigma: return vt;
        case DivergenceConvention::hwhm: return vt / half_width_sigmas;
        case DivergenceConvention::fwhm: return vt / (2.0 * half_width_sigmas);
    }
    throw std::logic_error("divergence_to_sigma_v: unhandled convention");
}

// FWHM in pulse-delay asymmetry of the |n| = 1 fringe envelope for a Gaussian
// transverse spread: |<exp(i G v dT)>| = exp(-(G sigma_v dT)^2 / 2).
inline double timing_envelope_fwhm(double sigma_v, double grating_wavenumber) {
    if (sigma_v <= 0.0) throw std::domain_error("timing_envelope_fwhm: sigma_v must be > 0");
    if (grating_wavenumber <= 0.0) throw std::domain_error("timing_envelope_fwhm: G must be > 0");
    return 2.0 * std::sqrt(2.0 * std::log(2.0)) / (grating_wavenumber * sigma_v);
}

struct VelocityClass {
    double velocity = 0.0; // m/s along the grating axis
    double weight = 0.0;   // normalized by the ensemble constructor
};

// Transverse velocity ensemble: either a continuous Gaussian or an explicit
// weighted comb of plane-wave classes. characteristic(u) = E[exp(i u v)].
struct TransverseEnsemble {
    double mean = 0.0;
    double sigma = 0.0;
    std::vector<VelocityClass> classes; // non-empty means discrete

    bool discrete() const { return !classes.empty(); }

    cplx characteristic(double u) const {
        if (discrete()) {
            cplx sum{0.0, 0.0};
            for (const auto& c : classes)
                sum += c.weight * cplx{std::cos(u * c.velocity), std::sin(u * c.velocity)};
            return sum;
        }
        const double damp = std::exp(-0.5 * (u * sigma) * (u * sigma));
        return damp * cplx{std::cos(u * mean), std::sin(u * mean)};
    }

    static TransverseEnsemble gaussian(double mean, double sigma) {
        if (sigma < 0.0) throw std::domain_error("TransverseEnsemble: sigma must be >= 0");
        TransverseEnsemble e;
        e.mean = mean;
        e.sigma = sigma;
        return e;
    }

    static TransverseEnsemble comb(std::vector<VelocityClass> classes) {
        if (classes.empty()) throw std::domain_error("TransverseEnsemble: empty velocity comb");
        double norm = 0.0;
        for (const auto& c : classes) {
            if (!(c.weight > 0.0)) throw std::domain_error("TransverseEnsemble: weights must be > 0");
            norm += c.weight;
        }
        TransverseEnsemble e;
        e.classes = std::move(classes);
        for (auto& c : e.classes) c.weight /= norm;
        return e;
    }
};

// Gauss-Hermite nodes and weights for integral_{-inf}^{inf} e^{-t^2} f(t) dt
// ~= sum w_i f(t_i). Newton iteration on the Hermite recurrence; exact enough
// for the k <= 64 orders used here.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline QuadratureRule gauss_hermite(int k) {
    if (k < 3 || k > 200) throw std::domain_error("gauss_hermite: order out of range");
    QuadratureRule q;
    q.nodes.resize(static_cast<std::size_t>(k));
    q.weights.resize(static_cast<std::size_t>(k));
    const double pi = constants::pi;
    // Initial guesses follow the standard descending enumeration of roots.
    double z = 0.0;
    for (int i = 0; i < (k + 1) / 2; ++i) {
        if (i == 0) z = std::sqrt(2.0 * k + 1.0) - 1.85575 * std::pow(2.0 * k + 1.0, -1.0 / 6.0);
        else if (i == 1) z -= 1.14 * std::pow(static_cast<double>(k), 0.426) / z;
        else if (i == 2) z = 1.86 * z - 0.86 * q.nodes[0];
        else if (i == 3) z = 1.91 * z - 0.91 * q.nodes[1];
        else z = 2.0 * z - q.nodes[static_cast<std::size_t>(i - 2)];
        double pp = 0.0;
        for (int it = 0; it < 200; ++it) {
            // Orthonormal Hermite recurrence keeps values O(1).
            double p1 = 1.0 / std::sqrt(std::sqrt(pi));
            double p2 = 0.0;
            for (int j = 0; j < k; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 -
                     std::sqrt(static_cast<double>(j) / (j + 1.0)) * p3;
            }
            pp = std::sqrt(2.0 * k) * p2;
            const double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15 * std::max(1.0, std::abs(z))) break;
        }
        q.nodes[static_cast<std::size_t>(i)] = z;
        q.nodes[static_cast<std::size_t>(k - 1 - i)] = -z;
        const double w = 2.0 / (pp * pp);
        q.weights[static_cast<std::size_t>(i)] = w;
        q.weights[static_cast<std::size_t>(k - 1 - i)] = w;
    }
    // store ascending
    for (std::size_t a = 0, b = q.nodes.size() - 1; a < b; ++a, --b)
        std::swap(q.nodes[a], q.nodes[b]);
    return q;
}

// Gauss-Hermite discretization of a Gaussian ensemble: v_i = mean + sqrt(2)
// sigma t_i, weights w_i / sqrt(pi). Used to hand continuous sources to the
// plane-wave oracles.
inline TransverseEnsemble discretize_gaussian(double mean, double sigma, int k) {
    if (sigma <= 0.0) throw std::domain_error("discretize_gaussian: sigma must be > 0");
    const QuadratureRule q = gauss_hermite(k);
    std::vector<VelocityClass> classes;
    classes.reserve(q.nodes.size());
    for (std::size_t i = 0; i < q.nodes.size(); ++i)
        classes.push_back({mean + std::sqrt(2.0) * sigma * q.nodes[i],
                           q.weights[i] / std::sqrt(constants::pi)});
    return TransverseEnsemble::comb(std::move(classes));
}

// Forward (beam-axis) speed distribution; only used for reporting the de
// Broglie wavelength and for converting divergence angles.
struct ForwardSpeed {
    double mean = 0.0;
    double sigma = 0.0;
};

// Height of a molecule above the mount reference, which the tilt lever turns
// into a fringe phase. Gaussian profile; sampling never truncates, the
// characteristic function is exact.
struct HeightProfile {
    double mean = 0.0;  // m
    double sigma = 0.0; // m

    cplx characteristic(double u) const {
        const double damp = std::exp(-0.5 * (u * sigma) * (u * sigma));
        return damp * cplx{std::cos(u * mean), std::sin(u * mean)};
    }
};

struct BeamEnsemble {
    TransverseEnsemble transverse;
    ForwardSpeed forward;
    HeightProfile height;

    double sample_transverse(rng_engine& rng, NormalSampler& normal) const {
        if (transverse.discrete()) {
            double u = uniform_sample(rng);
            for (const auto& c : transverse.classes) {
                u -= c.weight;
                if (u <= 0.0) return c.velocity;
            }
            return transverse.classes.back().velocity;
        }
        return transverse.mean + transverse.sigma * normal(rng);
    }

    double sample_height(rng_engine& rng, NormalSampler& normal) const {
        return height.mean + height.sigma * normal(rng);
    }
};

enum class SeedGas { argon, neon };

// Optional deviations from the stock source settings; NaN means "use the
// default for the chosen gas". An explicit sigma_v wins over the divergence
// angle.
struct BeamOverrides {
    double v_forward = constants::quiet_nan;      // m/s
    double rel_speed_fwhm = constants::quiet_nan; // forward dv/v, FWHM
    double sigma_v = constants::quiet_nan;        // transverse sigma, m/s
    double divergence_rad = constants::quiet_nan;
    DivergenceConvention divergence_convention = DivergenceConvention::sigma;
};

// Stock supersonic source: argon seeds at 690 m/s, neon at 925 m/s, relative
// forward spread 3% FWHM, divergence 2.1 mrad along the grating.
inline BeamEnsemble seeded_beam(SeedGas gas, const BeamOverrides& o = {}) {
    const double v0 =
        std::isnan(o.v_forward) ? (gas == SeedGas::argon ? 690.0 : 925.0) : o.v_forward;
    const double rel = std::isnan(o.rel_speed_fwhm) ? 0.03 : o.rel_speed_fwhm;
    const double fwhm_to_sigma = 1.0 / (2.0 * std::sqrt(2.0 * std::log(2.0)));

    BeamEnsemble beam;
    beam.forward = ForwardSpeed{v0, rel * v0 * fwhm_to_sigma};
    const double sv = std::isnan(o.sigma_v)
                          ? divergence_to_sigma_v(
                                std::isnan(o.divergence_rad) ? 2.1e-3 : o.divergence_rad, v0,
                                o.divergence_convention)
                          : o.sigma_v;
    beam.transverse = TransverseEnsemble::gaussian(0.0, sv);
    return beam;
}

} // namespace tdli
