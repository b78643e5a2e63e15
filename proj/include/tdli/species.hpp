#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "tdli/constants.hpp"

// Cluster species and the kinematic/optical relations that anchor the whole
// model:
//
//   talbot_time   T_m = m d^2 / h     (the time-domain Talbot revival scale;
//                                      ~15.57 ns per amu at d = 78.815 nm)
//   de_broglie    lambda_dB = h/(m v)
//   n0            mean photon number absorbed at a standing-wave antinode,
//                 n0 = sigma * (4F) * lambda / (h c);  the factor 4F is the
//                 ideal antinode fluence of a retro-reflected pulse of
//                 incident fluence F.
//   phi0          peak dipole phase imprinted at an antinode,
//                 phi0 = 2 pi * alpha * (4F) / (hbar c), alpha in SI volume
//                 units (m^3). For fixed F the ratio phi0/n0 = 4 pi^2 alpha /
//                 (sigma lambda) is fluence-independent.
//
// Cluster N-scaling: mass is strictly additive, and sigma, alpha scale as
// N^gamma with gamma = 1 by default (additive optical response).

namespace tdli {

// Probability that one absorbed photon removes the particle from the beam
// (ionization + fragmentation). Constant per species; the step model lets a
// family switch from a low monomer yield to ~1 for clusters.
struct YieldModel {
    double value = 1.0;

    static YieldModel constant(double eta) {
        if (!(eta >= 0.0 && eta <= 1.0))
            throw std::domain_error("ionization yield must be in [0,1], got " + std::to_string(eta));
        return YieldModel{eta};
    }
};

struct ClusterSpecies {
    int    n = 1;              // cluster size (monomer count)
    double mass_kg = 0.0;      // total mass
    double sigma_abs_m2 = 0.0; // absorption cross-section at the grating wavelength
    double alpha_m3 = 0.0;     // optical polarizability volume at the grating wavelength
    YieldModel yield{};

    double mass_amu() const { return units::kg_to_amu(mass_kg); }
};

inline ClusterSpecies make_species(int n, double mass_kg, double sigma_abs_m2,
                                   double alpha_m3, YieldModel yield = {}) {
    if (n < 1) throw std::domain_error("cluster size must be >= 1");
    if (!(mass_kg > 0.0)) throw std::domain_error("species mass must be positive");
    if (sigma_abs_m2 < 0.0) throw std::domain_error("absorption cross-section must be >= 0");
    if (alpha_m3 < 0.0) throw std::domain_error("polarizability must be >= 0");
    return ClusterSpecies{n, mass_kg, sigma_abs_m2, alpha_m3, yield};
}

// Monomer template for building a cluster family.
struct MonomerSpec {
    double mass_amu = 0.0;
    double sigma_abs_m2 = 0.0;
    double alpha_m3 = 0.0;
    double monomer_yield = 1.0; // yield for N = 1
    double cluster_yield = 1.0; // yield for N >= cluster_yield_from
    int    cluster_yield_from = 2;
};

// sigma, alpha scale as N^gamma; mass is additive. gamma = 1 is the additive
// default; gamma < 1 models saturation of the optical response.
inline std::vector<ClusterSpecies> build_species_family(const MonomerSpec& monomer,
                                                        int n_min, int n_max,
                                                        double gamma = 1.0) {
    if (n_min < 1 || n_max < n_min)
        throw std::domain_error("species family needs 1 <= n_min <= n_max");
    if (!(monomer.mass_amu > 0.0))
        throw std::domain_error("monomer mass must be positive");
    std::vector<ClusterSpecies> family;
    family.reserve(static_cast<std::size_t>(n_max - n_min + 1));
    for (int n = n_min; n <= n_max; ++n) {
        const double scale = std::pow(static_cast<double>(n), gamma);
        const double eta = (n >= monomer.cluster_yield_from) ? monomer.cluster_yield
                                                             : monomer.monomer_yield;
        family.push_back(make_species(n,
                                      units::amu_to_kg(monomer.mass_amu * n),
                                      monomer.sigma_abs_m2 * scale,
                                      monomer.alpha_m3 * scale,
                                      YieldModel::constant(eta)));
    }
    return family;
}

// Anthracene (C14H10) monomer mass from the atomic-mass table.
inline double anthracene_monomer_mass_amu(bool monoisotopic = false) {
    using namespace constants;
    return monoisotopic ? 14.0 * isotope_mass_c12 + 10.0 * isotope_mass_h1
                        : 14.0 * atomic_mass_carbon + 10.0 * atomic_mass_hydrogen;
}

// Anthracene at 157 nm: polarizability volume 25.4 A^3, absorption
// cross-section 1.1 A^2, one-photon ionization yield ~0.1 for the monomer
// and ~1 for clusters.
inline MonomerSpec anthracene_monomer() {
    MonomerSpec m;
    m.mass_amu = anthracene_monomer_mass_amu();
    m.sigma_abs_m2 = 1.1e-20;
    m.alpha_m3 = 25.4e-30;
    m.monomer_yield = 0.1;
    m.cluster_yield = 1.0;
    m.cluster_yield_from = 2;
    return m;
}

// T_m = m d^2 / h.
inline double talbot_time(double mass_kg, double period_m) {
    if (!(mass_kg > 0.0)) throw std::domain_error("talbot_time: mass must be positive");
    if (!(period_m > 0.0)) throw std::domain_error("talbot_time: period must be positive");
    return mass_kg * period_m * period_m / constants::planck_h;
}

// lambda_dB = h / (m v).
inline double de_broglie_wavelength(double mass_kg, double speed_m_s) {
    if (!(mass_kg > 0.0)) throw std::domain_error("de_broglie_wavelength: mass must be positive");
    if (!(speed_m_s > 0.0)) throw std::domain_error("de_broglie_wavelength: speed must be positive");
    return constants::planck_h / (mass_kg * speed_m_s);
}

// Antinode mean absorbed photon number for incident fluence F (J/m^2).
inline double n0_from_fluence(double sigma_abs_m2, double fluence_j_m2, double lambda_m) {
    if (sigma_abs_m2 < 0.0 || fluence_j_m2 < 0.0)
        throw std::domain_error("n0_from_fluence: sigma and fluence must be >= 0");
    if (!(lambda_m > 0.0)) throw std::domain_error("n0_from_fluence: wavelength must be positive");
    const double antinode_fluence = 4.0 * fluence_j_m2;
    return sigma_abs_m2 * antinode_fluence * lambda_m / (constants::planck_h * constants::speed_c);
}

// Antinode dipole phase for incident fluence F (J/m^2).
inline double phi0_from_polarizability(double alpha_m3, double fluence_j_m2) {
    if (alpha_m3 < 0.0 || fluence_j_m2 < 0.0)
        throw std::domain_error("phi0_from_polarizability: alpha and fluence must be >= 0");
    const double antinode_fluence = 4.0 * fluence_j_m2;
    return constants::two_pi * alpha_m3 * antinode_fluence / (constants::hbar * constants::speed_c);
}

} // namespace tdli
