#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "tdli/errors.hpp"
#include "tdli/scans.hpp"
#include "tdli/setup.hpp"
#include "tdli/shots.hpp"
#include "tdli/signal.hpp"

// Run configuration: one JSON tree describing species, pulse sequence,
// ensemble, environment, scan, and shot synthesis. Validation is strict -
// unknown keys are rejected with their JSON path - and all unit conversion
// happens here, at the boundary. Field units follow how the quantities are
// quoted on paper: amu, ns, mJ/cm^2, mrad, mm, nm, A^2, A^3.

namespace tdli {

enum class ScanKind { timing, mass, height, acceleration };

struct ScanSpec {
    ScanKind kind = ScanKind::timing;
    int cluster_size = 7; // timing/height/acceleration scans
    double lo = 0.0;      // axis range in SI units
    double hi = 0.0;
    int steps = 101;
    int size_min = 3; // mass scan
    int size_max = 12;
    bool polarizability_band = false;
    MassScanOptions smear{};
    std::vector<Model> models{Model::quantum};
};

struct ShotsSpec {
    JitterSpec jitter{};
    int n_shots = 10000;
    double counts_per_unit_signal = 10.0;
    std::array<double, 3> nominal_energy_j{1.3e-3, 1.3e-3, 1.3e-3};
    std::vector<int> bins{7};
    double reference_delta_t_s = 200e-9;
    double postselect_half_width_s = 5e-9;
    double energy_half_width_rel = -1.0; // < 0: no energy window
    Model model = Model::quantum;
};

struct RunConfig {
    ExperimentSetup setup{};
    ScanSpec scan{};
    ShotsSpec shots{};
    ClassicalStrategy classical_strategy = ClassicalStrategy::moire;
    std::uint64_t seed = 1;
    std::string output_prefix = "run";
    nlohmann::json raw; // canonical source, hashed for provenance
};

namespace detail {

using nlohmann::json;

inline std::string join_path(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

inline void reject_unknown_keys(const json& j, const std::string& path,
                                const std::set<std::string>& allowed) {
    if (!j.is_object()) throw config_error("config: '" + path + "' must be an object");
    for (const auto& item : j.items())
        if (!allowed.count(item.key()))
            throw config_error("config: unknown key '" + join_path(path, item.key()) + "'");
}

inline double get_number(const json& j, const std::string& path, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number())
        throw config_error("config: '" + join_path(path, key) + "' must be a number");
    return v.get<double>();
}

inline int get_int(const json& j, const std::string& path, const char* key, int fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number_integer())
        throw config_error("config: '" + join_path(path, key) + "' must be an integer");
    return v.get<int>();
}

inline bool get_bool(const json& j, const std::string& path, const char* key, bool fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_boolean())
        throw config_error("config: '" + join_path(path, key) + "' must be a boolean");
    return v.get<bool>();
}

inline std::string get_string(const json& j, const std::string& path, const char* key,
                              const std::string& fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_string())
        throw config_error("config: '" + join_path(path, key) + "' must be a string");
    return v.get<std::string>();
}

// A scalar broadcasts to all three pulses; an array pins each one.
inline std::array<double, 3> get_triple(const json& j, const std::string& path, const char* key,
                                        const std::array<double, 3>& fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (v.is_number()) {
        const double x = v.get<double>();
        return {x, x, x};
    }
    if (v.is_array() && v.size() == 3 && v[0].is_number() && v[1].is_number() && v[2].is_number())
        return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
    throw config_error("config: '" + join_path(path, key) +
                       "' must be a number or an array of 3 numbers");
}

inline std::pair<double, double> get_range(const json& j, const std::string& path,
                                           const char* key) {
    if (!j.contains(key))
        throw config_error("config: missing required range '" + join_path(path, key) + "'");
    const json& v = j.at(key);
    if (!(v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()))
        throw config_error("config: '" + join_path(path, key) + "' must be [lo, hi]");
    return {v[0].get<double>(), v[1].get<double>()};
}

inline Model parse_model_name(const std::string& name, const std::string& where,
                              ClassicalStrategy strategy) {
    if (name == "quantum") return Model::quantum;
    if (name == "classical")
        return strategy == ClassicalStrategy::moire ? Model::classical_moire
                                                    : Model::classical_sin_linearized;
    throw config_error("config: '" + where + "' must be \"quantum\", \"classical\", or \"both\"");
}

inline void parse_species(const json& j, ExperimentSetup& s) {
    reject_unknown_keys(j, "species",
                        {"monomer_mass_amu", "sigma_abs_A2", "alpha_A3", "monomer_yield",
                         "cluster_yield", "cluster_yield_from", "size_exponent"});
    s.monomer.mass_amu = get_number(j, "species", "monomer_mass_amu", s.monomer.mass_amu);
    s.monomer.sigma_abs_m2 =
        get_number(j, "species", "sigma_abs_A2", s.monomer.sigma_abs_m2 / 1e-20) * 1e-20;
    s.monomer.alpha_m3 = get_number(j, "species", "alpha_A3", s.monomer.alpha_m3 / 1e-30) * 1e-30;
    s.monomer.monomer_yield = get_number(j, "species", "monomer_yield", s.monomer.monomer_yield);
    s.monomer.cluster_yield = get_number(j, "species", "cluster_yield", s.monomer.cluster_yield);
    s.monomer.cluster_yield_from =
        get_int(j, "species", "cluster_yield_from", s.monomer.cluster_yield_from);
    s.size_exponent = get_number(j, "species", "size_exponent", s.size_exponent);
}

inline void parse_sequence(const json& j, ExperimentSetup& s) {
    reject_unknown_keys(j, "sequence",
                        {"wavelength_nm", "pulse_delay_us", "delta_t_ns", "fluence_mj_cm2", "n0",
                         "phi0", "modulation", "mirror_reflectivity", "tilt_mrad",
                         "polarizability_scale"});
    s.wavelength_m = units::nm_to_m(get_number(j, "sequence", "wavelength_nm",
                                               units::m_to_nm(s.wavelength_m)));
    if (!j.contains("pulse_delay_us"))
        throw config_error("config: missing required field 'sequence.pulse_delay_us' "
                           "(the pulse delay T)");
    s.pulse_delay_s = units::us_to_s(get_number(j, "sequence", "pulse_delay_us", 0.0));
    s.delta_t_s = units::ns_to_s(get_number(j, "sequence", "delta_t_ns",
                                            units::s_to_ns(s.delta_t_s)));
    // 1 mJ/cm^2 = 10 J/m^2.
    std::array<double, 3> f = s.fluence_j_m2;
    for (double& x : f) x /= 10.0;
    f = get_triple(j, "sequence", "fluence_mj_cm2", f);
    for (std::size_t k = 0; k < 3; ++k) s.fluence_j_m2[k] = f[k] * 10.0;
    s.n0_direct = get_triple(j, "sequence", "n0", s.n0_direct);
    s.phi0_direct = get_triple(j, "sequence", "phi0", s.phi0_direct);
    if (j.contains("mirror_reflectivity")) {
        if (j.contains("modulation"))
            throw config_error("config: give 'sequence.modulation' or "
                               "'sequence.mirror_reflectivity', not both");
        const auto r = get_triple(j, "sequence", "mirror_reflectivity", {1.0, 1.0, 1.0});
        for (std::size_t k = 0; k < 3; ++k) s.modulation[k] = modulation_from_reflectivity(r[k]);
    } else {
        s.modulation = get_triple(j, "sequence", "modulation", s.modulation);
    }
    s.tilt_theta = units::mrad_to_rad(get_number(j, "sequence", "tilt_mrad",
                                                 units::rad_to_mrad(s.tilt_theta)));
    s.polarizability_scale =
        get_number(j, "sequence", "polarizability_scale", s.polarizability_scale);
}

inline void parse_ensemble(const json& j, ExperimentSetup& s) {
    reject_unknown_keys(j, "ensemble",
                        {"gas", "v_forward", "v_forward_sigma", "sigma_v", "divergence_mrad",
                         "divergence_convention", "height_mm", "height_sigma_mm",
                         "height_decay_mm"});
    const std::string gas = get_string(j, "ensemble", "gas", "");
    if (gas == "neon")
        s.v_forward = 925.0;
    else if (gas == "argon")
        s.v_forward = 690.0;
    else if (!gas.empty())
        throw config_error("config: 'ensemble.gas' must be \"neon\" or \"argon\"");
    s.v_forward = get_number(j, "ensemble", "v_forward", s.v_forward);
    s.v_forward_sigma = get_number(j, "ensemble", "v_forward_sigma", s.v_forward_sigma);
    if (j.contains("sigma_v") && j.contains("divergence_mrad"))
        throw config_error("config: give 'ensemble.sigma_v' or 'ensemble.divergence_mrad', "
                           "not both");
    if (j.contains("divergence_mrad")) {
        const std::string conv = get_string(j, "ensemble", "divergence_convention", "sigma");
        DivergenceConvention c;
        if (conv == "sigma")
            c = DivergenceConvention::sigma;
        else if (conv == "hwhm")
            c = DivergenceConvention::hwhm;
        else if (conv == "fwhm")
            c = DivergenceConvention::fwhm;
        else
            throw config_error("config: 'ensemble.divergence_convention' must be "
                               "\"sigma\", \"hwhm\", or \"fwhm\"");
        const double mrad = get_number(j, "ensemble", "divergence_mrad", 0.0);
        s.sigma_v = divergence_to_sigma_v(units::mrad_to_rad(mrad), s.v_forward, c);
    } else {
        s.sigma_v = get_number(j, "ensemble", "sigma_v", s.sigma_v);
    }
    s.height_mean = units::mm_to_m(get_number(j, "ensemble", "height_mm",
                                              units::m_to_mm(s.height_mean)));
    s.height_sigma = units::mm_to_m(get_number(j, "ensemble", "height_sigma_mm",
                                               units::m_to_mm(s.height_sigma)));
    if (j.contains("height_decay_mm")) {
        const double decay_mm = get_number(j, "ensemble", "height_decay_mm", 0.0);
        if (!(decay_mm > 0.0))
            throw config_error("config: 'ensemble.height_decay_mm' must be positive");
        s.height_decay_length = units::mm_to_m(decay_mm);
    }
}

inline void parse_environment(const json& j, ExperimentSetup& s) {
    reject_unknown_keys(j, "environment",
                        {"acceleration", "mount_height_mm", "offsets_nm"});
    s.acceleration = get_number(j, "environment", "acceleration", s.acceleration);
    s.mount_height = units::mm_to_m(get_number(j, "environment", "mount_height_mm",
                                               units::m_to_mm(s.mount_height)));
    std::array<double, 3> off{units::m_to_nm(s.offsets[0]), units::m_to_nm(s.offsets[1]),
                              units::m_to_nm(s.offsets[2])};
    off = get_triple(j, "environment", "offsets_nm", off);
    for (std::size_t k = 0; k < 3; ++k) s.offsets[k] = units::nm_to_m(off[k]);
}

inline void parse_scan(const json& j, ScanSpec& sc, ClassicalStrategy strategy) {
    reject_unknown_keys(j, "scan",
                        {"type", "cluster_size", "delta_t_ns", "height_mm", "acceleration",
                         "steps", "sizes", "polarizability_band", "resolving_power",
                         "isotope_sigma_amu", "model"});
    const std::string type = get_string(j, "scan", "type", "timing");
    sc.steps = get_int(j, "scan", "steps", sc.steps);
    sc.cluster_size = get_int(j, "scan", "cluster_size", sc.cluster_size);
    if (type == "timing") {
        sc.kind = ScanKind::timing;
        auto [lo, hi] = j.contains("delta_t_ns") ? get_range(j, "scan", "delta_t_ns")
                                                 : std::pair<double, double>{-70.0, 70.0};
        sc.lo = units::ns_to_s(lo);
        sc.hi = units::ns_to_s(hi);
    } else if (type == "mass") {
        sc.kind = ScanKind::mass;
        if (j.contains("sizes")) {
            auto [lo, hi] = get_range(j, "scan", "sizes");
            sc.size_min = static_cast<int>(lo);
            sc.size_max = static_cast<int>(hi);
        }
        sc.polarizability_band = get_bool(j, "scan", "polarizability_band", sc.polarizability_band);
        sc.smear.resolving_power = get_number(j, "scan", "resolving_power", 0.0);
        sc.smear.isotope_sigma_amu = get_number(j, "scan", "isotope_sigma_amu", 0.0);
    } else if (type == "height") {
        sc.kind = ScanKind::height;
        auto [lo, hi] = get_range(j, "scan", "height_mm");
        sc.lo = units::mm_to_m(lo);
        sc.hi = units::mm_to_m(hi);
    } else if (type == "acceleration") {
        sc.kind = ScanKind::acceleration;
        auto [lo, hi] = get_range(j, "scan", "acceleration");
        sc.lo = lo;
        sc.hi = hi;
    } else {
        throw config_error("config: 'scan.type' must be \"timing\", \"mass\", \"height\", or "
                           "\"acceleration\"");
    }
    const std::string model = get_string(j, "scan", "model", "quantum");
    if (model == "both")
        sc.models = {Model::quantum, parse_model_name("classical", "scan.model", strategy)};
    else
        sc.models = {parse_model_name(model, "scan.model", strategy)};
}

inline void parse_shots(const json& j, ShotsSpec& sh, ClassicalStrategy strategy) {
    reject_unknown_keys(j, "shots",
                        {"n_shots", "short_fwhm_ns", "drift_ns", "energy_rel",
                         "counts_per_unit_signal", "nominal_energy_mj", "bins",
                         "reference_delta_t_ns", "postselect_half_width_ns",
                         "energy_half_width_rel", "model"});
    sh.n_shots = get_int(j, "shots", "n_shots", sh.n_shots);
    sh.jitter.short_fwhm_s = units::ns_to_s(get_number(j, "shots", "short_fwhm_ns",
                                                       units::s_to_ns(sh.jitter.short_fwhm_s)));
    sh.jitter.drift_s = units::ns_to_s(get_number(j, "shots", "drift_ns",
                                                  units::s_to_ns(sh.jitter.drift_s)));
    sh.jitter.energy_rel = get_number(j, "shots", "energy_rel", sh.jitter.energy_rel);
    sh.counts_per_unit_signal =
        get_number(j, "shots", "counts_per_unit_signal", sh.counts_per_unit_signal);
    std::array<double, 3> e{units::j_to_mj(sh.nominal_energy_j[0]),
                            units::j_to_mj(sh.nominal_energy_j[1]),
                            units::j_to_mj(sh.nominal_energy_j[2])};
    e = get_triple(j, "shots", "nominal_energy_mj", e);
    for (std::size_t k = 0; k < 3; ++k) sh.nominal_energy_j[k] = units::mj_to_j(e[k]);
    if (j.contains("bins")) {
        const json& b = j.at("bins");
        if (!b.is_array() || b.empty())
            throw config_error("config: 'shots.bins' must be a non-empty array of cluster sizes");
        sh.bins.clear();
        for (const json& v : b) {
            if (!v.is_number_integer())
                throw config_error("config: 'shots.bins' entries must be integers");
            sh.bins.push_back(v.get<int>());
        }
    }
    sh.reference_delta_t_s = units::ns_to_s(
        get_number(j, "shots", "reference_delta_t_ns", units::s_to_ns(sh.reference_delta_t_s)));
    sh.postselect_half_width_s = units::ns_to_s(get_number(
        j, "shots", "postselect_half_width_ns", units::s_to_ns(sh.postselect_half_width_s)));
    sh.energy_half_width_rel =
        get_number(j, "shots", "energy_half_width_rel", sh.energy_half_width_rel);
    sh.model = parse_model_name(get_string(j, "shots", "model", "quantum"), "shots.model",
                                strategy);
}

} // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& j) {
    detail::reject_unknown_keys(j, "",
                                {"species", "sequence", "ensemble", "environment", "scan",
                                 "shots", "seed", "output_prefix", "classical_strategy"});
    RunConfig cfg;
    cfg.raw = j;

    ClassicalStrategy strategy = ClassicalStrategy::moire;
    const std::string strat = detail::get_string(j, "", "classical_strategy", "moire");
    if (strat == "moire")
        strategy = ClassicalStrategy::moire;
    else if (strat == "sin_linearized")
        strategy = ClassicalStrategy::sin_linearized;
    else
        throw config_error("config: 'classical_strategy' must be \"moire\" or \"sin_linearized\"");
    cfg.classical_strategy = strategy;

    if (j.contains("species")) detail::parse_species(j.at("species"), cfg.setup);
    if (!j.contains("sequence"))
        throw config_error("config: missing required section 'sequence' "
                           "(must give 'sequence.pulse_delay_us')");
    detail::parse_sequence(j.at("sequence"), cfg.setup);
    if (j.contains("ensemble")) detail::parse_ensemble(j.at("ensemble"), cfg.setup);
    if (j.contains("environment")) detail::parse_environment(j.at("environment"), cfg.setup);
    if (j.contains("scan")) detail::parse_scan(j.at("scan"), cfg.scan, strategy);
    if (j.contains("shots")) detail::parse_shots(j.at("shots"), cfg.shots, strategy);

    if (j.contains("seed")) {
        const nlohmann::json& v = j.at("seed");
        if (!v.is_number_unsigned() && !v.is_number_integer())
            throw config_error("config: 'seed' must be a non-negative integer");
        cfg.seed = v.get<std::uint64_t>();
    }
    cfg.output_prefix = detail::get_string(j, "", "output_prefix", cfg.output_prefix);

    // Cross-field sanity that parse order cannot catch.
    if (!(cfg.setup.pulse_delay_s > 0.0))
        throw config_error("config: 'sequence.pulse_delay_us' must be positive");
    if (cfg.setup.pulse_delay_s + cfg.setup.delta_t_s <= 0.0)
        throw config_error("config: 'sequence.delta_t_ns' reorders the pulse sequence");
    if (!(cfg.setup.monomer.mass_amu > 0.0))
        throw config_error("config: 'species.monomer_mass_amu' must be positive");
    if (cfg.scan.steps < 2) throw config_error("config: 'scan.steps' must be at least 2");
    if (cfg.scan.kind == ScanKind::mass &&
        (cfg.scan.size_min < 1 || cfg.scan.size_max < cfg.scan.size_min))
        throw config_error("config: 'scan.sizes' must satisfy 1 <= lo <= hi");
    if (cfg.shots.n_shots < 1) throw config_error("config: 'shots.n_shots' must be positive");
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw config_error("cannot open config: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
        throw config_error(path + ": " + e.what());
    }
    return parse_run_config(j);
}

} // namespace tdli
