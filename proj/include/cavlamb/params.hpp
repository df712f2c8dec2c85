#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "cavlamb/constants.hpp"

// Physical input parameters, derived quantities and validity checks.
//
// Convention: every frequency in this library is an angular frequency in
// rad/s (written s^-1 throughout). All quantities are SI.

namespace cavlamb {

struct AtomParams {
    double omega0 = 0.0;  // transition angular frequency, s^-1
    double dipole = 0.0;  // transition dipole magnitude |d'|, C m
};

struct CavityParams {
    double omega_c = 0.0;  // cavity normal angular frequency, s^-1
    double q_factor = 0.0; // quality factor, dimensionless
    double volume = 0.0;   // mode volume V, m^3
};

struct DerivedCavity {
    double kappa = 0.0;  // cavity field decay rate omega_c/Q, s^-1
    double g = 0.0;      // atom-field coupling |d'| sqrt(omega_c/(2 hbar eps0 V)), s^-1
    double eta = 0.0;    // shift scale |d'|^2/(3 pi hbar eps0 V), s^-1
};

struct TrajectoryParams {
    double omega = 0.0;   // orbital angular frequency, s^-1
    double radius = 0.0;  // orbit radius R, m
};

struct DerivedTrajectory {
    double omega = 0.0;       // carried input, s^-1
    double radius = 0.0;      // carried input, m
    double zeta = 0.0;        // (omega R / c)^2
    double gamma = 1.0;       // Lorentz factor (1 - zeta)^(-1/2)
    double omega0_bar = 0.0;  // Omega0 / gamma, s^-1
    double accel = 0.0;       // omega^2 R, m/s^2
};

struct ValidityReport {
    double ratio = 0.0;   // g / kappa
    double margin = 0.0;  // required headroom factor
    bool pass = false;    // g * margin <= kappa
};

namespace detail {
inline void require_positive(double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument(std::string(field) + " must be positive and finite");
    }
}
inline void require_nonnegative(double v, const char* field) {
    if (v < 0.0 || !std::isfinite(v)) {
        throw std::invalid_argument(std::string(field) + " must be non-negative and finite");
    }
}
} // namespace detail

inline void validate(const AtomParams& a) {
    detail::require_positive(a.omega0, "omega0");
    detail::require_positive(a.dipole, "dipole");
}

inline void validate(const CavityParams& cav) {
    detail::require_positive(cav.omega_c, "omega_c");
    detail::require_positive(cav.volume, "volume");
    if (!(cav.q_factor >= 1.0) || !std::isfinite(cav.q_factor)) {
        throw std::invalid_argument("q_factor must be >= 1 and finite");
    }
}

inline void validate(const TrajectoryParams& t) {
    detail::require_nonnegative(t.omega, "omega");
    detail::require_nonnegative(t.radius, "radius");
    if (!(t.omega * t.radius < constants::c_light)) {
        throw std::invalid_argument("omega*radius must stay below the speed of light (superluminal orbit)");
    }
}

inline DerivedCavity derive_cavity(const AtomParams& atom, const CavityParams& cav) {
    validate(atom);
    validate(cav);
    DerivedCavity d;
    d.kappa = cav.omega_c / cav.q_factor;
    d.g = atom.dipole * std::sqrt(cav.omega_c / (2.0 * constants::hbar * constants::epsilon0 * cav.volume));
    d.eta = atom.dipole * atom.dipole / (3.0 * constants::pi * constants::hbar * constants::epsilon0 * cav.volume);
    return d;
}

/// Markovian validity check: passes iff g * margin <= kappa.
inline ValidityReport check_bad_cavity(const DerivedCavity& dc, double margin = 3.0) {
    if (!(margin > 1.0)) {
        throw std::invalid_argument("bad-cavity margin must be > 1");
    }
    ValidityReport r;
    r.ratio = dc.g / dc.kappa;
    r.margin = margin;
    r.pass = dc.g * margin <= dc.kappa;
    return r;
}

inline DerivedTrajectory derive_trajectory(const AtomParams& atom, const TrajectoryParams& traj) {
    validate(atom);
    validate(traj);
    DerivedTrajectory d;
    d.omega = traj.omega;
    d.radius = traj.radius;
    const double beta = traj.omega * traj.radius / constants::c_light;
    d.zeta = beta * beta;
    d.gamma = 1.0 / std::sqrt(1.0 - d.zeta);
    d.omega0_bar = atom.omega0 / d.gamma;
    d.accel = traj.omega * traj.omega * traj.radius;
    return d;
}

/// The correlator expansion is first order in zeta; above this the results
/// are no longer controlled.
inline constexpr double zeta_warn_threshold = 0.01;

inline bool zeta_in_perturbative_range(const DerivedTrajectory& t) {
    return t.zeta <= zeta_warn_threshold;
}

/// Back-solve the dipole magnitude from a target shift scale eta and a mode
/// volume (figure presets quote eta rather than |d'|).
inline double dipole_from_eta(double eta, double volume) {
    detail::require_positive(eta, "eta");
    detail::require_positive(volume, "volume");
    return std::sqrt(eta * 3.0 * constants::pi * constants::hbar * constants::epsilon0 * volume);
}

} // namespace cavlamb
