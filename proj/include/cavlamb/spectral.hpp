#pragma once

#include <array>
#include <cmath>

#include "cavlamb/constants.hpp"
#include "cavlamb/params.hpp"

// Lorentzian density of field states, the Theta-gated correlator bracket for
// a circulating atom, and the two spontaneous decay rates.

namespace cavlamb {

struct SpectralDensity {
    double omega_c = 0.0;  // s^-1
    double kappa = 0.0;    // s^-1

    static SpectralDensity from(const CavityParams& cav, const DerivedCavity& dc) {
        return {cav.omega_c, dc.kappa};
    }
};

/// Lorentzian density of states, (1/pi) kappa / (kappa^2 + (w - w_c)^2).
inline double dos(double omega_k, const SpectralDensity& sd) {
    const double d = omega_k - sd.omega_c;
    return (1.0 / constants::pi) * sd.kappa / (sd.kappa * sd.kappa + d * d);
}

/// Analytic derivative of dos with respect to omega_k.
inline double dos_prime(double omega_k, const SpectralDensity& sd) {
    const double d = omega_k - sd.omega_c;
    const double den = sd.kappa * sd.kappa + d * d;
    return -(2.0 / constants::pi) * sd.kappa * d / (den * den);
}

/// Heaviside gate with the symmetric convention Theta(0) = 1/2.
inline double theta(double x) {
    if (x > 0.0) return 1.0;
    if (x < 0.0) return 0.0;
    return 0.5;
}

// One term of the six-term correlator bracket: weight * zeta(x)^c * x *
// rho(x) * Theta(x) evaluated at x = nu_bar + shift (c = 1 for the
// curvature-weighted terms, 0 otherwise).
struct BracketTerm {
    double weight = 0.0;  // dimensionless
    double shift = 0.0;   // 0 or +-omega, s^-1
    bool curvature = false;
};

/// The six bracket terms, exactly one entry per term.
inline std::array<BracketTerm, 6> bracket_terms(const DerivedTrajectory& traj) {
    const double w = traj.omega;
    return {{{1.0, 0.0, false},
             {traj.zeta / 4.0, +w, false},
             {traj.zeta / 4.0, -w, false},
             {-2.0 / 5.0, 0.0, true},
             {1.0 / 5.0, +w, true},
             {1.0 / 5.0, -w, true}}};
}

inline double bracket_term_value(const BracketTerm& t, double nu_bar, double radius,
                                 const SpectralDensity& sd) {
    const double x = nu_bar + t.shift;
    const double gate = theta(x);
    if (gate == 0.0) return 0.0;
    double v = t.weight * x * dos(x, sd) * gate;
    if (t.curvature) {
        const double beta = x * radius / constants::c_light;
        v *= beta * beta;
    }
    return v;
}

/// Theta-gated six-term sum multiplying the PV kernel in the total-shift
/// integrand (the gamma-stripped square bracket; the eta and dipole factors
/// live in the shift module).
inline double bracket(double nu_bar, const DerivedTrajectory& traj, const SpectralDensity& sd) {
    const auto terms = bracket_terms(traj);
    double sum = 0.0;
    for (const auto& t : terms) sum += bracket_term_value(t, nu_bar, traj.radius, sd);
    return sum;
}

/// Inertial spontaneous decay rate, eta rho(Omega0) Omega0.
inline double gamma0(const AtomParams& atom, const DerivedCavity& dc, const SpectralDensity& sd) {
    return dc.eta * dos(atom.omega0, sd) * atom.omega0;
}

/// Purely-noninertial decay rate of the circulating atom, first order in
/// zeta(omega).
inline double gamma_noninertial(const AtomParams& atom, const DerivedTrajectory& traj,
                                const DerivedCavity& dc, const SpectralDensity& sd) {
    const double w0 = atom.omega0;
    const double side = traj.omega + traj.omega0_bar;
    return 0.5 * dc.eta * traj.zeta * w0 *
           (-w0 * dos_prime(w0, sd) + 0.9 * (side / w0) * dos(side, sd));
}

} // namespace cavlamb
