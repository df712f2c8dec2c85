#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "cavlamb/constants.hpp"
#include "cavlamb/params.hpp"
#include "cavlamb/pvquad.hpp"
#include "cavlamb/spectral.hpp"

// The shift quantities: closed-form and high-Q inertial shift, the
// quadrature route that serves as their oracle, the total shift of the
// circulating atom, and the purely-noninertial difference.

namespace cavlamb {

struct QuadratureOptions {
    double rel_tol = 1e-8;
    double abs_tol = 0.0;
    double tail_mult = 1e3;  // tail_cut = tail_mult * max(omega_c, omega + omega0_bar)
    int max_panels = 10000;
};

struct ValueWithError {
    double value = 0.0;
    double err = 0.0;
};

struct MethodTrace {
    int subdivisions = 0;
    double tail_cut = 0.0;
    double tail_bound = 0.0;
    double quad_err = 0.0;
    bool delta0_fallback = false;  // near-resonance: delta0 came from quadrature
    double delta0_used = 0.0;      // the delta0 subtracted from delta_total
};

struct ShiftResult {
    double delta0_closed = 0.0;
    double delta0_highq = 0.0;  // NaN when Q < 1e3 or too close to resonance
    double delta_total = 0.0;
    double delta_noninertial = 0.0;  // delta_total - method_trace.delta0_used, exactly
    double err_estimate = 0.0;
    MethodTrace method_trace;
};

/// Catastrophic cancellation sets in when the cavity is tuned this close to
/// the atomic resonance; the closed forms defer to quadrature inside it.
inline bool near_resonance(double omega0, double omega_c) {
    return std::abs(omega_c - omega0) < 1e-6 * omega_c;
}

namespace detail {

// PV int_0^inf L(x)/(x-a) dx for the Lorentzian L centered at omega_c with
// half-width kappa; exact partial-fraction evaluation (log/arctan terms).
// Valid for any a != 0 (PV applies when a > 0).
inline double lorentzian_pv_kernel(double a, double omega_c, double kappa) {
    const double d = a - omega_c;
    const double A = 1.0 / (d * d + kappa * kappa);
    return -0.5 * A * d
           - (kappa * A / constants::pi) * std::log(std::abs(a))
           + (kappa * A / (2.0 * constants::pi)) * std::log(omega_c * omega_c + kappa * kappa)
           - (A * d / constants::pi) * std::atan(omega_c / kappa);
}

inline double delta0_closed_raw(double eta, double omega0, double omega_c, double kappa) {
    // nu (1/(nu+W0) - 1/(nu-W0)) = -W0 (1/(nu+W0) + 1/(nu-W0))
    return -(eta * omega0 / (2.0 * constants::pi)) *
           (lorentzian_pv_kernel(omega0, omega_c, kappa) + lorentzian_pv_kernel(-omega0, omega_c, kappa));
}

inline std::vector<double> lorentzian_seeds(std::vector<double> centers, double kappa,
                                            double lo, double hi) {
    static constexpr double mults[] = {-1000, -300, -100, -30, -10, -3, -1, 0,
                                       1, 3, 10, 30, 100, 300, 1000};
    std::vector<double> seeds;
    for (double c : centers) {
        for (double m : mults) {
            const double s = c + m * kappa;
            if (s > lo && s < hi) seeds.push_back(s);
        }
    }
    return seeds;
}

inline ValueWithError total_shift_quadrature(const DerivedCavity& dc, const SpectralDensity& sd,
                                             const DerivedTrajectory& traj,
                                             const QuadratureOptions& opts, MethodTrace* trace) {
    const double w = traj.omega;
    const double w0b = traj.omega0_bar;
    const double pref = traj.gamma * dc.eta / (2.0 * constants::pi);

    auto B = [traj, sd](double x) { return bracket(x, traj, sd); };

    pvquad::PVProblem prob;
    prob.poles = {{+w0b, [B](double x) { return -B(x); }},
                  {-w0b, [B](double x) { return B(x); }}};
    if (w > 0.0) {
        prob.support = {{-w, 0.0}, {0.0, w}, {w, std::numeric_limits<double>::infinity()}};
    } else {
        prob.support = {{0.0, std::numeric_limits<double>::infinity()}};
    }
    prob.tail_cut = opts.tail_mult * std::max(sd.omega_c, w + w0b);
    prob.tail_model = pvquad::TailModel::inv_x3;
    prob.rel_tol = opts.rel_tol;
    prob.abs_tol = pref > 0.0 ? opts.abs_tol / pref : opts.abs_tol;
    prob.max_panels = opts.max_panels;
    prob.window_cap = 10.0 * sd.kappa;
    prob.merge_scale = sd.kappa;
    prob.seeds = lorentzian_seeds({sd.omega_c, sd.omega_c - w, sd.omega_c + w}, sd.kappa,
                                  w > 0.0 ? -w : 0.0, prob.tail_cut);

    const pvquad::PVResult res = pvquad::pv_integrate(prob);
    if (trace) {
        trace->subdivisions = res.subdivisions;
        trace->tail_cut = prob.tail_cut;
        trace->tail_bound = pref * res.tail_bound;
        trace->quad_err = pref * res.err_estimate;
    }
    return {pref * res.value, pref * (res.err_estimate + res.tail_bound)};
}

} // namespace detail

/// Inertial shift by PV quadrature of the Lorentzian-weighted kernel; the
/// oracle for the closed forms.
inline ValueWithError delta0_quadrature(const AtomParams& atom, const DerivedCavity& dc,
                                        const SpectralDensity& sd,
                                        const QuadratureOptions& opts = {}) {
    const DerivedTrajectory rest = derive_trajectory(atom, TrajectoryParams{0.0, 0.0});
    return detail::total_shift_quadrature(dc, sd, rest, opts, nullptr);
}

/// Exact closed form of the inertial shift (partial-fraction log/arctan
/// evaluation of the PV integral). Near resonance it defers to quadrature.
inline double delta0_closed(const AtomParams& atom, const DerivedCavity& dc,
                            const SpectralDensity& sd, const QuadratureOptions& opts = {},
                            bool* used_fallback = nullptr, double* fallback_err = nullptr) {
    if (near_resonance(atom.omega0, sd.omega_c)) {
        const ValueWithError v = delta0_quadrature(atom, dc, sd, opts);
        if (used_fallback) *used_fallback = true;
        if (fallback_err) *fallback_err = v.err;
        return v.value;
    }
    if (used_fallback) *used_fallback = false;
    if (fallback_err) *fallback_err = 0.0;
    return detail::delta0_closed_raw(dc.eta, atom.omega0, sd.omega_c, sd.kappa);
}

/// High-Q approximation of the inertial shift.
inline double delta0_highq(const AtomParams& atom, const DerivedCavity& dc,
                           const SpectralDensity& sd) {
    const double Q = sd.omega_c / sd.kappa;
    if (!(Q >= 1e3)) {
        throw std::invalid_argument("delta0_highq requires Q >= 1e3");
    }
    if (near_resonance(atom.omega0, sd.omega_c)) {
        throw std::invalid_argument("delta0_highq is undefined at the atomic resonance");
    }
    const double w0 = atom.omega0;
    const double wc = sd.omega_c;
    const double dsq = wc * wc - w0 * w0;
    return -dc.eta * w0 *
           (wc * (w0 * w0 + wc * wc) * std::log(wc / w0) /
                (2.0 * constants::pi * constants::pi * Q * dsq * dsq) +
            wc / (constants::pi * dsq));
}

/// Total shift of the circulating atom: PV quadrature of the six-term
/// bracket over the Theta-support union, truncated where the combined
/// integrand has settled onto its cubic power-law tail.
inline ValueWithError delta_total(const AtomParams&, const DerivedCavity& dc,
                                  const SpectralDensity& sd, const DerivedTrajectory& traj,
                                  const QuadratureOptions& opts = {}, MethodTrace* trace = nullptr) {
    if (!(traj.zeta < 1.0)) {
        throw std::invalid_argument("delta_total requires zeta(omega) < 1");
    }
    return detail::total_shift_quadrature(dc, sd, traj, opts, trace);
}

/// Full shift record: Delta_omega = Delta - Delta0 with Delta0 taken from
/// the closed form (quadrature near resonance), evaluated at the lab-frame
/// transition frequency.
inline ShiftResult delta_noninertial(const AtomParams& atom, const DerivedCavity& dc,
                                     const SpectralDensity& sd, const DerivedTrajectory& traj,
                                     const QuadratureOptions& opts = {}) {
    ShiftResult r;
    bool fallback = false;
    double d0_err = 0.0;
    r.delta0_closed = delta0_closed(atom, dc, sd, opts, &fallback, &d0_err);
    const double Q = sd.omega_c / sd.kappa;
    r.delta0_highq = (Q >= 1e3 && !near_resonance(atom.omega0, sd.omega_c))
                         ? delta0_highq(atom, dc, sd)
                         : std::numeric_limits<double>::quiet_NaN();
    const ValueWithError total = delta_total(atom, dc, sd, traj, opts, &r.method_trace);
    r.delta_total = total.value;
    r.method_trace.delta0_fallback = fallback;
    r.method_trace.delta0_used = r.delta0_closed;
    r.delta_noninertial = r.delta_total - r.method_trace.delta0_used;
    r.err_estimate = total.err + d0_err;
    return r;
}

// Integrand diagnostics for the tail-decay probes: the individually
// log-divergent curvature pieces and their grouped difference.
namespace diagnostics {

inline double pv_kernel(double x, double omega0_bar) {
    return 1.0 / (x + omega0_bar) - 1.0 / (x - omega0_bar);
}

/// zeta(nu) nu rho(nu) K(nu) — ungrouped, decays like 1/nu.
inline pvquad::Fn f1a_integrand(const DerivedTrajectory& traj, const SpectralDensity& sd) {
    const double R = traj.radius, w0b = traj.omega0_bar;
    return [R, w0b, sd](double x) {
        const double beta = x * R / constants::c_light;
        return beta * beta * x * dos(x, sd) * pv_kernel(x, w0b);
    };
}

/// zeta(nu+w) (nu+w) rho(nu+w) K(nu) — ungrouped, decays like 1/nu.
inline pvquad::Fn f1b_integrand(const DerivedTrajectory& traj, const SpectralDensity& sd) {
    const double R = traj.radius, w = traj.omega, w0b = traj.omega0_bar;
    return [R, w, w0b, sd](double x) {
        const double xs = x + w;
        const double beta = xs * R / constants::c_light;
        return beta * beta * xs * dos(xs, sd) * pv_kernel(x, w0b);
    };
}

/// Grouped difference f1a - f1b; the 1/nu parts cancel and the decay
/// steepens to 1/nu^2.
inline pvquad::Fn grouped_i1_integrand(const DerivedTrajectory& traj, const SpectralDensity& sd) {
    auto fa = f1a_integrand(traj, sd);
    auto fb = f1b_integrand(traj, sd);
    return [fa, fb](double x) { return fa(x) - fb(x); };
}

/// The full six-term bracket times the PV kernel; decays like 1/nu^3.
inline pvquad::Fn full_integrand(const DerivedTrajectory& traj, const SpectralDensity& sd) {
    const double w0b = traj.omega0_bar;
    return [traj, sd, w0b](double x) { return bracket(x, traj, sd) * pv_kernel(x, w0b); };
}

} // namespace diagnostics

} // namespace cavlamb
