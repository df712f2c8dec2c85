#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "cavlamb/lambshift.hpp"
#include "cavlamb/params.hpp"
#include "cavlamb/pvquad.hpp"
#include "cavlamb/spectral.hpp"

// Built-in oracle suite: PV identities, closed form vs quadrature, high-Q
// consistency, tail-decay slopes. Fast enough for an interactive run.

namespace cavlamb {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct SelfCheckOptions {
    // test fixture: flips the sign of the high-Q 1/Q term so the
    // consistency check must fail
    bool mutate_highq_sign = false;
};

namespace detail {

inline CheckResult check(const std::string& name, bool pass, const std::string& detail_text) {
    return {name, pass, detail_text};
}

} // namespace detail

inline std::vector<CheckResult> run_selfcheck(const SelfCheckOptions& opts = {}) {
    std::vector<CheckResult> out;
    using pvquad::Interval;
    using pvquad::PVProblem;

    // PV of the bare kernel over a symmetric window
    {
        PVProblem p;
        p.poles = {{0.0, [](double) { return 1.0; }}};
        p.support = {Interval{-1.0, 1.0}};
        p.rel_tol = 1e-12;
        p.abs_tol = 1e-14;
        const double v = pvquad::pv_integrate(p).value;
        out.push_back(detail::check("pv_odd_kernel_zero", std::abs(v) <= 1e-12,
                                    "PV int_-1^1 dx/x = " + format_g17(v)));
    }

    // PV (x+2)/x over [-1,1]: the x/x part contributes 2, the 2/x part cancels
    {
        PVProblem p;
        p.poles = {{0.0, [](double x) { return x + 2.0; }}};
        p.support = {Interval{-1.0, 1.0}};
        p.rel_tol = 1e-12;
        const double v = pvquad::pv_integrate(p).value;
        out.push_back(detail::check("pv_polynomial_identity", std::abs(v - 2.0) <= 1e-12,
                                    "PV int_-1^1 (x+2)/x dx = " + format_g17(v)));
    }

    // Lorentzian-kernel PV against the partial-fraction closed form
    {
        const double wc = 2.0, kappa = 0.05, a = 1.0;
        PVProblem p;
        p.poles = {{a, [wc, kappa](double x) {
                        const double d = x - wc;
                        return (1.0 / constants::pi) * kappa / (kappa * kappa + d * d);
                    }}};
        p.support = {Interval{0.0, std::numeric_limits<double>::infinity()}};
        p.tail_cut = 1e4 * wc;
        p.tail_model = pvquad::TailModel::inv_x3;
        p.rel_tol = 1e-11;
        p.window_cap = 10.0 * kappa;
        p.merge_scale = kappa;
        p.seeds = detail::lorentzian_seeds({wc}, kappa, 0.0, p.tail_cut);
        const double v = pvquad::pv_integrate(p).value;
        const double ref = detail::lorentzian_pv_kernel(a, wc, kappa);
        const double rel = std::abs(v - ref) / std::abs(ref);
        out.push_back(detail::check("pv_lorentzian_closed_form", rel <= 1e-8,
                                    "rel diff " + format_g17(rel)));
    }

    // delta0: closed form against its quadrature oracle on a small grid
    {
        double worst = 0.0;
        for (double ratio : {0.4, 0.8, 1.3, 2.5}) {
            for (double q : {1e3, 1e5, 1e7}) {
                const AtomParams atom{1e7, 1e-29};
                const CavityParams cav{ratio * atom.omega0, q, 1e-6};
                const DerivedCavity dc = derive_cavity(atom, cav);
                const SpectralDensity sd = SpectralDensity::from(cav, dc);
                const double closed = delta0_closed(atom, dc, sd);
                const ValueWithError quad = delta0_quadrature(atom, dc, sd);
                worst = std::max(worst, std::abs(closed - quad.value) / std::abs(closed));
            }
        }
        out.push_back(detail::check("delta0_closed_vs_quadrature", worst <= 1e-6,
                                    "worst rel diff " + format_g17(worst)));
    }

    // high-Q formula against the closed form at Q = 1e7
    {
        double worst = 0.0;
        for (double ratio : {0.5, 1.5, 2.0}) {
            const AtomParams atom{1e7, 1e-29};
            const CavityParams cav{ratio * atom.omega0, 1e7, 1e-6};
            const DerivedCavity dc = derive_cavity(atom, cav);
            const SpectralDensity sd = SpectralDensity::from(cav, dc);
            const double closed = delta0_closed(atom, dc, sd);
            double hq = delta0_highq(atom, dc, sd);
            if (opts.mutate_highq_sign) {
                // flip the 1/Q log term
                const double w0 = atom.omega0, wc = cav.omega_c, Q = cav.q_factor;
                const double dsq = wc * wc - w0 * w0;
                const double logterm = dc.eta * w0 * wc * (w0 * w0 + wc * wc) * std::log(wc / w0) /
                                       (2.0 * constants::pi * constants::pi * Q * dsq * dsq);
                hq += 2.0 * logterm;
            }
            worst = std::max(worst, std::abs(closed - hq) / std::abs(closed));
        }
        out.push_back(detail::check("delta0_highq_consistency", worst <= 1e-5,
                                    "worst rel diff " + format_g17(worst)));
    }

    // tail-decay slopes: ungrouped curvature pieces fall like 1/x, their
    // grouped difference at least like 1/x^2
    {
        const AtomParams atom{1e7, 1e-29};
        const CavityParams cav{1.2e7, 1e7, 1e-6};
        const DerivedCavity dc = derive_cavity(atom, cav);
        const SpectralDensity sd = SpectralDensity::from(cav, dc);
        const DerivedTrajectory traj = derive_trajectory(atom, TrajectoryParams{5e9, 1e-5});
        const double hi_ref = traj.omega + traj.omega0_bar;
        const double s1a = pvquad::slope_probe(diagnostics::f1a_integrand(traj, sd), 1e2 * hi_ref, 1e4 * hi_ref, 40);
        const double s1b = pvquad::slope_probe(diagnostics::f1b_integrand(traj, sd), 1e2 * hi_ref, 1e4 * hi_ref, 40);
        const double sg = pvquad::slope_probe(diagnostics::grouped_i1_integrand(traj, sd), 1e2 * hi_ref, 1e4 * hi_ref, 40);
        const bool pass = std::abs(s1a + 1.0) <= 0.05 && std::abs(s1b + 1.0) <= 0.05 && sg <= -2.0 + 0.1;
        out.push_back(detail::check("tail_slopes_grouped_vs_ungrouped", pass,
                                    "f1a " + format_g17(s1a) + ", f1b " + format_g17(s1b) +
                                        ", grouped " + format_g17(sg)));
    }

    // derived-parameter identities
    {
        const AtomParams atom{1e7, 3e-29};
        const CavityParams cav{1.7e7, 2.4e6, 1e-7};
        const DerivedCavity dc = derive_cavity(atom, cav);
        const double kq = std::abs(dc.kappa * cav.q_factor - cav.omega_c) / cav.omega_c;
        const double eta_from_g = 2.0 * dc.g * dc.g / (3.0 * constants::pi * cav.omega_c);
        const double eta_rel = std::abs(eta_from_g - dc.eta) / dc.eta;
        out.push_back(detail::check("derived_cavity_identities", kq <= 1e-12 && eta_rel <= 1e-12,
                                    "kappa*Q rel " + format_g17(kq) + ", eta rel " + format_g17(eta_rel)));
    }

    return out;
}

} // namespace cavlamb
