#pragma once

#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cavlamb/sweep.hpp"

// Hard-coded sweep presets that regenerate the reference datasets: the
// inertial shift and decay rate near the atomic resonance, and the
// noninertial shift and decay rate near the omega + omega0_bar sideband for
// three orbital frequencies. Presets emit raw columns (s^-1) plus
// eta-normalized (and, for the ratio figures, delta0-normalized) columns.

namespace cavlamb {

struct FigurePreset {
    std::string name;
    SweepSpec spec;
    std::vector<std::string> ratio_columns;  // derived columns appended to the CSV
    double eta = 0.0;                        // normalization scale of the preset
};

namespace detail {

// All presets share the same dipole: eta * V = 1e-14 s^-1 m^3 in every
// regime, so one |d'| reproduces each quoted eta.
inline FixedParams preset_params(double volume, double omega, double radius) {
    FixedParams p;
    p.atom.omega0 = 1e7;
    p.cavity.q_factor = 1e7;
    p.cavity.volume = volume;
    p.atom.dipole = dipole_from_eta(1e-14 / volume, volume);
    p.traj.omega = omega;
    p.traj.radius = radius;
    p.cavity.omega_c = p.atom.omega0;  // placeholder; the sweep scans omega_c
    return p;
}

// Scan the omega + omega0_bar sideband at +-25 kappa so the 401-point grid
// resolves the kappa-wide dispersive spike.
inline SweepSpec sideband_scan(const FixedParams& p, const std::vector<Quantity>& qs) {
    SweepSpec s;
    s.fixed = p;
    const DerivedCavity dc0 = derive_cavity(p.atom, CavityParams{p.atom.omega0, p.cavity.q_factor, p.cavity.volume});
    (void)dc0;
    const DerivedTrajectory traj = derive_trajectory(p.atom, p.traj);
    const double center = p.traj.omega + traj.omega0_bar;
    const double kappa = center / p.cavity.q_factor;
    s.axis = Axis::omega_c;
    s.spacing = Spacing::offset;
    s.offset_center = center;
    s.offset_scale = 1e5;
    s.start = -25.0 * kappa / s.offset_scale;
    s.stop = +25.0 * kappa / s.offset_scale;
    s.points = 401;
    s.quantities = qs;
    return s;
}

// Scan the atomic resonance at +-100 kappa (kappa = omega0/Q).
inline SweepSpec resonance_scan(const FixedParams& p, const std::vector<Quantity>& qs) {
    SweepSpec s;
    s.fixed = p;
    const double kappa = p.atom.omega0 / p.cavity.q_factor;
    s.axis = Axis::omega_c;
    s.spacing = Spacing::offset;
    s.offset_center = p.atom.omega0;
    s.offset_scale = 1.0;
    s.start = -100.0 * kappa;
    s.stop = +100.0 * kappa;
    s.points = 401;
    s.quantities = qs;
    return s;
}

} // namespace detail

inline const std::vector<std::string>& figure_names() {
    static const std::vector<std::string> names = {"fig1a", "fig1b", "fig2a", "fig2b",
                                                   "fig2c", "fig2d", "fig3a", "fig3b"};
    return names;
}

inline std::optional<FigurePreset> make_figure_preset(const std::string& name) {
    using Q = Quantity;
    FigurePreset f;
    f.name = name;
    if (name == "fig1a") {
        const FixedParams p = detail::preset_params(1e-5, 0.0, 0.0);
        f.spec = detail::resonance_scan(p, {Q::delta0});
        f.ratio_columns = {"delta0_over_eta"};
    } else if (name == "fig3a") {
        const FixedParams p = detail::preset_params(1e-5, 0.0, 0.0);
        f.spec = detail::resonance_scan(p, {Q::gamma0, Q::delta0});
        f.ratio_columns = {"gamma0_over_eta", "delta0_over_eta"};
    } else if (name == "fig1b") {
        const FixedParams p = detail::preset_params(1e-9, 5e11, 1e-5);
        f.spec = detail::sideband_scan(p, {Q::delta0, Q::delta_total, Q::delta_noninertial});
        f.ratio_columns = {"delta_noninertial_over_eta"};
    } else if (name == "fig2a" || name == "fig2c") {
        const double omega = name == "fig2a" ? 5e9 : 5e10;
        const FixedParams p = detail::preset_params(1e-8, omega, 1e-5);
        f.spec = detail::sideband_scan(p, {Q::delta0, Q::delta_total, Q::delta_noninertial});
        f.ratio_columns = {"delta_noninertial_over_eta"};
    } else if (name == "fig2b" || name == "fig2d") {
        const double omega = name == "fig2b" ? 5e9 : 5e10;
        const FixedParams p = detail::preset_params(1e-8, omega, 1e-5);
        f.spec = detail::sideband_scan(p, {Q::delta0, Q::delta_total, Q::delta_noninertial});
        f.ratio_columns = {"delta_noninertial_over_eta", "delta_noninertial_over_delta0"};
    } else if (name == "fig3b") {
        const FixedParams p = detail::preset_params(1e-8, 5e10, 1e-5);
        f.spec = detail::sideband_scan(p, {Q::gamma_noninertial, Q::delta0, Q::delta_total, Q::delta_noninertial});
        f.ratio_columns = {"gamma_noninertial_over_eta", "delta_noninertial_over_eta"};
    } else {
        return std::nullopt;
    }
    const DerivedCavity dc = derive_cavity(f.spec.fixed.atom,
                                           CavityParams{f.spec.fixed.atom.omega0, f.spec.fixed.cavity.q_factor,
                                                        f.spec.fixed.cavity.volume});
    f.eta = dc.eta;
    return f;
}

namespace detail {

inline int quantity_index(const std::vector<Quantity>& qs, Quantity q) {
    for (std::size_t i = 0; i < qs.size(); ++i) {
        if (qs[i] == q) return static_cast<int>(i);
    }
    return -1;
}

} // namespace detail

/// Table for a figure preset: sweep columns plus the normalized columns.
inline Table figure_table(const FigurePreset& f, const std::vector<SweepRow>& rows) {
    Table t = make_table(rows, f.spec.quantities, "omega_c");
    const int i_dw = detail::quantity_index(f.spec.quantities, Quantity::delta_noninertial);
    const int i_d0 = detail::quantity_index(f.spec.quantities, Quantity::delta0);
    const int i_g0 = detail::quantity_index(f.spec.quantities, Quantity::gamma0);
    const int i_gw = detail::quantity_index(f.spec.quantities, Quantity::gamma_noninertial);
    for (const std::string& col : f.ratio_columns) {
        t.header.push_back(col);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            double v = std::numeric_limits<double>::quiet_NaN();
            if (col == "delta0_over_eta" && i_d0 >= 0) {
                v = rows[r].values[static_cast<std::size_t>(i_d0)] / f.eta;
            } else if (col == "delta_noninertial_over_eta" && i_dw >= 0) {
                v = rows[r].values[static_cast<std::size_t>(i_dw)] / f.eta;
            } else if (col == "gamma0_over_eta" && i_g0 >= 0) {
                v = rows[r].values[static_cast<std::size_t>(i_g0)] / f.eta;
            } else if (col == "gamma_noninertial_over_eta" && i_gw >= 0) {
                v = rows[r].values[static_cast<std::size_t>(i_gw)] / f.eta;
            } else if (col == "delta_noninertial_over_delta0" && i_dw >= 0 && i_d0 >= 0) {
                v = rows[r].values[static_cast<std::size_t>(i_dw)] /
                    rows[r].values[static_cast<std::size_t>(i_d0)];
            }
            t.rows[r].push_back(v);
        }
    }
    return t;
}

/// Sidecar metadata: inputs, derived quantities at the scan center,
/// tolerances, per-row flags, tool version.
inline nlohmann::ordered_json figure_metadata(const FigurePreset& f, const std::vector<SweepRow>& rows) {
    const FixedParams& p = f.spec.fixed;
    const double center_wc = f.spec.spacing == Spacing::offset ? f.spec.offset_center
                                                               : 0.5 * (f.spec.start + f.spec.stop);
    const CavityParams cav{center_wc, p.cavity.q_factor, p.cavity.volume};
    const DerivedCavity dc = derive_cavity(p.atom, cav);
    const DerivedTrajectory traj = derive_trajectory(p.atom, p.traj);

    nlohmann::ordered_json m;
    m["tool"] = "cavlamb";
    m["version"] = version;
    m["figure"] = f.name;
    m["params"] = {{"omega0", p.atom.omega0},
                   {"dipole", p.atom.dipole},
                   {"q_factor", p.cavity.q_factor},
                   {"volume", p.cavity.volume},
                   {"omega", p.traj.omega},
                   {"radius", p.traj.radius}};
    m["derived"] = {{"eta", dc.eta},
                    {"g_at_center", dc.g},
                    {"kappa_at_center", dc.kappa},
                    {"zeta", traj.zeta},
                    {"gamma", traj.gamma},
                    {"omega0_bar", traj.omega0_bar},
                    {"accel", traj.accel}};
    m["scan"] = {{"axis", "omega_c"},
                 {"spacing", f.spec.spacing == Spacing::offset ? "offset" : "linear"},
                 {"offset_center", f.spec.offset_center},
                 {"offset_scale", f.spec.offset_scale},
                 {"start", f.spec.start},
                 {"stop", f.spec.stop},
                 {"points", f.spec.points}};
    m["quadrature"] = {{"rel_tol", f.spec.quad.rel_tol},
                       {"abs_tol", f.spec.quad.abs_tol},
                       {"tail_mult", f.spec.quad.tail_mult},
                       {"max_panels", f.spec.quad.max_panels}};
    m["bad_cavity_margin"] = f.spec.bad_cavity_margin;
    nlohmann::ordered_json flags = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].flags.empty()) flags[std::to_string(i)] = rows[i].flags;
    }
    m["row_flags"] = flags;
    return m;
}

/// Run a preset and write `<name>.csv` plus `<name>.meta.json` into out_dir.
inline void emit_figure(const FigurePreset& f, const std::filesystem::path& out_dir, int threads = 0) {
    const std::vector<SweepRow> rows = run_sweep(f.spec, threads);
    std::filesystem::create_directories(out_dir);
    const Table t = figure_table(f, rows);
    detail::atomic_write(out_dir / (f.name + ".csv"), to_csv(t));
    detail::atomic_write(out_dir / (f.name + ".meta.json"), figure_metadata(f, rows).dump(2) + "\n");
}

} // namespace cavlamb
