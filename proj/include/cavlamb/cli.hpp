#pragma once

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cavlamb/config.hpp"
#include "cavlamb/figures.hpp"
#include "cavlamb/lambshift.hpp"
#include "cavlamb/selfcheck.hpp"
#include "cavlamb/sweep.hpp"
#include "cavlamb/version.hpp"

// Command-line surface. Exit codes: 0 success, 1 selfcheck failure,
// 2 parse error, 3 physics-validity rejection, 4 quadrature failure,
// 5 unknown figure name.

namespace cavlamb::cli {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int selfcheck_failed = 1;
inline constexpr int parse_error = 2;
inline constexpr int invalid_physics = 3;
inline constexpr int quadrature_failure = 4;
inline constexpr int unknown_figure = 5;
} // namespace exit_code

namespace detail {

struct ParamFlags {
    std::optional<double> omega0, dipole, eta, omega_c, q_factor, volume, omega, radius;

    void attach(CLI::App* cmd) {
        auto add = [cmd](const char* name, std::optional<double>& slot, const char* desc) {
            cmd->add_option(name, slot, desc);
        };
        add("--omega0", omega0, "transition angular frequency, s^-1");
        add("--dipole", dipole, "transition dipole magnitude, C m");
        add("--eta", eta, "shift scale eta, s^-1 (alternative to --dipole)");
        add("--omega_c", omega_c, "cavity normal angular frequency, s^-1");
        add("--q_factor", q_factor, "cavity quality factor");
        add("--volume", volume, "cavity mode volume, m^3");
        add("--omega", omega, "orbital angular frequency, s^-1");
        add("--radius", radius, "orbit radius, m");
    }

    void apply(std::map<std::string, double>& values) const {
        auto set = [&values](const char* key, const std::optional<double>& v) {
            if (v) values[key] = *v;
        };
        set("omega0", omega0);
        set("dipole", dipole);
        set("eta", eta);
        set("omega_c", omega_c);
        set("q_factor", q_factor);
        set("volume", volume);
        set("omega", omega);
        set("radius", radius);
        // an override of one dipole parametrization supersedes the config's other one
        if (dipole && !eta) values.erase("eta");
        if (eta && !dipole) values.erase("dipole");
    }
};

inline FixedParams load_params(const std::string& config_path, const ParamFlags& flags) {
    std::map<std::string, double> values;
    if (!config_path.empty()) values = parse_config_file(config_path);
    flags.apply(values);
    return make_params(values);
}

inline nlohmann::ordered_json shift_to_json(const FixedParams& p, const DerivedCavity& dc,
                                            const DerivedTrajectory& traj, const ValidityReport& bad,
                                            const ShiftResult& s, double g0, double gw) {
    nlohmann::ordered_json j;
    j["params"] = {{"omega0", p.atom.omega0}, {"dipole", p.atom.dipole},
                   {"omega_c", p.cavity.omega_c}, {"q_factor", p.cavity.q_factor},
                   {"volume", p.cavity.volume}, {"omega", p.traj.omega},
                   {"radius", p.traj.radius}};
    j["derived"] = {{"kappa", dc.kappa}, {"g", dc.g}, {"eta", dc.eta},
                    {"zeta", traj.zeta}, {"gamma", traj.gamma},
                    {"omega0_bar", traj.omega0_bar}, {"accel", traj.accel}};
    j["bad_cavity"] = {{"ratio", bad.ratio}, {"margin", bad.margin}, {"pass", bad.pass}};
    j["shift"] = {{"delta0_closed", s.delta0_closed},
                  {"delta0_highq", s.delta0_highq},
                  {"delta_total", s.delta_total},
                  {"delta_noninertial", s.delta_noninertial},
                  {"delta0_used", s.method_trace.delta0_used},
                  {"delta0_fallback", s.method_trace.delta0_fallback},
                  {"err_estimate", s.err_estimate}};
    j["rates"] = {{"gamma0", g0}, {"gamma_noninertial", gw}};
    j["trace"] = {{"subdivisions", s.method_trace.subdivisions},
                  {"tail_cut", s.method_trace.tail_cut},
                  {"tail_bound", s.method_trace.tail_bound},
                  {"quad_err", s.method_trace.quad_err}};
    return j;
}

} // namespace detail

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Lamb shifts and decay rates for a circulating two-level atom in a lossy cavity"};
    app.set_version_flag("--version", std::string("cavlamb ") + version);
    app.require_subcommand(1);

    std::string config_path;
    double tol = 1e-8;
    double margin = 3.0;
    int threads = 0;
    bool as_json = false;

    detail::ParamFlags shift_flags, sweep_flags, validate_flags;

    auto* cmd_shift = app.add_subcommand("shift", "single-point shift and rate evaluation (JSON to stdout)");
    cmd_shift->add_option("--config", config_path, "key = value config file");
    cmd_shift->add_option("--tol", tol, "quadrature relative tolerance");
    cmd_shift->add_option("--margin", margin, "bad-cavity margin");
    cmd_shift->add_flag("--json", as_json, "machine-readable output (shift always prints JSON)");
    shift_flags.attach(cmd_shift);

    auto* cmd_sweep = app.add_subcommand("sweep", "parameter scan, CSV/JSON table + metadata sidecar");
    std::string axis = "omega_c", spacing = "linear", quantities_csv = "delta0", out_path = "sweep.csv";
    std::string format = "csv";
    double start = 0.0, stop = 0.0, center = 0.0, scale = 1.0;
    int points = 401;
    cmd_sweep->add_option("--config", config_path, "key = value config file");
    cmd_sweep->add_option("--axis", axis, "omega_c | omega")->check(CLI::IsMember({"omega_c", "omega"}));
    cmd_sweep->add_option("--start", start, "axis start (delta start in offset mode)")->required();
    cmd_sweep->add_option("--stop", stop, "axis stop (delta stop in offset mode)")->required();
    cmd_sweep->add_option("--points", points, "grid points");
    cmd_sweep->add_option("--spacing", spacing, "linear | log | offset")
        ->check(CLI::IsMember({"linear", "log", "offset"}));
    cmd_sweep->add_option("--center", center, "offset-mode center, s^-1");
    cmd_sweep->add_option("--scale", scale, "offset-mode scale for delta");
    cmd_sweep->add_option("--quantities", quantities_csv, "comma list of delta0,delta_total,delta_noninertial,gamma0,gamma_noninertial");
    cmd_sweep->add_option("--out", out_path, "output table path");
    cmd_sweep->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    cmd_sweep->add_option("--tol", tol, "quadrature relative tolerance");
    cmd_sweep->add_option("--margin", margin, "bad-cavity margin");
    cmd_sweep->add_option("--threads", threads, "worker threads (0: auto, capped by CAVITY_LAMB_THREADS)");
    sweep_flags.attach(cmd_sweep);

    auto* cmd_figure = app.add_subcommand("figure", "regenerate a preset dataset");
    std::string figure_name;
    std::string out_dir = ".";
    cmd_figure->add_option("name", figure_name, "one of fig1a fig1b fig2a fig2b fig2c fig2d fig3a fig3b")->required();
    cmd_figure->add_option("--out", out_dir, "output directory");
    cmd_figure->add_option("--threads", threads, "worker threads");

    auto* cmd_validate = app.add_subcommand("validate", "physical-validity report");
    cmd_validate->add_option("--config", config_path, "key = value config file");
    cmd_validate->add_option("--margin", margin, "bad-cavity margin");
    cmd_validate->add_flag("--json", as_json, "machine-readable output");
    validate_flags.attach(cmd_validate);

    auto* cmd_selfcheck = app.add_subcommand("selfcheck", "run the built-in oracle suite");
    cmd_selfcheck->add_flag("--json", as_json, "machine-readable output");

    std::vector<char*> argv;
    std::vector<std::string> storage;
    storage.emplace_back("cavlamb");
    for (auto& a : args) storage.push_back(a);
    for (auto& s : storage) argv.push_back(s.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return exit_code::ok;
    } catch (const CLI::CallForVersion&) {
        out << "cavlamb " << version << "\n";
        return exit_code::ok;
    } catch (const CLI::ParseError& e) {
        err << "argument error: " << e.what() << "\n";
        return exit_code::parse_error;
    }

    try {
        if (cmd_shift->parsed()) {
            const FixedParams p = detail::load_params(config_path, shift_flags);
            const DerivedCavity dc = derive_cavity(p.atom, p.cavity);
            const SpectralDensity sd = SpectralDensity::from(p.cavity, dc);
            const DerivedTrajectory traj = derive_trajectory(p.atom, p.traj);
            QuadratureOptions q;
            q.rel_tol = tol;
            const ShiftResult s = delta_noninertial(p.atom, dc, sd, traj, q);
            const double g0 = gamma0(p.atom, dc, sd);
            const double gw = gamma_noninertial(p.atom, traj, dc, sd);
            const ValidityReport bad = check_bad_cavity(dc, margin);
            out << detail::shift_to_json(p, dc, traj, bad, s, g0, gw).dump(2) << "\n";
            return exit_code::ok;
        }

        if (cmd_sweep->parsed()) {
            const FixedParams p = detail::load_params(config_path, sweep_flags);
            SweepSpec spec;
            spec.fixed = p;
            spec.axis = axis == "omega" ? Axis::omega : Axis::omega_c;
            spec.spacing = spacing == "log" ? Spacing::log
                                            : (spacing == "offset" ? Spacing::offset : Spacing::linear);
            spec.start = start;
            spec.stop = stop;
            spec.points = points;
            spec.offset_center = center;
            spec.offset_scale = scale;
            spec.quad.rel_tol = tol;
            spec.bad_cavity_margin = margin;
            std::stringstream qs(quantities_csv);
            std::string item;
            while (std::getline(qs, item, ',')) {
                const auto q = quantity_from_string(item);
                if (!q) {
                    err << "unknown quantity '" << item << "'\n";
                    return exit_code::parse_error;
                }
                spec.quantities.push_back(*q);
            }
            const std::vector<SweepRow> rows = run_sweep(spec, threads);
            const std::string axis_name = spec.axis == Axis::omega ? "omega" : "omega_c";
            emit_table(rows, spec.quantities, axis_name,
                       format == "json" ? TableFormat::json : TableFormat::csv, out_path);
            // metadata sidecar next to the table
            nlohmann::ordered_json meta;
            meta["tool"] = "cavlamb";
            meta["version"] = version;
            meta["params"] = {{"omega0", p.atom.omega0}, {"dipole", p.atom.dipole},
                              {"omega_c", p.cavity.omega_c}, {"q_factor", p.cavity.q_factor},
                              {"volume", p.cavity.volume}, {"omega", p.traj.omega},
                              {"radius", p.traj.radius}};
            meta["scan"] = {{"axis", axis_name}, {"spacing", spacing}, {"start", start},
                            {"stop", stop}, {"points", points}, {"offset_center", center},
                            {"offset_scale", scale}};
            meta["quadrature"] = {{"rel_tol", tol}, {"tail_mult", spec.quad.tail_mult},
                                  {"max_panels", spec.quad.max_panels}};
            meta["bad_cavity_margin"] = margin;
            nlohmann::ordered_json flags = nlohmann::ordered_json::object();
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (!rows[i].flags.empty()) flags[std::to_string(i)] = rows[i].flags;
            }
            meta["row_flags"] = flags;
            const std::filesystem::path meta_path =
                std::filesystem::path(out_path).replace_extension(".meta.json");
            cavlamb::detail::atomic_write(meta_path, meta.dump(2) + "\n");
            out << "wrote " << out_path << " and " << meta_path.string() << "\n";
            return exit_code::ok;
        }

        if (cmd_figure->parsed()) {
            const auto preset = make_figure_preset(figure_name);
            if (!preset) {
                err << "unknown figure '" << figure_name << "'\n";
                return exit_code::unknown_figure;
            }
            emit_figure(*preset, out_dir, threads);
            out << "wrote " << (std::filesystem::path(out_dir) / (figure_name + ".csv")).string() << "\n";
            return exit_code::ok;
        }

        if (cmd_validate->parsed()) {
            const FixedParams p = detail::load_params(config_path, validate_flags);
            const DerivedCavity dc = derive_cavity(p.atom, p.cavity);
            const DerivedTrajectory traj = derive_trajectory(p.atom, p.traj);
            const ValidityReport bad = check_bad_cavity(dc, margin);
            const bool zeta_ok = zeta_in_perturbative_range(traj);
            if (as_json) {
                nlohmann::ordered_json j;
                j["bad_cavity"] = {{"ratio", bad.ratio}, {"margin", bad.margin}, {"pass", bad.pass}};
                j["zeta"] = traj.zeta;
                j["zeta_first_order_ok"] = zeta_ok;
                j["gamma"] = traj.gamma;
                j["omega0_bar"] = traj.omega0_bar;
                j["accel"] = traj.accel;
                j["eta"] = dc.eta;
                out << j.dump(2) << "\n";
            } else {
                out << "g/kappa        = " << format_g17(bad.ratio) << (bad.pass ? "  (pass" : "  (FAIL")
                    << " at margin " << margin << ")\n";
                out << "zeta           = " << format_g17(traj.zeta)
                    << (zeta_ok ? "" : "  (warning: beyond first-order range)") << "\n";
                out << "gamma          = " << format_g17(traj.gamma) << "\n";
                out << "omega0_bar     = " << format_g17(traj.omega0_bar) << " s^-1\n";
                out << "accel          = " << format_g17(traj.accel) << " m/s^2\n";
                out << "eta            = " << format_g17(dc.eta) << " s^-1\n";
            }
            return bad.pass ? exit_code::ok : exit_code::invalid_physics;
        }

        if (cmd_selfcheck->parsed()) {
            const std::vector<CheckResult> results = run_selfcheck();
            bool all = true;
            if (as_json) {
                nlohmann::ordered_json arr = nlohmann::ordered_json::array();
                for (const auto& r : results) {
                    arr.push_back({{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
                    all = all && r.pass;
                }
                out << arr.dump(2) << "\n";
            } else {
                for (const auto& r : results) {
                    out << (r.pass ? "PASS " : "FAIL ") << r.name << "  [" << r.detail << "]\n";
                    all = all && r.pass;
                }
            }
            return all ? exit_code::ok : exit_code::selfcheck_failed;
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_code::parse_error;
    } catch (const pvquad::NonConvergence& e) {
        err << "quadrature error: " << e.what() << "\n";
        return exit_code::quadrature_failure;
    } catch (const pvquad::PoleOnEdge& e) {
        err << "quadrature error: " << e.what() << "\n";
        return exit_code::quadrature_failure;
    } catch (const std::invalid_argument& e) {
        err << "invalid parameters: " << e.what() << "\n";
        return exit_code::invalid_physics;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::parse_error;
    }
    return exit_code::ok;
}

} // namespace cavlamb::cli
