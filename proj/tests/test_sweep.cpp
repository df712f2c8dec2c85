#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cavlamb/figures.hpp"
#include "cavlamb/sweep.hpp"

using namespace cavlamb;

namespace {

FixedParams sideband_params(double omega) {
    FixedParams p;
    p.atom = {1e7, dipole_from_eta(1e-6, 1e-8)};
    p.cavity = {5e9, 1e7, 1e-8};  // omega_c scanned
    p.traj = {omega, 1e-5};
    return p;
}

SweepSpec small_sideband_spec(int points) {
    const FixedParams p = sideband_params(5e9);
    const DerivedTrajectory traj = derive_trajectory(p.atom, p.traj);
    const double center = p.traj.omega + traj.omega0_bar;
    const double kappa = center / p.cavity.q_factor;
    SweepSpec spec;
    spec.fixed = p;
    spec.spacing = Spacing::offset;
    spec.offset_center = center;
    spec.offset_scale = 1e5;
    spec.start = -10.0 * kappa / 1e5;
    spec.stop = +10.0 * kappa / 1e5;
    spec.points = points;
    spec.quantities = {Quantity::delta0, Quantity::delta_noninertial};
    return spec;
}

std::vector<std::string> split_lines(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string line;
    while (std::getline(ss, line)) out.push_back(line);
    return out;
}

int count_fields(const std::string& line) {
    return static_cast<int>(std::count(line.begin(), line.end(), ',')) + 1;
}

} // namespace

TEST_CASE("inertial two-point sweep has vanishing noninertial columns", "[sweep]") {
    FixedParams p = sideband_params(0.0);
    p.traj.radius = 0.0;
    p.cavity.omega_c = 1.2e7;
    SweepSpec spec;
    spec.fixed = p;
    spec.start = 1.1e7;
    spec.stop = 1.3e7;
    spec.points = 2;
    spec.quantities = {Quantity::delta0, Quantity::delta_total, Quantity::delta_noninertial,
                       Quantity::gamma0, Quantity::gamma_noninertial};
    const auto rows = run_sweep(spec, 1);
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) {
        const double d0 = r.values[0];
        REQUIRE(std::abs(r.values[2]) <= 1e-6 * std::abs(d0));  // delta_noninertial
        REQUIRE(r.values[4] == 0.0);                            // gamma_noninertial
    }
}

TEST_CASE("find_extrema refines a parabola and counts crossings", "[sweep]") {
    SECTION("parabolic refinement is exact on a parabola") {
        std::vector<double> xs, ys;
        for (int i = 0; i <= 8; ++i) {
            const double x = 0.5 * i;  // grid spacing 0.5 on [0, 4]
            xs.push_back(x);
            ys.push_back(-(x - 2.3) * (x - 2.3));
        }
        const Extrema e = find_extrema(xs, ys);
        REQUIRE(e.argmax == Catch::Approx(2.3).margin(0.05));
        REQUIRE(e.max == Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("zero crossings by linear interpolation") {
        std::vector<double> xs, ys;
        for (int i = 0; i <= 40; ++i) {
            const double x = -2.0 + 0.1 * i;
            xs.push_back(x);
            ys.push_back(x * x - 1.0);
        }
        const Extrema e = find_extrema(xs, ys);
        REQUIRE(e.zero_crossings.size() == 2);
        REQUIRE(e.zero_crossings[0] == Catch::Approx(-1.0).margin(1e-2));
        REQUIRE(e.zero_crossings[1] == Catch::Approx(1.0).margin(1e-2));
    }
    SECTION("monotone data raises NoExtremum") {
        std::vector<double> xs{0, 1, 2, 3}, ys{0, 1, 2, 3};
        REQUIRE_THROWS_AS(find_extrema(xs, ys), NoExtremum);
    }
}

TEST_CASE("offset-mode axis values reconstruct exactly", "[sweep]") {
    const SweepSpec spec = small_sideband_spec(11);
    for (int i = 0; i < spec.points; ++i) {
        const double f = static_cast<double>(i) / (spec.points - 1);
        const double delta = spec.start + f * (spec.stop - spec.start);
        const double direct = spec.offset_center + delta * spec.offset_scale;
        REQUIRE(grid_value(spec, i) == direct);  // same expression, 0 ulp
    }
}

TEST_CASE("parallel and serial sweeps are identical", "[sweep]") {
    const SweepSpec spec = small_sideband_spec(9);
    const auto serial = run_sweep(spec, 1);
    const auto parallel = run_sweep(spec, 4);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        REQUIRE(serial[i].axis_value == parallel[i].axis_value);
        for (std::size_t j = 0; j < serial[i].values.size(); ++j) {
            REQUIRE(serial[i].values[j] == parallel[i].values[j]);
            REQUIRE(serial[i].errs[j] == parallel[i].errs[j]);
        }
    }
}

TEST_CASE("repeated sweeps emit byte-identical CSV", "[sweep]") {
    const SweepSpec spec = small_sideband_spec(7);
    const std::string a = to_csv(make_table(run_sweep(spec, 2), spec.quantities, "omega_c"));
    const std::string b = to_csv(make_table(run_sweep(spec, 3), spec.quantities, "omega_c"));
    REQUIRE(a == b);
}

TEST_CASE("CSV structure", "[sweep]") {
    std::vector<SweepRow> rows(3);
    rows[0] = {1.0, {10.0, 20.0}, {0.1, 0.2}, ""};
    rows[1] = {2.0, {11.0, 21.0}, {0.1, 0.2}, ""};
    rows[2] = {3.0, {12.0, 22.0}, {0.1, 0.2}, ""};
    const std::vector<Quantity> qs{Quantity::delta0, Quantity::gamma0};

    SECTION("three rows, two quantities: four lines, five columns") {
        const Table t = make_table(rows, qs, "omega_c");
        const std::string csv = to_csv(t);
        const auto lines = split_lines(csv);
        REQUIRE(lines.size() == 4);
        REQUIRE(lines[0] == "omega_c,delta0,gamma0,err_delta0,err_gamma0");
        for (const auto& line : lines) REQUIRE(count_fields(line) == 5);
        REQUIRE(csv.back() == '\n');
    }

    SECTION("empty quantity list leaves only the axis column") {
        std::vector<SweepRow> bare(3);
        for (int i = 0; i < 3; ++i) bare[static_cast<std::size_t>(i)].axis_value = i + 1.0;
        const Table t = make_table(bare, {}, "omega_c");
        const auto lines = split_lines(to_csv(t));
        REQUIRE(lines[0] == "omega_c");
        for (const auto& line : lines) REQUIRE(count_fields(line) == 1);
    }

    SECTION("17-significant-digit round trip is bit exact") {
        const SweepSpec spec = small_sideband_spec(5);
        const auto swept = run_sweep(spec, 1);
        const Table t = make_table(swept, spec.quantities, "omega_c");
        const std::string csv = to_csv(t);
        // parse back and re-emit
        const auto lines = split_lines(csv);
        Table reparsed;
        reparsed.header = t.header;
        for (std::size_t i = 1; i < lines.size(); ++i) {
            std::vector<double> vals;
            std::stringstream ss(lines[i]);
            std::string cell;
            while (std::getline(ss, cell, ',')) vals.push_back(std::strtod(cell.c_str(), nullptr));
            reparsed.rows.push_back(std::move(vals));
        }
        REQUIRE(to_csv(reparsed) == csv);
    }
}

TEST_CASE("JSON table parses with the expected fields", "[sweep]") {
    const SweepSpec spec = small_sideband_spec(3);
    const auto rows = run_sweep(spec, 1);
    const auto j = to_json(make_table(rows, spec.quantities, "omega_c"));
    REQUIRE(j.is_array());
    REQUIRE(j.size() == 3);
    REQUIRE(j[0].contains("omega_c"));
    REQUIRE(j[0].contains("delta0"));
    REQUIRE(j[0].contains("err_delta_noninertial"));
    REQUIRE(j[0]["omega_c"].get<double>() == rows[0].axis_value);
}

TEST_CASE("emit_table writes atomically and rejects bad destinations", "[sweep]") {
    const SweepSpec spec = small_sideband_spec(3);
    const auto rows = run_sweep(spec, 1);
    const auto dir = std::filesystem::temp_directory_path() / "cavlamb_test_emit";
    std::filesystem::create_directories(dir);
    const auto dest = dir / "table.csv";
    emit_table(rows, spec.quantities, "omega_c", TableFormat::csv, dest);
    REQUIRE(std::filesystem::exists(dest));
    REQUIRE_FALSE(std::filesystem::exists(dir / "table.csv.tmp"));

    REQUIRE_THROWS(emit_table(rows, spec.quantities, "omega_c", TableFormat::csv,
                              dir / "no_such_subdir" / "table.csv"));
    REQUIRE_THROWS_AS(emit_table({}, spec.quantities, "omega_c", TableFormat::csv, dest),
                      std::invalid_argument);
    std::filesystem::remove_all(dir);
}

TEST_CASE("per-row failures are flagged without aborting the sweep", "[sweep]") {
    // scan the orbital frequency up past the superluminal bound
    FixedParams p = sideband_params(0.0);
    p.cavity.omega_c = 1.2e7;
    p.traj.radius = 1.0;
    SweepSpec spec;
    spec.fixed = p;
    spec.axis = Axis::omega;
    spec.start = 1e8;
    spec.stop = 1e9;  // omega*R beyond c at the top of the range
    spec.points = 5;
    spec.quantities = {Quantity::gamma_noninertial};
    const auto rows = run_sweep(spec, 1);
    REQUIRE(rows.size() == 5);
    REQUIRE(rows.front().flags.empty());
    REQUIRE(rows.back().flags.find("invalid_params") != std::string::npos);
    REQUIRE(std::isnan(rows.back().values[0]));
    REQUIRE(std::isfinite(rows.front().values[0]));
}

TEST_CASE("figure presets are recognized and carry normalization columns", "[sweep][figures]") {
    for (const auto& name : figure_names()) {
        const auto preset = make_figure_preset(name);
        REQUIRE(preset.has_value());
        REQUIRE(preset->spec.points == 401);
        REQUIRE(preset->eta > 0.0);
    }
    REQUIRE_FALSE(make_figure_preset("fig9z").has_value());

    const auto fig2b = make_figure_preset("fig2b");
    REQUIRE(std::find(fig2b->ratio_columns.begin(), fig2b->ratio_columns.end(),
                      "delta_noninertial_over_delta0") != fig2b->ratio_columns.end());
}
