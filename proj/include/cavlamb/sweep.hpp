#pragma once

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "cavlamb/lambshift.hpp"
#include "cavlamb/params.hpp"
#include "cavlamb/spectral.hpp"
#include "cavlamb/version.hpp"

// Parameter scans over the cavity frequency (or the orbital frequency),
// grid-level extrema with parabolic refinement, and deterministic CSV/JSON
// table emission.

namespace cavlamb {

enum class Axis { omega_c, omega };
enum class Spacing { linear, log, offset };
enum class Quantity { delta0, delta_total, delta_noninertial, gamma0, gamma_noninertial };

inline const char* to_string(Quantity q) {
    switch (q) {
        case Quantity::delta0: return "delta0";
        case Quantity::delta_total: return "delta_total";
        case Quantity::delta_noninertial: return "delta_noninertial";
        case Quantity::gamma0: return "gamma0";
        case Quantity::gamma_noninertial: return "gamma_noninertial";
    }
    return "?";
}

inline std::optional<Quantity> quantity_from_string(const std::string& s) {
    for (Quantity q : {Quantity::delta0, Quantity::delta_total, Quantity::delta_noninertial,
                       Quantity::gamma0, Quantity::gamma_noninertial}) {
        if (s == to_string(q)) return q;
    }
    return std::nullopt;
}

struct FixedParams {
    AtomParams atom;
    CavityParams cavity;
    TrajectoryParams traj;
};

struct SweepSpec {
    Axis axis = Axis::omega_c;
    double start = 0.0;  // axis values; delta values in offset mode
    double stop = 0.0;
    int points = 401;
    Spacing spacing = Spacing::linear;
    double offset_center = 0.0;  // axis_value = center + delta * scale
    double offset_scale = 1.0;
    std::vector<Quantity> quantities;
    FixedParams fixed;
    QuadratureOptions quad;
    double bad_cavity_margin = 3.0;
};

struct SweepRow {
    double axis_value = 0.0;
    std::vector<double> values;  // aligned with spec.quantities
    std::vector<double> errs;
    std::string flags;  // "", or ';'-joined tags like "bad_cavity", "quad_error:..."
};

inline void validate(const SweepSpec& spec) {
    if (!(spec.start < spec.stop)) throw std::invalid_argument("sweep: start must be < stop");
    if (spec.points < 2) throw std::invalid_argument("sweep: points must be >= 2");
    if (spec.spacing == Spacing::log && !(spec.start > 0.0)) {
        throw std::invalid_argument("sweep: log spacing needs start > 0");
    }
}

inline double grid_value(const SweepSpec& spec, int i) {
    const double f = static_cast<double>(i) / (spec.points - 1);
    switch (spec.spacing) {
        case Spacing::linear:
            return spec.start + f * (spec.stop - spec.start);
        case Spacing::log:
            return spec.start * std::pow(spec.stop / spec.start, f);
        case Spacing::offset: {
            const double delta = spec.start + f * (spec.stop - spec.start);
            return spec.offset_center + delta * spec.offset_scale;
        }
    }
    return 0.0;
}

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("CAVITY_LAMB_THREADS")) {
        const int cap = std::atoi(env);
        if (cap > 0 && cap < n) n = cap;
    }
    return n;
}

namespace detail {

inline SweepRow evaluate_row(const SweepSpec& spec, double axis_value) {
    SweepRow row;
    row.axis_value = axis_value;
    FixedParams p = spec.fixed;
    if (spec.axis == Axis::omega_c) {
        p.cavity.omega_c = axis_value;
    } else {
        p.traj.omega = axis_value;
    }
    const std::size_t n = spec.quantities.size();
    row.values.assign(n, std::numeric_limits<double>::quiet_NaN());
    row.errs.assign(n, std::numeric_limits<double>::quiet_NaN());

    auto add_flag = [&row](const std::string& f) {
        if (!row.flags.empty()) row.flags += ';';
        row.flags += f;
    };

    try {
        const DerivedCavity dc = derive_cavity(p.atom, p.cavity);
        const SpectralDensity sd = SpectralDensity::from(p.cavity, dc);
        const DerivedTrajectory traj = derive_trajectory(p.atom, p.traj);
        if (!check_bad_cavity(dc, spec.bad_cavity_margin).pass) add_flag("bad_cavity");
        if (!zeta_in_perturbative_range(traj)) add_flag("zeta_above_first_order");

        std::optional<ShiftResult> shift;
        auto need_shift = [&]() -> const ShiftResult& {
            if (!shift) shift = delta_noninertial(p.atom, dc, sd, traj, spec.quad);
            return *shift;
        };

        for (std::size_t i = 0; i < n; ++i) {
            switch (spec.quantities[i]) {
                case Quantity::delta0: {
                    bool fb = false;
                    double err = 0.0;
                    row.values[i] = delta0_closed(p.atom, dc, sd, spec.quad, &fb, &err);
                    row.errs[i] = err;
                    break;
                }
                case Quantity::delta_total: {
                    const ShiftResult& s = need_shift();
                    row.values[i] = s.delta_total;
                    row.errs[i] = s.method_trace.quad_err + s.method_trace.tail_bound;
                    break;
                }
                case Quantity::delta_noninertial: {
                    const ShiftResult& s = need_shift();
                    row.values[i] = s.delta_noninertial;
                    row.errs[i] = s.err_estimate;
                    break;
                }
                case Quantity::gamma0:
                    row.values[i] = gamma0(p.atom, dc, sd);
                    row.errs[i] = 0.0;
                    break;
                case Quantity::gamma_noninertial:
                    row.values[i] = gamma_noninertial(p.atom, traj, dc, sd);
                    row.errs[i] = 0.0;
                    break;
            }
        }
    } catch (const pvquad::NonConvergence& e) {
        add_flag(std::string("quad_error:NonConvergence"));
    } catch (const pvquad::PoleOnEdge& e) {
        add_flag(std::string("quad_error:PoleOnEdge"));
    } catch (const std::invalid_argument& e) {
        add_flag(std::string("invalid_params:") + e.what());
    }
    return row;
}

} // namespace detail

/// Evaluate the grid. Rows are independent; with threads > 1 they are
/// computed concurrently but the result is identical to the serial run.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, int threads = 0) {
    validate(spec);
    const int n = spec.points;
    std::vector<SweepRow> rows(static_cast<std::size_t>(n));
    const int nthreads = std::min(resolve_threads(threads), n);
    if (nthreads <= 1) {
        for (int i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = detail::evaluate_row(spec, grid_value(spec, i));
        return rows;
    }
    std::atomic<int> next{0};
    auto worker = [&]() {
        while (true) {
            const int i = next.fetch_add(1);
            if (i >= n) break;
            rows[static_cast<std::size_t>(i)] = detail::evaluate_row(spec, grid_value(spec, i));
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return rows;
}

struct Extrema {
    double argmax = 0.0, max = 0.0;
    double argmin = 0.0, min = 0.0;
    std::vector<double> zero_crossings;
};

struct NoExtremum : std::runtime_error {
    explicit NoExtremum(const std::string& what) : std::runtime_error(what) {}
};

/// Grid extrema with 3-point parabolic refinement and linearly interpolated
/// zero crossings. Throws NoExtremum when the samples are monotone.
inline Extrema find_extrema(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 3) {
        throw std::invalid_argument("find_extrema: need >= 3 aligned samples");
    }
    const std::size_t n = xs.size();
    std::size_t imax = 0, imin = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (ys[i] > ys[imax]) imax = i;
        if (ys[i] < ys[imin]) imin = i;
    }
    const bool interior_max = imax > 0 && imax + 1 < n;
    const bool interior_min = imin > 0 && imin + 1 < n;
    if (!interior_max && !interior_min) {
        throw NoExtremum("find_extrema: samples are monotone");
    }

    auto refine = [&xs, &ys](std::size_t i, double& argv, double& val) {
        argv = xs[i];
        val = ys[i];
        if (i == 0 || i + 1 >= xs.size()) return;
        const double x0 = xs[i - 1], x1 = xs[i], x2 = xs[i + 1];
        const double y0 = ys[i - 1], y1 = ys[i], y2 = ys[i + 1];
        const double d1 = (y1 - y0) / (x1 - x0);
        const double d2 = (y2 - y1) / (x2 - x1);
        const double curv = (d2 - d1) / (x2 - x0);
        if (curv == 0.0) return;
        const double xv = 0.5 * (x0 + x1 - d1 / curv);
        if (xv > x0 && xv < x2) {
            argv = xv;
            // parabola through the three points, evaluated at the vertex
            val = y1 + d1 * (xv - x1) + curv * (xv - x0) * (xv - x1);
        }
    };

    Extrema e;
    refine(imax, e.argmax, e.max);
    refine(imin, e.argmin, e.min);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if ((ys[i] < 0.0 && ys[i + 1] > 0.0) || (ys[i] > 0.0 && ys[i + 1] < 0.0)) {
            e.zero_crossings.push_back(xs[i] - ys[i] * (xs[i + 1] - xs[i]) / (ys[i + 1] - ys[i]));
        } else if (ys[i] == 0.0) {
            e.zero_crossings.push_back(xs[i]);
        }
    }
    return e;
}

inline Extrema find_extrema(const std::vector<SweepRow>& rows, std::size_t quantity_index) {
    std::vector<double> xs, ys;
    xs.reserve(rows.size());
    ys.reserve(rows.size());
    for (const auto& r : rows) {
        xs.push_back(r.axis_value);
        ys.push_back(r.values.at(quantity_index));
    }
    return find_extrema(xs, ys);
}

// -------- table emission --------

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline Table make_table(const std::vector<SweepRow>& rows, const std::vector<Quantity>& quantities,
                        const std::string& axis_name) {
    Table t;
    t.header.push_back(axis_name);
    for (Quantity q : quantities) t.header.emplace_back(to_string(q));
    for (Quantity q : quantities) t.header.emplace_back(std::string("err_") + to_string(q));
    for (const auto& r : rows) {
        std::vector<double> line;
        line.reserve(1 + 2 * quantities.size());
        line.push_back(r.axis_value);
        for (double v : r.values) line.push_back(v);
        for (double e : r.errs) line.push_back(e);
        t.rows.push_back(std::move(line));
    }
    return t;
}

namespace detail {

inline void atomic_write(const std::filesystem::path& dest, const std::string& content) {
    const std::filesystem::path tmp = dest.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, dest);
}

} // namespace detail

inline std::string to_csv(const Table& t) {
    std::string s;
    for (std::size_t i = 0; i < t.header.size(); ++i) {
        if (i) s += ',';
        s += t.header[i];
    }
    s += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) s += ',';
            s += format_g17(row[i]);
        }
        s += '\n';
    }
    return s;
}

inline nlohmann::ordered_json to_json(const Table& t) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& row : t.rows) {
        nlohmann::ordered_json obj;
        for (std::size_t i = 0; i < t.header.size(); ++i) {
            const double v = row[i];
            if (std::isfinite(v)) {
                obj[t.header[i]] = v;
            } else {
                obj[t.header[i]] = nullptr;
            }
        }
        arr.push_back(std::move(obj));
    }
    return arr;
}

enum class TableFormat { csv, json };

/// Write the table to `destination` (temp file + rename; no partial files).
inline void emit_table(const std::vector<SweepRow>& rows, const std::vector<Quantity>& quantities,
                       const std::string& axis_name, TableFormat format,
                       const std::filesystem::path& destination) {
    if (rows.empty()) throw std::invalid_argument("emit_table: rows must be non-empty");
    const Table t = make_table(rows, quantities, axis_name);
    if (format == TableFormat::csv) {
        detail::atomic_write(destination, to_csv(t));
    } else {
        detail::atomic_write(destination, to_json(t).dump(2) + "\n");
    }
}

} // namespace cavlamb
