#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

// Adaptive Cauchy principal-value quadrature over a union of intervals with
// simple interior poles.
//
// The integrand is given in decomposed form
//
//     F(x) = smooth(x) + sum_i n_i(x) / (x - p_i)
//
// with each numerator n_i smooth through its pole. Around each interior pole
// a symmetric window [p-h, p+h] is integrated via the subtraction
//
//     n(x)/(x-p) = (n(x) - n(p))/(x-p) + n(p)/(x-p),
//
// whose second part integrates to zero over the symmetric window. Everything
// else is adaptive bisection with a Gauss-Kronrod 7/15 embedded pair.

namespace cavlamb::pvquad {

struct NonConvergence : std::runtime_error {
    explicit NonConvergence(const std::string& what) : std::runtime_error(what) {}
};
struct PoleOnEdge : std::runtime_error {
    explicit PoleOnEdge(const std::string& what) : std::runtime_error(what) {}
};
struct ModelMismatch : std::runtime_error {
    explicit ModelMismatch(const std::string& what) : std::runtime_error(what) {}
};
struct SignChange : std::runtime_error {
    explicit SignChange(const std::string& what) : std::runtime_error(what) {}
};

using Fn = std::function<double(double)>;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;  // may be +infinity (right-infinite)
};

struct PoleSpec {
    double location = 0.0;
    Fn numerator;  // coefficient of 1/(x - location), smooth through the pole
};

enum class TailModel { inv_x, inv_x2, inv_x3 };

struct PVProblem {
    Fn smooth;                      // optional regular part; may be empty
    std::vector<PoleSpec> poles;
    std::vector<Interval> support;  // ordered, non-overlapping; adjacent intervals may share an endpoint
    double abs_tol = 0.0;
    double rel_tol = 1e-8;
    double tail_cut = 0.0;          // truncation point for a right-infinite end
    TailModel tail_model = TailModel::inv_x3;
    std::vector<double> seeds;      // extra initial panel boundaries (feature hints)
    double window_cap = std::numeric_limits<double>::infinity();  // cap on pole-window half-width
    double merge_scale = 0.0;       // scale entering pole_merge_distance = 1e-9 * max(|p|, merge_scale)
    int max_panels = 10000;

    /// Full integrand assembled from the decomposition.
    double integrand(double x) const {
        double v = smooth ? smooth(x) : 0.0;
        for (const auto& p : poles) v += p.numerator(x) / (x - p.location);
        return v;
    }
};

struct PVResult {
    double value = 0.0;
    double err_estimate = 0.0;
    int subdivisions = 0;
    double tail_bound = 0.0;
};

namespace detail {

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1] (QUADPACK values).
inline constexpr double gk_x[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
inline constexpr double gk_wk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
inline constexpr double gk_wg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct PanelEval {
    double integral = 0.0;
    double err = 0.0;
    double resabs = 0.0;  // integral of |f|, for the round-off noise floor
};

template <typename F>
PanelEval gk15(F&& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double resk = gk_wk[7] * fc;
    double resg = gk_wg[3] * fc;
    double resabs = gk_wk[7] * std::abs(fc);
    for (int j = 0; j < 7; ++j) {
        const double fl = f(c - h * gk_x[j]);
        const double fr = f(c + h * gk_x[j]);
        resk += gk_wk[j] * (fl + fr);
        resabs += gk_wk[j] * (std::abs(fl) + std::abs(fr));
        if (j % 2 == 1) resg += gk_wg[j / 2] * (fl + fr);
    }
    return {resk * h, std::abs((resk - resg) * h), resabs * h};
}

struct Panel {
    double a = 0.0;
    double b = 0.0;
    double val = 0.0;
    double err = 0.0;
    double noise = 0.0;  // round-off floor of this panel's error estimate
    int flavor = -1;     // -1: regular integrand; >= 0: subtracted window of pole #flavor
    bool live = true;    // false once replaced by its two children
};

struct HeapEntry {
    double err;
    std::uint64_t seq;
    std::size_t index;
    bool operator<(const HeapEntry& o) const {
        if (err != o.err) return err < o.err;
        return seq > o.seq;  // older panels first among equals, for determinism
    }
};

inline std::string format_sci(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

} // namespace detail

/// Fit |f| at {cut, 2 cut, 4 cut} to the given power-law decay model and
/// return the integrated tail of the fitted envelope (infinite for 1/x).
/// Throws ModelMismatch when the empirical log-log slope is more than 0.5
/// away from the model's.
inline double tail_bound(const Fn& f, double cut, TailModel model) {
    if (!(cut > 0.0) || !std::isfinite(cut)) {
        throw std::invalid_argument("tail_bound: cut must be positive and finite");
    }
    const double xs[3] = {cut, 2.0 * cut, 4.0 * cut};
    double lx[3], ly[3];
    for (int i = 0; i < 3; ++i) {
        const double fy = std::abs(f(xs[i]));
        if (fy == 0.0) return 0.0;  // already identically small past the cut
        lx[i] = std::log(xs[i]);
        ly[i] = std::log(fy);
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < 3; ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    const double slope = (3.0 * sxy - sx * sy) / (3.0 * sxx - sx * sx);
    const double m = model == TailModel::inv_x ? 1.0 : (model == TailModel::inv_x2 ? 2.0 : 3.0);
    if (std::abs(slope + m) > 0.5) {
        throw ModelMismatch("tail_bound: empirical slope " + std::to_string(slope) +
                            " does not match model slope " + std::to_string(-m));
    }
    // amplitude C from the geometric mean of |f(x)| x^m over the probes
    double logc = 0.0;
    for (int i = 0; i < 3; ++i) logc += ly[i] + m * lx[i];
    const double C = std::exp(logc / 3.0);
    if (model == TailModel::inv_x) return std::numeric_limits<double>::infinity();
    if (model == TailModel::inv_x2) return C / cut;
    return C / (2.0 * cut * cut);
}

/// Least-squares slope of log|f| versus log x over n_points log-spaced
/// samples in [x_lo, x_hi]. Throws SignChange if f changes sign (or
/// vanishes) in the probe range.
inline double slope_probe(const Fn& f, double x_lo, double x_hi, int n_points) {
    if (!(0.0 < x_lo && x_lo < x_hi) || n_points < 2) {
        throw std::invalid_argument("slope_probe: need 0 < x_lo < x_hi and n_points >= 2");
    }
    std::vector<double> lx(n_points), ly(n_points);
    const double step = std::log(x_hi / x_lo) / (n_points - 1);
    int sign = 0;
    for (int i = 0; i < n_points; ++i) {
        const double x = x_lo * std::exp(step * i);
        const double y = f(x);
        const int s = y > 0.0 ? 1 : (y < 0.0 ? -1 : 0);
        if (s == 0 || (sign != 0 && s != sign)) {
            throw SignChange("slope_probe: integrand changes sign in probe range");
        }
        sign = s;
        lx[i] = std::log(x);
        ly[i] = std::log(std::abs(y));
    }
    double mx = 0, my = 0;
    for (int i = 0; i < n_points; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n_points;
    my /= n_points;
    double num = 0, den = 0;
    for (int i = 0; i < n_points; ++i) {
        num += (lx[i] - mx) * (ly[i] - my);
        den += (lx[i] - mx) * (lx[i] - mx);
    }
    return num / den;
}

inline PVResult pv_integrate(const PVProblem& prob) {
    using namespace detail;

    // normalize support: drop degenerate intervals, check ordering
    std::vector<Interval> iv;
    for (const auto& s : prob.support) {
        if (s.hi > s.lo) iv.push_back(s);
    }
    if (iv.empty()) return {};
    for (std::size_t i = 0; i + 1 < iv.size(); ++i) {
        if (iv[i + 1].lo < iv[i].hi) {
            throw std::invalid_argument("pv_integrate: support intervals must be ordered and non-overlapping");
        }
    }

    // merge adjacent intervals into contiguous blocks; shared edges become
    // interior kink seeds so the Theta-gated integrand is integrated as
    // one-sided pieces on each side
    struct Block {
        double lo, hi;
        std::vector<double> kinks;
    };
    std::vector<Block> blocks;
    for (const auto& s : iv) {
        if (!blocks.empty() && s.lo == blocks.back().hi) {
            blocks.back().kinks.push_back(s.lo);
            blocks.back().hi = s.hi;
        } else {
            blocks.push_back({s.lo, s.hi, {}});
        }
    }

    double tail = 0.0;
    bool truncated = false;
    if (std::isinf(blocks.back().hi)) {
        if (!(prob.tail_cut > blocks.back().lo) || !std::isfinite(prob.tail_cut)) {
            throw std::invalid_argument("pv_integrate: right-infinite support needs a finite tail_cut beyond the last interval start");
        }
        blocks.back().hi = prob.tail_cut;
        truncated = true;
    }

    const auto full = [&prob](double x) { return prob.integrand(x); };

    // place pole windows
    struct Window {
        std::size_t pole;
        double lo, hi;
    };
    std::vector<Window> windows;
    for (std::size_t k = 0; k < prob.poles.size(); ++k) {
        const double p = prob.poles[k].location;
        const Block* home = nullptr;
        for (const auto& b : blocks) {
            if (p > b.lo && p < b.hi) {
                home = &b;
                break;
            }
        }
        const double merge_dist = 1e-9 * std::max(std::abs(p), prob.merge_scale);
        if (!home) {
            // outside the domain: its kernel term is regular there, unless it
            // sits (nearly) on an outer edge
            for (const auto& b : blocks) {
                if (std::abs(p - b.lo) <= merge_dist || std::abs(p - b.hi) <= merge_dist) {
                    throw PoleOnEdge("pv_integrate: pole at " + std::to_string(p) +
                                     " lies on a support endpoint");
                }
            }
            continue;
        }
        double dist = std::min(p - home->lo, home->hi - p);
        for (std::size_t j = 0; j < prob.poles.size(); ++j) {
            if (j != k) dist = std::min(dist, std::abs(prob.poles[j].location - p));
        }
        const double h = 0.5 * std::min(dist, prob.window_cap);
        if (!(h > merge_dist)) {
            throw PoleOnEdge("pv_integrate: pole at " + std::to_string(p) +
                             " is within merge distance of a support endpoint");
        }
        windows.push_back({k, p - h, p + h});
    }
    std::sort(windows.begin(), windows.end(), [](const Window& a, const Window& b) { return a.lo < b.lo; });

    // subtracted integrand on the window of pole k
    std::vector<double> n_at_pole(prob.poles.size(), 0.0);
    for (const auto& w : windows) {
        n_at_pole[w.pole] = prob.poles[w.pole].numerator(prob.poles[w.pole].location);
    }
    const auto window_integrand = [&prob, &n_at_pole](std::size_t k, double x) {
        const auto& pl = prob.poles[k];
        double v = prob.smooth ? prob.smooth(x) : 0.0;
        const double dx = x - pl.location;
        if (dx != 0.0) {
            v += (pl.numerator(x) - n_at_pole[k]) / dx;
        } else {
            // node rounded onto the pole: use the symmetric secant as the
            // removable-singularity limit
            const double d0 = std::sqrt(std::numeric_limits<double>::epsilon()) *
                              std::max(std::abs(pl.location), 1.0);
            v += (pl.numerator(pl.location + d0) - pl.numerator(pl.location - d0)) / (2.0 * d0);
        }
        for (std::size_t j = 0; j < prob.poles.size(); ++j) {
            if (j != k) v += prob.poles[j].numerator(x) / (x - prob.poles[j].location);
        }
        return v;
    };

    // initial panel boundaries per block: window edges, kinks, seeds, pole
    // locations (window midpoints)
    std::vector<Panel> arena;
    std::priority_queue<HeapEntry> heap;
    std::uint64_t seq = 0;
    double total_val = 0.0, total_err = 0.0, total_noise = 0.0;

    constexpr double eps = std::numeric_limits<double>::epsilon();
    const auto make_panel = [&](double a, double b, int flavor) -> std::size_t {
        PanelEval ev = flavor < 0 ? gk15(full, a, b)
                                  : gk15([&](double x) { return window_integrand(static_cast<std::size_t>(flavor), x); }, a, b);
        // evaluation-noise floor of the error estimate: plain round-off of
        // the sampled values, plus the cancellation noise of the subtracted
        // quotient, eps |n(p)| / dist, integrated over the panel
        double noise = 64.0 * eps * ev.resabs;
        if (flavor >= 0) {
            const double p = prob.poles[static_cast<std::size_t>(flavor)].location;
            const double w = b - a;
            const double dist = std::max(std::min(std::abs(a - p), std::abs(b - p)), 0.5 * w);
            noise = std::max(noise, 4.0 * eps * std::abs(n_at_pole[static_cast<std::size_t>(flavor)]) *
                                        std::min(1.0, w / dist));
        }
        arena.push_back({a, b, ev.integral, ev.err, noise, flavor});
        total_val += ev.integral;
        total_err += ev.err;
        total_noise += noise;
        return arena.size() - 1;
    };
    const auto eval_panel = [&](double a, double b, int flavor) {
        const std::size_t idx = make_panel(a, b, flavor);
        heap.push({arena[idx].err, seq++, idx});
    };

    for (const auto& blk : blocks) {
        // boundaries inside this block, excluding window interiors
        std::vector<double> cuts{blk.lo, blk.hi};
        for (double kx : blk.kinks)
            if (kx > blk.lo && kx < blk.hi) cuts.push_back(kx);
        for (double s : prob.seeds)
            if (s > blk.lo && s < blk.hi) cuts.push_back(s);
        // geometric shells around each pole window: the kernel varies by a
        // bounded factor per panel, which keeps the embedded error estimate
        // honest on the 1/(x-p) ramp
        for (const auto& w : windows) {
            if (w.lo < blk.lo || w.hi > blk.hi) continue;
            const double p = prob.poles[w.pole].location;
            const double h = w.hi - p;
            for (double r = 2.0 * h; ; r *= 2.0) {
                const bool lo_in = p - r > blk.lo;
                const bool hi_in = p + r < blk.hi;
                if (lo_in) cuts.push_back(p - r);
                if (hi_in) cuts.push_back(p + r);
                if (!lo_in && !hi_in) break;
            }
        }
        std::vector<Window> wlocal;
        for (const auto& w : windows) {
            if (w.lo >= blk.lo && w.hi <= blk.hi) {
                wlocal.push_back(w);
                cuts.push_back(w.lo);
                cuts.push_back(w.hi);
            }
        }
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

        const auto in_window = [&wlocal](double a, double b) -> int {
            for (const auto& w : wlocal) {
                if (a >= w.lo && b <= w.hi) return static_cast<int>(w.pole);
            }
            return -1;
        };
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            const double a = cuts[i];
            const double b = cuts[i + 1];
            const int fl = in_window(a, b);
            if (fl >= 0) {
                // split at the pole so no Kronrod node lands on it
                const double p = prob.poles[static_cast<std::size_t>(fl)].location;
                if (a < p && p < b) {
                    eval_panel(a, p, fl);
                    eval_panel(p, b, fl);
                } else {
                    eval_panel(a, b, fl);
                }
            } else {
                eval_panel(a, b, -1);
            }
        }
    }

    // Adaptive refinement of the worst panel. The error estimate cannot be
    // pushed below the accumulated evaluation-noise floor, so the loop also
    // stops when the estimate reaches that floor (the honest saturated
    // accuracy of double precision on this problem). Panels individually at
    // their own floor are popped without splitting; their error stays
    // counted.
    constexpr double ulp_floor = 1024.0 * eps;
    while (true) {
        const double tol = std::max(prob.abs_tol, prob.rel_tol * std::abs(total_val));
        if (total_err <= std::max(tol, total_noise)) break;
        if (static_cast<int>(arena.size()) >= prob.max_panels) {
            std::vector<const Panel*> live;
            for (const auto& pl : arena) {
                if (pl.live) live.push_back(&pl);
            }
            std::sort(live.begin(), live.end(),
                      [](const Panel* x, const Panel* y) { return x->err > y->err; });
            std::string diag = "pv_integrate: panel budget exhausted (" + std::to_string(arena.size()) +
                               " panels, err " + detail::format_sci(total_err) + ", noise floor " +
                               detail::format_sci(total_noise) + ", tol " + detail::format_sci(tol);
            for (std::size_t i = 0; i < live.size() && i < 5; ++i) {
                diag += "; [" + detail::format_sci(live[i]->a) + "," + detail::format_sci(live[i]->b) +
                        "] w " + detail::format_sci(live[i]->b - live[i]->a) + " err " +
                        detail::format_sci(live[i]->err) + " noise " + detail::format_sci(live[i]->noise) +
                        " fl " + std::to_string(live[i]->flavor);
            }
            throw NonConvergence(diag + ")");
        }
        if (heap.empty()) break;
#ifdef CAVLAMB_PV_TRACE
        if ((seq & 1023) == 0) {
            const Panel& tp = arena[heap.top().index];
            std::fprintf(stderr, "[pv] panels %zu err %.3e noise %.3e tol %.3e top=[%.9g,%.9g] w %.3g err %.3e noise %.3e fl %d\n",
                         arena.size(), total_err, total_noise, tol, tp.a, tp.b, tp.b - tp.a, tp.err,
                         tp.noise, tp.flavor);
        }
#endif
        const HeapEntry top = heap.top();
        heap.pop();
        const Panel parent = arena[top.index];
        const double mid = 0.5 * (parent.a + parent.b);
        const double floor_width =
            ulp_floor * std::max({std::abs(parent.a), std::abs(parent.b), 1e-300});
        if (!(parent.a < mid && mid < parent.b) || parent.b - parent.a <= floor_width ||
            parent.err <= parent.noise) {
            continue;  // at its own floor; error stays counted
        }
        total_val -= parent.val;
        total_err -= parent.err;
        total_noise -= parent.noise;
        arena[top.index].live = false;
        eval_panel(parent.a, mid, parent.flavor);
        eval_panel(mid, parent.b, parent.flavor);
    }

    if (truncated) {
        tail = tail_bound(full, prob.tail_cut, prob.tail_model);
    }

    // the incremental sums carry accumulation drift; rebuild them exactly
    // from the live panels in creation order
    double value = 0.0, err = 0.0;
    for (const auto& p : arena) {
        if (p.live) {
            value += p.val;
            err += p.err;
        }
    }

    PVResult res;
    res.value = value;
    res.err_estimate = err;
    res.subdivisions = static_cast<int>(arena.size());
    res.tail_bound = tail;
    return res;
}

} // namespace cavlamb::pvquad
