#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <limits>
#include <random>

#include "cavlamb/constants.hpp"
#include "cavlamb/pvquad.hpp"

using namespace cavlamb;
using pvquad::Interval;
using pvquad::PVProblem;
using pvquad::PVResult;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

// independent oracle: PV int_a^b p(x)/(x-c) dx for a polynomial p via
// synthetic division, p(x) = (x-c) q(x) + p(c)
struct Poly {
    std::array<double, 6> coeff{};  // c0 + c1 x + ... + c5 x^5

    double operator()(double x) const {
        double v = 0.0;
        for (int i = 5; i >= 0; --i) v = v * x + coeff[static_cast<std::size_t>(i)];
        return v;
    }
    Poly deflate(double c, double& remainder) const {
        // q(x) = (p(x) - p(c))/(x - c), degree 4
        Poly q{};
        double carry = coeff[5];
        for (int i = 4; i >= 0; --i) {
            q.coeff[static_cast<std::size_t>(i)] = carry;
            carry = coeff[static_cast<std::size_t>(i)] + c * carry;
        }
        remainder = carry;
        return q;
    }
    double integral(double a, double b) const {
        double v = 0.0;
        for (int i = 0; i < 6; ++i) {
            v += coeff[static_cast<std::size_t>(i)] / (i + 1) * (std::pow(b, i + 1) - std::pow(a, i + 1));
        }
        return v;
    }
};

double pv_poly_oracle(const Poly& p, double a, double b, double c) {
    double pc = 0.0;
    const Poly q = p.deflate(c, pc);
    return q.integral(a, b) + pc * std::log(std::abs((b - c) / (a - c)));
}

// PV int_0^inf L(x)/(x-a) dx for a Lorentzian L of half-width kappa at wc
// (partial fractions; independent re-derivation used as the test oracle)
double pv_lorentzian_oracle(double a, double wc, double kappa) {
    const double d = a - wc;
    const double A = 1.0 / (d * d + kappa * kappa);
    return -0.5 * A * d - (kappa * A / constants::pi) * std::log(std::abs(a)) +
           (kappa * A / (2.0 * constants::pi)) * std::log(wc * wc + kappa * kappa) -
           (A * d / constants::pi) * std::atan(wc / kappa);
}

} // namespace

TEST_CASE("PV of the bare kernel over a symmetric window vanishes", "[pvquad]") {
    PVProblem p;
    p.poles = {{0.0, [](double) { return 1.0; }}};
    p.support = {Interval{-1.0, 1.0}};
    p.rel_tol = 1e-13;
    p.abs_tol = 1e-15;
    REQUIRE(std::abs(pvquad::pv_integrate(p).value) <= 1e-12);
}

TEST_CASE("polynomial PV identities on [-1, 1]", "[pvquad]") {
    auto run = [](pvquad::Fn numerator) {
        PVProblem p;
        p.poles = {{0.0, std::move(numerator)}};
        p.support = {Interval{-1.0, 1.0}};
        p.rel_tol = 1e-13;
        p.abs_tol = 1e-15;
        return pvquad::pv_integrate(p).value;
    };
    REQUIRE(std::abs(run([](double x) { return x * x; })) <= 1e-12);          // odd integrand
    REQUIRE(std::abs(run([](double x) { return x * x + 1.0; })) <= 1e-12);    // odd integrand
    REQUIRE(run([](double x) { return x + 2.0; }) == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("degree-5 polynomial numerators integrate to closed form", "[pvquad][property]") {
    std::mt19937 gen(123);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int iter = 0; iter < 50; ++iter) {
        Poly poly;
        for (auto& c : poly.coeff) c = u(gen);
        const double a = -2.0 + u(gen);
        const double b = 2.0 + u(gen);
        const double c = 0.5 * (a + b) + 0.4 * (b - a) * u(gen);

        PVProblem p;
        p.poles = {{c, [poly](double x) { return poly(x); }}};
        p.support = {Interval{a, b}};
        p.rel_tol = 1e-14;
        p.abs_tol = 1e-16;
        const double got = pvquad::pv_integrate(p).value;
        const double want = pv_poly_oracle(poly, a, b, c);
        const double scale = std::max(std::abs(want), 1e-3);
        REQUIRE(std::abs(got - want) / scale <= 1e-12);
    }
}

TEST_CASE("two-pole kernel against partial fractions", "[pvquad]") {
    // int_0^5 p(x) (1/(x+1) - 1/(x-2)) dx, poles at -1 (outside) and 2
    Poly poly;
    poly.coeff = {0.3, -0.7, 0.11, 0.0, 0.0, 0.0};
    PVProblem p;
    p.poles = {{-1.0, [poly](double x) { return poly(x); }},
               {2.0, [poly](double x) { return -poly(x); }}};
    p.support = {Interval{0.0, 5.0}};
    p.rel_tol = 1e-14;
    const double got = pvquad::pv_integrate(p).value;
    const double want = pv_poly_oracle(poly, 0.0, 5.0, -1.0) - pv_poly_oracle(poly, 0.0, 5.0, 2.0);
    REQUIRE(got == Catch::Approx(want).epsilon(1e-12));
}

TEST_CASE("Lorentzian kernel on the half line matches the closed form", "[pvquad]") {
    const double wc = 2.0, kappa = 0.01;
    for (double a : {0.5, 1.9, 2.0, 2.1, 4.0}) {
        PVProblem p;
        p.poles = {{a, [wc, kappa](double x) {
                        const double d = x - wc;
                        return (1.0 / constants::pi) * kappa / (kappa * kappa + d * d);
                    }}};
        p.support = {Interval{0.0, inf}};
        p.tail_cut = 1e5 * wc;
        p.tail_model = pvquad::TailModel::inv_x3;
        p.rel_tol = 1e-11;
        p.window_cap = 10.0 * kappa;
        p.merge_scale = kappa;
        for (int m : {-1000, -100, -10, -1, 0, 1, 10, 100, 1000}) p.seeds.push_back(wc + m * kappa);
        const double got = pvquad::pv_integrate(p).value;
        const double want = pv_lorentzian_oracle(a, wc, kappa);
        INFO("pole at " << a);
        REQUIRE(got == Catch::Approx(want).epsilon(1e-8));
    }
}

TEST_CASE("pure-kernel symmetry property", "[pvquad][property]") {
    std::mt19937 gen(99);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    for (int iter = 0; iter < 50; ++iter) {
        const double pole = u(gen) - 1.5;
        const double h = u(gen);
        const double cval = u(gen);
        PVProblem p;
        p.poles = {{pole, [cval](double) { return cval; }}};
        p.support = {Interval{pole - h, pole + h}};
        p.abs_tol = 1e-13;
        p.rel_tol = 1e-13;
        REQUIRE(std::abs(pvquad::pv_integrate(p).value) <= 1e-12);
    }
}

TEST_CASE("halving rel_tol moves the value by less than the error estimate", "[pvquad][property]") {
    std::mt19937 gen(5);
    std::uniform_real_distribution<double> u(0.2, 1.0);
    for (int iter = 0; iter < 20; ++iter) {
        const double wc = 3.0 * u(gen);
        const double kappa = 0.2 * u(gen);
        const double a = 1.5 * u(gen);
        auto lorentz = [wc, kappa](double x) {
            const double d = x - wc;
            return kappa / (kappa * kappa + d * d);
        };
        double rel = 1e-4;
        PVProblem p;
        p.poles = {{a, lorentz}};
        p.support = {Interval{0.0, 8.0}};
        p.window_cap = 10.0 * kappa;
        for (int m : {-10, -3, -1, 0, 1, 3, 10}) p.seeds.push_back(wc + m * kappa);
        for (int step = 0; step < 6; ++step) {
            p.rel_tol = rel;
            const PVResult coarse = pvquad::pv_integrate(p);
            p.rel_tol = rel / 2.0;
            const PVResult fine = pvquad::pv_integrate(p);
            REQUIRE(std::abs(fine.value - coarse.value) <= coarse.err_estimate + 1e-15);
            rel /= 4.0;
        }
    }
}

TEST_CASE("doubling the tail cut moves the value by less than the tail bound", "[pvquad][property]") {
    auto cubic_tail = [](double x) { return 1.0 / ((1.0 + x) * (1.0 + x) * (1.0 + x)); };
    PVProblem p;
    p.smooth = cubic_tail;
    p.support = {Interval{0.0, inf}};
    p.rel_tol = 1e-12;
    p.tail_model = pvquad::TailModel::inv_x3;
    p.tail_cut = 50.0;
    const PVResult r1 = pvquad::pv_integrate(p);
    p.tail_cut = 100.0;
    const PVResult r2 = pvquad::pv_integrate(p);
    REQUIRE(r1.tail_bound > 0.0);
    REQUIRE(std::abs(r2.value - r1.value) <= r1.tail_bound);
}

TEST_CASE("tail_bound on power laws", "[pvquad]") {
    SECTION("inverse-square integrand, matching model") {
        const double C = 3.7, X = 10.0;
        const double b = pvquad::tail_bound([C](double x) { return C / (x * x); }, X, pvquad::TailModel::inv_x2);
        REQUIRE(b == Catch::Approx(C / X).epsilon(0.1));
    }
    SECTION("1/x with 1/x model reports a divergent (infinite) bound") {
        const double b = pvquad::tail_bound([](double x) { return 2.0 / x; }, 5.0, pvquad::TailModel::inv_x);
        REQUIRE(std::isinf(b));
    }
    SECTION("wrong model raises ModelMismatch") {
        REQUIRE_THROWS_AS(pvquad::tail_bound([](double x) { return 1.0 / (x * x * x); }, 5.0, pvquad::TailModel::inv_x),
                          pvquad::ModelMismatch);
    }
}

TEST_CASE("slope_probe", "[pvquad]") {
    REQUIRE(pvquad::slope_probe([](double x) { return 1.0 / x; }, 1.0, 1e3, 30) ==
            Catch::Approx(-1.0).margin(0.01));
    REQUIRE(pvquad::slope_probe([](double x) { return 5.0 / (x * x); }, 1.0, 1e3, 30) ==
            Catch::Approx(-2.0).margin(0.01));
    REQUIRE_THROWS_AS(pvquad::slope_probe([](double x) { return x - 10.0; }, 1.0, 100.0, 20),
                      pvquad::SignChange);
}

TEST_CASE("budget exhaustion raises NonConvergence", "[pvquad]") {
    PVProblem p;
    // needle far narrower than the initial panel, no seeds to help
    p.smooth = [](double x) {
        const double d = x - 0.37;
        return 1e-8 / (1e-16 + d * d);
    };
    p.support = {Interval{0.0, 1.0}};
    p.rel_tol = 1e-12;
    p.max_panels = 8;
    REQUIRE_THROWS_AS(pvquad::pv_integrate(p), pvquad::NonConvergence);
}

TEST_CASE("pole on a support endpoint raises PoleOnEdge", "[pvquad]") {
    PVProblem p;
    p.poles = {{0.0, [](double) { return 1.0; }}};
    p.support = {Interval{0.0, 1.0}};
    p.merge_scale = 1.0;
    REQUIRE_THROWS_AS(pvquad::pv_integrate(p), pvquad::PoleOnEdge);
}

TEST_CASE("pole on an interior shared edge integrates across the gate", "[pvquad]") {
    // support split at 0 exactly where the pole sits; adjacent intervals
    // merge and the window straddles the edge
    Poly poly;
    poly.coeff = {1.0, 0.5, -0.25, 0.0, 0.0, 0.0};
    PVProblem p;
    p.poles = {{0.0, [poly](double x) { return poly(x); }}};
    p.support = {Interval{-1.0, 0.0}, Interval{0.0, 2.0}};
    p.rel_tol = 1e-13;
    const double got = pvquad::pv_integrate(p).value;
    const double want = pv_poly_oracle(poly, -1.0, 2.0, 0.0);
    REQUIRE(got == Catch::Approx(want).epsilon(1e-12));
}

TEST_CASE("pole inside a gap between support intervals needs no window", "[pvquad]") {
    // integrand 1/(x-0.5) over [0,0.4] and [0.6,1]: regular on the support
    PVProblem p;
    p.poles = {{0.5, [](double) { return 1.0; }}};
    p.support = {Interval{0.0, 0.4}, Interval{0.6, 1.0}};
    p.rel_tol = 1e-13;
    const double got = pvquad::pv_integrate(p).value;
    const double want = std::log(0.1 / 0.5) + std::log(0.5 / 0.1);
    REQUIRE(got == Catch::Approx(want).margin(1e-12));
}
