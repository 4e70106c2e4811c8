#pragma once

// Built-in verification suite: twelve end-to-end checks covering the whole
// pipeline, from the auxiliary orbit through the long-horizon scans. Each
// check reports one pass/fail verdict with the measured value and its bound;
// a check that throws is reported as a failure carrying the message. The
// quick mode shrinks horizons and grids to smoke-test scale.

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "duffinglab/calibration.hpp"
#include "duffinglab/corpus.hpp"
#include "duffinglab/dynamics.hpp"
#include "duffinglab/experiments.hpp"
#include "duffinglab/smoothing.hpp"

namespace duffing::acceptance {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail; // measured value(s) and bound, or the error message
};

namespace detail {

inline std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

inline double period_beta_oracle(int n) {
    const double a = 1.0 / (2.0 * n + 2.0), b = 0.5;
    const double B = std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
    return 2.0 / std::sqrt(double(n + 1)) * B;
}

inline double period_return_oracle(int n) {
    const int p = 2 * n + 1;
    AdaptiveFlow fl(
        [p](double, const double* y, double* dy) {
            dy[0] = y[1];
            dy[1] = -std::pow(y[0], p);
        },
        {}, 1e-13, 1e12);
    State2 s{1.0, 0.0};
    double t = 0.0;
    const double dt = 0.05;
    while (t < 100.0) {
        const State2 nxt = fl.flow(s, t, t + dt).y;
        if (t > 0.2 && s[1] > 0.0 && nxt[1] <= 0.0 && nxt[0] > 0.5) {
            double lo = 0.0, hi = dt;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                (fl.flow(s, 0.0, mid).y[1] > 0.0 ? lo : hi) = mid;
            }
            return t + 0.5 * (lo + hi);
        }
        s = nxt;
        t += dt;
    }
    return -1.0;
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(xs.size());
    for (size_t i = 0; i < xs.size(); ++i) {
        const double x = std::log(xs[i]), y = std::log(ys[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Normal-form runs are shared between the contraction, twist and
/// fluctuation checks; built lazily so an early failure does not block the
/// unrelated criteria.
struct SharedRuns {
    const ActionAngleChart& chart;
    std::vector<double> A_values{50.0, 100.0, 200.0};
    std::vector<NormalFormState> states;
    explicit SharedRuns(const ActionAngleChart& ch) : chart(ch) {}
    const NormalFormState& at(double A) {
        if (states.empty())
            for (double a : A_values) {
                const auto params = choose_parameters(1, 0.8, 0.1, a);
                ScaledSystem sys(corpus::n1(), a);
                states.push_back(iterate_normal_form(sys, chart, params));
            }
        for (size_t i = 0; i < A_values.size(); ++i)
            if (A_values[i] == A) return states[i];
        throw std::logic_error("SharedRuns: level not precomputed");
    }
};

} // namespace detail

/// Run all criteria; `report` receives each CriterionResult as soon as it is
/// known. Returns the number of failures.
template <typename Report>
int run_all(bool quick, Report&& report) {
    using detail::fmt;
    int failures = 0;
    int id = 0;
    const auto chart1 = ActionAngleChart::build(1);
    detail::SharedRuns shared(chart1);

    const auto check = [&](const std::string& name, auto&& body) {
        CriterionResult r;
        r.id = ++id;
        r.name = name;
        try {
            body(r); // sets pass + detail
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail = std::string("exception: ") + e.what();
        }
        if (!r.pass) ++failures;
        report(r);
    };

    check("auxiliary orbit energy identity", [&](CriterionResult& r) {
        double worst = 0.0;
        for (int n : {1, 2, 3}) {
            const auto ch = n == 1 ? chart1 : ActionAngleChart::build(n);
            for (int i = 0; i < 4096; ++i) {
                const double t = ch.T0 * i / 4096.0;
                const double x = ch.x0(t), y = ch.y0(t);
                worst = std::max(worst, std::fabs((n + 1) * y * y + std::pow(x, 2 * n + 2) - 1.0));
            }
        }
        r.pass = worst <= 1e-10;
        r.detail = fmt("max identity defect %.3g (bound 1e-10)", worst);
    });

    check("period triple agreement", [&](CriterionResult& r) {
        double worst = 0.0;
        for (int n : {1, 2, 3}) {
            const double tq = min_period(n);
            const double tb = detail::period_beta_oracle(n);
            const double tr = detail::period_return_oracle(n);
            worst = std::max({worst, std::fabs(tq - tb), std::fabs(tq - tr), std::fabs(tb - tr)});
        }
        const double ref = std::fabs(min_period(1) - 7.416298);
        r.pass = worst <= 1e-8 && ref <= 5e-6;
        r.detail = fmt("max pairwise gap %.3g (bound 1e-8); T0(1) off by %.3g", worst, ref);
    });

    check("action-angle chart symplecticity", [&](CriterionResult& r) {
        double worst = 0.0;
        const double h = 1e-5;
        for (int a = 0; a < 20; ++a)
            for (int b = 0; b < 20; ++b) {
                const double I = 1.0 + 3.0 * a / 19.0;
                const double th = b / 20.0;
                const auto Ip = chart1.psi0(I + h, th), Im = chart1.psi0(I - h, th);
                const auto Tp = chart1.psi0(I, th + h), Tm = chart1.psi0(I, th - h);
                // canonical pair is (theta, I): dx ^ dy = dtheta ^ dI
                const double det = ((Tp.first - Tm.first) * (Ip.second - Im.second) -
                                    (Ip.first - Im.first) * (Tp.second - Tm.second)) /
                                   (4.0 * h * h);
                worst = std::max(worst, std::fabs(det - 1.0));
            }
        r.pass = worst <= 1e-7;
        r.detail = fmt("max |det - 1| = %.3g on 20x20 grid (bound 1e-7)", worst);
    });

    check("smoothing error rate", [&](CriterionResult& r) {
        std::vector<double> sigmas;
        for (int e = 4; e <= 10; ++e) sigmas.push_back(std::pow(2.0, -e));
        std::string vals;
        r.pass = true;
        for (double g : {0.6, 0.7, 0.9}) {
            const auto f = make_weierstrass(g, 2, 14, {}, 1.0);
            const double slope = fitted_error_slope(f, sigmas);
            if (!(slope >= g - 0.15 && slope <= g + 0.15)) r.pass = false;
            vals += fmt("%.2f->%.3f ", g, slope);
        }
        r.detail = "fitted slopes " + vals + "(each within 0.15 of target)";
    });

    check("smoothing bandwidth law", [&](CriterionResult& r) {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> ug(0.55, 0.95), us(-10.0, -2.0), ua(0.1, 1.0);
        std::uniform_int_distribution<int> kind(0, 2), terms(3, 10);
        int bad = 0;
        for (int i = 0; i < 100; ++i) {
            PeriodicCoefficient f;
            switch (kind(rng)) {
            case 0: f = make_weierstrass(ug(rng), 2, terms(rng), {}, ua(rng)); break;
            case 1: f = make_step({0.0, 0.3, 0.8}, {ua(rng), -ua(rng), ua(rng)}); break;
            default: f = make_trig(ua(rng), {{terms(rng), ua(rng), ua(rng)}}); break;
            }
            const double sigma = std::pow(2.0, us(rng));
            const auto p = smooth(f, sigma);
            // every retained mode obeys the cutoff, and probing beyond the
            // stored degree returns exactly zero
            for (int k = -2 * p.degree() - 2; k <= 2 * p.degree() + 2; ++k)
                if (two_pi * std::abs(k) * sigma >= 1.0 && std::abs(p.coeff(k)) != 0.0) ++bad;
        }
        r.pass = bad == 0;
        r.detail = fmt("%.0f modes past the cutoff across 100 draws (bound 0)", double(bad));
    });

    check("normal-form residual contraction", [&](CriterionResult& r) {
        std::vector<double> ratios;
        for (double A : shared.A_values) {
            const auto& st = shared.at(A);
            ratios.push_back(st.log[1].sup_residual / st.log[0].sup_residual);
        }
        const double slope = detail::loglog_slope(shared.A_values, ratios);
        r.pass = slope >= -1.3 && slope <= -0.7;
        r.detail = fmt("ratio exponent %.3f vs A (window [-1.3, -0.7]); ratio at A=100: %.3g",
                       slope, ratios[1]);
    });

    check("twist strength and scaling", [&](CriterionResult& r) {
        std::vector<double> lo(3), hi(3);
        for (size_t i = 0; i < 3; ++i) std::tie(lo[i], hi[i]) = twist_bounds(shared.at(shared.A_values[i]));
        const double r1 = lo[1] / lo[0], r2 = lo[2] / lo[1];
        r.pass = lo[0] > 0.0 && std::fabs(r1 - 2.0) <= 0.3 && std::fabs(r2 - 2.0) <= 0.3 &&
                 hi[2] / lo[2] <= calibration::twist_ratio &&
                 lo[2] >= shared.A_values[2] / calibration::twist_lower_divisor;
        r.detail = fmt("lower-bound doubling ratios %.3f, %.3f (within 15%% of 2); ", r1, r2) +
                   fmt("lower(200)=%.3g vs A/%g", lo[2], calibration::twist_lower_divisor);
    });

    check("time-1 map symplecticity", [&](CriterionResult& r) {
        std::mt19937_64 rng(19);
        std::uniform_real_distribution<double> uI(2.0, 3.0), uth(0.0, 1.0);
        const int npts = quick ? 20 : 100;
        double worst = 0.0;
        // the n = 2 level is kept moderate so the map winds a manageable
        // number of turns; the determinant check is scale-invariant
        const std::vector<std::pair<EquationSpec, double>> systems = {
            {corpus::n1(), 100.0}, {corpus::n1_integrable(), 100.0}, {corpus::n2(), 20.0}};
        for (const auto& [spec, A] : systems) {
            ScaledSystem sys(spec, A);
            const auto ch = spec.n == 1 ? chart1 : ActionAngleChart::build(spec.n);
            for (int i = 0; i < npts; ++i) {
                const auto xy = ch.psi0(uI(rng), uth(rng));
                const auto [q, det] = variational_time_one_map(sys, {xy.first, xy.second}, 1e-13);
                worst = std::max(worst, std::fabs(det - 1.0));
            }
        }
        r.pass = worst <= 1e-6;
        r.detail = fmt("max |det - 1| = %.3g over %g points x 3 systems (bound 1e-6)", worst,
                       double(npts));
    });

    check("twist-map fluctuation smallness", [&](CriterionResult& r) {
        const auto& st = shared.at(100.0);
        ScaledSystem sys(corpus::n1(), 100.0);
        const auto fit = fit_twist_form(scaled_flow(sys, 1e-12), chart1, st, {2.0, 3.0}, 8, 8);
        const double bound = calibration::fluctuation * 0.1;
        r.pass = fit.F_sup <= bound && fit.G_sup <= bound &&
                 fit.alpha_discrepancy <= calibration::frequency_discrepancy * 0.1;
        r.detail = fmt("F_sup %.3g, G_sup %.3g (bound %.3g)", fit.F_sup, fit.G_sup, bound);
    });

    check("long-horizon boundedness survey", [&](CriterionResult& r) {
        std::vector<State2> grid;
        for (double x : {-10.0, -5.0, 0.0, 5.0, 10.0})
            for (double v : {-10.0, -5.0, 0.0, 5.0, 10.0}) grid.push_back({x, v});
        const double horizon = quick ? 100.0 : 10000.0;
        const auto serialize = [](const std::vector<SurveyRow>& rows) {
            std::ostringstream os;
            for (const auto& w : rows) {
                char line[160];
                std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%d,%.17g\n", w.x0, w.xdot0,
                              w.sup_norm, int(w.escaped), w.escape_time);
                os << line;
            }
            return os.str();
        };
        const auto rows = boundedness_survey(corpus::n1(), grid, horizon);
        const auto rows2 = boundedness_survey(corpus::n1(), grid, horizon);
        int escapes = 0;
        double sup = 0.0;
        bool finite = true;
        for (const auto& w : rows) {
            escapes += int(w.escaped);
            if (!std::isfinite(w.sup_norm)) finite = false;
            sup = std::max(sup, w.sup_norm);
        }
        const bool repro = serialize(rows) == serialize(rows2);
        r.pass = escapes == 0 && finite && repro;
        r.detail = fmt("escapes %g of 25, max sup-norm %.4g, ", double(escapes), sup) +
                   (repro ? "reruns byte-identical" : "reruns DIFFER");
    });

    check("confinement and frequency scan", [&](CriterionResult& r) {
        const long horizon = quick ? 2000 : 100000;
        const long rot_iters = quick ? 500 : 4000;
        const auto rep = level_scan(corpus::n1(), chart1, shared.A_values, horizon, 5.0, rot_iters);
        bool confined = true;
        for (const auto& lv : rep.levels)
            if (lv.verdict != Confinement::confined) confined = false;
        const double q1 = rep.levels[1].rotation / rep.levels[0].rotation;
        const double q2 = rep.levels[2].rotation / rep.levels[1].rotation;
        r.pass = confined && std::fabs(q1 - 2.0) <= 0.5 && std::fabs(q2 - 2.0) <= 0.5 &&
                 rep.levels[0].rotation < rep.levels[1].rotation &&
                 rep.levels[1].rotation < rep.levels[2].rotation;
        r.detail = fmt("all confined over %g iterates: %.0f; ", double(horizon), double(confined)) +
                   fmt("frequency doubling ratios %.3f, %.3f (within 25%% of 2)", q1, q2);
    });

    check("rotation-number estimator exactness", [&](CriterionResult& r) {
        const double omega = std::sqrt(2.0) - 1.0;
        std::vector<double> a;
        for (int j = 0; j <= 10000; ++j) a.push_back(j * omega + 0.37);
        const double err = std::fabs(rotation_number(a).estimate - omega);
        r.pass = err <= 1e-10;
        r.detail = fmt("rigid-rotation error %.3g at 1e4 iterates (bound 1e-10)", err);
    });

    return failures;
}

} // namespace duffing::acceptance
