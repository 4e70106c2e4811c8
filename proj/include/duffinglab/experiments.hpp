#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "duffinglab/dynamics.hpp"

namespace duffing {

using MapFn = std::function<FlowOutcome(const State2&)>;

inline State2 to_state(const std::pair<double, double>& p) { return {p.first, p.second}; }

/// Time-1 map with a single cached integrator (1-periodicity makes every base
/// time equivalent to 0).
inline MapFn make_map(const FlowSpec& fs) {
    auto fl = std::make_shared<AdaptiveFlow>(fs.make());
    return [fl](const State2& p) { return fl->flow(p, 0.0, 1.0); };
}

struct OrbitRecord {
    State2 initial{};
    std::vector<State2> samples; // thinned by stride; starts with the seed
    int stride = 1;
    long completed = 0; // map applications performed
    double sup_norm = 0.0;
    bool escaped = false;
    double escape_time = 0.0;
};

inline OrbitRecord iterate_orbit(const MapFn& map, const State2& p0, long iterations,
                                 int stride = 1) {
    if (iterations < 1) throw std::invalid_argument("iterate_orbit: iterations must be >= 1");
    if (stride < 1) throw std::invalid_argument("iterate_orbit: stride must be >= 1");
    OrbitRecord rec;
    rec.initial = p0;
    rec.stride = stride;
    rec.samples.push_back(p0);
    rec.sup_norm = std::fabs(p0[0]) + std::fabs(p0[1]);
    State2 p = p0;
    for (long k = 1; k <= iterations; ++k) {
        const FlowOutcome out = map(p);
        if (out.escaped) {
            rec.escaped = true;
            rec.escape_time = (k - 1) + out.escape_time;
            break;
        }
        p = out.y;
        rec.completed = k;
        rec.sup_norm = std::max(rec.sup_norm, std::fabs(p[0]) + std::fabs(p[1]));
        if (k % stride == 0) rec.samples.push_back(p);
    }
    return rec;
}

struct RotationEstimate {
    double estimate = 0.0;
    double error_bar = 0.0;
};

namespace detail {

inline double birkhoff_weight(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return std::exp(-1.0 / (s * (1.0 - s)));
}

inline double weighted_increment_mean(const double* a, size_t m) {
    // m increments a[j+1]-a[j]; smooth bump weights kill boundary error terms
    double num = 0.0, den = 0.0;
    for (size_t j = 0; j < m; ++j) {
        const double w = birkhoff_weight((double(j) + 0.5) / double(m));
        num += w * (a[j + 1] - a[j]);
        den += w;
    }
    return num / den;
}

} // namespace detail

/// Weighted Birkhoff average of the lifted-angle increments; the error bar is
/// the spread between the half-sample estimates.
inline RotationEstimate rotation_number(const std::vector<double>& lifted_angles) {
    const size_t n = lifted_angles.size();
    if (n < 3) throw std::invalid_argument("rotation_number: need at least 3 angle samples");
    RotationEstimate out;
    out.estimate = detail::weighted_increment_mean(lifted_angles.data(), n - 1);
    const size_t half = (n - 1) / 2;
    const double e1 = detail::weighted_increment_mean(lifted_angles.data(), half);
    const double e2 = detail::weighted_increment_mean(lifted_angles.data() + half, n - 1 - half);
    out.error_bar = std::fabs(e1 - e2);
    return out;
}

/// Lifted angle of a time-1 map orbit in the chart's angle coordinate. The
/// flow is substepped so each partial advance stays well under half a turn and
/// the winding is unambiguous.
inline std::vector<double> lifted_angle_orbit(const FlowSpec& fs, const ActionAngleChart& chart,
                                              const State2& p0, long iterations) {
    if (iterations < 1) throw std::invalid_argument("lifted_angle_orbit: iterations must be >= 1");
    const auto integrator = fs.make();

    // probe the angle rate to size the substeps
    const double dt_probe = 1e-3;
    const auto [I0, th0] = chart.psi0_inverse(p0[0], p0[1]);
    const auto probe = integrator.flow(p0, 0.0, dt_probe);
    if (probe.escaped) throw std::runtime_error("lifted_angle_orbit: seed escapes immediately");
    const auto [Ip, thp] = chart.psi0_inverse(probe.y[0], probe.y[1]);
    double d0 = thp - th0 - std::floor(thp - th0);
    if (d0 > 0.5) d0 -= 1.0;
    const double rate = std::fabs(d0) / dt_probe;
    const int k = std::max(4, int(std::ceil(4.0 * rate)));

    std::vector<double> lifted;
    lifted.reserve(size_t(iterations) + 1);
    double angle = th0;
    lifted.push_back(angle);
    double prev_inc = rate / k;
    State2 p = p0;
    double prev_theta = th0;
    for (long it = 0; it < iterations; ++it) {
        for (int s = 0; s < k; ++s) {
            const double t0 = double(s) / k, t1 = double(s + 1) / k;
            const auto out = integrator.flow(p, t0, t1);
            if (out.escaped)
                throw std::runtime_error("lifted_angle_orbit: orbit escaped (rotation undefined)");
            p = out.y;
            const double th = chart.psi0_inverse(p[0], p[1]).second;
            double d = th - prev_theta - std::floor(th - prev_theta);
            d += std::round(prev_inc - d); // branch nearest the running increment
            angle += d;
            prev_inc = d;
            prev_theta = th;
        }
        lifted.push_back(angle);
    }
    return lifted;
}

enum class Confinement { confined, inconclusive, bracket_escaped };

struct ProbeResult {
    Confinement verdict = Confinement::inconclusive;
    long first_violation = -1;
    double inner_envelope = 0.0; // max action reached by the inner orbit
    double outer_envelope = 0.0; // min action reached by the outer orbit
};

/// Topological confinement test: the test orbit's action must stay strictly
/// between the action envelopes of the two bracketing orbits for the whole
/// horizon. Seeds are normalized by initial action.
inline ProbeResult confinement_probe(const MapFn& map, const ActionAngleChart& chart, State2 inner,
                                     State2 outer, const State2& test, long horizon) {
    if (horizon < 1) throw std::invalid_argument("confinement_probe: horizon must be >= 1");
    const auto action = [&chart](const State2& s) { return chart.action_of(s[0], s[1]); };
    if (action(inner) > action(outer)) std::swap(inner, outer);
    if (!(action(inner) < action(test) && action(test) < action(outer)))
        throw std::invalid_argument("confinement_probe: seeds not ordered by action");

    ProbeResult res;
    double sup_inner = action(inner), inf_outer = action(outer);
    State2 pi = inner, po = outer;
    for (long k = 0; k < horizon; ++k) {
        const auto oi = map(pi);
        const auto oo = map(po);
        if (oi.escaped || oo.escaped) {
            res.verdict = Confinement::bracket_escaped;
            res.first_violation = k;
            return res;
        }
        pi = oi.y;
        po = oo.y;
        sup_inner = std::max(sup_inner, action(pi));
        inf_outer = std::min(inf_outer, action(po));
    }
    res.inner_envelope = sup_inner;
    res.outer_envelope = inf_outer;
    if (!(sup_inner < inf_outer)) {
        res.verdict = Confinement::inconclusive;
        res.first_violation = 0;
        return res;
    }

    State2 pt = test;
    for (long k = 0; k <= horizon; ++k) {
        const double a = action(pt);
        if (!(a > sup_inner && a < inf_outer)) {
            res.verdict = Confinement::inconclusive;
            res.first_violation = k;
            return res;
        }
        if (k == horizon) break;
        const auto ot = map(pt);
        if (ot.escaped) {
            res.verdict = Confinement::inconclusive;
            res.first_violation = k + 1;
            return res;
        }
        pt = ot.y;
    }
    res.verdict = Confinement::confined;
    return res;
}

struct SurveyRow {
    double x0 = 0.0, xdot0 = 0.0;
    double energy = 0.0; // unperturbed energy of the seed, used for sorting
    double sup_norm = 0.0;
    bool escaped = false;
    double escape_time = 0.0;
};

namespace detail {

/// Running sup of a sampled scalar signal with parabolic refinement at local
/// maxima (the raw node maximum under-reads between samples).
class PeakTracker {
public:
    void push(double t, double v) {
        raw_ = std::max(raw_, v);
        if (count_ >= 2 && v1_ > v0_ && v1_ >= v) {
            const double f01 = (v1_ - v0_) / (t1_ - t0_);
            const double f12 = (v - v1_) / (t - t1_);
            const double c = (f12 - f01) / (t - t0_);
            if (c < 0.0) {
                const double ts = 0.5 * (t0_ + t1_) - f01 / (2.0 * c);
                if (ts > t0_ && ts < t)
                    raw_ = std::max(raw_, v0_ + f01 * (ts - t0_) + c * (ts - t0_) * (ts - t1_));
            }
        }
        t0_ = t1_; v0_ = v1_;
        t1_ = t;  v1_ = v;
        ++count_;
    }
    double sup() const { return raw_; }

private:
    double raw_ = -1e300;
    double t0_ = 0, v0_ = 0, t1_ = 0, v1_ = 0;
    int count_ = 0;
};

} // namespace detail

/// Long-horizon integration of the unscaled equation on a grid of initial
/// conditions; escapes are recorded as data. With sample_dt > 0 the orbit is
/// additionally sampled on that fixed lattice (tighter sup-norm reads at the
/// cost of integrator restarts); either way local maxima are refined
/// parabolically.
inline std::vector<SurveyRow> boundedness_survey(const EquationSpec& spec,
                                                 const std::vector<State2>& initial_grid,
                                                 double horizon_time, double tol = 1e-10,
                                                 double sample_dt = 0.0) {
    const auto fs = original_flow(spec, tol);
    const auto integrator = fs.make();
    std::vector<SurveyRow> rows;
    rows.reserve(initial_grid.size());
    for (const auto& p0 : initial_grid) {
        SurveyRow row;
        row.x0 = p0[0];
        row.xdot0 = p0[1];
        row.energy =
            0.5 * p0[1] * p0[1] + std::pow(p0[0], 2 * spec.n + 2) / (2.0 * spec.n + 2.0);
        detail::PeakTracker peak;
        peak.push(0.0, std::fabs(p0[0]) + std::fabs(p0[1]));
        FlowOutcome out;
        if (sample_dt > 0.0) {
            State2 p = p0;
            const long m = std::lround(std::ceil(horizon_time / sample_dt));
            for (long k = 0; k < m && !out.escaped; ++k) {
                const double ta = horizon_time * k / double(m);
                const double tb = horizon_time * (k + 1) / double(m);
                out = integrator.flow(p, ta, tb);
                p = out.y;
                peak.push(tb, std::fabs(p[0]) + std::fabs(p[1]));
            }
        } else {
            out = integrator.flow(p0, 0.0, horizon_time, [&peak](double t, const State2& y) {
                peak.push(t, std::fabs(y[0]) + std::fabs(y[1]));
            });
        }
        row.sup_norm = peak.sup();
        row.escaped = out.escaped;
        row.escape_time = out.escape_time;
        rows.push_back(row);
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const SurveyRow& a, const SurveyRow& b) { return a.energy < b.energy; });
    return rows;
}

struct LevelReport {
    double A = 0.0;
    Window annulus{};
    Confinement verdict = Confinement::inconclusive;
    long first_violation = -1;
    double rotation = 0.0;
    double rotation_error = 0.0;
};

struct CurveScanReport {
    std::vector<LevelReport> levels;
};

/// Fixed-step symplectic realization of the time-1 map for a scaled system:
/// cheap enough for 1e5-iterate confinement horizons, with the action wobble
/// of the splitting error far below annulus widths. dt resolves the fastest
/// local oscillation (amplitude-dependent frequency ~ A^n a^n / T0).
inline MapFn make_symplectic_map(const ScaledSystem& sys, double T0, double max_amplitude,
                                 int steps_per_period = 128) {
    const int n = sys.n();
    const double mass = std::pow(sys.A, n);
    const double period = T0 / (mass * std::pow(max_amplitude, n));
    // dt divides the unit period exactly, so the force times live on a fixed
    // lattice and the coefficient values can be tabulated once (the lacunary
    // series would otherwise dominate the cost of long horizons)
    const long m = std::lround(std::ceil(steps_per_period / period));
    const double dt = 1.0 / double(m);
    static const double w1 = 1.0 / (2.0 - std::cbrt(2.0));
    static const double w0 = 1.0 - 2.0 * w1;

    // per-step force times (mod 1): k*dt, (k+w1)*dt, (k+1-w1)*dt
    const int nc = 2 * n + 1;
    auto coeffs = std::make_shared<std::vector<double>>(size_t(3 * m * nc), 0.0);
    for (long k = 0; k < m; ++k) {
        const double offs[3] = {0.0, w1, 1.0 - w1};
        for (int o = 0; o < 3; ++o) {
            const double t = (double(k) + offs[o]) * dt;
            for (int j = 0; j < nc; ++j) {
                const auto& P = sys.spec.coefficients[size_t(j)];
                if (P.is_zero()) continue;
                (*coeffs)[size_t((3 * k + o) * nc + j)] = P.eval(t) * std::pow(sys.A, j - n - 1);
            }
        }
    }

    return [coeffs, m, dt, mass, n, nc](const State2& p) {
        const auto force = [&](double x, long slot) {
            double f = -mass * std::pow(x, 2 * n + 1);
            const double* c = coeffs->data() + size_t(slot) * size_t(nc);
            double xp = 1.0;
            for (int j = 0; j < nc; ++j) {
                f -= c[j] * xp;
                xp *= x;
            }
            return f;
        };
        const double h1 = w1 * dt, h0 = w0 * dt;
        double x = p[0], y = p[1];
        for (long k = 0; k < m; ++k) {
            // fused Yoshida-4 triple leapfrog; interior half-kicks merged
            y += 0.5 * h1 * force(x, 3 * k);
            x += h1 * mass * y;
            y += 0.5 * (h1 + h0) * force(x, 3 * k + 1);
            x += h0 * mass * y;
            y += 0.5 * (h0 + h1) * force(x, 3 * k + 2);
            x += h1 * mass * y;
            y += 0.5 * h1 * force(x, k + 1 < m ? 3 * (k + 1) : 0);
        }
        FlowOutcome out;
        out.y = {x, y};
        if (!(std::fabs(x) + std::fabs(y) <= 1e6)) { // catches NaN from overflow
            out.escaped = true;
            out.escape_time = 1.0;
        }
        return out;
    };
}

/// Scan a sequence of scaling levels A_k: confinement on the annulus
/// [2 + C'/A, 3 - C'/A] in scaled action (the image of [2A + C', 3A - C'] in
/// original scale) plus a rotation-number estimate on the middle orbit.
/// Confinement orbits use the symplectic map; rotation numbers use the
/// adaptive flow (pointwise accuracy matters there, horizon is shorter).
inline CurveScanReport level_scan(const EquationSpec& spec, const ActionAngleChart& chart,
                                  const std::vector<double>& A_values, long horizon,
                                  double collar = 5.0, long rotation_iterates = 4000,
                                  double tol = 1e-12) {
    for (size_t i = 0; i + 1 < A_values.size(); ++i)
        if (!(A_values[i] < A_values[i + 1]))
            throw std::invalid_argument("level_scan: A values must be increasing");
    CurveScanReport rep;
    for (double A : A_values) {
        const Window ann{2.0 + collar / A, 3.0 - collar / A};
        if (!(ann.width() > 0.0))
            throw std::invalid_argument("level_scan: collar leaves an empty annulus");
        ScaledSystem sys(spec, A);
        const auto fs = scaled_flow(sys, tol);
        const double max_amp = std::pow(chart.c * ann.hi, chart.alpha) * 1.1;
        const auto map = make_symplectic_map(sys, chart.T0, max_amp);
        const State2 inner = to_state(chart.psi0(ann.lo, 0.0));
        const State2 outer = to_state(chart.psi0(ann.hi, 0.0));
        const double mid = 0.5 * (ann.lo + ann.hi);
        const State2 test = to_state(chart.psi0(mid, 0.0));

        LevelReport lv;
        lv.A = A;
        lv.annulus = ann;
        const auto probe = confinement_probe(map, chart, inner, outer, test, horizon);
        lv.verdict = probe.verdict;
        lv.first_violation = probe.first_violation;
        const auto angles = lifted_angle_orbit(fs, chart, test, rotation_iterates);
        const auto rot = rotation_number(angles);
        lv.rotation = rot.estimate;
        lv.rotation_error = rot.error_bar;
        rep.levels.push_back(lv);
    }
    return rep;
}

} // namespace duffing
