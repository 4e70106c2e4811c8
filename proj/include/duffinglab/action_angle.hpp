#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "duffinglab/coefficients.hpp"
#include "duffinglab/fourier.hpp"
#include "duffinglab/ode.hpp"
#include "duffinglab/quadrature.hpp"

namespace duffing {

/// Minimal period T0 of the auxiliary oscillator x'' + x^{2n+1} = 0 started at
/// (1,0): T0 = 4 sqrt(n+1) * int_0^1 (1 - x^{2n+2})^{-1/2} dx, evaluated by
/// tanh-sinh quadrature (the endpoint singularity is absorbed by the double
/// exponential transform; 1-x is fed in exactly).
inline double min_period(int n) {
    if (n < 1) throw std::invalid_argument("min_period: n must be >= 1");
    const int p = 2 * n + 2;
    const double integral = tanh_sinh_01([p](double x, double one_minus_x) {
        double geom = 1.0, xp = 1.0; // sum_{i=0}^{p-1} x^i
        for (int i = 1; i < p; ++i) { xp *= x; geom += xp; }
        return 1.0 / std::sqrt(one_minus_x * geom);
    });
    return 4.0 * std::sqrt(double(n + 1)) * integral;
}

struct OrbitNode {
    double t, x, y;
};

/// Section 2 geometry: the auxiliary periodic orbit (x0, y0), the exponents
/// alpha, beta, the constants c, d, and the symplectic chart Psi0.
class ActionAngleChart {
public:
    int n = 1;
    double T0 = 0.0;
    double alpha = 0.0, beta = 0.0;
    double c = 0.0, d = 0.0;
    std::vector<OrbitNode> orbit_table; // raw integrator nodes over [0, T0]
    double s0_estimate = 0.0;           // angle-strip width from coefficient decay

    static ActionAngleChart build(int n, int resolution = 4096) {
        if (n < 1) throw std::invalid_argument("ActionAngleChart: n must be >= 1");
        if (resolution < 256) throw std::invalid_argument("ActionAngleChart: resolution < 256");
        ActionAngleChart ch;
        ch.n = n;
        ch.T0 = min_period(n);
        ch.alpha = 1.0 / (n + 2);
        ch.beta = double(n + 1) / (n + 2);
        ch.c = 1.0 / (ch.alpha * ch.T0);
        ch.d = std::pow(ch.c, 2.0 * ch.beta) / (2.0 * (n + 1));
        ch.integrate_orbit(resolution);
        ch.build_series(resolution);
        return ch;
    }

    // Auxiliary orbit evaluated through its Fourier series (smooth in t).
    double x0(double t) const { return x0_series_.eval(t); }
    double y0(double t) const { return y0_series_.eval(t); }
    const PeriodicSeries& x0_series() const { return x0_series_; }

    /// Psi0: (I, theta) -> (x, y) = (c^a I^a x0(theta T0), c^b I^b y0(theta T0)).
    std::pair<double, double> psi0(double I, double theta) const {
        if (!(I > 0.0)) throw std::domain_error("psi0: action must be positive");
        theta -= std::floor(theta);
        const double ca = std::pow(c * I, alpha), cb = std::pow(c * I, beta);
        return {ca * x0(theta * T0), cb * y0(theta * T0)};
    }

    /// I from the auxiliary energy h = y^2/2 + x^{2n+2}/(2n+2): I = (2(n+1)h)^{1/(2 beta)} / c.
    double action_of(double x, double y) const {
        const double energy = 0.5 * y * y + std::pow(x, 2 * n + 2) / (2.0 * n + 2.0);
        return std::pow(2.0 * (n + 1) * energy, 1.0 / (2.0 * beta)) / c;
    }

    /// Inverse chart. theta is recovered by a quadrant bracket on the orbit
    /// table followed by Newton on whichever of x0, y0 is better conditioned.
    std::pair<double, double> psi0_inverse(double x, double y) const {
        if (x == 0.0 && y == 0.0)
            throw std::domain_error("psi0_inverse: action undefined at the origin");
        const double I = action_of(x, y);
        const double X = x / std::pow(c * I, alpha);
        const double Y = y / std::pow(c * I, beta);
        const double t = orbit_time_of(X, Y);
        double theta = t / T0;
        theta -= std::floor(theta);
        return {I, theta};
    }

private:
    void integrate_orbit(int resolution) {
        const int p = 2 * n + 1;
        AdaptiveFlow flow(
            [p](double, const double* y, double* dydt) {
                dydt[0] = y[1];
                dydt[1] = -std::pow(y[0], p);
            },
            {}, 1e-13, 1e12);
        orbit_table.clear();
        orbit_table.reserve(size_t(resolution) + 1);
        State2 s{1.0, 0.0};
        orbit_table.push_back({0.0, 1.0, 0.0});
        for (int i = 1; i <= resolution; ++i) {
            const double t0 = T0 * (i - 1) / resolution;
            const double t1 = T0 * i / resolution;
            s = flow.flow(s, t0, t1).y;
            orbit_table.push_back({t1, s[0], s[1]});
        }
    }

    void build_series(int resolution) {
        std::vector<double> xs(size_t(resolution), 0.0);
        for (int i = 0; i < resolution; ++i) xs[size_t(i)] = orbit_table[size_t(i)].x;
        const int kmax = std::min(resolution / 2 - 1, 400);
        TrigPolynomial full = project_samples(xs, kmax);
        int deg = 1;
        for (int k = 1; k <= kmax; ++k)
            if (std::abs(full.coeff(k)) > 1e-15) deg = k;
        std::vector<cplx> cc(size_t(2 * deg + 1));
        for (int k = -deg; k <= deg; ++k) cc[size_t(k + deg)] = full.coeff(k);
        x0_series_ = PeriodicSeries(T0, TrigPolynomial(std::move(cc)));
        y0_series_ = x0_series_.derivative();

        // strip-width estimate from geometric coefficient decay
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int m = 0;
        for (int k = 1; k <= deg; ++k) {
            const double a = std::abs(x0_series_.series().coeff(k));
            if (a < 1e-13 || a > 1e-2) continue;
            const double lx = k, ly = std::log(a);
            sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
            ++m;
        }
        if (m >= 2) {
            const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
            s0_estimate = -slope * T0 / two_pi;
        }
    }

    double orbit_time_of(double X, double Y) const {
        // quarter bracket: q0 [0,T0/4], q1 [T0/4,T0/2], q2 [T0/2,3T0/4], q3 [3T0/4,T0]
        int q;
        if (Y < 0.0) q = (X >= 0.0) ? 0 : 1;
        else if (Y > 0.0) q = (X <= 0.0) ? 2 : 3;
        else q = (X >= 0.0) ? 0 : 2; // exact turning points
        double lo = T0 * q / 4.0, hi = T0 * (q + 1) / 4.0;
        if (Y == 0.0 && X >= 0.0 && q == 0) return 0.0;

        // bisection on x0 (strictly monotone inside each quarter)
        const bool decreasing = (q == 0 || q == 1);
        for (int it = 0; it < 64; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double xv = x0(mid);
            if ((xv > X) == decreasing) lo = mid; else hi = mid;
        }
        double t = 0.5 * (lo + hi);

        // Newton polish on the better-conditioned equation
        const double xcut = std::pow(0.5, 1.0 / (2.0 * n + 2.0));
        const bool use_x_eq = std::fabs(X) <= xcut; // there |y0| is bounded below
        for (int it = 0; it < 10; ++it) {
            double g, dg;
            if (use_x_eq) {
                g = x0(t) - X;
                dg = y0(t);
            } else {
                g = y0(t) - Y;
                dg = -std::pow(x0(t), 2 * n + 1);
            }
            if (std::fabs(dg) < 1e-14) break;
            const double step = g / dg;
            t -= step;
            if (std::fabs(step) < 1e-14 * T0) break;
        }
        return t;
    }

    PeriodicSeries x0_series_, y0_series_;
};

/// The A-rescaled system of Eqs. in Section 2: Hamiltonian
/// H = A^n (y^2/2 + x^{2n+2}/(2n+2)) + sum_j P_j(t) x^{j+1} A^{j-n-1} / (j+1).
struct ScaledSystem {
    EquationSpec spec;
    double A;

    ScaledSystem(EquationSpec s, double A_) : spec(std::move(s)), A(A_) {
        if (!(A > 0.0)) throw std::invalid_argument("ScaledSystem: A must be positive");
    }

    int n() const { return spec.n; }

    double hamiltonian(double x, double y, double t) const {
        const int nn = spec.n;
        double h = std::pow(A, nn) * (0.5 * y * y + std::pow(x, 2 * nn + 2) / (2.0 * nn + 2.0));
        for (int j = 0; j <= 2 * nn; ++j) {
            const auto& P = spec.coefficients[size_t(j)];
            if (P.is_zero()) continue;
            h += P.eval(t) / (j + 1.0) * std::pow(x, j + 1) * std::pow(A, j - nn - 1);
        }
        return h;
    }

    void rhs(double t, const double* s, double* ds) const {
        const int nn = spec.n;
        const double x = s[0], y = s[1];
        ds[0] = std::pow(A, nn) * y;
        double f = -std::pow(A, nn) * std::pow(x, 2 * nn + 1);
        for (int j = 0; j <= 2 * nn; ++j) {
            const auto& P = spec.coefficients[size_t(j)];
            if (P.is_zero()) continue;
            f -= P.eval(t) * std::pow(x, j) * std::pow(A, j - nn - 1);
        }
        ds[1] = f;
    }

    /// Original-variable state (X, Xdot) of Eq. (1) -> scaled phase point (x, y).
    State2 from_original(double X, double Xdot) const {
        return {X / A, Xdot * std::pow(A, -spec.n - 1)};
    }
    State2 to_original(const State2& s) const {
        return {s[0] * A, s[1] * std::pow(A, spec.n + 1)};
    }
};

/// The literal substitution of Section 2: x -> x/A, y = A^{-n} xdot.
inline std::pair<double, double> rescale_state(double x, double xdot, double A, int n) {
    if (!(A > 0.0)) throw std::invalid_argument("rescale_state: A must be positive");
    return {x / A, xdot * std::pow(A, -n)};
}

/// Split H(Psi0(I,theta), t) = H0(I) + R(I,theta,t) per Eqs. (9)-(10):
/// H0 = d A^n I^{2 beta}, R = sum_j P_j(t)/(j+1) (c^a I^a x0(theta T0))^{j+1} A^{j-n-1}.
inline std::pair<double, double> hamiltonian_action_angle(const ScaledSystem& sys,
                                                          const ActionAngleChart& chart,
                                                          double I, double theta, double t) {
    if (sys.n() != chart.n)
        throw std::invalid_argument("hamiltonian_action_angle: chart/system degree mismatch");
    const int n = chart.n;
    const double H0 = chart.d * std::pow(sys.A, n) * std::pow(I, 2.0 * chart.beta);
    const double xs = std::pow(chart.c * I, chart.alpha) * chart.x0(theta * chart.T0);
    double R = 0.0;
    for (int j = 0; j <= 2 * n; ++j) {
        const auto& P = sys.spec.coefficients[size_t(j)];
        if (P.is_zero()) continue;
        R += P.eval(t) / (j + 1.0) * std::pow(xs, j + 1) * std::pow(sys.A, j - n - 1);
    }
    return {H0, R};
}

} // namespace duffing
