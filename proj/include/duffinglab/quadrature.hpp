#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

namespace duffing {

// Tanh-sinh (double exponential) quadrature on [0,1].
//
// The integrand receives both x and 1-x so that endpoint-singular factors
// like (1-x)^{-1/2} can be evaluated without cancellation: for u >= 0,
// 1 - x = e^{-2z}/(1+e^{-2z}) with z = (pi/2) sinh u is computed directly.
inline double tanh_sinh_01(const std::function<double(double, double)>& f,
                           double rel_tol = 1e-13, int max_level = 12) {
    const double pi_half = 1.5707963267948966;
    const double umax = 4.0;

    // For u >= 0: xr is the node near 1, xl = 1 - xr the mirrored node near 0.
    auto node = [&](double u, double& xr, double& xl, double& w) {
        const double z = pi_half * std::sinh(u);
        const double e2z = std::exp(-2.0 * z);
        xl = e2z / (1.0 + e2z);
        xr = 1.0 - xl;
        const double ch = std::cosh(z);
        w = 0.5 * pi_half * std::cosh(u) / (ch * ch);
    };

    double h = 1.0;
    double sum = 0.5 * pi_half * f(0.5, 0.5); // u = 0 node, weight pi/4
    for (double u = h; u <= umax; u += h) {
        double xr, xl, w;
        node(u, xr, xl, w);
        if (w > 1e-300) sum += w * (f(xr, xl) + f(xl, xr));
    }
    double prev = sum * h;
    for (int level = 1; level <= max_level; ++level) {
        h *= 0.5;
        double add = 0.0;
        for (double u = h; u <= umax; u += 2.0 * h) { // odd multiples of h
            double xr, xl, w;
            node(u, xr, xl, w);
            if (w > 1e-300) add += w * (f(xr, xl) + f(xl, xr));
        }
        sum += add;
        const double cur = sum * h;
        if (level >= 4 && std::fabs(cur - prev) <= rel_tol * std::fabs(cur))
            return cur;
        prev = cur;
    }
    return prev;
}

// Trapezoid rule for 1-periodic integrands (spectrally accurate for smooth f).
inline double periodic_trapezoid(const std::function<double(double)>& f, int npoints) {
    if (npoints < 2) throw std::invalid_argument("periodic_trapezoid: npoints < 2");
    double s = 0.0;
    for (int i = 0; i < npoints; ++i) s += f(double(i) / npoints);
    return s / npoints;
}

} // namespace duffing
