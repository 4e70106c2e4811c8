#pragma once

#include <cmath>
#include <stdexcept>

#include "duffinglab/coefficients.hpp"
#include "duffinglab/fourier.hpp"

namespace duffing {

/// C^infty bump multiplier: identically 1 on [0, 1/2], identically 0 on [1, inf),
/// glued on (1/2, 1) by h(s) = g(s)/(g(s)+g(1-s)), g(s) = exp(-1/s).
inline double bump_multiplier(double r) {
    if (r < 0.0) throw std::invalid_argument("bump_multiplier: negative radius");
    if (r <= 0.5) return 1.0;
    if (r >= 1.0) return 0.0;
    const double s = 2.0 * r - 1.0; // in (0,1)
    const double g = std::exp(-1.0 / s);
    const double gc = std::exp(-1.0 / (1.0 - s));
    return 1.0 - g / (g + gc);
}

namespace detail {
inline int smoothing_degree(double sigma) {
    // largest k with 2 pi k sigma < 1
    int deg = int(std::floor(1.0 / (two_pi * sigma)));
    while (two_pi * deg * sigma >= 1.0) --deg;
    return std::max(deg, 0);
}
} // namespace detail

/// Jackson smoothing realized as the Fourier multiplier phi(2 pi |k| sigma):
/// equivalent to convolution with the periodized, scaled kernel K = FT(phi).
/// The result is a trig polynomial of degree <= 1/(2 pi sigma), analytic.
///
/// Coefficients come from the closed forms of the coefficient families (exact;
/// a lacunary series reaches frequencies far beyond any practical quadrature
/// grid, so quadrature would alias them).
inline TrigPolynomial smooth(const PeriodicCoefficient& f, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("smooth: sigma must be positive");
    const int deg = detail::smoothing_degree(sigma);
    std::vector<cplx> c(size_t(2 * deg + 1), cplx(0.0, 0.0));
    for (int k = 0; k <= deg; ++k) {
        const cplx ck = f.fourier_coefficient(k) * bump_multiplier(two_pi * k * sigma);
        c[size_t(k + deg)] = ck;
        c[size_t(-k + deg)] = std::conj(ck);
    }
    return TrigPolynomial(std::move(c));
}

/// sup over a dense real grid of |smooth(f,sigma) - f|; grid has at least
/// 10 * degree points (Eq-style rate: ~ C sigma^gamma for C^gamma inputs).
inline double approximation_error(const PeriodicCoefficient& f, double sigma, int min_grid = 4096) {
    const TrigPolynomial p = smooth(f, sigma);
    const int m = std::max(min_grid, 10 * p.degree() + 1);
    double best = 0.0;
    for (int i = 0; i < m; ++i) {
        const double t = double(i) / m;
        best = std::max(best, std::fabs(p.eval(t) - f.eval(t)));
    }
    return best;
}

struct StripBound {
    double sampled_max; // max |p| over a grid on the strip boundary/interior
    double envelope;    // certified bound sum |c_k| e^{2 pi |k| s}
};

/// Magnitude of a trig polynomial on the complex strip |Im t| <= s.
/// |p(t+iy)| is maximized at |y| = s (Hadamard), so sampling the two boundary
/// lines suffices; interior lines are sampled as a cross-check.
inline StripBound strip_bound(const TrigPolynomial& p, double s, int grid = 512) {
    if (s < 0.0) throw std::invalid_argument("strip_bound: s must be >= 0");
    StripBound out{0.0, p.strip_envelope(s)};
    for (int row = -2; row <= 2; ++row) {
        const double y = s * row / 2.0;
        for (int i = 0; i < grid; ++i) {
            const cplx t(double(i) / grid, y);
            out.sampled_max = std::max(out.sampled_max, std::abs(p.eval(t)));
        }
    }
    return out;
}

/// Least-squares slope of log(err) against log(sigma) -- the measured Jackson
/// exponent for a given coefficient.
inline double fitted_error_slope(const PeriodicCoefficient& f,
                                 const std::vector<double>& sigmas) {
    if (sigmas.size() < 2) throw std::invalid_argument("fitted_error_slope: need >= 2 sigmas");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(sigmas.size());
    for (double s : sigmas) {
        const double x = std::log(s), y = std::log(approximation_error(f, s));
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace duffing
