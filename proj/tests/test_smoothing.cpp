#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "duffinglab/smoothing.hpp"

using namespace duffing;

TEST_CASE("bump multiplier shape", "[smoothing]") {
    CHECK(bump_multiplier(0.0) == 1.0);
    CHECK(bump_multiplier(0.3) == 1.0);
    CHECK(bump_multiplier(0.5) == 1.0);
    CHECK(bump_multiplier(1.0) == 0.0);
    CHECK(bump_multiplier(1.5) == 0.0);
    CHECK(bump_multiplier(0.75) == Catch::Approx(0.5).margin(1e-14)); // glue midpoint symmetry
    CHECK_THROWS_AS(bump_multiplier(-0.1), std::invalid_argument);

    double prev = 1.0;
    for (double r = 0.5; r <= 1.0; r += 1.0 / 512) {
        const double v = bump_multiplier(r);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        CHECK(v <= prev + 1e-15); // monotone decrease on the glue
        prev = v;
    }
}

TEST_CASE("smooth: constants and flat-region reproduction", "[smoothing]") {
    const auto c5 = make_trig(5.0, {});
    for (double sigma : {0.01, 0.3, 2.0}) {
        const TrigPolynomial p = smooth(c5, sigma);
        CHECK(p.eval(0.37) == Catch::Approx(5.0).margin(1e-13));
    }

    // k = +-1 sits in the flat multiplier region when 2 pi sigma <= 1/2
    const auto cosf = make_trig(0.0, {{1, 1.0, 0.0}});
    const TrigPolynomial p = smooth(cosf, 0.5 / two_pi);
    for (int i = 0; i < 64; ++i) {
        const double t = i / 64.0;
        CHECK(p.eval(t) == Catch::Approx(std::cos(two_pi * t)).margin(1e-12));
    }

    CHECK_THROWS_AS(smooth(c5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(smooth(c5, -1.0), std::invalid_argument);
}

TEST_CASE("smooth agrees with the direct-convolution oracle", "[smoothing]") {
    const auto f = make_weierstrass(0.7, 2, 21);
    const double sigma = 0.01;
    const TrigPolynomial p = smooth(f, sigma);
    CHECK(p.degree() <= 16);

    // Independent route: real-space convolution with the periodized kernel
    // K(u) = sum_k phi(2 pi |k| sigma) e^{2 pi i k u}, trapezoid quadrature.
    // Lattice size chosen so no lacunary frequency aliases into the kernel band.
    const int deg = p.degree();
    const int N = 100000;
    std::vector<double> kernel(N), fv(N);
    for (int i = 0; i < N; ++i) {
        const double u = double(i) / N;
        double acc = 1.0;
        for (int k = 1; k <= deg; ++k)
            acc += 2.0 * bump_multiplier(two_pi * k * sigma) * std::cos(two_pi * k * u);
        kernel[size_t(i)] = acc;
        fv[size_t(i)] = f.eval(u);
    }
    double worst = 0.0;
    for (int j = 0; j < 10000; ++j) {
        const int i0 = 10 * j; // eval points on the lattice
        double conv = 0.0;
        for (int i = 0; i < N; ++i)
            conv += kernel[size_t((i0 - i % N + N) % N)] * fv[size_t(i)];
        conv /= N;
        worst = std::max(worst, std::fabs(conv - p.eval(double(i0) / N)));
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("bandwidth law and linearity", "[smoothing]") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> uphase(0.0, two_pi);
    std::uniform_real_distribution<double> usig(0.002, 0.2);
    std::uniform_real_distribution<double> ug(0.2, 0.9);
    for (int trial = 0; trial < 100; ++trial) {
        PeriodicCoefficient f;
        if (trial % 3 == 0)
            f = make_step({0.0, 0.3, 0.8}, {ug(rng), -ug(rng), ug(rng)});
        else if (trial % 3 == 1)
            f = make_weierstrass(ug(rng), 2, 12, {}, 1.0);
        else
            f = make_trig(0.1, {{3, 1.0, uphase(rng)}, {11, 0.4, uphase(rng)}});
        const double sigma = usig(rng);
        const TrigPolynomial p = smooth(f, sigma);
        CHECK(two_pi * (p.degree() + 1) * sigma >= 1.0); // nothing retained beyond the cap
        CHECK(p.degree() <= int(std::ceil(1.0 / (two_pi * sigma))));
    }

    // linearity through a merged trig representation
    const auto f = make_trig(0.2, {{2, 1.0, 0.3}});
    const auto g = make_trig(-0.1, {{5, 0.7, 1.1}});
    const double a = 2.5, b = -1.25;
    const auto fg = make_trig(a * 0.2 + b * -0.1, {{2, a * 1.0, 0.3}, {5, b * 0.7, 1.1}});
    const double sigma = 0.02;
    const auto pf = smooth(f, sigma), pg = smooth(g, sigma), pfg = smooth(fg, sigma);
    for (int i = 0; i < 64; ++i) {
        const double t = i / 64.0;
        CHECK(std::fabs(pfg.eval(t) - (a * pf.eval(t) + b * pg.eval(t))) <= 1e-12);
    }
}

TEST_CASE("approximation error: exact reproduction and Jackson rate", "[smoothing]") {
    const auto f = make_trig(0.3, {{2, 1.0, 0.0}, {4, 0.5, 0.7}});
    CHECK(approximation_error(f, 0.5 / (two_pi * 4.0)) <= 1e-10);

    const std::vector<double> sigmas{1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128,
                                     1.0 / 256, 1.0 / 512, 1.0 / 1024};
    const double slope = fitted_error_slope(make_weierstrass(0.7, 2, 21), sigmas);
    CHECK(slope >= 0.55);
    CHECK(slope <= 0.85);
}

TEST_CASE("consistency across smoothing widths (Theorem 3.1, order 0 and 1)", "[smoothing]") {
    const auto f = make_weierstrass(0.7, 2, 21);
    const double gamma = 0.7;
    // |f_sigma - f_s| <= |f_sigma - f| + |f - f_s| <= 2 C sigma^gamma for s <= sigma;
    // measured against the corpus-calibrated constant with slack 2x.
    const double C = 4.0; // calibrated on the lacunary corpus, frozen
    for (double sigma : {0.05, 0.02, 0.01}) {
        const auto psig = smooth(f, sigma);
        for (double s : {sigma, 0.5 * sigma, 0.1 * sigma}) {
            const auto ps = smooth(f, s);
            double sup = 0.0;
            for (int i = 0; i < 4096; ++i) {
                const double t = i / 4096.0;
                sup = std::max(sup, std::fabs(psig.eval(t) - ps.eval(t)));
            }
            CHECK(sup <= 2.0 * C * std::pow(sigma, gamma));
        }
    }
}

TEST_CASE("strip bounds", "[smoothing]") {
    const auto c5 = TrigPolynomial::constant(5.0);
    const auto sb = strip_bound(c5, 0.7);
    CHECK(sb.sampled_max == Catch::Approx(5.0).margin(1e-13));
    CHECK(sb.envelope == Catch::Approx(5.0).margin(1e-13));

    const auto cosf = smooth(make_trig(0.0, {{1, 1.0, 0.0}}), 0.5 / two_pi);
    for (double s : {0.1, 0.3}) {
        const auto b = strip_bound(cosf, s);
        CHECK(b.sampled_max == Catch::Approx(std::cosh(two_pi * s)).margin(1e-8));
        CHECK(b.envelope >= b.sampled_max);
    }

    // smoothing output on its own strip stays below the certified envelope
    const auto p = smooth(make_weierstrass(0.7, 2, 21), 0.01);
    const auto b = strip_bound(p, 0.01);
    CHECK(std::isfinite(b.sampled_max));
    CHECK(b.sampled_max <= b.envelope + 1e-12);

    CHECK_THROWS_AS(strip_bound(p, -0.1), std::invalid_argument);
}

TEST_CASE("real-analyticity proxy: conjugate symmetry", "[smoothing]") {
    const auto p = smooth(make_weierstrass(0.7, 2, 21), 0.01);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const cplx t(u(rng), u(rng));
        CHECK(std::abs(p.eval(std::conj(t)) - std::conj(p.eval(t))) <= 1e-12 * (1.0 + std::abs(p.eval(t))));
    }
}
