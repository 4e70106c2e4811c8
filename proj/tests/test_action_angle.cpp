#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "duffinglab/action_angle.hpp"
#include "duffinglab/corpus.hpp"

using namespace duffing;

namespace {

// Beta-function identity oracle: T0 = (2/sqrt(n+1)) B(1/(2n+2), 1/2).
double period_beta_oracle(int n) {
    const double a = 1.0 / (2.0 * n + 2.0), b = 0.5;
    const double B = std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
    return 2.0 / std::sqrt(double(n + 1)) * B;
}

// ODE return-time oracle: march the auxiliary flow from (1,0) until it
// returns to the section y = 0, x > 0, then refine the crossing by Newton.
double period_return_oracle(int n) {
    const int p = 2 * n + 1;
    AdaptiveFlow flow(
        [p](double, const double* y, double* dy) {
            dy[0] = y[1];
            dy[1] = -std::pow(y[0], p);
        },
        {}, 1e-13, 1e12);
    State2 s{1.0, 0.0};
    double t = 0.0;
    const double dt = 0.05;
    while (t < 100.0) {
        const State2 nxt = flow.flow(s, t, t + dt).y;
        // the orbit re-enters the section y = 0, x > 0 from above (y > 0 on the
        // second half-period)
        if (t > 0.2 && s[1] > 0.0 && nxt[1] <= 0.0 && nxt[0] > 0.5) {
            // bisect y(tau) = 0 over the bracket, integrating fresh from s
            double lo = 0.0, hi = dt;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double ymid = flow.flow(s, 0.0, mid).y[1];
                (ymid > 0.0 ? lo : hi) = mid;
            }
            return t + 0.5 * (lo + hi);
        }
        s = nxt;
        t += dt;
    }
    return -1.0;
}

} // namespace

TEST_CASE("min_period: quadrature vs Beta identity vs ODE return", "[action_angle]") {
    CHECK(min_period(1) == Catch::Approx(7.416298).margin(5e-6));
    // n = 2 value from the Beta identity: 8.413093 (commonly rounded 8.414)
    CHECK(min_period(2) == Catch::Approx(8.413093).margin(5e-6));
    for (int n : {1, 2, 3}) {
        const double tq = min_period(n);
        const double tb = period_beta_oracle(n);
        const double tr = period_return_oracle(n);
        CHECK(std::fabs(tq - tb) <= 1e-8);
        CHECK(std::fabs(tq - tr) <= 1e-8);
        CHECK(std::fabs(tb - tr) <= 1e-8);
    }
    CHECK_THROWS_AS(min_period(0), std::invalid_argument);
}

TEST_CASE("reference orbit: energy identity, closure, symmetry", "[action_angle]") {
    for (int n : {1, 2}) {
        const auto ch = ActionAngleChart::build(n, 4096);
        CHECK(ch.orbit_table.size() == 4097);
        CHECK(ch.orbit_table.front().x == 1.0);
        CHECK(ch.orbit_table.front().y == 0.0);

        double worst = 0.0;
        for (const auto& node : ch.orbit_table) {
            const double defect =
                (n + 1) * node.y * node.y + std::pow(node.x, 2 * n + 2) - 1.0;
            worst = std::max(worst, std::fabs(defect));
        }
        CHECK(worst <= 1e-10);

        const auto& last = ch.orbit_table.back();
        CHECK(std::hypot(last.x - 1.0, last.y) <= 1e-9);

        // half-period point is (-1, 0)
        const auto& mid = ch.orbit_table[2048];
        CHECK(mid.x == Catch::Approx(-1.0).margin(1e-9));
        CHECK(std::fabs(mid.y) <= 1e-9);

        // Fourier model reproduces the table
        double model_err = 0.0;
        for (const auto& node : ch.orbit_table)
            model_err = std::max(model_err, std::fabs(ch.x0(node.t) - node.x));
        CHECK(model_err <= 1e-10);

        CHECK(ch.alpha + ch.beta == 1.0);
        CHECK(ch.s0_estimate > 0.0);
    }
}

TEST_CASE("psi0: reference phase, symplecticity, energy reduction", "[action_angle]") {
    const auto ch = ActionAngleChart::build(1);
    const int n = 1;

    const auto [x, y] = ch.psi0(2.0, 0.0);
    CHECK(x == Catch::Approx(std::pow(ch.c * 2.0, ch.alpha)).margin(1e-12));
    CHECK(std::fabs(y) <= 1e-12);

    // finite-difference Jacobian determinant == 1 (symplectic chart)
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uI(1.0, 4.0), uth(0.0, 1.0);
    const double h = 1e-5;
    for (int i = 0; i < 50; ++i) {
        const double I = uI(rng), th = uth(rng);
        const auto [xp, yp] = ch.psi0(I + h, th);
        const auto [xm, ym] = ch.psi0(I - h, th);
        const auto [xt, yt] = ch.psi0(I, th + h);
        const auto [xs, ys] = ch.psi0(I, th - h);
        const double dxdI = (xp - xm) / (2 * h), dydI = (yp - ym) / (2 * h);
        const double dxdth = (xt - xs) / (2 * h), dydth = (yt - ys) / (2 * h);
        const double det = dxdth * dydI - dxdI * dydth;
        CHECK(det == Catch::Approx(1.0).margin(1e-7));

        // auxiliary energy reduces to d I^{2 beta}, independent of theta
        const auto [xx, yy] = ch.psi0(I, th);
        const double energy = 0.5 * yy * yy + std::pow(xx, 2 * n + 2) / (2.0 * n + 2.0);
        CHECK(energy == Catch::Approx(ch.d * std::pow(I, 2 * ch.beta)).margin(1e-9));
    }

    CHECK_THROWS_AS(ch.psi0(0.0, 0.3), std::domain_error);
}

TEST_CASE("psi0_inverse: reference point and round trips", "[action_angle]") {
    const auto ch = ActionAngleChart::build(1);

    const auto [I0, th0] = ch.psi0_inverse(std::pow(ch.c, ch.alpha), 0.0);
    CHECK(I0 == Catch::Approx(1.0).margin(1e-10));
    CHECK(std::min(th0, 1.0 - th0) <= 1e-10);

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uI(1.0, 4.0), uth(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double I = uI(rng), th = uth(rng);
        const auto [x, y] = ch.psi0(I, th);
        const auto [Ir, thr] = ch.psi0_inverse(x, y);
        const auto [xr, yr] = ch.psi0(Ir, thr);
        worst = std::max(worst, std::hypot(xr - x, yr - y));
        CHECK(std::fabs(Ir - I) <= 1e-8);
    }
    CHECK(worst <= 1e-8);

    CHECK_THROWS_AS(ch.psi0_inverse(0.0, 0.0), std::domain_error);
}

TEST_CASE("theta additivity along the auxiliary flow", "[action_angle]") {
    const auto ch = ActionAngleChart::build(1);
    AdaptiveFlow flow(
        [](double, const double* y, double* dy) {
            dy[0] = y[1];
            dy[1] = -std::pow(y[0], 3);
        },
        {}, 1e-13, 1e12);

    // On the unit energy level (I = 1/c, amplitude 1) the flow advances theta
    // at rate 1/T0; at amplitude a the rate scales by a^n.
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uth(0.0, 1.0), us(0.05, 0.95), uI(1.0, 4.0);
    const double Iunit = 1.0 / ch.c;
    for (int i = 0; i < 20; ++i) {
        const double th = uth(rng), s = us(rng);
        auto [x, y] = ch.psi0(Iunit, th);
        const State2 moved = flow.flow({x, y}, 0.0, s * ch.T0).y;
        const auto [I2, th2] = ch.psi0_inverse(moved[0], moved[1]);
        CHECK(std::fabs(I2 - Iunit) <= 1e-8);
        double dth = th2 - th - s;
        dth -= std::round(dth);
        CHECK(std::fabs(dth) <= 1e-8);
    }
    for (int i = 0; i < 10; ++i) {
        const double th = uth(rng), s = us(rng), I = uI(rng);
        const double rate = std::pow(std::pow(ch.c * I, ch.alpha), ch.n); // amplitude^n / T0
        auto [x, y] = ch.psi0(I, th);
        const State2 moved = flow.flow({x, y}, 0.0, s * ch.T0).y;
        const auto [I2, th2] = ch.psi0_inverse(moved[0], moved[1]);
        CHECK(std::fabs(I2 - I) <= 1e-8);
        double dth = th2 - th - s * rate;
        dth -= std::round(dth);
        CHECK(std::fabs(dth) <= 1e-7);
    }
}

TEST_CASE("rescale_state arithmetic", "[action_angle]") {
    CHECK(rescale_state(0.0, 0.0, 7.0, 2) == std::pair{0.0, 0.0});
    CHECK(rescale_state(3.0, -2.0, 1.0, 3) == std::pair{3.0, -2.0});
    const auto [xs, ys] = rescale_state(10.0, 5.0, 10.0, 1);
    CHECK(xs == Catch::Approx(1.0));
    CHECK(ys == Catch::Approx(0.5));
    CHECK_THROWS_AS(rescale_state(1.0, 1.0, 0.0, 1), std::invalid_argument);
}

TEST_CASE("hamiltonian in action-angle form", "[action_angle]") {
    const auto ch = ActionAngleChart::build(1);

    // unperturbed: R = 0, H0 = d A^n I^{2 beta}
    ScaledSystem integrable(corpus::n1_integrable(), 100.0);
    const auto [h0, r0] = hamiltonian_action_angle(integrable, ch, 2.5, 0.3, 0.7);
    CHECK(r0 == 0.0);
    CHECK(h0 == Catch::Approx(ch.d * 100.0 * std::pow(2.5, 2 * ch.beta)).epsilon(1e-12));

    // consistency with the (x,y) Hamiltonian through Psi0
    ScaledSystem sys(corpus::n1(), 100.0);
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> uI(1.0, 4.0), u01(0.0, 1.0);
    double worst = 0.0, rmax100 = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double I = uI(rng), th = u01(rng), t = u01(rng);
        const auto [H0, R] = hamiltonian_action_angle(sys, ch, I, th, t);
        const auto [x, y] = ch.psi0(I, th);
        worst = std::max(worst, std::fabs(H0 + R - sys.hamiltonian(x, y, t)));
        rmax100 = std::max(rmax100, std::fabs(R));
    }
    CHECK(worst <= 1e-9);

    // R = O(A^{n-1}): for n = 1 the sup stays bounded as A grows
    for (double A : {50.0, 200.0}) {
        ScaledSystem s2(corpus::n1(), A);
        double rmax = 0.0;
        for (int i = 0; i < 300; ++i) {
            const double I = uI(rng), th = u01(rng), t = u01(rng);
            rmax = std::max(rmax, std::fabs(hamiltonian_action_angle(s2, ch, I, th, t).second));
        }
        CHECK(rmax <= 3.0 * std::max(rmax100, 1e-6));
    }

    const auto ch2 = ActionAngleChart::build(2);
    CHECK_THROWS_AS(hamiltonian_action_angle(sys, ch2, 2.0, 0.1, 0.1), std::invalid_argument);
}
