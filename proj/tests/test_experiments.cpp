#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "duffinglab/corpus.hpp"
#include "duffinglab/experiments.hpp"

using namespace duffing;

namespace {

const ActionAngleChart& chart1() {
    static const auto ch = ActionAngleChart::build(1);
    return ch;
}

} // namespace

TEST_CASE("iterate_orbit: equilibrium, conservation, record contract", "[experiments]") {
    ScaledSystem sys(corpus::n1_integrable(), 100.0);
    const auto map = make_map(scaled_flow(sys, 1e-12));

    const auto still = iterate_orbit(map, {0.0, 0.0}, 50);
    CHECK(still.sup_norm == 0.0);
    CHECK(still.completed == 50);
    CHECK_FALSE(still.escaped);

    // conserved energy along every recorded sample
    const auto xy = chart1().psi0(2.5, 0.0);
    const auto orb = iterate_orbit(map, {xy.first, xy.second}, 500, 10);
    CHECK(orb.samples.size() == 51);
    const double e0 = sys.hamiltonian(orb.initial[0], orb.initial[1], 0.0);
    double sup = 0.0;
    for (const auto& s : orb.samples) {
        CHECK(sys.hamiltonian(s[0], s[1], 0.0) == Catch::Approx(e0).margin(1e-7 * e0));
        sup = std::max(sup, std::fabs(s[0]) + std::fabs(s[1]));
    }
    CHECK(orb.sup_norm >= sup - 1e-12);

    CHECK_THROWS_AS(iterate_orbit(map, {1.0, 0.0}, 0), std::invalid_argument);
}

TEST_CASE("rotation_number: rigid rotation exactness and convergence", "[experiments]") {
    const double omega = std::sqrt(2.0) - 1.0;
    std::vector<double> a;
    for (int j = 0; j <= 10000; ++j) a.push_back(j * omega);
    const auto est = rotation_number(a);
    CHECK(std::fabs(est.estimate - omega) <= 1e-10);

    // invariance under angle-origin shift
    for (auto& v : a) v += 0.37;
    CHECK(std::fabs(rotation_number(a).estimate - omega) <= 1e-10);

    // quasi-periodic signal: error bar drops at least 10x for 10x iterates
    const auto make_signal = [omega](int m) {
        std::vector<double> s;
        for (int j = 0; j <= m; ++j)
            s.push_back(j * omega + 0.1 * std::sin(two_pi * j * omega + 0.4));
        return s;
    };
    const auto e1k = rotation_number(make_signal(1000));
    const auto e10k = rotation_number(make_signal(10000));
    CHECK(std::fabs(e10k.estimate - omega) <= 1e-8);
    CHECK(e10k.error_bar <= std::max(e1k.error_bar / 10.0, 1e-12)); // floor: rounding noise

    CHECK_THROWS_AS(rotation_number({0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("rotation number of the integrable time-1 map matches the frequency",
          "[experiments]") {
    const auto& ch = chart1();
    ScaledSystem sys(corpus::n1_integrable(), 100.0);
    const auto fs = scaled_flow(sys, 1e-12);
    const double rho = 2.5;
    const auto xy = ch.psi0(rho, 0.0);
    const auto angles = lifted_angle_orbit(fs, ch, {xy.first, xy.second}, 1500);
    const auto est = rotation_number(angles);
    const double freq = ch.d * 100.0 * 2.0 * ch.beta * std::pow(rho, 2.0 * ch.beta - 1.0);
    CHECK(est.estimate == Catch::Approx(freq).margin(1e-6));
    CHECK(est.error_bar <= 1e-6);
}

TEST_CASE("confinement_probe: integrable brackets and input checks", "[experiments]") {
    const auto& ch = chart1();
    ScaledSystem sys(corpus::n1_integrable(), 100.0);
    const auto map = make_map(scaled_flow(sys, 1e-12));
    const auto at = [&ch](double I) {
        const auto p = ch.psi0(I, 0.0);
        return State2{p.first, p.second};
    };

    const auto res = confinement_probe(map, ch, at(2.0), at(3.0), at(2.5), 200);
    CHECK(res.verdict == Confinement::confined);
    CHECK(res.inner_envelope < res.outer_envelope);

    // relabeled brackets are normalized
    const auto swapped = confinement_probe(map, ch, at(3.0), at(2.0), at(2.5), 200);
    CHECK(swapped.verdict == Confinement::confined);

    // horizon 1 is trivially confined for ordered integrable seeds
    CHECK(confinement_probe(map, ch, at(2.0), at(3.0), at(2.5), 1).verdict ==
          Confinement::confined);

    CHECK_THROWS_AS(confinement_probe(map, ch, at(2.4), at(3.0), at(2.2), 10),
                    std::invalid_argument);
    CHECK_THROWS_AS(confinement_probe(map, ch, at(2.0), at(3.0), at(2.5), 0),
                    std::invalid_argument);
}

TEST_CASE("boundedness_survey: rest solution, conservation, corpus sample", "[experiments]") {
    const auto zero = boundedness_survey(corpus::n1_integrable(), {{0.0, 0.0}}, 10.0);
    CHECK(zero.size() == 1);
    CHECK(zero[0].sup_norm == 0.0);
    CHECK_FALSE(zero[0].escaped);

    // unperturbed level through (1,0): sup(|x|+|xdot|) equals the level value
    const auto one = boundedness_survey(corpus::n1_integrable(), {{1.0, 0.0}}, 50.0, 1e-12, 0.005);
    double level_max = 0.0;
    for (int i = 0; i <= 200000; ++i) {
        const double x = -1.0 + 2.0 * i / 200000.0;
        const double rad = 0.5 - 0.5 * std::pow(x, 4);
        if (rad < 0.0) continue;
        level_max = std::max(level_max, std::fabs(x) + std::sqrt(rad));
    }
    CHECK(one[0].sup_norm == Catch::Approx(level_max).margin(1e-6));

    // short perturbed survey: escapes are impossible at this scale
    std::vector<State2> grid;
    for (double x : {-10.0, 0.0, 10.0})
        for (double v : {-10.0, 0.0, 10.0}) grid.push_back({x, v});
    const auto rows = boundedness_survey(corpus::n1(), grid, 20.0);
    CHECK(rows.size() == 9);
    for (size_t i = 0; i + 1 < rows.size(); ++i) CHECK(rows[i].energy <= rows[i + 1].energy);
    for (const auto& r : rows) {
        CHECK_FALSE(r.escaped);
        CHECK(r.sup_norm < 100.0);
    }
}

TEST_CASE("level_scan: integrable levels and degenerate collar", "[experiments]") {
    const auto& ch = chart1();
    const auto rep = level_scan(corpus::n1_integrable(), ch, {50.0, 100.0}, 100, 5.0, 300);
    REQUIRE(rep.levels.size() == 2);
    for (const auto& lv : rep.levels) CHECK(lv.verdict == Confinement::confined);
    // frequency doubles with A for the integrable system (exact A^n scaling)
    CHECK(rep.levels[1].rotation / rep.levels[0].rotation == Catch::Approx(2.0).epsilon(0.02));

    CHECK_THROWS_AS(level_scan(corpus::n1_integrable(), ch, {50.0, 100.0}, 10, 30.0, 100),
                    std::invalid_argument);
    CHECK_THROWS_AS(level_scan(corpus::n1_integrable(), ch, {100.0, 50.0}, 10, 5.0, 100),
                    std::invalid_argument);
}
