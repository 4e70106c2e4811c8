#pragma once

// The fixed coefficient corpus used by regression tests, calibration and the
// built-in verification suite. Frozen: changing it invalidates the calibrated
// constants in calibration.hpp.

#include "duffinglab/coefficients.hpp"

namespace duffing::corpus {

/// n = 1, gamma = 0.8: one C^0.8 lacunary coefficient at j = 2, one step
/// function at j = 0. The lacunary series stops at frequency 2^7 so that
/// direct integration of the equation stays affordable over long horizons.
inline EquationSpec n1() {
    std::vector<PeriodicCoefficient> cs;
    cs.push_back(make_step({0.0, 0.35, 0.7}, {0.3, -0.2, 0.1}));
    cs.push_back(make_zero());
    cs.push_back(make_weierstrass(0.8, 2, 8, {}, 0.5));
    return EquationSpec(1, 0.8, std::move(cs));
}

/// n = 1 with all perturbations switched off (the integrable reference).
inline EquationSpec n1_integrable() {
    std::vector<PeriodicCoefficient> cs(3, make_zero());
    return EquationSpec(1, 0.8, std::move(cs));
}

/// n = 2, gamma = 0.9: Hoelder slots at j = 3, 4; low slots merely integrable.
inline EquationSpec n2() {
    std::vector<PeriodicCoefficient> cs;
    cs.push_back(make_step({0.0, 0.5}, {0.2, -0.2}));
    cs.push_back(make_trig(0.0, {{1, 0.15, 0.4}}));
    cs.push_back(make_zero());
    cs.push_back(make_weierstrass(0.9, 2, 6, {}, 0.3));
    cs.push_back(make_weierstrass(0.9, 2, 6, {0.0, 0.7, 1.4, 2.1, 2.8, 3.5}, 0.2));
    return EquationSpec(2, 0.9, std::move(cs));
}

} // namespace duffing::corpus
