#pragma once

namespace duffing::calibration {

/// Frozen constants for the dimensionless bounds checked by the verification
/// suite. Each value was measured once on the reference corpus (n = 1,
/// gamma = 0.8, eps0 = 0.1, A in {50, 100, 200}) and then fixed with at least
/// 2x slack; the suite fails if a later change pushes a measured quantity past
/// its frozen bound, rather than silently recalibrating.

/// sup |r|/eps0 for the rough (unsmoothed) remainder of the split
/// perturbation. Measured 2.30.
inline constexpr double rough_remainder = 5.0;

/// A * sup |S_k| for each averaging generator. Measured 0.226.
inline constexpr double generator_size = 1.0;

/// Residual contraction per averaging step is ratio <= C / A^varpi.
/// Measured ratio * A: 4.14 to 4.19 across A in {50, 100, 200}.
inline constexpr double contraction = 10.0;

/// Final normal-form residual over eps0 after N steps. Measured 0.078.
inline constexpr double final_residual = 0.5;

/// Twist lower bound: inf |d^2_rho H0| >= A^n / C on the core annulus.
/// Measured A/75.
inline constexpr double twist_lower_divisor = 150.0;

/// Twist upper/lower ratio on the core annulus. Measured 1.9.
inline constexpr double twist_ratio = 10.0;

/// Fitted twist-map fluctuations F_sup, G_sup over eps0. Measured 0.26 at
/// A = 50 falling to 0.06 at A = 200.
inline constexpr double fluctuation = 1.0;

/// Discrepancy between the measured xi-averaged frequency and the
/// normal-form prediction, over eps0. Measured 0.05.
inline constexpr double frequency_discrepancy = 1.0;

} // namespace duffing::calibration
