#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "duffinglab/action_angle.hpp"
#include "duffinglab/normal_form.hpp"
#include "duffinglab/ode.hpp"

namespace duffing {

/// A planar nonautonomous vector field plus integration policy. Breakpoints
/// are the jump times (mod 1) of discontinuous coefficients; the integrator
/// restarts there to keep its order.
struct FlowSpec {
    AdaptiveFlow::Rhs vectorfield;
    std::vector<double> breakpoints;
    double tolerance = 1e-12;
    double escape_ceiling = 1e6;

    /// `tolerance` targets the per-map (global) error; the integrator's local
    /// error control runs two-plus orders below it to absorb accumulation.
    AdaptiveFlow make() const {
        return AdaptiveFlow(vectorfield, breakpoints, std::max(tolerance / 256.0, 1e-14),
                            escape_ceiling);
    }
};

inline FlowSpec scaled_flow(const ScaledSystem& sys, double tol = 1e-12) {
    FlowSpec fs;
    fs.vectorfield = [sys](double t, const double* y, double* dy) { sys.rhs(t, y, dy); };
    fs.breakpoints = sys.spec.time_breakpoints();
    fs.tolerance = tol;
    return fs;
}

/// The unscaled second-order equation as a first-order system in (x, xdot).
inline FlowSpec original_flow(const EquationSpec& spec, double tol = 1e-12) {
    FlowSpec fs;
    fs.vectorfield = [spec](double t, const double* y, double* dy) {
        const int n = spec.n;
        dy[0] = y[1];
        double f = -std::pow(y[0], 2 * n + 1);
        for (int j = 0; j <= 2 * n; ++j) {
            const auto& P = spec.coefficients[size_t(j)];
            if (P.is_zero()) continue;
            f -= P.eval(t) * std::pow(y[0], j);
        }
        dy[1] = f;
    };
    fs.breakpoints = spec.time_breakpoints();
    fs.tolerance = tol;
    return fs;
}

inline FlowOutcome flow(const FlowSpec& fs, const State2& state, double t0, double t1) {
    return fs.make().flow(state, t0, t1);
}

/// Poincare return map of the 1-periodic system: flow from t_base over one
/// period.
inline FlowOutcome time_one_map(const FlowSpec& fs, const State2& p, double t_base = 0.0) {
    return fs.make().flow(p, t_base, t_base + 1.0);
}

/// Flow the state together with its tangent matrix (variational equations);
/// returns the final state and det DP. Far more accurate than finite
/// differencing for strongly wound maps, since the determinant inherits the
/// integrator tolerance instead of a subtractive-cancellation floor.
inline std::pair<State2, double> variational_time_one_map(const ScaledSystem& sys, const State2& p,
                                                          double tol = 1e-12) {
    const int n = sys.n();
    const auto rhs6 = [&sys, n](double t, const double* y, double* dy) {
        sys.rhs(t, y, dy);
        const double x = y[0];
        const double a12 = std::pow(sys.A, n);
        double a21 = -std::pow(sys.A, n) * (2 * n + 1) * std::pow(x, 2 * n);
        for (int j = 1; j <= 2 * n; ++j) {
            const auto& P = sys.spec.coefficients[size_t(j)];
            if (P.is_zero()) continue;
            a21 -= P.eval(t) * j * std::pow(x, j - 1) * std::pow(sys.A, j - n - 1);
        }
        // J' = A J, J packed column-major as (y2 y3; y4 y5)
        dy[2] = a12 * y[4];
        dy[3] = a12 * y[5];
        dy[4] = a21 * y[2];
        dy[5] = a21 * y[3];
    };
    AdaptiveFlowN<6> fl(rhs6, sys.spec.time_breakpoints(), std::max(tol / 256.0, 1e-14));
    const auto out = fl.flow({p[0], p[1], 1.0, 0.0, 0.0, 1.0}, 0.0, 1.0);
    const double det = out[2] * out[5] - out[3] * out[4];
    return {State2{out[0], out[1]}, det};
}

/// Twist-form decomposition of the time-1 map in final action-angle
/// coordinates: rho1 = rho0 + F(rho0, xi0), xi1 = xi0 + alpha(rho0) + G.
struct TwistMapFit {
    std::vector<double> rho_grid;
    std::vector<double> alpha_samples;   // xi-averaged angle advance per rho
    std::vector<double> alpha_predicted; // time-average of d_rho H0^N
    std::vector<double> F_sup_by_rho, G_sup_by_rho;
    double F_sup = 0.0, G_sup = 0.0;
    double twist_min = 0.0, twist_max = 0.0; // bounds on |d_rho alpha|
    double alpha_discrepancy = 0.0;          // max |measured - predicted|
};

/// Evaluate the time-1 map on an annulus x angle grid in the coordinates of
/// the normal-form state (psi0 composed with the generator chain), average the
/// angle advance over xi for alpha, and record the fluctuations F, G. The
/// integer winding of the angle advance is resolved with the predicted
/// frequency (fluctuations are far below half a turn).
inline TwistMapFit fit_twist_form(const FlowSpec& fs, const ActionAngleChart& chart,
                                  const NormalFormState& state, Window annulus, int nrho = 12,
                                  int nxi = 16) {
    if (!(annulus.lo < annulus.hi) || annulus.lo < state.window.lo ||
        annulus.hi > state.window.hi)
        throw std::invalid_argument("fit_twist_form: annulus not inside the normal-form window");
    if (nrho < 2 || nxi < 2) throw std::invalid_argument("fit_twist_form: grid too coarse");

    const auto integrator = fs.make();
    const auto sl = state.slices_at(0.0); // base times 0 and 1 coincide mod 1

    // predicted frequency: time average of d_rho H0^N (exact on the t grid)
    const auto dH = state.H0k.dmu();
    const auto alpha_pred = [&dH](double rho) {
        double acc = 0.0;
        const int Nt = dH.nt();
        for (int l = 0; l < Nt; ++l) acc += dH.eval(rho, 0.0, double(l) / Nt);
        return acc / Nt;
    };

    TwistMapFit fit;
    for (int a = 0; a < nrho; ++a) {
        const double rho = annulus.lo + annulus.width() * a / (nrho - 1.0);
        const double pred = alpha_pred(rho);
        std::vector<double> drho(size_t(nxi), 0.0), dxi(size_t(nxi), 0.0);
        double mean_dxi = 0.0;
        for (int b = 0; b < nxi; ++b) {
            const double xi = double(b) / nxi;
            const auto [I, th] = NormalFormState::old_coords(sl, rho, xi);
            const auto [x, y] = chart.psi0(I, th);
            const auto out = integrator.flow({x, y}, 0.0, 1.0);
            if (out.escaped)
                throw std::runtime_error("fit_twist_form: orbit escaped during map evaluation");
            const auto [I1, th1] = chart.psi0_inverse(out.y[0], out.y[1]);
            const auto [rho1, xi1] = NormalFormState::new_coords(sl, I1, th1);
            drho[size_t(b)] = rho1 - rho;
            const double frac = xi1 - xi - std::floor(xi1 - xi);
            dxi[size_t(b)] = frac + std::round(pred - frac); // unwind with the prediction
            mean_dxi += dxi[size_t(b)];
        }
        mean_dxi /= nxi;

        double fs_sup = 0.0, gs_sup = 0.0;
        for (int b = 0; b < nxi; ++b) {
            fs_sup = std::max(fs_sup, std::fabs(drho[size_t(b)]));
            gs_sup = std::max(gs_sup, std::fabs(dxi[size_t(b)] - mean_dxi));
        }
        fit.rho_grid.push_back(rho);
        fit.alpha_samples.push_back(mean_dxi);
        fit.alpha_predicted.push_back(pred);
        fit.F_sup_by_rho.push_back(fs_sup);
        fit.G_sup_by_rho.push_back(gs_sup);
        fit.F_sup = std::max(fit.F_sup, fs_sup);
        fit.G_sup = std::max(fit.G_sup, gs_sup);
        fit.alpha_discrepancy = std::max(fit.alpha_discrepancy, std::fabs(mean_dxi - pred));
    }

    fit.twist_min = 1e300;
    for (int a = 0; a + 1 < nrho; ++a) {
        const double slope = (fit.alpha_samples[size_t(a + 1)] - fit.alpha_samples[size_t(a)]) /
                             (fit.rho_grid[size_t(a + 1)] - fit.rho_grid[size_t(a)]);
        fit.twist_min = std::min(fit.twist_min, std::fabs(slope));
        fit.twist_max = std::max(fit.twist_max, std::fabs(slope));
    }
    if (!(fit.twist_min > 0.0))
        throw std::runtime_error("fit_twist_form: twist lost on the annulus");
    return fit;
}

} // namespace duffing
