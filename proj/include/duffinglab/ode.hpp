#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_odeiv2.h>

namespace duffing {

using State2 = std::array<double, 2>;

struct FlowOutcome {
    State2 y{};
    bool escaped = false;
    double escape_time = 0.0;
};

/// Numerical failure inside an integrator (step-size underflow etc.).
struct IntegrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {
struct GslNoAbort {
    GslNoAbort() { gsl_set_error_handler_off(); }
};
inline void install_gsl_handler() { static GslNoAbort once; }

struct RhsHolder {
    const std::function<void(double, const double*, double*)>* rhs;
};

inline int gsl_trampoline(double t, const double y[], double dydt[], void* params) {
    auto* h = static_cast<RhsHolder*>(params);
    (*h->rhs)(t, y, dydt);
    return GSL_SUCCESS;
}
} // namespace detail

/// Adaptive Prince-Dormand 8(9) flow for planar nonautonomous systems.
/// Breakpoints are times (mod 1) where the vector field jumps in t; the
/// integration restarts there so the high order survives step coefficients.
/// An orbit leaving |x|+|y| > escape_ceiling terminates with an escape record
/// rather than an error.
class AdaptiveFlow {
public:
    using Rhs = std::function<void(double, const double*, double*)>;
    using Observer = std::function<void(double, const State2&)>;

    AdaptiveFlow(Rhs rhs, std::vector<double> breakpoints_mod1 = {}, double tol = 1e-12,
                 double escape_ceiling = 1e6)
        : rhs_(std::move(rhs)),
          breaks_(std::move(breakpoints_mod1)),
          tol_(tol),
          ceiling_(escape_ceiling) {
        if (!(tol_ > 0.0)) throw std::invalid_argument("AdaptiveFlow: tol must be positive");
        detail::install_gsl_handler();
    }

    double tolerance() const { return tol_; }
    void set_tolerance(double tol) { tol_ = tol; }

    FlowOutcome flow(const State2& y0, double t0, double t1,
                     const Observer& observer = nullptr) const {
        if (t1 < t0) throw std::invalid_argument("AdaptiveFlow::flow: t1 < t0");
        FlowOutcome out;
        out.y = y0;
        if (t1 == t0) return out;

        detail::RhsHolder holder{&rhs_};
        gsl_odeiv2_system sys{detail::gsl_trampoline, nullptr, 2, &holder};
        gsl_odeiv2_step* step = gsl_odeiv2_step_alloc(gsl_odeiv2_step_rk8pd, 2);
        gsl_odeiv2_control* ctrl = gsl_odeiv2_control_y_new(tol_, tol_);
        gsl_odeiv2_evolve* ev = gsl_odeiv2_evolve_alloc(2);

        double t = t0;
        double h = std::min(1e-3, t1 - t0);
        bool failed = false;
        for (double stop : segment_stops(t0, t1)) {
            while (t < stop) {
                const int status =
                    gsl_odeiv2_evolve_apply(ev, ctrl, step, &sys, &t, stop, &h, out.y.data());
                if (status != GSL_SUCCESS) { failed = true; break; }
                if (observer) observer(t, out.y);
                if (std::fabs(out.y[0]) + std::fabs(out.y[1]) > ceiling_) {
                    out.escaped = true;
                    out.escape_time = t;
                    break;
                }
            }
            if (failed || out.escaped) break;
            h = std::min(h, 1e-3); // fresh step across a coefficient jump
        }

        gsl_odeiv2_evolve_free(ev);
        gsl_odeiv2_control_free(ctrl);
        gsl_odeiv2_step_free(step);
        if (failed) throw IntegrationError("AdaptiveFlow: gsl step failure");
        return out;
    }

private:
    std::vector<double> segment_stops(double t0, double t1) const {
        std::vector<double> stops;
        if (!breaks_.empty()) {
            const double m0 = std::floor(t0);
            for (double base = m0; base < t1 + 1.0; base += 1.0) {
                for (double b : breaks_) {
                    const double c = base + b;
                    if (c > t0 + 1e-14 && c < t1 - 1e-14) stops.push_back(c);
                }
            }
            std::sort(stops.begin(), stops.end());
        }
        stops.push_back(t1);
        return stops;
    }

    Rhs rhs_;
    std::vector<double> breaks_;
    double tol_;
    double ceiling_;
};

/// Adaptive Prince-Dormand flow for small fixed-dimension systems (used for
/// variational/tangent integrations alongside a planar state).
template <std::size_t N>
class AdaptiveFlowN {
public:
    using StateN = std::array<double, N>;
    using Rhs = std::function<void(double, const double*, double*)>;

    AdaptiveFlowN(Rhs rhs, std::vector<double> breakpoints_mod1 = {}, double tol = 1e-12)
        : rhs_(std::move(rhs)), breaks_(std::move(breakpoints_mod1)), tol_(tol) {
        if (!(tol_ > 0.0)) throw std::invalid_argument("AdaptiveFlowN: tol must be positive");
        detail::install_gsl_handler();
    }

    StateN flow(const StateN& y0, double t0, double t1) const {
        if (t1 < t0) throw std::invalid_argument("AdaptiveFlowN::flow: t1 < t0");
        StateN y = y0;
        if (t1 == t0) return y;
        detail::RhsHolder holder{&rhs_};
        gsl_odeiv2_system sys{detail::gsl_trampoline, nullptr, N, &holder};
        gsl_odeiv2_step* step = gsl_odeiv2_step_alloc(gsl_odeiv2_step_rk8pd, N);
        gsl_odeiv2_control* ctrl = gsl_odeiv2_control_y_new(tol_, tol_);
        gsl_odeiv2_evolve* ev = gsl_odeiv2_evolve_alloc(N);
        double t = t0;
        double h = std::min(1e-3, t1 - t0);
        bool failed = false;
        for (double stop : stops(t0, t1)) {
            while (t < stop) {
                if (gsl_odeiv2_evolve_apply(ev, ctrl, step, &sys, &t, stop, &h, y.data()) !=
                    GSL_SUCCESS) {
                    failed = true;
                    break;
                }
            }
            if (failed) break;
            h = std::min(h, 1e-3);
        }
        gsl_odeiv2_evolve_free(ev);
        gsl_odeiv2_control_free(ctrl);
        gsl_odeiv2_step_free(step);
        if (failed) throw IntegrationError("AdaptiveFlowN: gsl step failure");
        return y;
    }

private:
    std::vector<double> stops(double t0, double t1) const {
        std::vector<double> s;
        if (!breaks_.empty()) {
            for (double base = std::floor(t0); base < t1 + 1.0; base += 1.0)
                for (double b : breaks_) {
                    const double c = base + b;
                    if (c > t0 + 1e-14 && c < t1 - 1e-14) s.push_back(c);
                }
            std::sort(s.begin(), s.end());
        }
        s.push_back(t1);
        return s;
    }

    Rhs rhs_;
    std::vector<double> breaks_;
    double tol_;
};

/// Fixed-step 4th-order symplectic splitting (Yoshida composition of leapfrog)
/// for H = mass * y^2/2 + U(x,t): structure-preserving cross-check for long
/// orbit statistics.
class SymplecticFlow {
public:
    using Force = std::function<double(double, double)>; // -dU/dx (x, t)

    SymplecticFlow(double mass, Force force, double dt)
        : mass_(mass), force_(std::move(force)), dt_(dt) {
        if (!(dt > 0.0)) throw std::invalid_argument("SymplecticFlow: dt must be positive");
    }

    State2 flow(State2 y, double t0, double t1) const {
        const long nsteps = std::lround(std::ceil((t1 - t0) / dt_));
        const double dt = (t1 - t0) / double(nsteps);
        static const double w1 = 1.0 / (2.0 - std::cbrt(2.0));
        static const double w0 = 1.0 - 2.0 * w1;
        double t = t0;
        for (long i = 0; i < nsteps; ++i) {
            leapfrog(y, t, w1 * dt);
            leapfrog(y, t, w0 * dt);
            leapfrog(y, t, w1 * dt);
        }
        return y;
    }

private:
    void leapfrog(State2& y, double& t, double dt) const {
        y[1] += 0.5 * dt * force_(y[0], t);
        y[0] += dt * mass_ * y[1];
        t += dt;
        y[1] += 0.5 * dt * force_(y[0], t);
    }

    double mass_;
    Force force_;
    double dt_;
};

} // namespace duffing
