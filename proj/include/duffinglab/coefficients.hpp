#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "duffinglab/fourier.hpp"

namespace duffing {

/// Declared regularity of a periodic coefficient.
struct Regularity {
    enum class Kind { holder, integrable };
    Kind kind = Kind::integrable;
    double exponent = 0.0; // Hoelder exponent, meaningful for kind == holder

    static Regularity holder(double gamma) {
        if (!(gamma > 0.0 && gamma <= 1.0))
            throw std::invalid_argument("Regularity::holder: gamma must be in (0,1]");
        return {Kind::holder, gamma};
    }
    static Regularity integrable() { return {Kind::integrable, 0.0}; }
    bool is_holder() const { return kind == Kind::holder; }
};

/// f(t) = sum_m amp_m cos(2 pi k_m t + phase_m).
struct TrigTerms {
    struct Term {
        int freq;
        double amplitude;
        double phase;
    };
    double mean = 0.0;
    std::vector<Term> terms;
};

/// Lacunary cosine series sum_{k < terms} base^{-gamma k} cos(2 pi base^k t + phase_k):
/// the standard C^gamma exemplar (nowhere-better-than-gamma roughness as terms grow).
struct WeierstrassSpec {
    double gamma;
    int base;
    int terms;
    std::vector<double> phases; // size == terms
    double amplitude = 1.0;     // overall scale
};

/// Right-continuous step function: value[i] on [breaks[i], breaks[i+1]),
/// breaks[0] == 0, last piece wraps to 1. The simplest L^1 representative.
struct StepSpec {
    std::vector<double> breaks; // sorted, breaks[0] == 0, all in [0,1)
    std::vector<double> values; // same size as breaks
};

/// A real 1-periodic function with a declared regularity class.
class PeriodicCoefficient {
public:
    using Rep = std::variant<TrigTerms, WeierstrassSpec, StepSpec>;

    PeriodicCoefficient() : rep_(TrigTerms{}), reg_(Regularity::holder(1.0)) {}
    PeriodicCoefficient(Rep rep, Regularity reg) : rep_(std::move(rep)), reg_(reg) {}

    const Regularity& declared_class() const { return reg_; }
    const Rep& representation() const { return rep_; }

    bool is_zero() const {
        if (const auto* tt = std::get_if<TrigTerms>(&rep_))
            return tt->mean == 0.0 && tt->terms.empty();
        return false;
    }

    double eval(double t) const {
        t -= std::floor(t);
        if (const auto* tt = std::get_if<TrigTerms>(&rep_)) {
            double acc = tt->mean;
            for (const auto& h : tt->terms)
                acc += h.amplitude * std::cos(two_pi * h.freq * t + h.phase);
            return acc;
        }
        if (const auto* w = std::get_if<WeierstrassSpec>(&rep_)) {
            double acc = 0.0;
            double freq = 1.0, amp = w->amplitude;
            const double decay = std::pow(double(w->base), -w->gamma);
            for (int k = 0; k < w->terms; ++k) {
                acc += amp * std::cos(two_pi * freq * t + w->phases[size_t(k)]);
                freq *= w->base;
                amp *= decay;
            }
            return acc;
        }
        const auto& s = std::get<StepSpec>(rep_);
        auto it = std::upper_bound(s.breaks.begin(), s.breaks.end(), t);
        const size_t idx = size_t(it - s.breaks.begin()) - 1;
        return s.values[idx];
    }

    double operator()(double t) const { return eval(t); }

    /// Exact Fourier coefficient c_k with f(t) = sum c_k e^{2 pi i k t}.
    cplx fourier_coefficient(int k) const {
        if (const auto* tt = std::get_if<TrigTerms>(&rep_)) {
            if (k == 0) return cplx(tt->mean, 0.0);
            cplx acc(0.0, 0.0);
            for (const auto& h : tt->terms) {
                if (h.freq == k) acc += 0.5 * h.amplitude * std::polar(1.0, h.phase);
                if (h.freq == -k) acc += 0.5 * h.amplitude * std::polar(1.0, -h.phase);
            }
            return acc;
        }
        if (const auto* w = std::get_if<WeierstrassSpec>(&rep_)) {
            if (k == 0) return cplx(0.0, 0.0);
            cplx acc(0.0, 0.0);
            double freq = 1.0, amp = w->amplitude;
            const double decay = std::pow(double(w->base), -w->gamma);
            for (int j = 0; j < w->terms; ++j) {
                const long f = long(std::llround(freq));
                if (f == k) acc += 0.5 * amp * std::polar(1.0, w->phases[size_t(j)]);
                if (f == -long(k)) acc += 0.5 * amp * std::polar(1.0, -w->phases[size_t(j)]);
                freq *= w->base;
                amp *= decay;
            }
            return acc;
        }
        const auto& s = std::get<StepSpec>(rep_);
        const size_t m = s.breaks.size();
        if (k == 0) {
            double acc = 0.0;
            for (size_t i = 0; i < m; ++i) {
                const double hi = (i + 1 < m) ? s.breaks[i + 1] : 1.0;
                acc += s.values[i] * (hi - s.breaks[i]);
            }
            return cplx(acc, 0.0);
        }
        // integral of v e^{-2 pi i k t} over [a,b): v (e^{-2 pi i k a} - e^{-2 pi i k b}) / (2 pi i k)
        cplx acc(0.0, 0.0);
        const cplx den(0.0, two_pi * k);
        for (size_t i = 0; i < m; ++i) {
            const double hi = (i + 1 < m) ? s.breaks[i + 1] : 1.0;
            acc += s.values[i] * (std::polar(1.0, -two_pi * k * s.breaks[i]) - std::polar(1.0, -two_pi * k * hi)) / den;
        }
        return acc;
    }

    /// Largest |k| with a (possibly) nonzero Fourier coefficient; nullopt if
    /// the spectrum is unbounded (step functions).
    std::optional<long> spectral_cutoff() const {
        if (const auto* tt = std::get_if<TrigTerms>(&rep_)) {
            long m = 0;
            for (const auto& h : tt->terms) m = std::max(m, long(std::abs(h.freq)));
            return m;
        }
        if (const auto* w = std::get_if<WeierstrassSpec>(&rep_)) {
            double f = 1.0;
            for (int j = 1; j < w->terms; ++j) f *= w->base;
            return long(std::llround(f));
        }
        return std::nullopt;
    }

    /// Jump locations in [0,1) (integration must restart there).
    std::vector<double> breakpoints() const {
        if (const auto* s = std::get_if<StepSpec>(&rep_)) return s->breaks;
        return {};
    }

private:
    Rep rep_;
    Regularity reg_;
};

inline PeriodicCoefficient make_trig(double mean, std::vector<TrigTerms::Term> terms) {
    return PeriodicCoefficient(TrigTerms{mean, std::move(terms)}, Regularity::holder(1.0));
}

inline PeriodicCoefficient make_zero() { return make_trig(0.0, {}); }

inline PeriodicCoefficient make_weierstrass(double gamma, int base, int terms,
                                            std::vector<double> phases = {},
                                            double amplitude = 1.0) {
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("make_weierstrass: gamma must be in (0,1)");
    if (base < 2) throw std::invalid_argument("make_weierstrass: base must be >= 2");
    if (terms < 1) throw std::invalid_argument("make_weierstrass: terms must be >= 1");
    if (phases.empty()) phases.assign(size_t(terms), 0.0);
    if (int(phases.size()) != terms)
        throw std::invalid_argument("make_weierstrass: phases size mismatch");
    return PeriodicCoefficient(WeierstrassSpec{gamma, base, terms, std::move(phases), amplitude},
                               Regularity::holder(gamma));
}

inline PeriodicCoefficient make_step(std::vector<double> breaks, std::vector<double> values) {
    if (breaks.empty() || breaks.size() != values.size())
        throw std::invalid_argument("make_step: breaks/values size mismatch");
    if (breaks.front() != 0.0) throw std::invalid_argument("make_step: breaks must start at 0");
    if (!std::is_sorted(breaks.begin(), breaks.end()) || breaks.back() >= 1.0)
        throw std::invalid_argument("make_step: breaks must be sorted in [0,1)");
    return PeriodicCoefficient(StepSpec{std::move(breaks), std::move(values)},
                               Regularity::integrable());
}

/// Dyadic-pair estimate of the C^gamma seminorm: max over base points i/res and
/// separations 2^{-m} >= 1/res of |f(x+h)-f(x)| / h^gamma. Nested grids make the
/// estimate monotone nondecreasing in res (for res a power of two).
inline double holder_seminorm_estimate(const PeriodicCoefficient& f, double gamma, int resolution) {
    if (!(gamma > 0.0 && gamma <= 1.0))
        throw std::invalid_argument("holder_seminorm_estimate: gamma must be in (0,1]");
    if (resolution < 16)
        throw std::invalid_argument("holder_seminorm_estimate: resolution must be >= 16");
    double best = 0.0;
    for (double h = 0.5; h * resolution >= 1.0 - 1e-12; h *= 0.5) {
        const double hpow = std::pow(h, gamma);
        for (int i = 0; i < resolution; ++i) {
            const double x = double(i) / resolution;
            best = std::max(best, std::fabs(f.eval(x + h) - f.eval(x)) / hpow);
        }
    }
    return best;
}

/// The Duffing equation x'' + x^{2n+1} + sum_j P_j(t) x^j = 0 with its 2n+1
/// time-periodic coefficients. Hypotheses: gamma > 1 - 1/n and Hoelder class
/// on every slot j >= n+1.
struct EquationSpec {
    int n;
    double gamma;
    std::vector<PeriodicCoefficient> coefficients; // index j = 0..2n

    EquationSpec(int n_, double gamma_, std::vector<PeriodicCoefficient> coeffs)
        : n(n_), gamma(gamma_), coefficients(std::move(coeffs)) {
        if (n < 1) throw std::invalid_argument("EquationSpec: n must be >= 1");
        if (!(gamma > 1.0 - 1.0 / n && gamma <= 1.0))
            throw std::invalid_argument("EquationSpec: hypothesis gamma > 1 - 1/n violated");
        if (int(coefficients.size()) != 2 * n + 1)
            throw std::invalid_argument("EquationSpec: expected 2n+1 coefficient slots");
        for (int j = n + 1; j <= 2 * n; ++j) {
            const auto& cls = coefficients[size_t(j)].declared_class();
            if (!cls.is_holder() || cls.exponent < gamma - 1e-12)
                throw std::invalid_argument(
                    "EquationSpec: slots j >= n+1 must carry Hoelder class with exponent >= gamma");
        }
    }

    std::vector<double> time_breakpoints() const {
        std::vector<double> out;
        for (const auto& p : coefficients)
            for (double b : p.breakpoints()) out.push_back(b);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }
};

} // namespace duffing
