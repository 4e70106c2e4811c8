#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace duffing {

inline constexpr double two_pi = 6.283185307179586476925286766559;

using cplx = std::complex<double>;

/// Finite Fourier series on the circle: p(t) = sum_{|k|<=N} c_k e^{2 pi i k t},
/// with conjugate symmetry c_{-k} = conj(c_k) so p is real on the real axis.
/// Entire as a function of complex t.
class TrigPolynomial {
public:
    TrigPolynomial() : degree_(0), c_(1, cplx(0.0, 0.0)) {}

    explicit TrigPolynomial(std::vector<cplx> coeffs) : c_(std::move(coeffs)) {
        if (c_.size() % 2 == 0) throw std::invalid_argument("TrigPolynomial: even coefficient count");
        degree_ = int(c_.size() / 2);
        enforce_symmetry();
    }

    static TrigPolynomial constant(double v) {
        return TrigPolynomial(std::vector<cplx>{cplx(v, 0.0)});
    }

    int degree() const { return degree_; }

    cplx coeff(int k) const {
        if (std::abs(k) > degree_) return cplx(0.0, 0.0);
        return c_[size_t(k + degree_)];
    }

    void set_coeff(int k, cplx v) {
        if (std::abs(k) > degree_) throw std::out_of_range("TrigPolynomial::set_coeff");
        c_[size_t(k + degree_)] = v;
        c_[size_t(-k + degree_)] = std::conj(v);
    }

    double eval(double t) const {
        // real form: c_0 + 2 Re sum_{k>=1} c_k e^{2 pi i k t}
        double acc = c_[size_t(degree_)].real();
        const cplx rot = std::polar(1.0, two_pi * t);
        cplx z = rot;
        for (int k = 1; k <= degree_; ++k) {
            acc += 2.0 * (coeff(k) * z).real();
            z *= rot;
        }
        return acc;
    }

    cplx eval(cplx t) const {
        const cplx iw(0.0, two_pi);
        cplx acc(0.0, 0.0);
        for (int k = -degree_; k <= degree_; ++k)
            acc += coeff(k) * std::exp(iw * double(k) * t);
        return acc;
    }

    double operator()(double t) const { return eval(t); }

    TrigPolynomial derivative() const {
        std::vector<cplx> d(c_.size());
        for (int k = -degree_; k <= degree_; ++k)
            d[size_t(k + degree_)] = cplx(0.0, two_pi * k) * coeff(k);
        return TrigPolynomial(std::move(d));
    }

    /// sum_k |c_k| e^{2 pi |k| s}: an upper bound for |p| on the strip |Im t| <= s.
    double strip_envelope(double s) const {
        double acc = 0.0;
        for (int k = -degree_; k <= degree_; ++k)
            acc += std::abs(coeff(k)) * std::exp(two_pi * std::abs(k) * s);
        return acc;
    }

    double sup_real(int samples = 0) const {
        const int m = samples > 0 ? samples : std::max(256, 16 * degree_ + 1);
        double best = 0.0;
        for (int i = 0; i < m; ++i)
            best = std::max(best, std::fabs(eval(double(i) / m)));
        return best;
    }

    TrigPolynomial& operator+=(const TrigPolynomial& o) {
        if (o.degree_ > degree_) grow(o.degree_);
        for (int k = -o.degree_; k <= o.degree_; ++k)
            c_[size_t(k + degree_)] += o.coeff(k);
        return *this;
    }

    TrigPolynomial& operator*=(double a) {
        for (auto& v : c_) v *= a;
        return *this;
    }

    friend TrigPolynomial operator+(TrigPolynomial a, const TrigPolynomial& b) { return a += b; }
    friend TrigPolynomial operator*(double a, TrigPolynomial p) { return p *= a; }

private:
    void enforce_symmetry() {
        for (int k = 0; k <= degree_; ++k) {
            const cplx avg = 0.5 * (c_[size_t(k + degree_)] + std::conj(c_[size_t(-k + degree_)]));
            c_[size_t(k + degree_)] = avg;
            c_[size_t(-k + degree_)] = std::conj(avg);
        }
    }

    void grow(int new_degree) {
        std::vector<cplx> nc(size_t(2 * new_degree + 1), cplx(0.0, 0.0));
        for (int k = -degree_; k <= degree_; ++k)
            nc[size_t(k + new_degree)] = coeff(k);
        c_ = std::move(nc);
        degree_ = new_degree;
    }

    int degree_;
    std::vector<cplx> c_;
};

/// Fourier series with an arbitrary period T: q(t) = sum c_k e^{2 pi i k t / T}.
/// Used for the auxiliary orbit, which is T0-periodic and analytic.
class PeriodicSeries {
public:
    PeriodicSeries() : period_(1.0) {}
    PeriodicSeries(double period, TrigPolynomial p) : period_(period), p_(std::move(p)) {
        if (period <= 0.0) throw std::invalid_argument("PeriodicSeries: period <= 0");
    }

    double period() const { return period_; }
    const TrigPolynomial& series() const { return p_; }

    double eval(double t) const { return p_.eval(t / period_); }
    double operator()(double t) const { return eval(t); }

    PeriodicSeries derivative() const {
        TrigPolynomial d = p_.derivative();
        d *= 1.0 / period_;
        return PeriodicSeries(period_, std::move(d));
    }

private:
    double period_;
    TrigPolynomial p_;
};

/// Project real samples f(i/n), i = 0..n-1 onto modes |k| <= degree by the
/// discrete (trapezoid) transform. Exact when f is a trig polynomial with
/// degree < n/2, spectrally accurate for smooth periodic f.
inline TrigPolynomial project_samples(const std::vector<double>& samples, int degree) {
    const int n = int(samples.size());
    if (n < 2 * degree + 1) throw std::invalid_argument("project_samples: too few samples");
    std::vector<cplx> c(size_t(2 * degree + 1), cplx(0.0, 0.0));
    for (int k = 0; k <= degree; ++k) {
        cplx acc(0.0, 0.0);
        const cplx rot = std::polar(1.0, -two_pi * k / n);
        cplx z(1.0, 0.0);
        for (int i = 0; i < n; ++i) {
            if ((i & 255) == 0) z = std::polar(1.0, -two_pi * k * double(i) / n);
            acc += samples[size_t(i)] * z;
            z *= rot;
        }
        acc /= double(n);
        c[size_t(k + degree)] = acc;
        c[size_t(-k + degree)] = std::conj(acc);
    }
    return TrigPolynomial(std::move(c));
}

} // namespace duffing
