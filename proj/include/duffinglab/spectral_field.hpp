#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include "duffinglab/fourier.hpp"

namespace duffing {

struct Window {
    double lo = 0.0, hi = 0.0;
    double width() const { return hi - lo; }
    bool contains(double x) const { return x >= lo && x <= hi; }
};

namespace cheb {

/// Chebyshev-Lobatto nodes on [lo,hi], i = 0..M, descending from hi to lo.
inline std::vector<double> nodes(const Window& w, int M) {
    std::vector<double> out(size_t(M) + 1);
    for (int i = 0; i <= M; ++i)
        out[size_t(i)] = 0.5 * (w.lo + w.hi) + 0.5 * w.width() * std::cos(M_PI * i / M);
    return out;
}

/// DCT-I style transform: values at Lobatto nodes -> coefficients of
/// f = sum_{m=0}^{M} a_m T_m.
template <class T>
inline std::vector<T> transform(const std::vector<T>& v) {
    const int M = int(v.size()) - 1;
    std::vector<T> a(size_t(M) + 1);
    for (int m = 0; m <= M; ++m) {
        T acc = 0.5 * (v[0] + (m % 2 == 0 ? v[size_t(M)] : -v[size_t(M)]));
        for (int i = 1; i < M; ++i) acc += v[size_t(i)] * std::cos(M_PI * i * m / M);
        acc *= 2.0 / M;
        if (m == 0 || m == M) acc *= 0.5;
        a[size_t(m)] = acc;
    }
    return a;
}

template <class T>
inline T clenshaw(const std::vector<T>& a, double xhat) {
    T b1 = T(0), b2 = T(0);
    for (int m = int(a.size()) - 1; m >= 1; --m) {
        const T b0 = a[size_t(m)] + 2.0 * xhat * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    return a[0] + xhat * b1 - b2;
}

/// Coefficients of f' on [-1,1] (caller rescales by 2/width).
template <class T>
inline std::vector<T> derivative(const std::vector<T>& a) {
    const int M = int(a.size()) - 1;
    std::vector<T> b(size_t(M) + 1, T(0));
    if (M == 0) return b;
    b[size_t(M - 1)] = 2.0 * double(M) * a[size_t(M)];
    for (int m = M - 2; m >= 0; --m)
        b[size_t(m)] = (m + 2 <= M ? b[size_t(m + 2)] : T(0)) + 2.0 * (m + 1.0) * a[size_t(m + 1)];
    b[0] *= 0.5;
    return b;
}

} // namespace cheb

/// Real field f(mu, theta, t), 1-periodic in theta and t, smooth in mu over a
/// window: stored spectrally as Chebyshev (mu) x Fourier (theta) x Fourier (t).
/// Reality: a(-ktheta, -kt) = conj(a(ktheta, kt)).
class AngleTimeField {
public:
    AngleTimeField() = default;

    /// Sample f on the tensor grid (Lobatto x equispaced x equispaced) and
    /// transform. Grid sizes 2K+1 make the Fourier transforms interpolatory.
    template <class F>
    static AngleTimeField sample(const Window& w, int cheb_order, int ktheta, int kt, F&& f) {
        AngleTimeField out;
        out.init(w, cheb_order, ktheta, kt);
        const int M = cheb_order, Nth = out.ntheta(), Nt = out.nt();
        const auto mu_nodes = cheb::nodes(w, M);
        std::vector<double> vals(size_t(M + 1) * size_t(Nth) * size_t(Nt));
        for (int i = 0; i <= M; ++i)
            for (int j = 0; j < Nth; ++j)
                for (int l = 0; l < Nt; ++l)
                    vals[out.vidx(i, j, l)] =
                        f(mu_nodes[size_t(i)], double(j) / Nth, double(l) / Nt);
        out.from_values(vals);
        return out;
    }

    static AngleTimeField zero(const Window& w, int cheb_order, int ktheta, int kt) {
        AngleTimeField out;
        out.init(w, cheb_order, ktheta, kt);
        return out;
    }

    const Window& window() const { return window_; }
    int cheb_order() const { return M_; }
    int ktheta_max() const { return Kth_; }
    int kt_max() const { return Kt_; }
    int ntheta() const { return 2 * Kth_ + 1; }
    int nt() const { return 2 * Kt_ + 1; }

    cplx& coeff(int m, int kth, int kt) { return a_[cidx(m, kth, kt)]; }
    const cplx& coeff(int m, int kth, int kt) const { return a_[cidx(m, kth, kt)]; }

    double eval(double mu, double theta, double t) const {
        const double xh = xhat(mu);
        std::vector<cplx> line(size_t(M_) + 1);
        cplx acc(0.0, 0.0);
        for (int kt = -Kt_; kt <= Kt_; ++kt) {
            const cplx et = std::polar(1.0, two_pi * kt * t);
            for (int kth = -Kth_; kth <= Kth_; ++kth) {
                for (int m = 0; m <= M_; ++m) line[size_t(m)] = coeff(m, kth, kt);
                acc += cheb::clenshaw(line, xh) * et * std::polar(1.0, two_pi * kth * theta);
            }
        }
        return acc.real();
    }

    /// Collapse the t-dependence at fixed t: a 2-D evaluator for hot loops.
    class TimeSlice {
    public:
        double eval(double mu, double theta) const {
            const double xh = (2.0 * mu - w_.lo - w_.hi) / w_.width();
            cplx acc(0.0, 0.0);
            for (int kth = -K_; kth <= K_; ++kth)
                acc += cheb::clenshaw(b_[size_t(kth + K_)], xh) *
                       std::polar(1.0, two_pi * kth * theta);
            return acc.real();
        }

    private:
        friend class AngleTimeField;
        Window w_;
        int K_ = 0;
        std::vector<std::vector<cplx>> b_; // per theta-mode Chebyshev lines
    };

    TimeSlice at_time(double t) const {
        TimeSlice s;
        s.w_ = window_;
        s.K_ = Kth_;
        s.b_.assign(size_t(ntheta()), std::vector<cplx>(size_t(M_) + 1, cplx(0, 0)));
        for (int kth = -Kth_; kth <= Kth_; ++kth)
            for (int kt = -Kt_; kt <= Kt_; ++kt) {
                const cplx et = std::polar(1.0, two_pi * kt * t);
                for (int m = 0; m <= M_; ++m)
                    s.b_[size_t(kth + Kth_)][size_t(m)] += coeff(m, kth, kt) * et;
            }
        return s;
    }

    AngleTimeField dtheta() const {
        AngleTimeField out = *this;
        for (int kt = -Kt_; kt <= Kt_; ++kt)
            for (int kth = -Kth_; kth <= Kth_; ++kth) {
                const cplx fac(0.0, two_pi * kth);
                for (int m = 0; m <= M_; ++m) out.coeff(m, kth, kt) *= fac;
            }
        return out;
    }

    AngleTimeField dt() const {
        AngleTimeField out = *this;
        for (int kt = -Kt_; kt <= Kt_; ++kt)
            for (int kth = -Kth_; kth <= Kth_; ++kth) {
                const cplx fac(0.0, two_pi * kt);
                for (int m = 0; m <= M_; ++m) out.coeff(m, kth, kt) *= fac;
            }
        return out;
    }

    AngleTimeField dmu() const {
        AngleTimeField out = *this;
        const double scale = 2.0 / window_.width();
        std::vector<cplx> line(size_t(M_) + 1);
        for (int kt = -Kt_; kt <= Kt_; ++kt)
            for (int kth = -Kth_; kth <= Kth_; ++kth) {
                for (int m = 0; m <= M_; ++m) line[size_t(m)] = coeff(m, kth, kt);
                auto d = cheb::derivative(line);
                for (int m = 0; m <= M_; ++m) out.coeff(m, kth, kt) = d[size_t(m)] * scale;
            }
        return out;
    }

    /// theta zero-mode only (exact angular average in the spectral basis).
    AngleTimeField theta_average() const {
        AngleTimeField out = zero(window_, M_, Kth_, Kt_);
        for (int kt = -Kt_; kt <= Kt_; ++kt)
            for (int m = 0; m <= M_; ++m) out.coeff(m, 0, kt) = coeff(m, 0, kt);
        return out;
    }

    bool theta_independent(double tol = 0.0) const {
        double mass = 0.0;
        for (int kt = -Kt_; kt <= Kt_; ++kt)
            for (int kth = -Kth_; kth <= Kth_; ++kth) {
                if (kth == 0) continue;
                for (int m = 0; m <= M_; ++m) mass = std::max(mass, std::abs(coeff(m, kth, kt)));
            }
        return mass <= tol;
    }

    /// Max |f| over an oversampled real grid.
    double sup_abs(int oversample = 2) const {
        const auto v = values_on_grid(oversample * M_, oversample * ntheta(), oversample * nt());
        double best = 0.0;
        for (double x : v) best = std::max(best, std::fabs(x));
        return best;
    }

    /// Relative spectral mass in the trailing (top-quarter) modes of each axis:
    /// an adequacy diagnostic for the chosen truncation.
    double tail_fraction() const {
        double total = 0.0, tail = 0.0;
        for (int kt = -Kt_; kt <= Kt_; ++kt)
            for (int kth = -Kth_; kth <= Kth_; ++kth)
                for (int m = 0; m <= M_; ++m) {
                    const double w = std::abs(coeff(m, kth, kt));
                    total += w;
                    if (std::abs(kth) > (3 * Kth_) / 4 || std::abs(kt) > (3 * Kt_) / 4 ||
                        m > (3 * M_) / 4)
                        tail += w;
                }
        return total > 0.0 ? tail / total : 0.0;
    }

    AngleTimeField& operator+=(const AngleTimeField& o) {
        check_same_grid(o);
        for (size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
        return *this;
    }
    AngleTimeField& operator-=(const AngleTimeField& o) {
        check_same_grid(o);
        for (size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
        return *this;
    }
    AngleTimeField& operator*=(double s) {
        for (auto& v : a_) v *= s;
        return *this;
    }
    friend AngleTimeField operator+(AngleTimeField a, const AngleTimeField& b) { return a += b; }
    friend AngleTimeField operator-(AngleTimeField a, const AngleTimeField& b) { return a -= b; }

    /// Real values on an arbitrary tensor grid (Lobatto x equispaced x equispaced).
    std::vector<double> values_on_grid(int Mout, int nth_out, int nt_out) const {
        // axis-wise inverse transforms, t then theta then mu
        const int Nth = ntheta(), Nt = nt();
        std::vector<cplx> t_done(size_t(M_ + 1) * size_t(Nth) * size_t(nt_out));
        for (int i = 0; i <= M_; ++i)
            for (int kth = -Kth_; kth <= Kth_; ++kth)
                for (int l = 0; l < nt_out; ++l) {
                    cplx acc(0, 0);
                    for (int kt = -Kt_; kt <= Kt_; ++kt)
                        acc += coeff(i, kth, kt) * std::polar(1.0, two_pi * kt * l / double(nt_out));
                    t_done[(size_t(i) * size_t(Nth) + size_t(kth + Kth_)) * size_t(nt_out) +
                           size_t(l)] = acc;
                }
        std::vector<cplx> th_done(size_t(M_ + 1) * size_t(nth_out) * size_t(nt_out));
        for (int i = 0; i <= M_; ++i)
            for (int l = 0; l < nt_out; ++l)
                for (int j = 0; j < nth_out; ++j) {
                    cplx acc(0, 0);
                    for (int kth = -Kth_; kth <= Kth_; ++kth)
                        acc += t_done[(size_t(i) * size_t(Nth) + size_t(kth + Kth_)) *
                                          size_t(nt_out) +
                                      size_t(l)] *
                               std::polar(1.0, two_pi * kth * j / double(nth_out));
                    th_done[(size_t(i) * size_t(nth_out) + size_t(j)) * size_t(nt_out) +
                            size_t(l)] = acc;
                }
        std::vector<double> out(size_t(Mout + 1) * size_t(nth_out) * size_t(nt_out));
        std::vector<cplx> line(size_t(M_) + 1);
        for (int j = 0; j < nth_out; ++j)
            for (int l = 0; l < nt_out; ++l) {
                for (int i = 0; i <= M_; ++i)
                    line[size_t(i)] =
                        th_done[(size_t(i) * size_t(nth_out) + size_t(j)) * size_t(nt_out) +
                                size_t(l)];
                // line now holds the Chebyshev coefficient vector for this (j,l)
                for (int i = 0; i <= Mout; ++i) {
                    const double xh = std::cos(M_PI * i / Mout);
                    out[(size_t(i) * size_t(nth_out) + size_t(j)) * size_t(nt_out) + size_t(l)] =
                        cheb::clenshaw(line, xh).real();
                }
            }
        return out;
    }

    size_t vidx(int i, int j, int l) const {
        return (size_t(i) * size_t(ntheta()) + size_t(j)) * size_t(nt()) + size_t(l);
    }

    /// Forward transform from real values on the field's own grid.
    void from_values(const std::vector<double>& vals) {
        const int Nth = ntheta(), Nt = nt();
        if (vals.size() != size_t(M_ + 1) * size_t(Nth) * size_t(Nt))
            throw std::invalid_argument("AngleTimeField::from_values: size mismatch");
        // t-axis DFT
        std::vector<cplx> t_done(vals.size());
        for (int i = 0; i <= M_; ++i)
            for (int j = 0; j < Nth; ++j)
                for (int kt = -Kt_; kt <= Kt_; ++kt) {
                    cplx acc(0, 0);
                    for (int l = 0; l < Nt; ++l)
                        acc += vals[vidx(i, j, l)] * std::polar(1.0, -two_pi * kt * l / double(Nt));
                    t_done[vidx(i, j, kt + Kt_)] = acc / double(Nt);
                }
        // theta-axis DFT
        std::vector<cplx> th_done(vals.size());
        for (int i = 0; i <= M_; ++i)
            for (int kt = 0; kt < Nt; ++kt)
                for (int kth = -Kth_; kth <= Kth_; ++kth) {
                    cplx acc(0, 0);
                    for (int j = 0; j < Nth; ++j)
                        acc += t_done[vidx(i, j, kt)] * std::polar(1.0, -two_pi * kth * j / double(Nth));
                    th_done[vidx(i, kth + Kth_, kt)] = acc / double(Nth);
                }
        // mu-axis Chebyshev transform
        std::vector<cplx> line(size_t(M_) + 1);
        for (int kth = 0; kth < Nth; ++kth)
            for (int kt = 0; kt < Nt; ++kt) {
                for (int i = 0; i <= M_; ++i) line[size_t(i)] = th_done[vidx(i, kth, kt)];
                auto c = cheb::transform(line);
                for (int m = 0; m <= M_; ++m)
                    a_[cidx(m, kth - Kth_, kt - Kt_)] = c[size_t(m)];
            }
    }

private:
    void init(const Window& w, int M, int Kth, int Kt) {
        if (M < 2 || Kth < 0 || Kt < 0 || !(w.width() > 0.0))
            throw std::invalid_argument("AngleTimeField: bad grid parameters");
        window_ = w;
        M_ = M;
        Kth_ = Kth;
        Kt_ = Kt;
        a_.assign(size_t(M + 1) * size_t(2 * Kth + 1) * size_t(2 * Kt + 1), cplx(0, 0));
    }

    void check_same_grid(const AngleTimeField& o) const {
        if (M_ != o.M_ || Kth_ != o.Kth_ || Kt_ != o.Kt_ ||
            std::fabs(window_.lo - o.window_.lo) > 1e-12 ||
            std::fabs(window_.hi - o.window_.hi) > 1e-12)
            throw std::invalid_argument("AngleTimeField: grid mismatch");
    }

    double xhat(double mu) const { return (2.0 * mu - window_.lo - window_.hi) / window_.width(); }

    size_t cidx(int m, int kth, int kt) const {
        return (size_t(kt + Kt_) * size_t(ntheta()) + size_t(kth + Kth_)) * size_t(M_ + 1) +
               size_t(m);
    }

    Window window_{};
    int M_ = 0, Kth_ = 0, Kt_ = 0;
    std::vector<cplx> a_;
};

} // namespace duffing
