#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <type_traits>

#include <quadmath.h>

#include "error.hpp"
#include "matrix.hpp"
#include "potential.hpp"

namespace anderson {

using cplx = std::complex<double>;

/// Scattering data of the Jost solution: u = e^{ikx} left of the support,
/// a e^{ikx} + b e^{-ikx} right of it.
struct ScatteringData {
    cplx k;
    cplx a;
    cplx b;
};

/// Energy together with its spectral parameter, k^2 = E and Im k >= 0.
struct SpectralPoint {
    double E;
    cplx k;

    static SpectralPoint from_energy(double E)
    {
        if (E >= 0) return {E, cplx(std::sqrt(E), 0.0)};
        return {E, cplx(0.0, std::sqrt(-E))};
    }
};

/// Jost data are only evaluated for |k| >= k_min; k = 0 may be a pole.
inline constexpr double k_min = 1e-6;

namespace detail {

// C(z) = cos(sqrt z) and S(z) = sin(sqrt z)/sqrt z as entire functions of z.
template <typename T>
void entire_cos_sinc(T z, T& c, T& s)
{
    if (std::abs(z) < 1e-4) {
        // 10 terms: |z|^10 / 20! is far below double precision
        T term_c{1};
        T term_s{1};
        c = term_c;
        s = term_s;
        for (int n = 1; n < 10; ++n) {
            term_c *= -z / static_cast<double>((2 * n - 1) * (2 * n));
            term_s *= -z / static_cast<double>((2 * n) * (2 * n + 1));
            c += term_c;
            s += term_s;
        }
        return;
    }
    if constexpr (std::is_same_v<T, double>) {
        if (z > 0) {
            const double w = std::sqrt(z);
            c = std::cos(w);
            s = std::sin(w) / w;
        }
        else {
            const double w = std::sqrt(-z);
            c = std::cosh(w);
            s = std::sinh(w) / w;
        }
    }
    else {
        // cos w and sin(w)/w are even in w, so the branch of sqrt is irrelevant
        const T w = std::sqrt(z);
        c = std::cos(w);
        s = std::sin(w) / w;
    }
}

} // namespace detail

/// Exact propagator of -u'' + q u = E u across a piece of width h, acting on (u, u').
template <typename T>
Mat2<T> piece_propagator(T E, double q, double h)
{
    const T local = E - q;
    const T z = local * (h * h);
    T c, s;
    detail::entire_cos_sinc(z, c, s);
    return {c, h * s, -local * h * s, c};
}

inline TransferMatrix piece_propagator(double E, double q, double h)
{
    return piece_propagator<double>(E, q, h);
}

/// Ordered product M_m ... M_1 over pieces, M_1 the leftmost.
template <typename T>
Mat2<T> transfer_matrix_t(const SingleSitePotential& p, T E)
{
    auto out = Mat2<T>::identity();
    for (std::size_t i = 0; i < p.piece_count(); ++i)
        out = piece_propagator<T>(E, p.values()[i], p.width(i)) * out;
    return out;
}

/// g(E): maps (u, u')(-1/2) to (u, u')(1/2).
inline TransferMatrix transfer_matrix(const SingleSitePotential& p, double E)
{
    return transfer_matrix_t<double>(p, E);
}

/// g_0(E), the unit-width free transfer matrix.
inline TransferMatrix free_transfer(double E) { return piece_propagator(E, 0.0, 1.0); }

inline ScatteringData jost_coefficients(const SingleSitePotential& p, cplx k)
{
    if (std::abs(k) < k_min) throw Error(ErrorCode::KTooSmall, "|k| below k_min");
    const cplx i(0.0, 1.0);
    const cplx ik = i * k;
    const cplx left = std::exp(-ik * 0.5);
    const auto g = transfer_matrix_t<cplx>(p, k * k);
    const auto end = g * Vec2<cplx>{left, ik * left};
    const cplx a = left * (ik * end.x + end.y) / (2.0 * ik);
    const cplx b = (ik * end.x - end.y) / (2.0 * ik * left);
    return {k, a, b};
}

inline ScatteringData jost_coefficients(const SingleSitePotential& p, double k)
{
    return jost_coefficients(p, cplx(k, 0.0));
}

/// |a|^2 - |b|^2 - 1 at real k, evaluated in 113-bit arithmetic. In double
/// precision the subtraction alone costs about eps |a|^2, which is already
/// 1e-10 at |a| ~ 1e3 (deep wells at small k).
inline double wronskian_residual(const SingleSitePotential& p, double k)
{
    using quad = __float128;
    if (std::abs(k) < k_min) throw Error(ErrorCode::KTooSmall, "|k| below k_min");
    const quad kq = k, k2 = kq * kq;
    quad g11 = 1, g12 = 0, g21 = 0, g22 = 1;
    for (std::size_t i = 0; i < p.piece_count(); ++i) {
        const quad local = k2 - static_cast<quad>(p.values()[i]);
        const quad h = p.width(i);
        const quad z = local * h * h;
        quad c, s;
        if (fabsq(z) < static_cast<quad>(1e-6)) {
            // |z|^12 / 24! is below quad precision
            quad tc = 1, ts = 1;
            c = tc;
            s = ts;
            for (int n = 1; n < 12; ++n) {
                tc *= -z / static_cast<quad>((2 * n - 1) * (2 * n));
                ts *= -z / static_cast<quad>((2 * n) * (2 * n + 1));
                c += tc;
                s += ts;
            }
        }
        else if (z > 0) {
            const quad w = sqrtq(z);
            c = cosq(w);
            s = sinq(w) / w;
        }
        else {
            const quad w = sqrtq(-z);
            c = coshq(w);
            s = sinhq(w) / w;
        }
        const quad m11 = c, m12 = h * s, m21 = -local * h * s, m22 = c;
        const quad n11 = m11 * g11 + m12 * g21, n12 = m11 * g12 + m12 * g22;
        const quad n21 = m21 * g11 + m22 * g21, n22 = m21 * g12 + m22 * g22;
        g11 = n11;
        g12 = n12;
        g21 = n21;
        g22 = n22;
    }
    // |a| = |ik X + Y| / 2k and |b| = |ik X - Y| / 2k with (X, Y) = g (1, ik)
    const quad re_a = g21 - k2 * g12, im_a = kq * (g11 + g22);
    const quad re_b = g21 + k2 * g12, im_b = kq * (g11 - g22);
    const quad a2 = (re_a * re_a + im_a * im_a) / (4 * k2);
    const quad b2 = (re_b * re_b + im_b * im_b) / (4 * k2);
    return static_cast<double>(a2 - b2 - 1);
}

namespace detail {
inline double require_positive_real_k(cplx k)
{
    if (k.imag() != 0.0 && std::abs(k.imag()) > 1e-14 * std::abs(k))
        throw Error(ErrorCode::NonRealK, "spectral parameter must be real");
    if (!(k.real() > 0)) throw Error(ErrorCode::NonPositiveK, "spectral parameter must be positive");
    return k.real();
}
} // namespace detail

/// g(k^2) rebuilt from (a, b) through z_pm = a e^{ik} pm b.
inline TransferMatrix transfer_from_scattering(const ScatteringData& s)
{
    const double k = detail::require_positive_real_k(s.k);
    const cplx phase = std::polar(1.0, k);
    const cplx zp = s.a * phase + s.b;
    const cplx zm = s.a * phase - s.b;
    return {zp.real(), zp.imag() / k, -k * zm.imag(), zm.real()};
}

/// Inverse of transfer_from_scattering for real k > 0.
inline ScatteringData scattering_from_transfer(const TransferMatrix& g, double k)
{
    detail::require_positive_real_k(cplx(k, 0.0));
    const cplx zp(g.m11, k * g.m12);
    const cplx zm(g.m22, -g.m21 / k);
    const cplx a = 0.5 * (zp + zm) * std::polar(1.0, -k);
    const cplx b = 0.5 * (zp - zm);
    return {cplx(k, 0.0), a, b};
}

// Closed forms for f = lambda chi_[-1/2,1/2] and f = lambda (chi_[-1/2,0] - chi_(0,1/2]).
// They are evaluated without any use of the propagation code above.

inline ScatteringData example1_scattering(double lambda, double E)
{
    if (!(E > std::max(0.0, lambda)))
        throw Error(ErrorCode::OutOfClosedFormRange, "closed form needs E > max(0, lambda)");
    const double k = std::sqrt(E);
    const double alpha = std::sqrt(E - lambda);
    const cplx i(0.0, 1.0);
    const cplx a_phase = std::cos(alpha) + i * (2 * k * k - lambda) / (2 * k * alpha) * std::sin(alpha);
    const cplx a = a_phase * std::polar(1.0, -k);
    const cplx b = i * lambda / (2 * k * alpha) * std::sin(alpha);
    return {cplx(k, 0.0), a, b};
}

inline TransferMatrix example1_transfer(double lambda, double E)
{
    if (!(E > std::max(0.0, lambda)))
        throw Error(ErrorCode::OutOfClosedFormRange, "closed form needs E > max(0, lambda)");
    const double alpha = std::sqrt(E - lambda);
    return {std::cos(alpha), std::sin(alpha) / alpha, -alpha * std::sin(alpha), std::cos(alpha)};
}

inline TransferMatrix example2_transfer(double lambda, double E)
{
    if (!(E > std::abs(lambda)))
        throw Error(ErrorCode::OutOfClosedFormRange, "closed form needs E > |lambda|");
    const double ap = std::sqrt(E + lambda);
    const double am = std::sqrt(E - lambda);
    const double cp = std::cos(ap / 2), sp = std::sin(ap / 2);
    const double cm = std::cos(am / 2), sm = std::sin(am / 2);
    return {cm * cp - am / ap * sm * sp, sm * cp / am + cm * sp / ap, -ap * cm * sp - am * sm * cp,
            -ap / am * sm * sp + cm * cp};
}

inline ScatteringData example2_scattering(double lambda, double E)
{
    return scattering_from_transfer(example2_transfer(lambda, E), std::sqrt(E));
}

} // namespace anderson
