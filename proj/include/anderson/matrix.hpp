#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>

namespace anderson {

template <typename T>
struct Vec2 {
    T x{};
    T y{};
};

/// Dense 2x2 matrix, row-major. T is double or std::complex<double>.
template <typename T>
struct Mat2 {
    T m11{1};
    T m12{0};
    T m21{0};
    T m22{1};

    static constexpr Mat2 identity() { return {T{1}, T{0}, T{0}, T{1}}; }

    constexpr T det() const { return m11 * m22 - m12 * m21; }
    constexpr T trace() const { return m11 + m22; }

    constexpr Mat2 operator*(const Mat2& o) const
    {
        return {m11 * o.m11 + m12 * o.m21, m11 * o.m12 + m12 * o.m22,
                m21 * o.m11 + m22 * o.m21, m21 * o.m12 + m22 * o.m22};
    }

    constexpr Vec2<T> operator*(const Vec2<T>& v) const
    {
        return {m11 * v.x + m12 * v.y, m21 * v.x + m22 * v.y};
    }

    constexpr Mat2 operator*(T s) const { return {m11 * s, m12 * s, m21 * s, m22 * s}; }
    constexpr Mat2 operator-() const { return {-m11, -m12, -m21, -m22}; }

    /// Inverse assuming unit determinant.
    constexpr Mat2 unimodular_inverse() const { return {m22, -m12, -m21, m11}; }
};

using TransferMatrix = Mat2<double>;
using ComplexMatrix = Mat2<std::complex<double>>;

inline double max_abs_entry(const TransferMatrix& m)
{
    return std::max({std::abs(m.m11), std::abs(m.m12), std::abs(m.m21), std::abs(m.m22)});
}

inline double max_entry_diff(const TransferMatrix& a, const TransferMatrix& b)
{
    return std::max({std::abs(a.m11 - b.m11), std::abs(a.m12 - b.m12), std::abs(a.m21 - b.m21),
                     std::abs(a.m22 - b.m22)});
}

/// Spectral (operator 2-) norm of a real 2x2 matrix, via the singular values.
inline double operator_norm(const TransferMatrix& m)
{
    const double f = m.m11 * m.m11 + m.m12 * m.m12 + m.m21 * m.m21 + m.m22 * m.m22;
    const double d = std::abs(m.det());
    // s_max^2 = (f + sqrt(f^2 - 4 d^2)) / 2
    const double disc = std::max(0.0, (f - 2 * d) * (f + 2 * d));
    return std::sqrt(0.5 * (f + std::sqrt(disc)));
}

inline double norm(const Vec2<double>& v) { return std::hypot(v.x, v.y); }

} // namespace anderson
