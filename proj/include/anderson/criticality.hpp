#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "potential.hpp"
#include "scattering.hpp"

namespace anderson {

enum class CriticalReason { HalfIntegerPiSquared, PositiveReflectionZero, NegativeAxisZero };

inline const char* to_string(CriticalReason r)
{
    switch (r) {
    case CriticalReason::HalfIntegerPiSquared: return "HalfIntegerPiSquared";
    case CriticalReason::PositiveReflectionZero: return "PositiveReflectionZero";
    case CriticalReason::NegativeAxisZero: return "NegativeAxisZero";
    }
    return "Unknown";
}

/// Membership of an energy in the critical set. Critical iff reasons is non-empty.
struct CriticalityReport {
    double E = 0;
    std::vector<CriticalReason> reasons;
    std::optional<long long> lattice_n;         // E ~ (n pi / 2)^2
    std::optional<double> k;                    // sqrt(E) for E > 0
    std::optional<double> reflection_residual;  // |b(k)|
    std::optional<double> alpha;                // sqrt(-E) for E < 0
    std::optional<double> negative_axis_residual; // |a(ia) a(-ia) b(ia) b(-ia)|

    bool critical() const { return !reasons.empty(); }
    bool has(CriticalReason r) const { return std::find(reasons.begin(), reasons.end(), r) != reasons.end(); }
};

/// Absolute tolerance on E for the (n pi / 2)^2 lattice test.
inline constexpr double lattice_tolerance = 1e-9;

/// Nearest lattice index n >= 0 with |E - (n pi/2)^2| < lattice_tolerance, if any.
inline std::optional<long long> half_integer_pi_index(double E)
{
    if (E < 0) return std::nullopt;
    const double half_pi = std::numbers::pi / 2;
    const auto n = std::llround(std::sqrt(E) / half_pi);
    const double node = (static_cast<double>(n) * half_pi) * (static_cast<double>(n) * half_pi);
    if (std::abs(E - node) < lattice_tolerance) return n;
    return std::nullopt;
}

inline CriticalityReport classify_energy(const SingleSitePotential& p, double E, double tol = 1e-8)
{
    CriticalityReport r;
    r.E = E;
    if (auto n = half_integer_pi_index(E)) {
        r.lattice_n = *n;
        r.reasons.push_back(CriticalReason::HalfIntegerPiSquared);
    }
    if (std::abs(E) < k_min * k_min) return r;  // E = 0 sits on the lattice and at the k = 0 pole

    if (E > 0) {
        const double k = std::sqrt(E);
        const double res = std::abs(jost_coefficients(p, k).b);
        r.k = k;
        r.reflection_residual = res;
        if (res < tol) r.reasons.push_back(CriticalReason::PositiveReflectionZero);
    }
    else {
        const double alpha = std::sqrt(-E);
        const auto up = jost_coefficients(p, cplx(0.0, alpha));
        const auto down = jost_coefficients(p, cplx(0.0, -alpha));
        const double res = std::abs(up.a * down.a * up.b * down.b);
        r.alpha = alpha;
        r.negative_axis_residual = res;
        if (res < tol) r.reasons.push_back(CriticalReason::NegativeAxisZero);
    }
    return r;
}

struct ReflectionZero {
    double k;
    double residual;  // |b(k)|
};

struct ReflectionZeroScan {
    std::vector<ReflectionZero> zeros;
    /// b vanishes on most of the grid (free potential); zeros is left empty.
    bool identically_reflectionless = false;
};

namespace detail {

template <typename F>
double golden_section_minimize(F&& f, double lo, double hi, double x_tol)
{
    const double inv_phi = (std::sqrt(5.0) - 1) / 2;
    double c = hi - inv_phi * (hi - lo);
    double d = lo + inv_phi * (hi - lo);
    double fc = f(c);
    double fd = f(d);
    while (hi - lo > x_tol) {
        if (fc < fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        }
        else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    return 0.5 * (lo + hi);
}

// Newton iteration on f' = 0 with central differences; stays inside [lo, hi].
// The difference step follows the Newton step down to h_min, so the O(h^2)
// bias of the differences does not pin the iterate away from the minimum.
template <typename F>
double newton_minimize(F&& f, double x, double lo, double hi, double h, int max_iter = 30)
{
    const double h_min = 1e-9 * std::max(1.0, std::abs(x));
    for (int it = 0; it < max_iter; ++it) {
        const double fm = f(x - h), f0 = f(x), fp = f(x + h);
        const double d1 = (fp - fm) / (2 * h);
        const double d2 = (fp - 2 * f0 + fm) / (h * h);
        if (!(d2 > 0)) break;
        const double step = d1 / d2;
        const double next = std::clamp(x - step, lo, hi);
        if (f(next) > f0) {
            if (h <= h_min) break;
            h = std::max(h_min, h / 8);
            continue;
        }
        x = next;
        if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(x))) break;
        h = std::clamp(4 * std::abs(step), h_min, h);
    }
    return x;
}

inline void dedup_sorted(std::vector<ReflectionZero>& zeros, double spacing)
{
    std::sort(zeros.begin(), zeros.end(), [](auto& l, auto& r) { return l.k < r.k; });
    std::vector<ReflectionZero> out;
    for (const auto& z : zeros) {
        if (!out.empty() && z.k - out.back().k < spacing) {
            if (z.residual < out.back().residual) out.back() = z;
            continue;
        }
        out.push_back(z);
    }
    zeros = std::move(out);
}

} // namespace detail

/// Default grid size: 2000 points per unit of k.
inline std::size_t default_grid_points(double lo, double hi)
{
    return static_cast<std::size_t>(std::ceil((hi - lo) * 2000.0)) + 1;
}

/// Positive-axis zeros of b(k) in [k_lo, k_hi], found by minimizing |b|^2.
/// grid_n = 0 selects default_grid_points().
inline ReflectionZeroScan scan_reflection_zeros(const SingleSitePotential& p, double k_lo, double k_hi,
                                                std::size_t grid_n = 0, double tol = 1e-8)
{
    if (!(k_lo > 0 && k_hi > k_lo))
        throw Error(ErrorCode::InvalidArgument, "need 0 < k_lo < k_hi");
    if (grid_n == 0) grid_n = default_grid_points(k_lo, k_hi);
    if (grid_n < 2) throw Error(ErrorCode::InvalidArgument, "grid_n must be >= 2");

    auto b2 = [&](double k) { return std::norm(jost_coefficients(p, k).b); };
    const double dk = (k_hi - k_lo) / static_cast<double>(grid_n - 1);
    std::vector<double> ks(grid_n), f(grid_n);
    std::size_t tiny = 0;
    for (std::size_t i = 0; i < grid_n; ++i) {
        ks[i] = i + 1 == grid_n ? k_hi : k_lo + dk * static_cast<double>(i);
        f[i] = b2(ks[i]);
        if (std::sqrt(f[i]) < tol) ++tiny;
    }

    ReflectionZeroScan scan;
    if (static_cast<double>(tiny) > 0.9 * static_cast<double>(grid_n)) {
        scan.identically_reflectionless = true;
        return scan;
    }

    for (std::size_t i = 0; i < grid_n; ++i) {
        const bool left_ok = i == 0 || f[i] <= f[i - 1];
        const bool right_ok = i + 1 == grid_n || f[i] < f[i + 1];
        if (!(left_ok && right_ok)) continue;
        // Loose local threshold: next to a simple zero |b|^2 ~ c (k - k0)^2, so the grid minimum
        // is at most a quarter of its larger neighbour; smooth nonzero minima are much flatter.
        const double neighbour = std::max(i == 0 ? 0.0 : f[i - 1], i + 1 == grid_n ? 0.0 : f[i + 1]);
        if (!(f[i] <= 0.25 * neighbour)) continue;
        const double lo = ks[i == 0 ? 0 : i - 1];
        const double hi = ks[i + 1 == grid_n ? i : i + 1];
        double k = detail::golden_section_minimize(b2, lo, hi, 1e-9 * std::max(1.0, ks[i]));
        k = detail::newton_minimize(b2, k, lo, hi, 1e-6 * std::max(1.0, k));
        const double res = std::sqrt(b2(k));
        if (res < tol) scan.zeros.push_back({k, res});
    }
    detail::dedup_sorted(scan.zeros, 1e-6);
    return scan;
}

enum class AxisFunction { APlus, AMinus, BPlus, BMinus };

inline const char* to_string(AxisFunction w)
{
    switch (w) {
    case AxisFunction::APlus: return "a(+i alpha)";
    case AxisFunction::AMinus: return "a(-i alpha)";
    case AxisFunction::BPlus: return "b(+i alpha)";
    case AxisFunction::BMinus: return "b(-i alpha)";
    }
    return "?";
}

/// Real part of a(+-i alpha) or b(+-i alpha); the imaginary part vanishes for real f.
inline double axis_value(const SingleSitePotential& p, AxisFunction which, double alpha)
{
    const bool up = which == AxisFunction::APlus || which == AxisFunction::BPlus;
    const auto s = jost_coefficients(p, cplx(0.0, up ? alpha : -alpha));
    const bool is_a = which == AxisFunction::APlus || which == AxisFunction::AMinus;
    return (is_a ? s.a : s.b).real();
}

struct AxisZero {
    double alpha;
    AxisFunction which;
    double residual;
};

struct AxisZeroScan {
    std::vector<AxisZero> zeros;
    /// Functions that vanish on most of the grid (b for the free potential).
    std::vector<AxisFunction> identically_zero;
};

/// Zeros of a(+-i alpha), b(+-i alpha) for alpha in [alpha_lo, alpha_hi] by sign-change bisection.
inline AxisZeroScan negative_axis_zeros(const SingleSitePotential& p, double alpha_lo, double alpha_hi,
                                        std::size_t grid_n, double tol = 1e-8)
{
    if (!(alpha_lo > 0 && alpha_hi > alpha_lo) || grid_n < 2)
        throw Error(ErrorCode::InvalidArgument, "need 0 < alpha_lo < alpha_hi and grid_n >= 2");

    AxisZeroScan scan;
    const double da = (alpha_hi - alpha_lo) / static_cast<double>(grid_n - 1);
    for (auto which : {AxisFunction::APlus, AxisFunction::AMinus, AxisFunction::BPlus, AxisFunction::BMinus}) {
        auto f = [&](double a) { return axis_value(p, which, a); };
        std::vector<double> xs(grid_n), ys(grid_n);
        std::size_t tiny = 0;
        for (std::size_t i = 0; i < grid_n; ++i) {
            xs[i] = i + 1 == grid_n ? alpha_hi : alpha_lo + da * static_cast<double>(i);
            ys[i] = f(xs[i]);
            if (std::abs(ys[i]) < tol) ++tiny;
        }
        if (static_cast<double>(tiny) > 0.9 * static_cast<double>(grid_n)) {
            scan.identically_zero.push_back(which);
            continue;
        }
        for (std::size_t i = 0; i < grid_n; ++i) {
            if (ys[i] == 0.0) {
                scan.zeros.push_back({xs[i], which, 0.0});
                continue;
            }
            if (i + 1 == grid_n || ys[i + 1] == 0.0 || (ys[i] > 0) == (ys[i + 1] > 0)) continue;
            double lo = xs[i], hi = xs[i + 1], flo = ys[i];
            for (int it = 0; it < 200 && hi - lo > 4 * std::numeric_limits<double>::epsilon() * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = f(mid);
                if (fm == 0.0) {
                    lo = hi = mid;
                    break;
                }
                if ((fm > 0) == (flo > 0)) {
                    lo = mid;
                    flo = fm;
                }
                else {
                    hi = mid;
                }
            }
            const double root = 0.5 * (lo + hi);
            const double res = std::abs(f(root));
            if (res < tol) scan.zeros.push_back({root, which, res});
        }
    }
    std::sort(scan.zeros.begin(), scan.zeros.end(), [](auto& l, auto& r) { return l.alpha < r.alpha; });
    return scan;
}

struct ReflectionlessPair {
    std::uint64_t n;
    std::uint64_t m;
    double E;
};

/// Reflectionless energies above lambda for f = lambda (chi_[-1/2,0] - chi_(0,1/2]).
/// Non-empty only when lambda / (2 pi^2) = N is an integer, then E = 2 pi^2 (n^2 + m^2) for n^2 - m^2 = N.
inline std::vector<ReflectionlessPair> example2_reflectionless(double lambda, double tol = 1e-9)
{
    std::vector<ReflectionlessPair> out;
    if (!(lambda > 0)) throw Error(ErrorCode::InvalidArgument, "lambda must be positive");
    const double two_pi2 = 2 * std::numbers::pi * std::numbers::pi;
    const double ratio = lambda / two_pi2;
    const double nearest = std::round(ratio);
    if (nearest < 1 || std::abs(ratio - nearest) > tol) return out;
    const auto N = static_cast<std::uint64_t>(nearest);
    for (std::uint64_t n = 2; n <= (N + 1) / 2 + 1; ++n) {
        for (std::uint64_t m = 1; m < n; ++m) {
            if (n * n - m * m == N)
                out.push_back({n, m, two_pi2 * static_cast<double>(n * n + m * m)});
        }
    }
    return out;
}

struct NjConstruction {
    int j;
    std::uint64_t N;
    double lambda;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs;  // (n_l, m_l), l = 0..j-1
};

namespace detail {
inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b)
{
    std::uint64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw Error(ErrorCode::Overflow, "integer overflow");
    return r;
}
inline std::uint64_t checked_add(std::uint64_t a, std::uint64_t b)
{
    std::uint64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw Error(ErrorCode::Overflow, "integer overflow");
    return r;
}
inline std::uint64_t pow2(int e)
{
    if (e < 0 || e > 63) throw Error(ErrorCode::Overflow, "power of two out of range");
    return std::uint64_t{1} << e;
}
} // namespace detail

/// N_j = 2^{j+1}(2^{j-1}+1) with j pairs n_l^2 - m_l^2 = N_j, checked in exact integer arithmetic.
inline NjConstruction nj_construction(int j)
{
    if (j < 1) throw Error(ErrorCode::InvalidArgument, "j must be >= 1");
    using detail::checked_add;
    using detail::checked_mul;
    using detail::pow2;
    const std::uint64_t base = checked_add(pow2(j - 1), 1);
    NjConstruction out;
    out.j = j;
    out.N = checked_mul(pow2(j + 1), base);
    out.lambda = 2 * std::numbers::pi * std::numbers::pi * static_cast<double>(out.N);
    for (int l = 0; l < j; ++l) {
        const std::uint64_t a = checked_mul(pow2(l), base);
        const std::uint64_t b = pow2(j - l - 1);
        const std::uint64_t n = checked_add(a, b);
        const std::uint64_t m = a - b;
        using u128 = unsigned __int128;
        if (static_cast<u128>(n) * n - static_cast<u128>(m) * m != out.N)
            throw Error(ErrorCode::SpecMismatch, "pair fails n^2 - m^2 = N_j");
        out.pairs.emplace_back(n, m);
    }
    return out;
}

enum class Example1Type { Type1a, Type1b, Type2 };

inline const char* to_string(Example1Type t)
{
    switch (t) {
    case Example1Type::Type1a: return "1a";
    case Example1Type::Type1b: return "1b";
    case Example1Type::Type2: return "2";
    }
    return "?";
}

struct Example1Critical {
    Example1Type type;
    long long n;
    long long m;  // Type 2 only, else 0
    double E;
};

/// Critical energies of f = lambda chi_[-1/2,1/2] up to E_max, sorted by energy.
inline std::vector<Example1Critical> example1_critical_types(double lambda, double E_max)
{
    if (!(E_max > 0)) throw Error(ErrorCode::InvalidArgument, "E_max must be positive");
    const double pi = std::numbers::pi;
    std::vector<Example1Critical> out;
    for (long long n = 1;; ++n) {
        const double base = static_cast<double>(n * n) * pi * pi;
        if (base > E_max && base + lambda > E_max) break;
        const double E1a = base + lambda;
        if (E1a <= E_max && E1a > std::max(0.0, lambda)) out.push_back({Example1Type::Type1a, n, 0, E1a});
        if (base <= E_max) out.push_back({Example1Type::Type1b, n, 0, base});
    }
    for (long long n = 1;; ++n) {
        const double k = static_cast<double>(2 * n - 1) * pi / 2;
        const double E = k * k;
        if (E > E_max) break;
        if (!(E - lambda > 0)) continue;
        const double alpha = std::sqrt(E - lambda);
        const auto m = std::llround((alpha / (pi / 2) + 1) / 2);
        if (m < 1) continue;
        if (std::abs(alpha - static_cast<double>(2 * m - 1) * pi / 2) < 1e-9 * std::max(1.0, alpha))
            out.push_back({Example1Type::Type2, n, m, E});
    }
    std::stable_sort(out.begin(), out.end(), [](auto& l, auto& r) { return l.E < r.E; });
    return out;
}

} // namespace anderson
