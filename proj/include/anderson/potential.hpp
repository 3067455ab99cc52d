#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "error.hpp"

namespace anderson {

/// Piecewise-constant single-site potential supported in [-1/2, 1/2].
///
/// f(x) = values[i] on (breakpoints[i], breakpoints[i+1]). Instances are only
/// produced by validate() and refine(), so the breakpoint/value invariants hold
/// for the lifetime of the object.
class SingleSitePotential {
public:
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t piece_count() const { return values_.size(); }
    double width(std::size_t i) const { return breakpoints_[i + 1] - breakpoints_[i]; }
    bool is_free() const { return is_free_; }

    /// Value of f at x; outside the support it is 0. At an interior breakpoint
    /// the left piece wins.
    double operator()(double x) const
    {
        if (x < -0.5 || x > 0.5) return 0.0;
        auto it = std::lower_bound(breakpoints_.begin() + 1, breakpoints_.end(), x);
        auto i = static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
        return values_[std::min(i, values_.size() - 1)];
    }

    friend SingleSitePotential validate(std::vector<double> breakpoints, std::vector<double> values);
    friend SingleSitePotential refine(const SingleSitePotential& p, double max_width);

private:
    SingleSitePotential() = default;

    std::vector<double> breakpoints_;
    std::vector<double> values_;
    bool is_free_ = false;
};

inline SingleSitePotential validate(std::vector<double> breakpoints, std::vector<double> values)
{
    if (breakpoints.size() < 2 || values.size() + 1 != breakpoints.size())
        throw Error(ErrorCode::InvalidArgument, "need m+1 breakpoints for m values");
    for (double b : breakpoints)
        if (!std::isfinite(b)) throw Error(ErrorCode::NonFiniteValue, "breakpoint is not finite");
    if (breakpoints.front() != -0.5 || breakpoints.back() != 0.5)
        throw Error(ErrorCode::SupportOutOfRange, "support endpoints must be exactly -1/2 and 1/2");
    for (std::size_t i = 1; i < breakpoints.size(); ++i)
        if (!(breakpoints[i] > breakpoints[i - 1]))
            throw Error(ErrorCode::NonMonotoneBreakpoints, "breakpoints must be strictly increasing");
    for (double q : values)
        if (!std::isfinite(q)) throw Error(ErrorCode::NonFiniteValue, "potential value is not finite");

    SingleSitePotential p;
    p.is_free_ = std::all_of(values.begin(), values.end(), [](double q) { return q == 0.0; });
    p.breakpoints_ = std::move(breakpoints);
    p.values_ = std::move(values);
    return p;
}

/// Split pieces wider than max_width into equal sub-pieces carrying the same value.
inline SingleSitePotential refine(const SingleSitePotential& p, double max_width)
{
    if (!(max_width > 0)) throw Error(ErrorCode::InvalidArgument, "max_width must be positive");
    SingleSitePotential out;
    out.is_free_ = p.is_free_;
    out.breakpoints_.push_back(p.breakpoints_.front());
    for (std::size_t i = 0; i < p.piece_count(); ++i) {
        const double lo = p.breakpoints_[i];
        const double hi = p.breakpoints_[i + 1];
        // slack keeps refine idempotent when sub-piece widths round just above max_width
        const double ratio = (hi - lo) / max_width;
        const auto parts = static_cast<std::size_t>(std::max(1.0, std::ceil(ratio - 1e-9)));
        for (std::size_t j = 1; j < parts; ++j) {
            out.breakpoints_.push_back(lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(parts));
            out.values_.push_back(p.values_[i]);
        }
        out.breakpoints_.push_back(hi);
        out.values_.push_back(p.values_[i]);
    }
    return out;
}

/// f = lambda * chi_[-1/2, 1/2].
inline SingleSitePotential square_barrier(double lambda) { return validate({-0.5, 0.5}, {lambda}); }

/// f = lambda * (chi_[-1/2, 0] - chi_(0, 1/2]).
inline SingleSitePotential antisymmetric_step(double lambda)
{
    return validate({-0.5, 0.0, 0.5}, {lambda, -lambda});
}

inline SingleSitePotential free_potential() { return validate({-0.5, 0.5}, {0.0}); }

} // namespace anderson
