#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "criticality.hpp"
#include "error.hpp"
#include "matrix.hpp"
#include "potential.hpp"
#include "rng.hpp"
#include "scattering.hpp"

namespace anderson {

struct EnsembleConfig {
    double p_one = 0.5;               // P(q_n = 1)
    std::uint64_t n_steps = 100000;   // sites per realization
    std::uint64_t n_realizations = 100;
    std::uint64_t master_seed = 0;
    std::uint64_t burn_in = 100;      // vector estimator only
    bool renormalize = true;          // false is a diagnostic mode that may overflow

    void check() const
    {
        if (!(p_one >= 0 && p_one <= 1)) throw Error(ErrorCode::InvalidArgument, "p_one must lie in [0, 1]");
        if (n_steps < 1) throw Error(ErrorCode::InvalidArgument, "n_steps must be >= 1");
        if (n_realizations < 1) throw Error(ErrorCode::InvalidArgument, "n_realizations must be >= 1");
    }
};

enum class Estimator { VectorNorm, MatrixNorm };

inline const char* to_string(Estimator e) { return e == Estimator::VectorNorm ? "VectorNorm" : "MatrixNorm"; }

struct LyapunovEstimate {
    double E = 0;
    double gamma_hat = 0;
    double std_error = 0;  // NaN when n_realizations == 1
    std::uint64_t n_steps = 0;
    std::uint64_t n_realizations = 0;
    Estimator estimator = Estimator::VectorNorm;

    /// Two-sided normal-approximation confidence interval.
    double ci_low(double z = 2.5758293035489004) const { return gamma_hat - z * std_error; }
    double ci_high(double z = 2.5758293035489004) const { return gamma_hat + z * std_error; }
};

/// q_1 ... q_n of one realization.
inline std::vector<std::uint8_t> realization_bits(const EnsembleConfig& config, std::uint64_t realization_index,
                                                  std::size_t n)
{
    config.check();
    if (realization_index >= config.n_realizations)
        throw Error(ErrorCode::InvalidArgument, "realization index out of range");
    BernoulliStream stream(config.master_seed, realization_index, config.p_one);
    std::vector<std::uint8_t> bits(n);
    for (auto& b : bits) b = stream.next() ? 1 : 0;
    return bits;
}

namespace detail {

inline LyapunovEstimate summarize(double E, const EnsembleConfig& config, Estimator est,
                                  const std::vector<double>& per_realization)
{
    const auto n = static_cast<double>(per_realization.size());
    const double mean = std::accumulate(per_realization.begin(), per_realization.end(), 0.0) / n;
    double ss = 0;
    for (double x : per_realization) ss += (x - mean) * (x - mean);
    LyapunovEstimate out;
    out.E = E;
    out.gamma_hat = mean;
    out.std_error = per_realization.size() > 1 ? std::sqrt(ss / (n - 1)) / std::sqrt(n)
                                               : std::numeric_limits<double>::quiet_NaN();
    out.n_steps = config.n_steps;
    out.n_realizations = config.n_realizations;
    out.estimator = est;
    return out;
}

inline void require_nonzero_energy(double E)
{
    if (E == 0) throw Error(ErrorCode::InvalidArgument, "E = 0 is excluded (critical, k = 0 pole)");
}

} // namespace detail

/// Growth rate of |U_n v| for a renormalized vector, averaged over realizations.
inline LyapunovEstimate lyapunov_vector_estimate(const SingleSitePotential& p, double E, const EnsembleConfig& config,
                                                 std::size_t threads = 1)
{
    config.check();
    detail::require_nonzero_energy(E);
    const auto g = transfer_matrix(p, E);
    const auto g0 = free_transfer(E);
    std::vector<double> rates(config.n_realizations);
    parallel_for(config.n_realizations, threads, [&](std::size_t r) {
        BernoulliStream stream(config.master_seed, r, config.p_one);
        Vec2<double> v{1.0, 0.0};
        for (std::uint64_t i = 0; i < config.burn_in; ++i) {
            v = (stream.next() ? g : g0) * v;
            const double len = norm(v);
            v = {v.x / len, v.y / len};
        }
        double sum = 0;
        if (config.renormalize) {
            for (std::uint64_t i = 0; i < config.n_steps; ++i) {
                v = (stream.next() ? g : g0) * v;
                const double len = norm(v);
                sum += std::log(len);
                v = {v.x / len, v.y / len};
            }
        }
        else {
            for (std::uint64_t i = 0; i < config.n_steps; ++i) v = (stream.next() ? g : g0) * v;
            const double len = norm(v);
            if (!std::isfinite(len) || len == 0)
                throw Error(ErrorCode::NumericOverflow, "unrenormalized iterate left the double range");
            sum = std::log(len);
        }
        rates[r] = sum / static_cast<double>(config.n_steps);
    });
    return detail::summarize(E, config, Estimator::VectorNorm, rates);
}

/// Growth rate of |U_n| from the full product, rescaled by its largest entry each step.
/// With reversed = true the product is g_1 g_2 ... g_n (the negative half-line ordering).
inline LyapunovEstimate lyapunov_matrix_estimate(const SingleSitePotential& p, double E, const EnsembleConfig& config,
                                                 std::size_t threads = 1, bool reversed = false)
{
    config.check();
    detail::require_nonzero_energy(E);
    const auto g = transfer_matrix(p, E);
    const auto g0 = free_transfer(E);
    const double scale = std::sqrt(std::abs(E));  // diag(scale, 1) conjugation
    std::vector<double> rates(config.n_realizations);
    parallel_for(config.n_realizations, threads, [&](std::size_t r) {
        BernoulliStream stream(config.master_seed, r, config.p_one);
        auto prod = TransferMatrix::identity();
        double log_scale = 0;
        for (std::uint64_t i = 0; i < config.n_steps; ++i) {
            const auto& m = stream.next() ? g : g0;
            prod = reversed ? prod * m : m * prod;
            const double s = max_abs_entry(prod);
            log_scale += std::log(s);
            prod = prod * (1.0 / s);
        }
        // norm taken where the free step is an isometry; any norm gives the same limit but this one
        // avoids an O(log k)/n offset from the raw coordinates
        const TransferMatrix adapted{prod.m11, prod.m12 * scale, prod.m21 / scale, prod.m22};
        rates[r] = (std::log(operator_norm(adapted)) + log_scale) / static_cast<double>(config.n_steps);
    });
    return detail::summarize(E, config, Estimator::MatrixNorm, rates);
}

inline LyapunovEstimate lyapunov_estimate(const SingleSitePotential& p, double E, const EnsembleConfig& config,
                                          Estimator est, std::size_t threads = 1)
{
    return est == Estimator::VectorNorm ? lyapunov_vector_estimate(p, E, config, threads)
                                        : lyapunov_matrix_estimate(p, E, config, threads);
}

struct GammaRow {
    double E = 0;
    std::optional<LyapunovEstimate> estimate;
    std::string error;  // non-empty when this point failed
    std::string criticality_status;
};

/// One estimate per grid energy; a failing point is reported in its row and the sweep continues.
inline std::vector<GammaRow> gamma_curve(const SingleSitePotential& p, const std::vector<double>& E_grid,
                                         const EnsembleConfig& config, Estimator est = Estimator::VectorNorm,
                                         std::size_t threads = 1, double criticality_tol = 1e-8)
{
    if (E_grid.empty()) throw Error(ErrorCode::InvalidArgument, "empty energy grid");
    std::vector<GammaRow> rows;
    rows.reserve(E_grid.size());
    for (double E : E_grid) {
        GammaRow row;
        row.E = E;
        try {
            const auto report = classify_energy(p, E, criticality_tol);
            row.criticality_status = report.critical() ? "Critical" : "Regular";
            row.estimate = lyapunov_estimate(p, E, config, est, threads);
        }
        catch (const Error& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace anderson
