#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "error.hpp"
#include "lyapunov.hpp"
#include "matrix.hpp"
#include "potential.hpp"
#include "rng.hpp"
#include "scattering.hpp"

namespace anderson {

/// Type 2 critical energy of f = lambda chi_[-1/2,1/2]:
/// k = (2n-1) pi/2, alpha = (2m-1) pi/2, lambda = k^2 - alpha^2 = pi^2 (n-m)(n+m-1).
struct Type2Spec {
    long long n;
    long long m;
    double p;  // P(q = 1)

    double k() const { return static_cast<double>(2 * n - 1) * std::numbers::pi / 2; }
    double alpha() const { return static_cast<double>(2 * m - 1) * std::numbers::pi / 2; }
    long long lambda_over_pi2() const { return (n - m) * (n + m - 1); }
    double lambda() const { return std::numbers::pi * std::numbers::pi * static_cast<double>(lambda_over_pi2()); }
    double energy() const { return k() * k(); }
    double q() const { return 1 - p; }

    void check() const
    {
        if (!(m >= 1 && n > m)) throw Error(ErrorCode::InvalidArgument, "Type 2 needs n > m >= 1");
        if (!(p >= 0 && p <= 1)) throw Error(ErrorCode::InvalidArgument, "p must lie in [0, 1]");
    }
};

/// One class of h_n = g_{2n+1} g_{2n}.
struct PairClass {
    std::string label;
    TransferMatrix matrix;      // representative up to sign
    double probability;
    std::vector<TransferMatrix> realized_by;  // products of the computed transfer matrices
};

/// The law of h_n: +-I w.p. p^2+q^2, +-diag(k/alpha, alpha/k) w.p. pq, +-diag(alpha/k, k/alpha) w.p. qp.
/// Every class is checked against products of g_0(k^2) and g(k^2) from the propagation code.
inline std::vector<PairClass> type2_pair_distribution(const Type2Spec& spec, double tol = 1e-10)
{
    spec.check();
    const double k = spec.k(), alpha = spec.alpha(), E = spec.energy();
    const auto g0 = free_transfer(E);
    const auto g = transfer_matrix(square_barrier(spec.lambda()), E);

    auto equal_up_to_sign = [&](const TransferMatrix& a, const TransferMatrix& b) {
        return max_entry_diff(a, b) < tol || max_entry_diff(a, -b) < tol;
    };
    if (!equal_up_to_sign(g0, {0.0, -1 / k, k, 0.0}))
        throw Error(ErrorCode::SpecMismatch, "g_0(k^2) is not +-[[0,-1/k],[k,0]]");
    if (!equal_up_to_sign(g, {0.0, -1 / alpha, alpha, 0.0}))
        throw Error(ErrorCode::SpecMismatch, "g(k^2) is not +-[[0,-1/alpha],[alpha,0]]");

    const double p = spec.p, q = spec.q();
    std::vector<PairClass> out{
        {"identity", TransferMatrix::identity(), p * p + q * q, {g0 * g0, g * g}},
        {"k/alpha", {k / alpha, 0.0, 0.0, alpha / k}, p * q, {g * g0}},
        {"alpha/k", {alpha / k, 0.0, 0.0, k / alpha}, q * p, {g0 * g}},
    };
    for (const auto& c : out)
        for (const auto& prod : c.realized_by)
            if (!equal_up_to_sign(prod, c.matrix))
                throw Error(ErrorCode::SpecMismatch, "pair product does not match class " + c.label);
    return out;
}

/// E log|h_{n,1}| under the given class table.
inline double pair_drift(const std::vector<PairClass>& table)
{
    double d = 0;
    for (const auto& c : table) d += c.probability * std::log(std::abs(c.matrix.m11));
    return d;
}

/// |(p^2+q^2) log 1 + pq log(k/alpha) + qp log(alpha/k)|.
inline double drift_check(const Type2Spec& spec) { return std::abs(pair_drift(type2_pair_distribution(spec))); }

struct WalkCheckpoint {
    std::uint64_t N;
    double mean_abs_S;
    double mean_abs_S_over_sqrtN;
    double q10, q50, q90;  // quantiles of |S_N| over realizations
};

struct SqrtGrowthResult {
    std::vector<WalkCheckpoint> ladder;
    double mean_abs_S_over_sqrt;  // at the largest N
    double fitted_exponent;       // slope of log E|S_N| against log N
    double clt_prediction;        // sigma sqrt(2/pi), sigma^2 = 2pq log^2(k/alpha)
    double max_product_deviation; // max | log|prod h| - |S_N| | over checked realizations
    LyapunovEstimate gamma;
};

struct SqrtGrowthOptions {
    std::uint64_t n_pairs = 131072;
    std::uint64_t n_realizations = 2000;
    std::uint64_t seed = 0;
    std::uint64_t min_log2_N = 7;
    std::size_t verify_realizations = 4;  // realizations whose matrix product is checked
    std::uint64_t gamma_steps = 1000000;
    std::uint64_t gamma_realizations = 32;
    std::size_t threads = 1;
};

namespace detail {
inline double quantile(std::vector<double> xs, double q)
{
    std::sort(xs.begin(), xs.end());
    const double pos = q * static_cast<double>(xs.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, xs.size() - 1);
    return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}
} // namespace detail

/// Simulates S_N = sum log|h_{n,1}| and measures the sqrt(N) growth of log|prod h_n| = |S_N|.
inline SqrtGrowthResult sqrt_growth_experiment(const Type2Spec& spec, const SqrtGrowthOptions& opt)
{
    spec.check();
    if (opt.n_pairs < 1000) throw Error(ErrorCode::InvalidArgument, "n_pairs must be >= 1000");
    if (opt.n_realizations < 1) throw Error(ErrorCode::InvalidArgument, "n_realizations must be >= 1");
    const auto table = type2_pair_distribution(spec);
    const double step = std::log(table[1].matrix.m11);  // log(k/alpha)

    std::vector<std::uint64_t> ladder;
    for (std::uint64_t e = opt.min_log2_N; e < 63 && (std::uint64_t{1} << e) <= opt.n_pairs; ++e)
        ladder.push_back(std::uint64_t{1} << e);
    if (ladder.size() < 2) throw Error(ErrorCode::InvalidArgument, "n_pairs too small for a dyadic ladder");

    // abs_S[c][r] = |S_N| at checkpoint c for realization r
    std::vector<std::vector<double>> abs_S(ladder.size(), std::vector<double>(opt.n_realizations));
    std::vector<double> deviation(opt.n_realizations, 0.0);
    const std::uint64_t N_max = ladder.back();

    parallel_for(opt.n_realizations, opt.threads, [&](std::size_t r) {
        BernoulliStream stream(opt.seed, r, spec.p);
        const bool verify = r < opt.verify_realizations;
        double S = 0;
        auto prod = TransferMatrix::identity();
        double log_scale = 0;
        std::size_t c = 0;
        for (std::uint64_t j = 1; j <= N_max; ++j) {
            const bool even_site = stream.next();  // q_{2n}
            const bool odd_site = stream.next();   // q_{2n+1}
            const std::size_t cls = even_site == odd_site ? 0 : (odd_site ? 1 : 2);
            if (cls == 1) S += step;
            else if (cls == 2) S -= step;
            if (verify) {
                prod = table[cls].matrix * prod;
                const double s = max_abs_entry(prod);
                log_scale += std::log(s);
                prod = prod * (1.0 / s);
            }
            if (j == ladder[c]) {
                abs_S[c][r] = std::abs(S);
                if (verify) {
                    const double log_norm = std::log(operator_norm(prod)) + log_scale;
                    deviation[r] = std::max(deviation[r], std::abs(log_norm - std::abs(S)));
                }
                ++c;
            }
        }
    });

    SqrtGrowthResult out;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t c = 0; c < ladder.size(); ++c) {
        const auto& xs = abs_S[c];
        const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
        const double N = static_cast<double>(ladder[c]);
        out.ladder.push_back({ladder[c], mean, mean / std::sqrt(N), detail::quantile(xs, 0.1),
                              detail::quantile(xs, 0.5), detail::quantile(xs, 0.9)});
        const double x = std::log(N), y = std::log(mean);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(ladder.size());
    out.fitted_exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    out.mean_abs_S_over_sqrt = out.ladder.back().mean_abs_S_over_sqrtN;
    const double sigma = std::sqrt(2 * spec.p * spec.q()) * std::abs(step);
    out.clt_prediction = sigma * std::sqrt(2 / std::numbers::pi);
    out.max_product_deviation = *std::max_element(deviation.begin(), deviation.end());

    EnsembleConfig cfg;
    cfg.p_one = spec.p;
    cfg.n_steps = opt.gamma_steps;
    cfg.n_realizations = opt.gamma_realizations;
    cfg.master_seed = opt.seed;
    out.gamma = lyapunov_vector_estimate(square_barrier(spec.lambda()), spec.energy(), cfg, opt.threads);
    return out;
}

} // namespace anderson
