#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace anderson {

//---------------------------------------------------------------------------//
/*!
 * Philox4x32-10 counter-based generator (Salmon et al., SC'11).
 *
 * The output block is a pure function of (key, counter), so every realization
 * owns an independent stream addressed by its index and no state is shared
 * between workers.
 */
class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;

    static Block generate(Block ctr, std::array<std::uint32_t, 2> key)
    {
        constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
        constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t{m0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{m1} * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += w0;
            key[1] += w1;
        }
        return ctr;
    }
};

/// Bernoulli(p_one) stream for one realization, keyed by (master_seed, realization_index).
class BernoulliStream {
public:
    BernoulliStream(std::uint64_t master_seed, std::uint64_t realization, double p_one)
        : key_{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32)},
          realization_(realization)
    {
        // P(u32 < threshold) = threshold / 2^32; p_one = 1 maps to 2^32 so every draw succeeds.
        threshold_ = static_cast<std::uint64_t>(std::llround(std::clamp(p_one, 0.0, 1.0) * 4294967296.0));
    }

    bool next()
    {
        if (used_ == 4) refill();
        return std::uint64_t{block_[used_++]} < threshold_;
    }

private:
    void refill()
    {
        block_ = Philox4x32::generate({static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
                                       static_cast<std::uint32_t>(realization_),
                                       static_cast<std::uint32_t>(realization_ >> 32)},
                                      key_);
        ++counter_;
        used_ = 0;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint64_t realization_;
    std::uint64_t threshold_;
    std::uint64_t counter_ = 0;
    Philox4x32::Block block_{};
    int used_ = 4;
};

/// Runs body(i) for i in [0, n) on up to `threads` workers. Callers write into
/// per-index slots, so the outcome does not depend on scheduling.
template <typename F>
void parallel_for(std::size_t n, std::size_t threads, F&& body)
{
    threads = std::max<std::size_t>(1, std::min(threads, n));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    body(i);
                }
                catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

} // namespace anderson
