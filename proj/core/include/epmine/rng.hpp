#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <thread>
#include <vector>

namespace epmine {

// splitmix64 finalizer. All seed derivation goes through this so every
// stage/sequence/position gets an independent, schedule-free stream.
inline uint64_t mix64(uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

inline uint64_t derive_seed(uint64_t seed, uint64_t salt) {
    return mix64(seed + 0x9e3779b97f4a7c15ULL * (salt + 1));
}

inline uint64_t fnv1a(std::string_view s) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline uint64_t fnv1a(std::span<const int32_t> tokens) {
    uint64_t h = 1469598103934665603ULL;
    for (int32_t t : tokens) {
        for (int b = 0; b < 4; ++b) {
            h ^= static_cast<unsigned char>(t >> (8 * b));
            h *= 1099511628211ULL;
        }
    }
    return h;
}

inline uint64_t derive_seed(uint64_t seed, std::string_view tag) {
    return derive_seed(seed, fnv1a(tag));
}

// Counter-based splitmix64 stream. Portable: identical output on every
// platform/toolchain, unlike std::uniform_* distributions.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }

    // [0, 1)
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // inclusive bounds
    int64_t uniform_int(int64_t lo, int64_t hi) {
        const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
        return lo + static_cast<int64_t>(next_u64() % span);
    }

    double normal(double mean = 0.0, double stddev = 1.0) {
        if (have_cached_) {
            have_cached_ = false;
            return mean + stddev * cached_;
        }
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 1e-300) u1 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return mean + stddev * r * std::cos(a);
    }

    double exponential(double rate = 1.0) {
        double u = next_double();
        while (u <= 1e-300) u = next_double();
        return -std::log(u) / rate;
    }

    // Index drawn from unnormalized nonnegative weights.
    size_t weighted_index(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = next_double() * total;
        for (size_t i = 0; i + 1 < weights.size(); ++i) {
            u -= weights[i];
            if (u < 0.0) return i;
        }
        return weights.empty() ? 0 : weights.size() - 1;
    }

    // Index drawn from a nondecreasing cumulative table ending at ~1.
    size_t cdf_index(std::span<const double> cdf) {
        const double u = next_double() * cdf.back();
        size_t lo = 0, hi = cdf.size() - 1;
        while (lo < hi) {
            const size_t mid = (lo + hi) / 2;
            if (cdf[mid] <= u)
                lo = mid + 1;
            else
                hi = mid;
        }
        return lo;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            const size_t j = static_cast<size_t>(uniform_int(0, static_cast<int64_t>(i) - 1));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    uint64_t state_;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

// Deterministic worker pool over [0, count). Each index is processed exactly
// once; callers must make fn(i) independent of scheduling (seed by index).
inline void parallel_for(size_t count, int workers, const std::function<void(size_t)>& fn) {
    if (workers <= 1 || count <= 1) {
        for (size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const int n_threads = static_cast<int>(std::min<size_t>(static_cast<size_t>(workers), count));
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(n_threads));
    std::vector<std::exception_ptr> errors(static_cast<size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
            } catch (...) {
                errors[static_cast<size_t>(t)] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace epmine
