#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <mutex>
#include <optional>
#include <ostream>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "cflevels/method.hpp"
#include "cflevels/parallel.hpp"
#include "cflevels/ratings.hpp"

namespace cflevels {

/// Which user pairs precompute enumerates.
struct pair_selector {
    std::size_t min_corated = 1;
};

struct cache_entry {
    std::uint32_t a;
    std::uint32_t b;
    double score;

    friend bool operator==(const cache_entry&, const cache_entry&) = default;
};

/// Pairwise similarity store keyed by unordered user pair, valid for exactly
/// one method/parameters/matrix fingerprint.
class similarity_cache {
public:
    static constexpr std::array<char, 5> magic{'C', 'F', 'L', 'V', '1'};

    explicit similarity_cache(std::string fingerprint) : fingerprint_(std::move(fingerprint)) {}

    similarity_cache(const similarity_cache& other) : fingerprint_(other.fingerprint_)
    {
        std::shared_lock lock(other.mutex_);
        store_ = other.store_;
        candidates_ = other.candidates_;
    }

    const std::string& fingerprint() const noexcept { return fingerprint_; }

    std::optional<double> find(user_index a, user_index b) const
    {
        std::shared_lock lock(mutex_);
        const auto it = store_.find(key(a, b));
        if (it == store_.end()) return std::nullopt;
        return it->second;
    }

    /// First writer wins; returns the value now stored for the pair.
    double store(user_index a, user_index b, double score)
    {
        std::unique_lock lock(mutex_);
        return store_.try_emplace(key(a, b), score).first->second;
    }

    std::size_t size() const
    {
        std::shared_lock lock(mutex_);
        return store_.size();
    }

    /// Pairs enumerated by precompute, including those left unstored.
    std::size_t candidate_pairs() const noexcept { return candidates_; }
    void set_candidate_pairs(std::size_t n) noexcept { candidates_ = n; }

    /// Entries with a < b, sorted.
    std::vector<cache_entry> entries() const
    {
        std::vector<cache_entry> out;
        {
            std::shared_lock lock(mutex_);
            out.reserve(store_.size());
            for (const auto& [k, v] : store_)
                out.push_back({static_cast<std::uint32_t>(k >> 32), static_cast<std::uint32_t>(k), v});
        }
        std::sort(out.begin(), out.end(), [](const cache_entry& x, const cache_entry& y) {
            return x.a != y.a ? x.a < y.a : x.b < y.b;
        });
        return out;
    }

    /// Layout: "CFLV1", u32 fingerprint length, fingerprint bytes, u64 record
    /// count, then (u32 user, u32 user, f64 score) records. All little-endian.
    void save(std::ostream& out) const
    {
        const auto all = entries();
        out.write(magic.data(), magic.size());
        put(out, static_cast<std::uint32_t>(fingerprint_.size()));
        out.write(fingerprint_.data(), static_cast<std::streamsize>(fingerprint_.size()));
        put(out, static_cast<std::uint64_t>(all.size()));
        for (const auto& e : all) {
            put(out, e.a);
            put(out, e.b);
            put(out, std::bit_cast<std::uint64_t>(e.score));
        }
        if (!out) throw data_error("failed writing similarity cache");
    }

    /// Throws fingerprint_mismatch when the file was written for another configuration.
    static similarity_cache load(std::istream& in, const std::string& expected_fingerprint)
    {
        std::array<char, 5> head{};
        in.read(head.data(), head.size());
        if (!in || head != magic) throw data_error("not a similarity cache file");
        const auto len = get<std::uint32_t>(in);
        std::string fp(len, '\0');
        in.read(fp.data(), len);
        if (!in) throw data_error("truncated similarity cache header");
        if (fp != expected_fingerprint) throw fingerprint_mismatch(expected_fingerprint, fp);
        similarity_cache cache(fp);
        const auto count = get<std::uint64_t>(in);
        for (std::uint64_t n = 0; n < count; ++n) {
            const auto a = get<std::uint32_t>(in);
            const auto b = get<std::uint32_t>(in);
            const auto bits = get<std::uint64_t>(in);
            cache.store(user_index{a}, user_index{b}, std::bit_cast<double>(bits));
        }
        return cache;
    }

private:
    static std::uint64_t key(user_index a, user_index b) noexcept
    {
        auto lo = static_cast<std::uint64_t>(std::min(a, b));
        auto hi = static_cast<std::uint64_t>(std::max(a, b));
        return (lo << 32) | hi;
    }

    template <class T>
    static void put(std::ostream& out, T v)
    {
        std::array<char, sizeof(T)> bytes{};
        for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
        out.write(bytes.data(), bytes.size());
    }

    template <class T>
    static T get(std::istream& in)
    {
        std::array<unsigned char, sizeof(T)> bytes{};
        in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
        if (!in) throw data_error("truncated similarity cache");
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(bytes[i]) << (8 * i);
        return v;
    }

    std::string fingerprint_;
    std::unordered_map<std::uint64_t, double> store_;
    std::size_t candidates_ = 0;
    mutable std::shared_mutex mutex_;
};

/// Scores every selected pair. Pairs with fewer than two co-rated items score
/// 0 under every method and are counted as candidates but not stored.
inline similarity_cache precompute(const ratings_matrix& m, const similarity_method& method,
                                   pair_selector selector = {}, std::size_t jobs = 1)
{
    similarity_cache cache(method.fingerprint(m));
    const std::size_t n = m.user_count();
    std::vector<std::vector<cache_entry>> rows(n);
    std::vector<std::size_t> candidate_counts(n, 0);

    parallel_for(n, jobs, [&](std::size_t ua) {
        const user_index a{static_cast<std::uint32_t>(ua)};
        std::vector<std::uint32_t> shared(n, 0);
        for (const auto& e : m.ratings_of(a))
            for (const auto& r : m.raters_of(e.item))
                if (idx(r.user) > ua) ++shared[idx(r.user)];
        for (std::size_t ub = ua + 1; ub < n; ++ub) {
            if (shared[ub] == 0 || shared[ub] < selector.min_corated) continue;
            ++candidate_counts[ua];
            if (shared[ub] < 2) continue;
            const user_index b{static_cast<std::uint32_t>(ub)};
            rows[ua].push_back({static_cast<std::uint32_t>(ua), static_cast<std::uint32_t>(ub), method(m, a, b)});
        }
    });

    std::size_t candidates = 0;
    for (std::size_t ua = 0; ua < n; ++ua) {
        candidates += candidate_counts[ua];
        for (const auto& e : rows[ua]) cache.store(user_index{e.a}, user_index{e.b}, e.score);
    }
    cache.set_candidate_pairs(candidates);
    return cache;
}

/// Cached lookup with fallback to direct computation. Throws
/// fingerprint_mismatch if the cache belongs to another method or matrix.
inline double get_or_compute(similarity_cache& cache, user_index a, user_index b, const similarity_method& method,
                             const ratings_matrix& m)
{
    if (const auto fp = method.fingerprint(m); fp != cache.fingerprint()) throw fingerprint_mismatch(cache.fingerprint(), fp);
    if (auto hit = cache.find(a, b)) return *hit;
    return cache.store(a, b, method(m, a, b));
}

/// Similarity callable backed by a cache; the fingerprint is checked once.
class cached_similarity {
public:
    cached_similarity(similarity_cache& cache, const similarity_method& method, const ratings_matrix& m)
        : cache_(cache), method_(method), m_(m)
    {
        if (const auto fp = method.fingerprint(m); fp != cache.fingerprint())
            throw fingerprint_mismatch(cache.fingerprint(), fp);
    }

    double operator()(user_index a, user_index b) const
    {
        if (auto hit = cache_.find(a, b)) return *hit;
        return cache_.store(a, b, method_(m_, a, b));
    }

private:
    similarity_cache& cache_;
    const similarity_method& method_;
    const ratings_matrix& m_;
};

}  // namespace cflevels
