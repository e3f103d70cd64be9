#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cflevels/similarity.hpp"

namespace cflevels {

/// Minimum co-rated count for a positive adjustment.
inline constexpr std::size_t min_corated_for_boost = 5;

inline long round_half_away(double x) { return std::lround(x); }

/// Level count from the user population: nearest integer to log10(users).
inline int derive_dvu(std::size_t user_count)
{
    if (user_count < 10) throw too_few_users(user_count);
    return static_cast<int>(round_half_away(std::log10(static_cast<double>(user_count))));
}

/// Co-rated count of the top level: nearest integer to log2(items).
inline int derive_dvi(std::size_t item_count)
{
    if (item_count < 2) throw too_few_items(item_count);
    return static_cast<int>(round_half_away(std::log2(static_cast<double>(item_count))));
}

/// Width of each level in co-rated items, at least 1.
inline int derive_step(int dvi, int dvu)
{
    if (dvu < 1) throw invalid_argument("derive_step needs dvu >= 1");
    const auto step = round_half_away(static_cast<double>(dvi) / static_cast<double>(dvu));
    return static_cast<int>(std::max(1L, step));
}

struct band {
    std::size_t lower = 0;
    std::optional<std::size_t> upper;  ///< nullopt = unbounded
    unsigned divisor = 1;

    bool contains(std::size_t c) const noexcept { return c >= lower && (!upper || c <= *upper); }

    friend bool operator==(const band&, const band&) = default;
};

/// How pairs below the minimum co-rated count are adjusted.
enum class negative_form {
    eq4,   ///< s / (1 + s^2)
    eq8,   ///< s * (1 / (1 + s^2) - 1)
    alg1,  ///< (s / (1 + s^2)) / 6
};

inline std::string_view to_string(negative_form f)
{
    switch (f) {
    case negative_form::eq4: return "eq4";
    case negative_form::eq8: return "eq8";
    case negative_form::alg1: return "alg1";
    }
    return "eq4";
}

inline negative_form parse_negative_form(std::string_view s)
{
    if (s == "eq4") return negative_form::eq4;
    if (s == "eq8") return negative_form::eq8;
    if (s == "alg1") return negative_form::alg1;
    throw invalid_argument("unknown negative form '" + std::string(s) + "' (expected eq4, eq8 or alg1)");
}

inline double negative_adjust(double s, negative_form form)
{
    switch (form) {
    case negative_form::eq8: return s * (1.0 / (1.0 + s * s) - 1.0);
    case negative_form::alg1: return shrink(s) / 6.0;
    case negative_form::eq4: break;
    }
    return shrink(s);
}

/// Co-rated-count bands derived from dataset shape. Band k (1-based from the
/// top) boosts a similarity to s + s/k; counts below min_corated fall to the
/// negative level.
class level_table {
public:
    level_table() = default;

    level_table(int dvu, int dvi, int step, std::vector<band> bands)
        : dvu_(dvu), dvi_(dvi), step_(step), bands_(std::move(bands))
    {
        const std::size_t top = bands_.empty() ? 0 : bands_.front().lower;
        divisor_by_count_.assign(top + 1, 0);
        for (const auto& b : bands_) {
            const std::size_t hi = b.upper ? *b.upper : top;
            for (std::size_t c = b.lower; c <= hi && c <= top; ++c) divisor_by_count_[c] = b.divisor;
        }
    }

    int dvu() const noexcept { return dvu_; }
    int dvi() const noexcept { return dvi_; }
    int step() const noexcept { return step_; }
    std::size_t min_corated() const noexcept { return min_corated_for_boost; }
    const std::vector<band>& bands() const noexcept { return bands_; }

    /// Divisor of the band containing c, or 0 for the negative level.
    unsigned divisor_for(std::size_t corated) const noexcept
    {
        if (divisor_by_count_.empty()) return 0;
        if (corated >= divisor_by_count_.size()) return divisor_by_count_.back();
        return divisor_by_count_[corated];
    }

private:
    int dvu_ = 0;
    int dvi_ = 0;
    int step_ = 0;
    std::vector<band> bands_;
    std::vector<unsigned> divisor_by_count_;
};

/// Top band [dvi, inf) with divisor 1, then `step`-wide bands downwards with
/// divisors 2, 3, ... until the next band would lie wholly below the minimum
/// co-rated count. A band straddling the minimum is clamped to start at it.
inline level_table build_level_table(std::size_t user_count, std::size_t item_count)
{
    const int dvu = derive_dvu(user_count);
    const int dvi = derive_dvi(item_count);
    const int step = derive_step(dvi, dvu);
    const auto floor = static_cast<long>(min_corated_for_boost);

    std::vector<band> bands;
    bands.push_back({static_cast<std::size_t>(std::max<long>(dvi, floor)), std::nullopt, 1});
    long upper = static_cast<long>(dvi) - 1;
    unsigned divisor = 2;
    while (upper >= floor) {
        const long lower = std::max(upper - step + 1, floor);
        bands.push_back({static_cast<std::size_t>(lower), static_cast<std::size_t>(upper), divisor++});
        upper = lower - 1;
    }
    return level_table(dvu, dvi, step, std::move(bands));
}

inline double dynamic_adjust(double s, std::size_t corated, const level_table& table,
                             negative_form form = negative_form::eq4)
{
    if (const unsigned k = table.divisor_for(corated); k != 0) return s + s / static_cast<double>(k);
    return negative_adjust(s, form);
}

inline double dynamic_sim(const ratings_matrix& m, user_index a, user_index b, const level_table& table,
                          negative_form form = negative_form::eq4)
{
    const auto o = overlap(m, a, b);
    return dynamic_adjust(o.pcc, o.corated, table, form);
}

}  // namespace cflevels
