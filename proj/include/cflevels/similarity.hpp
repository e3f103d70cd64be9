#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "cflevels/ratings.hpp"

namespace cflevels {

/// Co-rated count and Pearson correlation of one user pair. Every similarity
/// method in the library is a function of these two numbers.
struct pair_overlap {
    std::size_t corated = 0;
    double pcc = 0.0;
};

/// Two-pass Pearson correlation over co-rated pairs. `each` must call its
/// argument with (r_a, r_b) for every co-rated item in ascending item order;
/// it is invoked twice. Fewer than two pairs or zero variance on either side
/// yields 0. The result is clamped to [-1, 1].
template <class ForEachPair>
pair_overlap pearson_over(ForEachPair&& each)
{
    std::size_t n = 0;
    double sum_a = 0.0;
    double sum_b = 0.0;
    each([&](double ra, double rb) {
        ++n;
        sum_a += ra;
        sum_b += rb;
    });
    if (n < 2) return {n, 0.0};

    const double mean_a = sum_a / static_cast<double>(n);
    const double mean_b = sum_b / static_cast<double>(n);
    double num = 0.0;
    double var_a = 0.0;
    double var_b = 0.0;
    each([&](double ra, double rb) {
        const double da = ra - mean_a;
        const double db = rb - mean_b;
        num += da * db;
        var_a += da * da;
        var_b += db * db;
    });
    if (var_a == 0.0 || var_b == 0.0) return {n, 0.0};
    return {n, std::clamp(num / (std::sqrt(var_a) * std::sqrt(var_b)), -1.0, 1.0)};
}

/// Merge-based overlap of two users' sorted rating lists.
inline pair_overlap overlap(const ratings_matrix& m, user_index a, user_index b)
{
    const auto ra = m.ratings_of(a);
    const auto rb = m.ratings_of(b);
    return pearson_over([&](auto&& fn) {
        auto ia = ra.begin();
        auto ib = rb.begin();
        while (ia != ra.end() && ib != rb.end()) {
            if (ia->item < ib->item) {
                ++ia;
            } else if (ib->item < ia->item) {
                ++ib;
            } else {
                fn(ia->value, ib->value);
                ++ia;
                ++ib;
            }
        }
    });
}

inline double pcc(const ratings_matrix& m, user_index a, user_index b) { return overlap(m, a, b).pcc; }

/// Linear damping below T co-rated items.
inline double wpcc_adjust(double pcc, std::size_t corated, std::size_t threshold)
{
    if (threshold < 1) throw invalid_argument("WPCC threshold T must be >= 1");
    if (corated < threshold) return (static_cast<double>(corated) / static_cast<double>(threshold)) * pcc;
    return pcc;
}

inline double wpcc(const ratings_matrix& m, user_index a, user_index b, std::size_t threshold)
{
    const auto o = overlap(m, a, b);
    return wpcc_adjust(o.pcc, o.corated, threshold);
}

/// Sigmoid damping on the co-rated count.
inline double spcc_adjust(double pcc, std::size_t corated)
{
    return pcc * (1.0 / (1.0 + std::exp(-static_cast<double>(corated) / 2.0)));
}

inline double spcc(const ratings_matrix& m, user_index a, user_index b)
{
    const auto o = overlap(m, a, b);
    return spcc_adjust(o.pcc, o.corated);
}

struct plus_params {
    double alpha = 100.0;
    double beta = 2.0;

    void validate() const
    {
        if (!(alpha > 0.0)) throw invalid_argument("PLUS alpha must be > 0");
        if (!(beta > 0.0)) throw invalid_argument("PLUS beta must be > 0");
    }
};

/// Sign-preserving power law alpha * sign(s) * |s|^beta.
inline double plus_adjust(double s, const plus_params& p)
{
    if (s == 0.0) return 0.0;
    return p.alpha * std::copysign(std::pow(std::abs(s), p.beta), s);
}

struct static_params {
    std::size_t t = 10;   ///< co-rated count threshold
    double y = 0.20;      ///< PCC threshold

    void validate() const
    {
        if (t < 1) throw invalid_argument("static threshold t must be >= 1");
    }
};

/// Shrink used by every "negative" adjustment: s / (1 + s^2).
inline double shrink(double s) { return s * (1.0 / (1.0 + s * s)); }

/// Doubles s when both thresholds are met, otherwise shrinks it.
inline double static_adjust(double s, std::size_t corated, const static_params& p)
{
    if (corated >= p.t && s >= p.y) return s + s;
    return shrink(s);
}

inline double static_proposed(const ratings_matrix& m, user_index a, user_index b, const static_params& p)
{
    const auto o = overlap(m, a, b);
    return static_adjust(o.pcc, o.corated, p);
}

}  // namespace cflevels
