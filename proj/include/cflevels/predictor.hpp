#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "cflevels/method.hpp"
#include "cflevels/ratings.hpp"

namespace cflevels {

struct neighbor {
    user_index user;
    double score;

    friend bool operator==(const neighbor&, const neighbor&) = default;
};

/// Up to k positively similar users, ordered by (score desc, user id asc).
struct neighborhood {
    user_index target{};
    std::vector<neighbor> neighbors;
    std::size_t k = 0;
};

struct prediction {
    user_index user{};
    item_index item{};
    double value = 0.0;
    std::size_t support = 0;
};

struct scored_item {
    item_index item;
    double value;

    friend bool operator==(const scored_item&, const scored_item&) = default;
};

struct topn_list {
    user_index user{};
    std::vector<scored_item> items;  ///< (value desc, item id asc)
    std::size_t r = 0;
};

enum class prediction_rule {
    resnick,        ///< mean-centred weighted average
    weighted_mean,  ///< plain similarity-weighted average
};

inline std::string_view to_string(prediction_rule p)
{
    return p == prediction_rule::resnick ? "resnick" : "weighted_mean";
}

inline prediction_rule parse_prediction_rule(std::string_view s)
{
    if (s == "resnick") return prediction_rule::resnick;
    if (s == "weighted_mean") return prediction_rule::weighted_mean;
    throw invalid_argument("unknown prediction rule '" + std::string(s) + "' (expected resnick or weighted_mean)");
}

/// Direct evaluation of a method on a matrix, usable wherever a similarity
/// callable (user_index, user_index) -> double is expected.
class direct_similarity {
public:
    direct_similarity(const ratings_matrix& m, const similarity_method& method) : m_(m), method_(method) {}

    double operator()(user_index a, user_index b) const { return method_(m_, a, b); }

private:
    const ratings_matrix& m_;
    const similarity_method& method_;
};

/// Similarities from one target user to every other user, computed in one
/// sweep over the users sharing at least one item with the target. Values are
/// bit-identical to direct_similarity.
class similarity_row {
public:
    similarity_row(const ratings_matrix& m, user_index target, const similarity_method& method)
        : target_(target), scores_(m.user_count(), 0.0)
    {
        std::vector<double> mine(m.item_count(), 0.0);
        std::vector<char> rated(m.item_count(), 0);
        std::vector<char> seen(m.user_count(), 0);
        std::vector<user_index> candidates;
        for (const auto& e : m.ratings_of(target)) {
            mine[idx(e.item)] = e.value;
            rated[idx(e.item)] = 1;
            for (const auto& r : m.raters_of(e.item)) {
                if (r.user == target || seen[idx(r.user)]) continue;
                seen[idx(r.user)] = 1;
                candidates.push_back(r.user);
            }
        }
        // Users without any co-rated item still get the method's value for an empty overlap.
        const double empty_score = method.adjust(pair_overlap{});
        if (empty_score != 0.0) std::fill(scores_.begin(), scores_.end(), empty_score);

        for (auto b : candidates) {
            const auto theirs = m.ratings_of(b);
            const auto o = pearson_over([&](auto&& fn) {
                for (const auto& e : theirs)
                    if (rated[idx(e.item)]) fn(mine[idx(e.item)], e.value);
            });
            scores_[idx(b)] = method.adjust(o);
        }
        if (idx(target) < scores_.size()) scores_[idx(target)] = 0.0;
    }

    user_index target() const noexcept { return target_; }
    double operator()(user_index, user_index b) const { return scores_[idx(b)]; }
    std::span<const double> scores() const noexcept { return scores_; }

private:
    user_index target_;
    std::vector<double> scores_;
};

/// Among the raters of item other than a, the k with the highest strictly
/// positive similarity to a. Ties go to the smaller user id.
template <class Similarity>
neighborhood neighborhood_for_item(const ratings_matrix& m, user_index a, item_index item, std::size_t k,
                                   const Similarity& sim)
{
    if (k < 1) throw invalid_argument("neighborhood size k must be >= 1");
    neighborhood out{a, {}, k};
    for (const auto& r : m.raters_of(item)) {
        if (r.user == a) continue;
        const double s = sim(a, r.user);
        if (s > 0.0) out.neighbors.push_back({r.user, s});
    }
    auto better = [](const neighbor& x, const neighbor& y) {
        if (x.score != y.score) return x.score > y.score;
        return x.user < y.user;
    };
    if (out.neighbors.size() > k) {
        std::partial_sort(out.neighbors.begin(), out.neighbors.begin() + static_cast<std::ptrdiff_t>(k),
                          out.neighbors.end(), better);
        out.neighbors.resize(k);
    } else {
        std::sort(out.neighbors.begin(), out.neighbors.end(), better);
    }
    return out;
}

/// Prediction from an already formed neighborhood; nullopt when it is empty.
inline std::optional<prediction> predict_from(const ratings_matrix& m, const neighborhood& hood, item_index item,
                                              prediction_rule rule = prediction_rule::resnick)
{
    if (hood.neighbors.empty()) return std::nullopt;
    double num = 0.0;
    double den = 0.0;
    for (const auto& nb : hood.neighbors) {
        const double r = *m.rating(nb.user, item);
        num += nb.score * (rule == prediction_rule::resnick ? r - m.user_mean(nb.user) : r);
        den += std::abs(nb.score);
    }
    if (den == 0.0) return std::nullopt;
    const double base = rule == prediction_rule::resnick ? m.user_mean(hood.target) : 0.0;
    return prediction{hood.target, item, m.scale().clamp(base + num / den), hood.neighbors.size()};
}

/// Rating prediction for (a, item); nullopt signals a coverage miss.
template <class Similarity>
std::optional<prediction> predict(const ratings_matrix& m, user_index a, item_index item, std::size_t k,
                                  const Similarity& sim, prediction_rule rule = prediction_rule::resnick)
{
    return predict_from(m, neighborhood_for_item(m, a, item, k, sim), item, rule);
}

/// The r highest predicted items among `candidates` (default: every item a
/// has not rated). Items that cannot be predicted are skipped.
template <class Similarity>
topn_list recommend_top_n(const ratings_matrix& m, user_index a, std::size_t r, std::size_t k, const Similarity& sim,
                          std::optional<std::span<const item_index>> candidates = std::nullopt,
                          prediction_rule rule = prediction_rule::resnick)
{
    if (r < 1) throw invalid_argument("recommendation count r must be >= 1");
    topn_list out{a, {}, r};
    auto consider = [&](item_index i) {
        if (auto p = predict(m, a, i, k, sim, rule)) out.items.push_back({i, p->value});
    };
    if (candidates) {
        std::vector<item_index> sorted(candidates->begin(), candidates->end());
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
        for (auto i : sorted)
            if (!m.rating(a, i)) consider(i);
    } else {
        const auto mine = m.ratings_of(a);
        auto it = mine.begin();
        for (std::size_t i = 0; i < m.item_count(); ++i) {
            const item_index item{static_cast<std::uint32_t>(i)};
            while (it != mine.end() && it->item < item) ++it;
            if (it != mine.end() && it->item == item) continue;
            consider(item);
        }
    }
    auto better = [](const scored_item& x, const scored_item& y) {
        if (x.value != y.value) return x.value > y.value;
        return x.item < y.item;
    };
    if (out.items.size() > r) {
        std::partial_sort(out.items.begin(), out.items.begin() + static_cast<std::ptrdiff_t>(r), out.items.end(),
                          better);
        out.items.resize(r);
    } else {
        std::sort(out.items.begin(), out.items.end(), better);
    }
    return out;
}

}  // namespace cflevels
