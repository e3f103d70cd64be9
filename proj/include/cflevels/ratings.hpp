#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cflevels/error.hpp"

namespace cflevels {

/// Inclusive bounds of a dataset's rating range.
struct rating_scale {
    double rmin = 1.0;
    double rmax = 5.0;

    rating_scale() = default;
    rating_scale(double lo, double hi) : rmin(lo), rmax(hi)
    {
        if (!(lo < hi))
            throw invalid_argument("rating scale needs rmin < rmax");
    }

    bool contains(double v) const noexcept { return v >= rmin && v <= rmax; }
    double range() const noexcept { return rmax - rmin; }
    double clamp(double v) const noexcept { return std::clamp(v, rmin, rmax); }

    friend bool operator==(const rating_scale&, const rating_scale&) = default;
};

struct rating_record {
    std::string user;
    std::string item;
    double value = 0.0;

    friend bool operator==(const rating_record&, const rating_record&) = default;
};

// Dense internal indexes. Index order follows natural_less on the external ids,
// so "ascending id" tie-breaks can be done on the index.
enum class user_index : std::uint32_t {};
enum class item_index : std::uint32_t {};

constexpr std::size_t idx(user_index u) noexcept { return static_cast<std::size_t>(u); }
constexpr std::size_t idx(item_index i) noexcept { return static_cast<std::size_t>(i); }

struct item_rating {
    item_index item;
    double value;
};

struct user_rating {
    user_index user;
    double value;
};

/// Orders identifiers so that "2" < "10": all-digit ids compare numerically and
/// sort before any other id; everything else compares lexicographically.
inline bool natural_less(std::string_view a, std::string_view b) noexcept
{
    auto is_number = [](std::string_view s) {
        return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
    };
    const bool na = is_number(a);
    const bool nb = is_number(b);
    if (na != nb) return na;
    if (na) {
        auto strip = [](std::string_view s) {
            const auto p = s.find_first_not_of('0');
            return p == std::string_view::npos ? std::string_view{} : s.substr(p);
        };
        const auto sa = strip(a);
        const auto sb = strip(b);
        if (sa.size() != sb.size()) return sa.size() < sb.size();
        if (sa != sb) return sa < sb;
    }
    return a < b;
}

/// Immutable sparse user x item rating store with forward and inverted indexes.
class ratings_matrix {
public:
    ratings_matrix() = default;

    /// Duplicate (user, item) pairs keep the last record. Throws out_of_scale_rating.
    ratings_matrix(std::span<const rating_record> records, rating_scale scale) : scale_(scale)
    {
        for (const auto& r : records)
            if (!scale_.contains(r.value)) throw out_of_scale_rating(r.value, scale_.rmin, scale_.rmax);

        user_ids_ = sorted_unique(records, &rating_record::user);
        item_ids_ = sorted_unique(records, &rating_record::item);
        for (std::size_t i = 0; i < user_ids_.size(); ++i) user_lookup_.emplace(user_ids_[i], i);
        for (std::size_t i = 0; i < item_ids_.size(); ++i) item_lookup_.emplace(item_ids_[i], i);

        struct triple {
            std::uint32_t user, item, order;
            double value;
        };
        std::vector<triple> cells;
        cells.reserve(records.size());
        for (std::size_t n = 0; n < records.size(); ++n) {
            const auto& r = records[n];
            cells.push_back({user_lookup_.at(r.user), item_lookup_.at(r.item),
                             static_cast<std::uint32_t>(n), r.value});
        }
        std::sort(cells.begin(), cells.end(), [](const triple& x, const triple& y) {
            if (x.user != y.user) return x.user < y.user;
            if (x.item != y.item) return x.item < y.item;
            return x.order < y.order;
        });

        by_user_.resize(user_ids_.size());
        by_item_.resize(item_ids_.size());
        for (std::size_t n = 0; n < cells.size(); ++n) {
            const bool last_of_run = n + 1 == cells.size() || cells[n + 1].user != cells[n].user ||
                                     cells[n + 1].item != cells[n].item;
            if (!last_of_run) continue;
            const auto& c = cells[n];
            by_user_[c.user].push_back({item_index{c.item}, c.value});
            by_item_[c.item].push_back({user_index{c.user}, c.value});
            ++rating_count_;
        }

        user_means_.resize(user_ids_.size());
        for (std::size_t u = 0; u < by_user_.size(); ++u) {
            double sum = 0.0;
            for (const auto& e : by_user_[u]) sum += e.value;
            user_means_[u] = sum / static_cast<double>(by_user_[u].size());
        }
        content_hash_ = compute_hash();
    }

    std::size_t user_count() const noexcept { return user_ids_.size(); }
    std::size_t item_count() const noexcept { return item_ids_.size(); }
    std::size_t rating_count() const noexcept { return rating_count_; }
    const rating_scale& scale() const noexcept { return scale_; }

    const std::string& user_id(user_index u) const { return user_ids_.at(idx(u)); }
    const std::string& item_id(item_index i) const { return item_ids_.at(idx(i)); }

    std::optional<user_index> find_user(std::string_view id) const
    {
        const auto it = user_lookup_.find(std::string(id));
        if (it == user_lookup_.end()) return std::nullopt;
        return user_index{it->second};
    }

    std::optional<item_index> find_item(std::string_view id) const
    {
        const auto it = item_lookup_.find(std::string(id));
        if (it == item_lookup_.end()) return std::nullopt;
        return item_index{it->second};
    }

    user_index require_user(std::string_view id) const
    {
        if (auto u = find_user(id)) return *u;
        throw unknown_user(std::string(id));
    }

    /// Ratings of one user, ascending by item index.
    std::span<const item_rating> ratings_of(user_index u) const { return by_user_.at(idx(u)); }

    /// Raters of one item with their ratings, ascending by user index.
    std::span<const user_rating> raters_of(item_index i) const { return by_item_.at(idx(i)); }

    std::optional<double> rating(user_index u, item_index i) const
    {
        const auto row = ratings_of(u);
        const auto it = std::lower_bound(row.begin(), row.end(), i,
                                         [](const item_rating& e, item_index key) { return e.item < key; });
        if (it == row.end() || it->item != i) return std::nullopt;
        return it->value;
    }

    /// Mean over every rating of u.
    double user_mean(user_index u) const { return user_means_.at(idx(u)); }

    /// All ratings in canonical (user, item) index order.
    std::vector<rating_record> records() const
    {
        std::vector<rating_record> out;
        out.reserve(rating_count_);
        for (std::size_t u = 0; u < by_user_.size(); ++u)
            for (const auto& e : by_user_[u]) out.push_back({user_ids_[u], item_ids_[idx(e.item)], e.value});
        return out;
    }

    /// FNV-1a over the canonical records and the scale.
    std::uint64_t content_hash() const noexcept { return content_hash_; }

private:
    template <class Member>
    static std::vector<std::string> sorted_unique(std::span<const rating_record> records, Member field)
    {
        std::vector<std::string> ids;
        ids.reserve(records.size());
        for (const auto& r : records) ids.push_back(r.*field);
        std::sort(ids.begin(), ids.end(), [](const std::string& a, const std::string& b) { return natural_less(a, b); });
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        return ids;
    }

    std::uint64_t compute_hash() const noexcept
    {
        std::uint64_t h = 14695981039346656037ULL;
        auto mix = [&h](const void* data, std::size_t n) {
            const auto* p = static_cast<const unsigned char*>(data);
            for (std::size_t i = 0; i < n; ++i) {
                h ^= p[i];
                h *= 1099511628211ULL;
            }
        };
        auto mix_double = [&mix](double v) {
            const auto bits = std::bit_cast<std::uint64_t>(v);
            unsigned char bytes[8];
            for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
            mix(bytes, 8);
        };
        mix_double(scale_.rmin);
        mix_double(scale_.rmax);
        const unsigned char unit_sep = 0x1f;
        const unsigned char record_sep = 0x1e;
        for (std::size_t u = 0; u < by_user_.size(); ++u) {
            for (const auto& e : by_user_[u]) {
                const auto& item = item_ids_[idx(e.item)];
                mix(user_ids_[u].data(), user_ids_[u].size());
                mix(&unit_sep, 1);
                mix(item.data(), item.size());
                mix(&unit_sep, 1);
                mix_double(e.value);
                mix(&record_sep, 1);
            }
        }
        return h;
    }

    rating_scale scale_{};
    std::vector<std::string> user_ids_;
    std::vector<std::string> item_ids_;
    std::unordered_map<std::string, std::uint32_t> user_lookup_;
    std::unordered_map<std::string, std::uint32_t> item_lookup_;
    std::vector<std::vector<item_rating>> by_user_;
    std::vector<std::vector<user_rating>> by_item_;
    std::vector<double> user_means_;
    std::size_t rating_count_ = 0;
    std::uint64_t content_hash_ = 0;
};

inline ratings_matrix build_matrix(std::span<const rating_record> records, rating_scale scale)
{
    return ratings_matrix(records, scale);
}

/// Items rated by both users, ascending.
inline std::vector<item_index> co_rated_items(const ratings_matrix& m, user_index a, user_index b)
{
    if (a == b) throw invalid_argument("co_rated_items needs two distinct users");
    const auto ra = m.ratings_of(a);
    const auto rb = m.ratings_of(b);
    std::vector<item_index> out;
    auto ia = ra.begin();
    auto ib = rb.begin();
    while (ia != ra.end() && ib != rb.end()) {
        if (ia->item < ib->item) {
            ++ia;
        } else if (ib->item < ia->item) {
            ++ib;
        } else {
            out.push_back(ia->item);
            ++ia;
            ++ib;
        }
    }
    return out;
}

inline std::vector<item_index> co_rated_items(const ratings_matrix& m, std::string_view a, std::string_view b)
{
    return co_rated_items(m, m.require_user(a), m.require_user(b));
}

/// Arithmetic mean of a's ratings restricted to items. Throws empty_set on an empty set.
inline double user_mean_over(const ratings_matrix& m, user_index a, std::span<const item_index> items)
{
    if (items.empty()) throw empty_set("mean over an empty item set");
    double sum = 0.0;
    for (auto i : items) {
        const auto r = m.rating(a, i);
        if (!r) throw invalid_argument("user '" + m.user_id(a) + "' did not rate item '" + m.item_id(i) + "'");
        sum += *r;
    }
    return sum / static_cast<double>(items.size());
}

/// Users who rated the item, ascending; an unknown item has no raters.
inline std::vector<user_index> raters_of(const ratings_matrix& m, std::string_view item)
{
    std::vector<user_index> out;
    if (const auto i = m.find_item(item))
        for (const auto& e : m.raters_of(*i)) out.push_back(e.user);
    return out;
}

}  // namespace cflevels
