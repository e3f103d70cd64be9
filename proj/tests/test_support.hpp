#pragma once

#include <cstdint>
#include <fstream>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cflevels/cflevels.hpp"

namespace cflevels::testing {

inline std::vector<rating_record> worked_records()
{
    return {
        {"User1", "Item1", 1}, {"User1", "Item2", 2}, {"User1", "Item3", 3},
        {"User2", "Item1", 5}, {"User2", "Item2", 5}, {"User2", "Item3", 3}, {"User2", "Item4", 3},
        {"User3", "Item3", 4}, {"User3", "Item4", 2},
        {"User4", "Item1", 1}, {"User4", "Item2", 1}, {"User4", "Item3", 1}, {"User4", "Item4", 5},
    };
}

inline ratings_matrix worked() { return ratings_matrix(worked_records(), {1.0, 5.0}); }

/// Integer ratings on 1-5, each cell present with probability `density`.
inline std::vector<rating_record> random_records(std::mt19937_64& rng, std::size_t users, std::size_t items,
                                                 double density)
{
    std::bernoulli_distribution present(density);
    std::uniform_int_distribution<int> value(1, 5);
    std::vector<rating_record> out;
    for (std::size_t u = 0; u < users; ++u)
        for (std::size_t i = 0; i < items; ++i)
            if (present(rng)) out.push_back({"u" + std::to_string(u), "i" + std::to_string(i), double(value(rng))});
    return out;
}

inline ratings_matrix random_matrix(std::mt19937_64& rng, std::size_t users = 10, std::size_t items = 10,
                                    double density = 0.6)
{
    return ratings_matrix(random_records(rng, users, items, density), {1.0, 5.0});
}

/// Frozen values produced by tests/oracle/cf_oracle.py.
inline const nlohmann::json& oracle()
{
    static const nlohmann::json data = [] {
        std::ifstream in(std::string(CFLEVELS_TEST_DATA) + "/oracle_cases.json");
        return nlohmann::json::parse(in);
    }();
    return data;
}

inline ratings_matrix matrix_from_json(const nlohmann::json& ratings)
{
    std::vector<rating_record> records;
    for (const auto& [user, row] : ratings.items())
        for (const auto& [item, value] : row.items()) records.push_back({user, item, value.get<double>()});
    return ratings_matrix(records, {1.0, 5.0});
}

inline level_table table_from_json(const nlohmann::json& j)
{
    return build_level_table(j.at("users").get<std::size_t>(), j.at("items").get<std::size_t>());
}

/// Dense O(users * items) reference for Pearson on the co-rated set, sharing
/// no code with the library's merge or row paths.
inline pair_overlap dense_overlap(const ratings_matrix& m, user_index a, user_index b)
{
    std::vector<double> xa;
    std::vector<double> xb;
    for (std::size_t i = 0; i < m.item_count(); ++i) {
        const item_index item{static_cast<std::uint32_t>(i)};
        const auto ra = m.rating(a, item);
        const auto rb = m.rating(b, item);
        if (ra && rb) {
            xa.push_back(*ra);
            xb.push_back(*rb);
        }
    }
    const std::size_t n = xa.size();
    if (n < 2) return {n, 0.0};
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += xa[i];
        mb += xb[i];
    }
    ma /= double(n);
    mb /= double(n);
    double num = 0, da = 0, db = 0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (xa[i] - ma) * (xb[i] - mb);
        da += (xa[i] - ma) * (xa[i] - ma);
        db += (xb[i] - mb) * (xb[i] - mb);
    }
    if (da == 0 || db == 0) return {n, 0.0};
    return {n, std::max(-1.0, std::min(1.0, num / std::sqrt(da * db)))};
}

/// Largest absolute difference between the library and one oracle pair record.
inline double oracle_pair_error(const ratings_matrix& m, const nlohmann::json& p, const level_table& mt,
                                const level_table& small)
{
    const auto a = m.require_user(p.at("a").get<std::string>());
    const auto b = m.require_user(p.at("b").get<std::string>());
    const auto o = overlap(m, a, b);
    if (o.corated != p.at("corated").get<std::size_t>()) return std::numeric_limits<double>::infinity();
    const std::pair<double, const char*> got[] = {
        {o.pcc, "pcc"},
        {wpcc_adjust(o.pcc, o.corated, 5), "wpcc_T5"},
        {spcc_adjust(o.pcc, o.corated), "spcc"},
        // Scaled down so the 1e-9 bound is relative to the [-1, 1] input range.
        {plus_adjust(o.pcc, {100, 2}) / 100.0, "plus_100_2"},
        {static_adjust(o.pcc, o.corated, {4, 0.20}), "static_t4_y020"},
        {dynamic_adjust(o.pcc, o.corated, mt), "dynamic_mt"},
        {dynamic_adjust(o.pcc, o.corated, small), "dynamic_small"},
        {dynamic_adjust(o.pcc, o.corated, small, negative_form::eq8), "dynamic_small_eq8"},
        {dynamic_adjust(o.pcc, o.corated, small, negative_form::alg1), "dynamic_small_alg1"},
    };
    double worst = 0.0;
    for (const auto& [value, key] : got) {
        double want = p.at(key).get<double>();
        if (std::string_view(key) == "plus_100_2") want /= 100.0;
        worst = std::max(worst, std::abs(value - want));
    }
    return worst;
}

inline user_index uidx(std::size_t i) { return user_index{static_cast<std::uint32_t>(i)}; }
inline item_index iidx(std::size_t i) { return item_index{static_cast<std::uint32_t>(i)}; }

}  // namespace cflevels::testing
