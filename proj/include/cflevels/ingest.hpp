#pragma once

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "cflevels/error.hpp"
#include "cflevels/ratings.hpp"

namespace cflevels {

enum class column_role { user, item, rating, ignored };

/// Layout of a delimited rating file. A delimiter of "whitespace" splits on
/// runs of spaces and tabs.
struct dataset_format {
    std::string delimiter = "::";
    std::vector<column_role> columns{column_role::user, column_role::item, column_role::rating};
    rating_scale scale{};
    std::size_t header_lines = 0;

    static dataset_format preset(std::string_view name)
    {
        using enum column_role;
        if (name == "movielens-1m") return {"::", {user, item, rating, ignored}, {1.0, 5.0}, 0};
        if (name == "movietweetings") return {"::", {user, item, rating}, {0.0, 10.0}, 0};
        if (name == "epinions") return {"whitespace", {user, item, rating}, {1.0, 5.0}, 0};
        if (name == "custom") return {};
        throw invalid_argument("unknown format preset '" + std::string(name) +
                               "' (expected movielens-1m, movietweetings, epinions or custom)");
    }

    void validate() const
    {
        if (delimiter.empty()) throw invalid_argument("delimiter must not be empty");
        for (auto role : {column_role::user, column_role::item, column_role::rating})
            if (std::count(columns.begin(), columns.end(), role) != 1)
                throw invalid_argument("format must name the user, item and rating columns exactly once");
    }
};

struct parse_options {
    bool skip_bad_lines = false;
};

struct parse_result {
    std::vector<rating_record> records;
    std::vector<std::string> diagnostics;  ///< one per rejected line, when skipping
};

namespace detail {

inline void split_fields(std::string_view line, std::string_view delimiter, std::vector<std::string_view>& out)
{
    out.clear();
    if (delimiter == "whitespace") {
        std::size_t pos = 0;
        while (true) {
            pos = line.find_first_not_of(" \t", pos);
            if (pos == std::string_view::npos) return;
            const auto end = line.find_first_of(" \t", pos);
            out.push_back(line.substr(pos, end - pos));
            if (end == std::string_view::npos) return;
            pos = end;
        }
    }
    std::size_t pos = 0;
    while (true) {
        const auto end = line.find(delimiter, pos);
        out.push_back(line.substr(pos, end - pos));
        if (end == std::string_view::npos) return;
        pos = end + delimiter.size();
    }
}

inline std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

/// One record per non-blank line after the header; extra columns are ignored.
/// Bad lines throw malformed_line / out_of_scale_rating with their line
/// number, or are collected as diagnostics when skip_bad_lines is set.
inline parse_result parse_ratings(std::istream& in, const dataset_format& fmt, parse_options opt = {})
{
    fmt.validate();
    const auto position = [&](column_role role) {
        return static_cast<std::size_t>(std::find(fmt.columns.begin(), fmt.columns.end(), role) - fmt.columns.begin());
    };
    const std::size_t user_col = position(column_role::user);
    const std::size_t item_col = position(column_role::item);
    const std::size_t rating_col = position(column_role::rating);
    const std::size_t needed = std::max({user_col, item_col, rating_col}) + 1;

    parse_result result;
    std::string line;
    std::vector<std::string_view> fields;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no <= fmt.header_lines) continue;
        std::string_view view = line;
        if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
        if (detail::trim(view).empty()) continue;
        try {
            detail::split_fields(view, fmt.delimiter, fields);
            if (fields.size() < needed)
                throw malformed_line(line_no, "expected at least " + std::to_string(needed) + " fields, found " +
                                                  std::to_string(fields.size()));
            const auto user = detail::trim(fields[user_col]);
            const auto item = detail::trim(fields[item_col]);
            const auto rating_text = detail::trim(fields[rating_col]);
            if (user.empty() || item.empty()) throw malformed_line(line_no, "empty user or item id");
            double value = 0.0;
            const auto res = std::from_chars(rating_text.data(), rating_text.data() + rating_text.size(), value);
            if (res.ec != std::errc{} || res.ptr != rating_text.data() + rating_text.size() || rating_text.empty())
                throw malformed_line(line_no, "unparsable rating '" + std::string(rating_text) + "'");
            if (!fmt.scale.contains(value)) throw out_of_scale_rating(value, fmt.scale.rmin, fmt.scale.rmax, line_no);
            result.records.push_back({std::string(user), std::string(item), value});
        } catch (const data_error& e) {
            if (!opt.skip_bad_lines) throw;
            result.diagnostics.emplace_back(e.what());
        }
    }
    return result;
}

inline parse_result parse_ratings(const std::filesystem::path& path, const dataset_format& fmt, parse_options opt = {})
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open ratings file '" + path.string() + "'");
    return parse_ratings(in, fmt, opt);
}

struct dataset_summary {
    std::size_t users = 0;
    std::size_t items = 0;
    std::size_t ratings = 0;
    double sparsity = 0.0;
};

/// Distinct users/items, record count and 1 - ratings / (users * items); 0 for empty input.
inline dataset_summary dataset_stats(std::span<const rating_record> records)
{
    std::unordered_set<std::string_view> users;
    std::unordered_set<std::string_view> items;
    for (const auto& r : records) {
        users.insert(r.user);
        items.insert(r.item);
    }
    dataset_summary s{users.size(), items.size(), records.size(), 0.0};
    if (s.users > 0 && s.items > 0)
        s.sparsity = 1.0 - static_cast<double>(s.ratings) / (static_cast<double>(s.users) * static_cast<double>(s.items));
    return s;
}

}  // namespace cflevels
