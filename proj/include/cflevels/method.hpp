#pragma once

#include <array>
#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>

#include "cflevels/levels.hpp"
#include "cflevels/similarity.hpp"

namespace cflevels {

enum class method_kind { pcc, wpcc, spcc, plus, static_proposed, dynamic_proposed };

inline std::string_view to_string(method_kind k)
{
    switch (k) {
    case method_kind::pcc: return "pcc";
    case method_kind::wpcc: return "wpcc";
    case method_kind::spcc: return "spcc";
    case method_kind::plus: return "plus";
    case method_kind::static_proposed: return "static";
    case method_kind::dynamic_proposed: return "dynamic";
    }
    return "pcc";
}

inline method_kind parse_method_kind(std::string_view s)
{
    for (auto k : {method_kind::pcc, method_kind::wpcc, method_kind::spcc, method_kind::plus,
                   method_kind::static_proposed, method_kind::dynamic_proposed})
        if (to_string(k) == s) return k;
    throw invalid_argument("unknown method '" + std::string(s) +
                           "' (expected pcc, wpcc, spcc, plus, static or dynamic)");
}

/// Shortest round-trip decimal form; used anywhere a number ends up in text output.
inline std::string format_number(double v)
{
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

struct method_params {
    std::size_t wpcc_threshold = 50;
    static_params static_thresholds{};
    plus_params plus{};
    negative_form negative = negative_form::eq4;
};

struct method_spec {
    method_kind kind = method_kind::pcc;
    method_params params{};
};

/// A configured similarity function. The dynamic method carries the level
/// table of the matrix it was bound to.
class similarity_method {
public:
    similarity_method(method_kind kind, method_params params = {}, std::optional<level_table> table = std::nullopt)
        : kind_(kind), params_(params), table_(std::move(table))
    {
        params_.static_thresholds.validate();
        params_.plus.validate();
        if (params_.wpcc_threshold < 1) throw invalid_argument("WPCC threshold T must be >= 1");
        if (kind_ == method_kind::dynamic_proposed && !table_)
            throw invalid_argument("the dynamic method needs a level table");
    }

    /// Binds a spec to a matrix, deriving the level table from its counts when needed.
    static similarity_method for_matrix(const method_spec& spec, const ratings_matrix& m)
    {
        std::optional<level_table> table;
        if (spec.kind == method_kind::dynamic_proposed) table = build_level_table(m.user_count(), m.item_count());
        return similarity_method(spec.kind, spec.params, std::move(table));
    }

    method_kind kind() const noexcept { return kind_; }
    const method_params& params() const noexcept { return params_; }
    const std::optional<level_table>& table() const noexcept { return table_; }

    double adjust(const pair_overlap& o) const
    {
        switch (kind_) {
        case method_kind::pcc: return o.pcc;
        case method_kind::wpcc: return wpcc_adjust(o.pcc, o.corated, params_.wpcc_threshold);
        case method_kind::spcc: return spcc_adjust(o.pcc, o.corated);
        case method_kind::plus: return plus_adjust(o.pcc, params_.plus);
        case method_kind::static_proposed: return static_adjust(o.pcc, o.corated, params_.static_thresholds);
        case method_kind::dynamic_proposed: return dynamic_adjust(o.pcc, o.corated, *table_, params_.negative);
        }
        return o.pcc;
    }

    double operator()(const ratings_matrix& m, user_index a, user_index b) const { return adjust(overlap(m, a, b)); }

    std::string name() const { return std::string(to_string(kind_)); }

    /// Parameters that affect scores, as "key=value" joined by ';'.
    std::string describe() const
    {
        switch (kind_) {
        case method_kind::wpcc: return "T=" + std::to_string(params_.wpcc_threshold);
        case method_kind::plus:
            return "alpha=" + format_number(params_.plus.alpha) + ";beta=" + format_number(params_.plus.beta);
        case method_kind::static_proposed:
            return "t=" + std::to_string(params_.static_thresholds.t) +
                   ";y=" + format_number(params_.static_thresholds.y);
        case method_kind::dynamic_proposed: {
            std::string s = "negative=" + std::string(to_string(params_.negative)) + ";bands=";
            for (const auto& b : table_->bands()) {
                s += std::to_string(b.lower) + "-" + (b.upper ? std::to_string(*b.upper) : std::string("inf")) +
                     "/" + std::to_string(b.divisor) + " ";
            }
            if (!table_->bands().empty()) s.pop_back();
            return s;
        }
        default: return {};
        }
    }

    /// Identifies the method, its parameters and the matrix contents.
    std::string fingerprint(const ratings_matrix& m) const
    {
        std::array<char, 17> hex{};
        const auto res = std::to_chars(hex.data(), hex.data() + hex.size(), m.content_hash(), 16);
        return name() + "|" + describe() + "|" + std::string(hex.data(), res.ptr);
    }

private:
    method_kind kind_;
    method_params params_;
    std::optional<level_table> table_;
};

}  // namespace cflevels
