#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cflevels/method.hpp"
#include "cflevels/parallel.hpp"
#include "cflevels/predictor.hpp"
#include "cflevels/ratings.hpp"

namespace cflevels {

// ---------------------------------------------------------------------------
// Splits

struct split_spec {
    enum class kind_t { holdout, kfold };

    kind_t kind = kind_t::holdout;
    double train_ratio = 0.8;
    std::size_t folds = 5;
    std::uint64_t seed = 42;

    static split_spec holdout(double ratio, std::uint64_t seed) { return {kind_t::holdout, ratio, 5, seed}; }
    static split_spec kfold(std::size_t folds, std::uint64_t seed) { return {kind_t::kfold, 0.8, folds, seed}; }

    std::string describe() const
    {
        return kind == kind_t::holdout ? "split=holdout;train=" + format_number(train_ratio)
                                       : "split=kfold;folds=" + std::to_string(folds);
    }
};

struct train_test {
    ratings_matrix train;
    std::vector<rating_record> test;
};

namespace detail {

/// Uniform integer in [0, bound) by rejection, so shuffles do not depend on the
/// standard library's distribution implementation.
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound)
{
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = rng();
    while (x >= limit) x = rng();
    return x % bound;
}

inline std::vector<rating_record> shuffled_records(const ratings_matrix& m, std::uint64_t seed)
{
    auto records = m.records();
    std::mt19937_64 rng(seed);
    for (std::size_t i = records.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(bounded(rng, i));
        std::swap(records[i - 1], records[j]);
    }
    return records;
}

}  // namespace detail

/// Seeded uniform partition of the rating records; round(ratio * n) go to training.
inline train_test split_holdout(const ratings_matrix& m, double ratio, std::uint64_t seed)
{
    if (!(ratio > 0.0 && ratio < 1.0)) throw invalid_argument("training ratio must lie in (0, 1)");
    auto records = detail::shuffled_records(m, seed);
    const auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(records.size())));
    std::vector<rating_record> train(records.begin(), records.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<rating_record> test(records.begin() + static_cast<std::ptrdiff_t>(n_train), records.end());
    return {ratings_matrix(train, m.scale()), std::move(test)};
}

/// Standard k-fold: part i is the test set of pair i. Part sizes differ by at most one.
inline std::vector<train_test> kfold_split(const ratings_matrix& m, std::size_t folds, std::uint64_t seed)
{
    if (folds < 2) throw invalid_argument("k-fold needs at least 2 folds");
    const auto records = detail::shuffled_records(m, seed);
    const std::size_t n = records.size();
    std::vector<std::size_t> bounds{0};
    for (std::size_t f = 0; f < folds; ++f) bounds.push_back(bounds.back() + n / folds + (f < n % folds ? 1 : 0));

    std::vector<train_test> out;
    out.reserve(folds);
    for (std::size_t f = 0; f < folds; ++f) {
        std::vector<rating_record> train;
        std::vector<rating_record> test;
        train.reserve(n - (bounds[f + 1] - bounds[f]));
        for (std::size_t i = 0; i < n; ++i)
            (i >= bounds[f] && i < bounds[f + 1] ? test : train).push_back(records[i]);
        out.push_back({ratings_matrix(train, m.scale()), std::move(test)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Metrics

struct prediction_pair {
    double predicted;
    double actual;
};

inline double mae(std::span<const prediction_pair> pairs)
{
    if (pairs.empty()) throw empty_input("MAE of an empty prediction list");
    double sum = 0.0;
    for (const auto& p : pairs) sum += std::abs(p.predicted - p.actual);
    return sum / static_cast<double>(pairs.size());
}

inline double nmae(double mae_value, const rating_scale& scale)
{
    if (mae_value < 0.0) throw invalid_argument("MAE cannot be negative");
    return mae_value / scale.range();
}

inline double rmse(std::span<const prediction_pair> pairs)
{
    if (pairs.empty()) throw empty_input("RMSE of an empty prediction list");
    double sum = 0.0;
    for (const auto& p : pairs) sum += (p.predicted - p.actual) * (p.predicted - p.actual);
    return std::sqrt(sum / static_cast<double>(pairs.size()));
}

struct retrieval_scores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t hits = 0;
};

inline double f1_score(double precision, double recall)
{
    return precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
}

/// Precision/recall/F1 of one recommendation list. nullopt when nothing is
/// relevant, in which case the user is left out of averages.
template <class T>
std::optional<retrieval_scores> precision_recall_f1(std::span<const T> recommended, std::span<const T> relevant)
{
    if (relevant.empty()) return std::nullopt;
    std::vector<T> rec(recommended.begin(), recommended.end());
    std::vector<T> rel(relevant.begin(), relevant.end());
    std::sort(rec.begin(), rec.end());
    rec.erase(std::unique(rec.begin(), rec.end()), rec.end());
    std::sort(rel.begin(), rel.end());
    rel.erase(std::unique(rel.begin(), rel.end()), rel.end());
    std::vector<T> common;
    std::set_intersection(rec.begin(), rec.end(), rel.begin(), rel.end(), std::back_inserter(common));

    retrieval_scores s;
    s.hits = common.size();
    s.precision = rec.empty() ? 0.0 : static_cast<double>(s.hits) / static_cast<double>(rec.size());
    s.recall = static_cast<double>(s.hits) / static_cast<double>(rel.size());
    s.f1 = f1_score(s.precision, s.recall);
    return s;
}

inline std::optional<retrieval_scores> precision_recall_f1(const topn_list& topn, std::span<const item_index> relevant)
{
    std::vector<item_index> rec;
    rec.reserve(topn.items.size());
    for (const auto& e : topn.items) rec.push_back(e.item);
    return precision_recall_f1<item_index>(rec, relevant);
}

/// Percentage of users with at least one hit.
inline double hit_rate(std::span<const std::size_t> hits_per_user)
{
    if (hits_per_user.empty()) return 0.0;
    const auto with_hit = std::count_if(hits_per_user.begin(), hits_per_user.end(), [](std::size_t h) { return h > 0; });
    return 100.0 * static_cast<double>(with_hit) / static_cast<double>(hits_per_user.size());
}

/// Default relevance cut: rmin + 0.75 (rmax - rmin), rounded up to a whole rating.
inline double default_relevance_threshold(const rating_scale& scale)
{
    return std::ceil(scale.rmin + 0.75 * scale.range() - 1e-12);
}

// ---------------------------------------------------------------------------
// Experiments

enum class hit_definition {
    correct,   ///< hits_u = relevant items in the Top-N list
    coverage,  ///< hits_u = items in the Top-N list
};

inline std::string_view to_string(hit_definition h) { return h == hit_definition::correct ? "correct" : "coverage"; }

inline hit_definition parse_hit_definition(std::string_view s)
{
    if (s == "correct") return hit_definition::correct;
    if (s == "coverage") return hit_definition::coverage;
    throw invalid_argument("unknown hit definition '" + std::string(s) + "' (expected correct or coverage)");
}

struct eval_options {
    std::size_t k = 40;
    std::size_t r = 20;
    std::optional<double> relevance;  ///< default_relevance_threshold when unset
    hit_definition hits = hit_definition::correct;
    prediction_rule rule = prediction_rule::resnick;
    bool accuracy = true;  ///< MAE / NMAE / RMSE
    bool topn = true;      ///< precision / recall / F1 / hit rate
    bool timing = false;   ///< record wall-clock seconds (otherwise 0)
    std::size_t jobs = 1;
};

struct eval_report {
    std::string method;
    std::size_t k = 0;
    std::string params;
    double mae = std::numeric_limits<double>::quiet_NaN();
    double nmae = std::numeric_limits<double>::quiet_NaN();
    double rmse = std::numeric_limits<double>::quiet_NaN();
    double precision = std::numeric_limits<double>::quiet_NaN();
    double recall = std::numeric_limits<double>::quiet_NaN();
    double f1 = std::numeric_limits<double>::quiet_NaN();
    double hit_rate_pct = std::numeric_limits<double>::quiet_NaN();
    std::size_t coverage = 0;   ///< test ratings without a prediction
    std::size_t predicted = 0;  ///< test ratings that entered MAE/RMSE
    double seconds = 0.0;
};

namespace detail {

struct user_outcome {
    std::vector<prediction_pair> pairs;
    std::size_t misses = 0;
    std::optional<retrieval_scores> retrieval;
    std::size_t hits = 0;
};

}  // namespace detail

/// Evaluates one method on one train/test pair. Test users are processed in
/// natural id order and summed in that order, so results do not depend on jobs.
inline eval_report evaluate_split(const train_test& split, const method_spec& spec, const eval_options& opt)
{
    if (opt.k < 1) throw invalid_argument("--k must be >= 1");
    if (opt.topn && opt.r < 1) throw invalid_argument("--r must be >= 1");
    const auto started = std::chrono::steady_clock::now();
    const ratings_matrix& train = split.train;
    const auto method = similarity_method::for_matrix(spec, train);
    const double threshold = opt.relevance.value_or(default_relevance_threshold(train.scale()));

    auto test = split.test;
    std::sort(test.begin(), test.end(), [](const rating_record& x, const rating_record& y) {
        if (x.user != y.user) return natural_less(x.user, y.user);
        return natural_less(x.item, y.item);
    });
    std::vector<std::size_t> starts;
    for (std::size_t i = 0; i < test.size(); ++i)
        if (i == 0 || test[i].user != test[i - 1].user) starts.push_back(i);
    starts.push_back(test.size());
    const std::size_t users = starts.size() - 1;

    std::vector<detail::user_outcome> outcomes(users);
    parallel_for(users, opt.jobs, [&](std::size_t u) {
        auto& out = outcomes[u];
        const auto first = test.begin() + static_cast<std::ptrdiff_t>(starts[u]);
        const auto last = test.begin() + static_cast<std::ptrdiff_t>(starts[u + 1]);
        const auto target = train.find_user(first->user);
        if (!target) {
            out.misses = static_cast<std::size_t>(last - first);
            if (opt.topn) {
                const auto relevant = std::count_if(first, last, [&](const auto& r) { return r.value >= threshold; });
                if (relevant > 0) out.retrieval = retrieval_scores{};
            }
            return;
        }
        const similarity_row sim(train, *target, method);
        if (opt.accuracy) {
            for (auto it = first; it != last; ++it) {
                const auto item = train.find_item(it->item);
                const auto p = item ? predict(train, *target, *item, opt.k, sim, opt.rule) : std::nullopt;
                if (p) out.pairs.push_back({p->value, it->value});
                else ++out.misses;
            }
        }
        if (opt.topn) {
            const auto list = recommend_top_n(train, *target, opt.r, opt.k, sim, std::nullopt, opt.rule);
            std::vector<item_index> relevant_known;
            std::size_t relevant_total = 0;
            for (auto it = first; it != last; ++it) {
                if (it->value < threshold) continue;
                ++relevant_total;
                if (const auto item = train.find_item(it->item)) relevant_known.push_back(*item);
            }
            std::size_t correct = 0;
            if (relevant_total > 0) {
                // Relevant test items unknown to training can never be recommended
                // but still count towards recall.
                auto s = precision_recall_f1(list, relevant_known).value_or(retrieval_scores{});
                correct = s.hits;
                s.recall = static_cast<double>(s.hits) / static_cast<double>(relevant_total);
                s.f1 = f1_score(s.precision, s.recall);
                out.retrieval = s;
            }
            out.hits = opt.hits == hit_definition::correct ? correct : list.items.size();
        }
    });

    eval_report report;
    report.method = method.name();
    report.k = opt.k;
    report.params = method.describe();

    std::vector<prediction_pair> pairs;
    std::vector<std::size_t> hits;
    double precision_sum = 0.0;
    double recall_sum = 0.0;
    std::size_t scored_users = 0;
    for (const auto& o : outcomes) {
        pairs.insert(pairs.end(), o.pairs.begin(), o.pairs.end());
        report.coverage += o.misses;
        hits.push_back(o.hits);
        if (o.retrieval) {
            precision_sum += o.retrieval->precision;
            recall_sum += o.retrieval->recall;
            ++scored_users;
        }
    }
    report.predicted = pairs.size();
    if (opt.accuracy && !pairs.empty()) {
        report.mae = mae(pairs);
        report.nmae = nmae(report.mae, train.scale());
        report.rmse = rmse(pairs);
    }
    if (opt.topn) {
        report.precision = scored_users ? precision_sum / static_cast<double>(scored_users) : 0.0;
        report.recall = scored_users ? recall_sum / static_cast<double>(scored_users) : 0.0;
        report.f1 = f1_score(report.precision, report.recall);
        report.hit_rate_pct = hit_rate(hits);
    }
    if (opt.timing)
        report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

/// The (train, test) pairs a split spec produces: one for holdout, `folds` for k-fold.
inline std::vector<train_test> split_parts(const ratings_matrix& m, const split_spec& split)
{
    if (split.kind == split_spec::kind_t::holdout) {
        std::vector<train_test> out;
        out.push_back(split_holdout(m, split.train_ratio, split.seed));
        return out;
    }
    return kfold_split(m, split.folds, split.seed);
}

/// Appends the split description (and the 1-based fold for k-fold) to report.params.
inline void annotate(eval_report& report, const split_spec& split, std::size_t fold)
{
    std::string extra = split.describe() + ";seed=" + std::to_string(split.seed);
    if (split.kind == split_spec::kind_t::kfold) extra += ";fold=" + std::to_string(fold + 1);
    report.params = report.params.empty() ? extra : report.params + ";" + extra;
}

/// One report per fold (a single report for a holdout split).
inline std::vector<eval_report> run_experiment(const ratings_matrix& m, const method_spec& spec, const split_spec& split,
                                               const eval_options& opt)
{
    const auto parts = split_parts(m, split);
    std::vector<eval_report> out;
    for (std::size_t f = 0; f < parts.size(); ++f) {
        out.push_back(evaluate_split(parts[f], spec, opt));
        annotate(out.back(), split, f);
    }
    return out;
}

/// Mean of every metric across reports; coverage and predicted are summed.
inline eval_report average_reports(std::span<const eval_report> reports, std::string params)
{
    if (reports.empty()) throw empty_input("no reports to average");
    eval_report avg;
    avg.method = reports.front().method;
    avg.k = reports.front().k;
    avg.params = std::move(params);
    auto mean_of = [&](double eval_report::*field) {
        double sum = 0.0;
        for (const auto& r : reports) sum += r.*field;
        return sum / static_cast<double>(reports.size());
    };
    avg.mae = mean_of(&eval_report::mae);
    avg.nmae = mean_of(&eval_report::nmae);
    avg.rmse = mean_of(&eval_report::rmse);
    avg.precision = mean_of(&eval_report::precision);
    avg.recall = mean_of(&eval_report::recall);
    avg.f1 = mean_of(&eval_report::f1);
    avg.hit_rate_pct = mean_of(&eval_report::hit_rate_pct);
    for (const auto& r : reports) {
        avg.coverage += r.coverage;
        avg.predicted += r.predicted;
        avg.seconds += r.seconds;
    }
    return avg;
}

// ---------------------------------------------------------------------------
// Report serialization

inline constexpr const char* report_csv_header =
    "method,k,params,mae,nmae,rmse,precision,recall,f1,hit_rate_pct,coverage,seconds";

inline std::string metric_text(double v) { return std::isnan(v) ? std::string("nan") : format_number(v); }

inline std::string to_csv_row(const eval_report& r)
{
    std::string row = r.method + "," + std::to_string(r.k) + "," + r.params;
    for (double v : {r.mae, r.nmae, r.rmse, r.precision, r.recall, r.f1, r.hit_rate_pct}) row += "," + metric_text(v);
    row += "," + std::to_string(r.coverage) + "," + format_number(r.seconds);
    return row;
}

inline std::string to_csv(std::span<const eval_report> reports)
{
    std::string out = std::string(report_csv_header) + "\n";
    for (const auto& r : reports) out += to_csv_row(r) + "\n";
    return out;
}

inline nlohmann::ordered_json to_json(const eval_report& r)
{
    auto num = [](double v) { return std::isnan(v) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(v); };
    nlohmann::ordered_json j;
    j["method"] = r.method;
    j["k"] = r.k;
    j["params"] = r.params;
    j["mae"] = num(r.mae);
    j["nmae"] = num(r.nmae);
    j["rmse"] = num(r.rmse);
    j["precision"] = num(r.precision);
    j["recall"] = num(r.recall);
    j["f1"] = num(r.f1);
    j["hit_rate_pct"] = num(r.hit_rate_pct);
    j["coverage"] = r.coverage;
    j["seconds"] = r.seconds;
    return j;
}

inline std::string to_json(std::span<const eval_report> reports)
{
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : reports) arr.push_back(to_json(r));
    return arr.dump(2) + "\n";
}

}  // namespace cflevels
