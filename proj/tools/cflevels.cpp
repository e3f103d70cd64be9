// cflevels: command-line front end for the multi-level collaborative filtering
// library. Subcommands: levels, stats, evaluate, topn, recommend.
//
// Exit codes: 0 success, 1 runtime/data error, 2 usage/validation error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cflevels/cflevels.hpp"

namespace {

using namespace cflevels;

struct dataset_options {
    std::string ratings;
    std::string format = "movielens-1m";
    std::optional<std::string> delimiter;
    std::optional<std::string> columns;
    std::optional<double> scale_min;
    std::optional<double> scale_max;
    std::optional<std::size_t> header_lines;
    bool skip_bad_lines = false;
};

struct method_options {
    std::string method = "pcc";
    std::vector<std::string> methods;
    std::size_t T = 50;
    std::size_t t = 10;
    double y = 0.20;
    double alpha = 100.0;
    double beta = 2.0;
    std::string negative_form = "eq4";
    std::string prediction = "resnick";
};

struct run_options {
    std::size_t k = 40;
    std::string k_sweep;
    std::optional<std::size_t> r;
    double train = 0.8;
    std::optional<std::size_t> folds;
    std::uint64_t seed = 42;
    std::optional<double> relevance;
    std::string hit_def = "correct";
    std::size_t jobs = 1;
    std::string output;
    std::string out_format = "csv";
    std::string metric;
    bool timing = false;
};

void add_dataset_options(CLI::App* cmd, dataset_options& d)
{
    cmd->add_option("--ratings", d.ratings, "Delimited ratings file")->required();
    cmd->add_option("--format", d.format, "Format preset")
        ->check(CLI::IsMember({"movielens-1m", "movietweetings", "epinions", "custom"}));
    cmd->add_option("--delimiter", d.delimiter, "Field delimiter (\"whitespace\" splits on blanks)");
    cmd->add_option("--columns", d.columns, "Column roles, e.g. user,item,rating,ignored");
    cmd->add_option("--scale-min", d.scale_min, "Lowest rating on the scale");
    cmd->add_option("--scale-max", d.scale_max, "Highest rating on the scale");
    cmd->add_option("--header-lines", d.header_lines, "Lines to skip at the top of the file");
    cmd->add_flag("--skip-bad-lines", d.skip_bad_lines, "Warn about malformed lines instead of failing");
}

void add_method_options(CLI::App* cmd, method_options& m)
{
    cmd->add_option("--method", m.method, "Similarity method: pcc, wpcc, spcc, plus, static, dynamic");
    cmd->add_option("--methods", m.methods, "Comma separated list of methods")->delimiter(',');
    cmd->add_option("--T", m.T, "WPCC co-rated threshold")->check(CLI::PositiveNumber);
    cmd->add_option("--t", m.t, "Static method co-rated threshold")->check(CLI::PositiveNumber);
    cmd->add_option("--y", m.y, "Static method PCC threshold");
    cmd->add_option("--alpha", m.alpha, "PLUS alpha")->check(CLI::PositiveNumber);
    cmd->add_option("--beta", m.beta, "PLUS beta")->check(CLI::PositiveNumber);
    cmd->add_option("--negative-form", m.negative_form, "Negative level adjustment")
        ->check(CLI::IsMember({"eq4", "eq8", "alg1"}));
    cmd->add_option("--prediction", m.prediction, "Prediction rule")
        ->check(CLI::IsMember({"resnick", "weighted_mean"}));
}

void add_run_options(CLI::App* cmd, run_options& o)
{
    cmd->add_option("--k", o.k, "Neighbourhood size")->check(CLI::PositiveNumber);
    cmd->add_option("--k-sweep", o.k_sweep, "Inclusive neighbourhood sweep start:stop:step");
    cmd->add_option("--train", o.train, "Holdout training ratio")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--folds", o.folds, "k-fold cross validation instead of holdout")->check(CLI::Range(2, 1000));
    cmd->add_option("--seed", o.seed, "Seed for every random choice");
    cmd->add_option("--jobs", o.jobs, "Worker threads")->envname("CFLEVELS_JOBS")->check(CLI::PositiveNumber);
    cmd->add_option("--output", o.output, "Write report rows here instead of stdout");
    cmd->add_option("--out-format", o.out_format, "Report format")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_flag("--timing", o.timing, "Fill the seconds column with wall-clock time");
}

dataset_format resolve_format(const dataset_options& d)
{
    auto fmt = dataset_format::preset(d.format);
    if (d.delimiter) fmt.delimiter = *d.delimiter == "\\t" ? std::string("\t") : *d.delimiter;
    if (d.columns) {
        fmt.columns.clear();
        std::stringstream ss(*d.columns);
        for (std::string role; std::getline(ss, role, ',');) {
            if (role == "user") fmt.columns.push_back(column_role::user);
            else if (role == "item") fmt.columns.push_back(column_role::item);
            else if (role == "rating") fmt.columns.push_back(column_role::rating);
            else if (role == "ignored" || role.empty()) fmt.columns.push_back(column_role::ignored);
            else throw invalid_argument("--columns: unknown role '" + role + "'");
        }
    }
    if (d.scale_min || d.scale_max)
        fmt.scale = rating_scale(d.scale_min.value_or(fmt.scale.rmin), d.scale_max.value_or(fmt.scale.rmax));
    if (d.header_lines) fmt.header_lines = *d.header_lines;
    return fmt;
}

ratings_matrix load_matrix(const dataset_options& d)
{
    const auto fmt = resolve_format(d);
    auto parsed = parse_ratings(std::filesystem::path(d.ratings), fmt, {d.skip_bad_lines});
    for (const auto& msg : parsed.diagnostics) std::cerr << "warning: " << msg << "\n";
    if (!parsed.diagnostics.empty())
        std::cerr << "warning: " << parsed.diagnostics.size() << " line(s) rejected\n";
    return ratings_matrix(parsed.records, fmt.scale);
}

method_params resolve_params(const method_options& m)
{
    method_params p;
    p.wpcc_threshold = m.T;
    p.static_thresholds = {m.t, m.y};
    p.plus = {m.alpha, m.beta};
    p.negative = parse_negative_form(m.negative_form);
    return p;
}

std::vector<method_spec> resolve_methods(const method_options& m)
{
    const auto params = resolve_params(m);
    std::vector<method_spec> out;
    if (m.methods.empty()) out.push_back({parse_method_kind(m.method), params});
    for (const auto& name : m.methods) out.push_back({parse_method_kind(name), params});
    return out;
}

std::vector<std::size_t> resolve_ks(const run_options& o)
{
    if (o.k_sweep.empty()) return {o.k};
    std::vector<long long> parts;
    std::stringstream ss(o.k_sweep);
    for (std::string tok; std::getline(ss, tok, ':');) {
        try {
            std::size_t used = 0;
            parts.push_back(std::stoll(tok, &used));
            if (used != tok.size()) throw std::exception();
        } catch (...) {
            throw invalid_argument("--k-sweep: expected start:stop:step, got '" + o.k_sweep + "'");
        }
    }
    if (parts.size() != 3 || parts[0] < 1 || parts[2] < 1 || parts[1] < parts[0])
        throw invalid_argument("--k-sweep: expected start:stop:step with 1 <= start <= stop and step >= 1");
    std::vector<std::size_t> ks;
    for (long long k = parts[0]; k <= parts[1]; k += parts[2]) ks.push_back(static_cast<std::size_t>(k));
    return ks;
}

split_spec resolve_split(const run_options& o)
{
    if (o.folds) return split_spec::kfold(*o.folds, o.seed);
    if (!(o.train > 0.0 && o.train < 1.0)) throw invalid_argument("--train must lie strictly between 0 and 1");
    return split_spec::holdout(o.train, o.seed);
}

double metric_of(const eval_report& r, const std::string& metric)
{
    static const std::map<std::string, double eval_report::*> fields{
        {"mae", &eval_report::mae},           {"nmae", &eval_report::nmae},   {"rmse", &eval_report::rmse},
        {"precision", &eval_report::precision}, {"recall", &eval_report::recall}, {"f1", &eval_report::f1},
        {"hit_rate", &eval_report::hit_rate_pct}};
    return r.*fields.at(metric);
}

/// Metric pivot: one line per (k, fold) and one column per method.
std::string pivot(const std::vector<eval_report>& rows, const std::vector<method_spec>& methods,
                  const std::string& metric, std::size_t per_method)
{
    std::string out = "k\tfold";
    for (const auto& m : methods) out += "\t" + std::string(to_string(m.kind));
    out += "\n";
    for (std::size_t i = 0; i < per_method; ++i) {
        const auto& first = rows[i];
        const auto fold_pos = first.params.rfind("fold=");
        const std::string fold = fold_pos == std::string::npos ? "-" : first.params.substr(fold_pos + 5);
        out += std::to_string(first.k) + "\t" + fold;
        for (std::size_t m = 0; m < methods.size(); ++m) out += "\t" + metric_text(metric_of(rows[m * per_method + i], metric));
        out += "\n";
    }
    return out;
}

void emit(const std::string& text, const std::string& path)
{
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write '" + path + "'");
    out << text;
}

int run_grid(const dataset_options& d, const method_options& mo, const run_options& o, bool topn)
{
    const auto matrix = load_matrix(d);
    const auto methods = resolve_methods(mo);
    const auto ks = resolve_ks(o);
    const auto split = resolve_split(o);
    const auto parts = split_parts(matrix, split);

    eval_options opt;
    opt.accuracy = !topn;
    opt.topn = topn;
    opt.r = o.r.value_or(20);
    opt.relevance = o.relevance;
    opt.hits = parse_hit_definition(o.hit_def);
    opt.rule = parse_prediction_rule(mo.prediction);
    opt.timing = o.timing;
    opt.jobs = o.jobs;

    std::vector<eval_report> rows;
    for (const auto& spec : methods) {
        for (auto k : ks) {
            opt.k = k;
            std::vector<eval_report> cell;
            for (std::size_t f = 0; f < parts.size(); ++f) {
                cell.push_back(evaluate_split(parts[f], spec, opt));
                annotate(cell.back(), split, f);
            }
            rows.insert(rows.end(), cell.begin(), cell.end());
            if (parts.size() > 1) {
                auto params = cell.front().params;
                params.replace(params.rfind("fold=") + 5, std::string::npos, "avg");
                rows.push_back(average_reports(cell, params));
            }
        }
    }

    std::string text = o.out_format == "json" ? to_json(rows) : to_csv(rows);
    if (!o.metric.empty()) {
        const auto table = pivot(rows, methods, o.metric, rows.size() / methods.size());
        if (o.output.empty()) text += "\n" + table;
        else std::cout << table;
    }
    emit(text, o.output);
    return 0;
}

int run_levels(const dataset_options& d, const std::string& output)
{
    const auto matrix = load_matrix(d);
    const auto table = build_level_table(matrix.user_count(), matrix.item_count());
    std::ostringstream out;
    out << "users\t" << matrix.user_count() << "\n"
        << "items\t" << matrix.item_count() << "\n"
        << "dvu\t" << table.dvu() << "\n"
        << "dvi\t" << table.dvi() << "\n"
        << "step\t" << table.step() << "\n"
        << "min_corated\t" << table.min_corated() << "\n"
        << "level\tlower\tupper\tdivisor\n";
    for (std::size_t i = 0; i < table.bands().size(); ++i) {
        const auto& b = table.bands()[i];
        out << i + 1 << "\t" << b.lower << "\t" << (b.upper ? std::to_string(*b.upper) : std::string("inf")) << "\t"
            << b.divisor << "\n";
    }
    out << "negative\t0\t" << table.min_corated() - 1 << "\t-\n";
    emit(out.str(), output);
    return 0;
}

int run_stats(const dataset_options& d, const std::string& output)
{
    const auto fmt = resolve_format(d);
    const auto parsed = parse_ratings(std::filesystem::path(d.ratings), fmt, {d.skip_bad_lines});
    for (const auto& msg : parsed.diagnostics) std::cerr << "warning: " << msg << "\n";
    const auto s = dataset_stats(parsed.records);
    std::ostringstream out;
    out << "users\t" << s.users << "\nitems\t" << s.items << "\nratings\t" << s.ratings << "\nsparsity\t"
        << format_number(s.sparsity) << "\n";
    emit(out.str(), output);
    return 0;
}

int run_recommend(const dataset_options& d, const method_options& mo, const std::string& user, std::size_t k,
                  std::size_t r, const std::string& output)
{
    const auto matrix = load_matrix(d);
    const auto target = matrix.require_user(user);
    const auto method = similarity_method::for_matrix(resolve_methods(mo).front(), matrix);
    const similarity_row sim(matrix, target, method);
    const auto list = recommend_top_n(matrix, target, r, k, sim, std::nullopt, parse_prediction_rule(mo.prediction));
    std::string text;
    for (const auto& e : list.items) text += matrix.item_id(e.item) + "\t" + format_number(e.value) + "\n";
    emit(text, output);
    return 0;
}

/// Config file lines "key=value" become "--key=value" ahead of the real
/// arguments, so command-line flags win.
std::vector<std::string> with_config(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    std::optional<std::string> path;
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    if (!path || rest.empty()) return rest;

    std::ifstream in(*path);
    if (!in) throw invalid_argument("--config: cannot read '" + *path + "'");
    std::vector<std::string> injected;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto start = line.find_first_not_of(" \t");
        if (start == std::string::npos || line[start] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw invalid_argument("--config: expected key=value, got '" + line + "'");
        auto key = line.substr(start, eq - start);
        auto value = line.substr(eq + 1);
        key.erase(key.find_last_not_of(" \t") + 1);
        value.erase(0, value.find_first_not_of(" \t"));
        injected.push_back("--" + key + "=" + value);
    }
    // The subcommand name comes first; config options follow it.
    std::vector<std::string> out{rest.front()};
    out.insert(out.end(), injected.begin(), injected.end());
    out.insert(out.end(), rest.begin() + 1, rest.end());
    return out;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Neighbourhood collaborative filtering with static and dynamic multi-level similarity adjustment"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    app.name("cflevels");
    app.footer("--config FILE reads flat key=value lines as subcommand options; command-line flags take precedence.");

    dataset_options data;
    method_options meth;
    run_options run;
    std::string user;
    std::size_t recommend_r = 10;

    auto* levels = app.add_subcommand("levels", "Print the co-rated-count level table derived from a dataset");
    add_dataset_options(levels, data);
    levels->add_option("--output", run.output, "Write here instead of stdout");

    auto* stats = app.add_subcommand("stats", "Print user, item, rating counts and sparsity");
    add_dataset_options(stats, data);
    stats->add_option("--output", run.output, "Write here instead of stdout");

    auto* evaluate = app.add_subcommand("evaluate", "MAE / NMAE / RMSE over a holdout or k-fold split");
    add_dataset_options(evaluate, data);
    add_method_options(evaluate, meth);
    add_run_options(evaluate, run);
    evaluate->add_option("--metric", run.metric, "Also print a method-by-fold pivot of one metric")
        ->check(CLI::IsMember({"mae", "nmae", "rmse"}));

    auto* topn = app.add_subcommand("topn", "Precision / recall / F1 / hit rate of Top-N lists");
    add_dataset_options(topn, data);
    add_method_options(topn, meth);
    add_run_options(topn, run);
    topn->add_option("--r", run.r, "Recommendations per user")->required()->check(CLI::PositiveNumber);
    topn->add_option("--relevance", run.relevance, "Minimum test rating of a relevant item");
    topn->add_option("--hit-def", run.hit_def, "What counts as a hit")->check(CLI::IsMember({"correct", "coverage"}));
    topn->add_option("--metric", run.metric, "Also print a method-by-fold pivot of one metric")
        ->check(CLI::IsMember({"precision", "recall", "f1", "hit_rate"}));

    auto* recommend = app.add_subcommand("recommend", "Top-N list for one user");
    add_dataset_options(recommend, data);
    add_method_options(recommend, meth);
    recommend->add_option("--user", user, "Target user id")->required();
    recommend->add_option("--k", run.k, "Neighbourhood size")->check(CLI::PositiveNumber);
    recommend->add_option("--r", recommend_r, "Recommendations to print")->check(CLI::PositiveNumber);
    recommend->add_option("--output", run.output, "Write here instead of stdout");

    try {
        auto args = with_config(argc, argv);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const cflevels::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (*levels) return run_levels(data, run.output);
        if (*stats) return run_stats(data, run.output);
        if (*evaluate) return run_grid(data, meth, run, false);
        if (*topn) return run_grid(data, meth, run, true);
        if (*recommend) return run_recommend(data, meth, user, run.k, recommend_r, run.output);
    } catch (const cflevels::usage_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
