#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include <mcv/csv.hpp>
#include <mcv/dataset.hpp>
#include <mcv/error.hpp>
#include <mcv/experiment.hpp>
#include <mcv/methods.hpp>
#include <mcv/selector.hpp>
#include <mcv/simgen.hpp>

namespace mcv {

namespace detail {

inline nlohmann::json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, "'" + path + "': " + e.what());
    }
}

inline std::ofstream open_output(const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
    return out;
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn)
{
    try {
        return fn();
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace detail

// ---------------------------------------------------------------------------
// simulate

struct SimulateOptions
{
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<Index> reps;
    std::size_t jobs = 1;
    std::string out;      // markdown; empty = stdout
    std::string csv_out;  // optional CSV
    bool quiet = false;
};

inline ExperimentConfig load_config(const std::string& path, const std::optional<std::uint64_t>& seed = {},
                                    const std::optional<Index>& reps = {})
{
    nlohmann::json j = detail::read_json_file(path);
    if (seed && j.is_object()) j["master_seed"] = *seed;
    if (reps && j.is_object()) j["reps"] = *reps;
    return config_from_json(j);
}

inline int cmd_simulate(const SimulateOptions& opts, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    return detail::guarded(err, [&] {
        const ExperimentConfig config = load_config(opts.config_path, opts.seed, opts.reps);
        auto progress = [&](Index done, Index total) {
            if (!opts.quiet) err << "\rreplication " << done << "/" << total << std::flush;
        };
        const ExperimentReport report = run_experiment(config, opts.jobs, progress);
        if (!opts.quiet) err << '\n';
        if (opts.out.empty()) {
            write_markdown(out, report);
        } else {
            auto file = detail::open_output(opts.out);
            write_markdown(file, report);
        }
        if (!opts.csv_out.empty()) {
            auto file = detail::open_output(opts.csv_out);
            write_csv(file, report);
        }
        return 0;
    });
}

// ---------------------------------------------------------------------------
// generate

struct GenerateOptions
{
    Index n = 120;
    Index p = 2000;
    std::string example = "Ex2";
    std::string design = "independent";
    double rho = 0.0;
    bool random_position = false;
    double sigma = 1.0;
    std::uint64_t seed = 1;
    std::string out;            // CSV path
    std::string truth_out;      // default: <out>.truth.txt
    std::string response = "y";
};

inline std::vector<std::string> default_column_names(Index p)
{
    std::vector<std::string> names;
    for (Index j = 0; j < p; ++j) names.push_back("x" + std::to_string(j + 1));
    return names;
}

inline CovSpec parse_design(const std::string& kind, double rho)
{
    if (kind == "independent") return CovSpec::independent();
    if (kind == "expdecay") return CovSpec::exp_decay(rho);
    if (kind == "equalcorr") return CovSpec::equal_corr(rho);
    throw Error(ErrorCode::BadConfig, "design must be independent, expdecay or equalcorr");
}

inline int cmd_generate(const GenerateOptions& opts, std::ostream& err = std::cerr)
{
    return detail::guarded(err, [&] {
        if (opts.out.empty()) throw Error(ErrorCode::BadConfig, "generate needs an output path");
        if (opts.example != "Ex1" && opts.example != "Ex2") throw Error(ErrorCode::BadConfig, "example must be Ex1 or Ex2");
        const SignalExample example = opts.example == "Ex1" ? SignalExample::Ex1 : SignalExample::Ex2;
        TrueModel truth = standard_betas(example, opts.p, opts.random_position, derive_seed(opts.seed, 1));
        truth.sigma = opts.sigma;
        const Dataset data = sample_dataset(opts.n, truth, parse_design(opts.design, opts.rho), derive_seed(opts.seed, 2));
        const auto names = default_column_names(opts.p);
        {
            auto file = detail::open_output(opts.out);
            write_dataset_csv(file, data, names, opts.response);
        }
        auto truth_file = detail::open_output(opts.truth_out.empty() ? opts.out + ".truth.txt" : opts.truth_out);
        for (Index j : truth.oracle) truth_file << names[static_cast<std::size_t>(j)] << '\n';
        return 0;
    });
}

// ---------------------------------------------------------------------------
// fit

struct FitOptions
{
    std::string data_path;
    std::string response = "y";
    std::string method = "m-MCCV";
    MethodParams params;
    Index grid_L = kDefaultPathLength;
    std::optional<double> grid_ratio;
    std::uint64_t seed = 1;
    std::size_t jobs = 1;
    std::string out;  // result JSON; empty = stdout
    std::string truth_path;
};

inline std::vector<std::string> read_truth_sidecar(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open truth file '" + path + "'");
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line)) {
        line = detail::trim(line);
        if (!line.empty()) names.push_back(line);
    }
    return names;
}

/**
 * Structured report for one selection on a named dataset. Coefficients are
 * on the raw scale of the input columns; proportions are taken over the
 * construction-set supports at the chosen lambda.
 */
inline nlohmann::ordered_json fit_report(const Dataset& raw, const std::vector<std::string>& names,
                                         const FitOptions& opts)
{
    const Dataset data = standardize(raw);
    const MethodDescriptor& descriptor = find_method(opts.method);
    const MethodSpec method = build_method(descriptor, data.n(), opts.params);
    GridParams grid;
    grid.L = opts.grid_L;
    grid.ratio = opts.grid_ratio;
    const SelectionResult result = run_selection(data, method, grid, opts.seed, opts.jobs);
    const RawScaleModel model = to_raw_scale(data, result.dense_coefficients(data.p()));

    nlohmann::ordered_json j;
    j["method"] = opts.method;
    j["criterion"] = selection_criterion_name(result.criterion);
    j["penalty"] = method.penalty.kind == PenaltyKind::Lasso ? "lasso" : "elastic_net";
    j["response"] = opts.response;
    j["n"] = data.n();
    j["p"] = data.p();
    j["seed"] = opts.seed;
    j["splits"] = result.per_split_supports.size();
    j["lambda_index"] = result.lambda_index;
    j["lambda_hat"] = result.lambda_hat;
    j["model_size"] = result.support_hat.size();
    j["refit_applied"] = result.refit_applied;
    auto selected = nlohmann::ordered_json::array();
    auto coefficients = nlohmann::ordered_json::array();
    for (Index k : result.support_hat) {
        selected.push_back(names[static_cast<std::size_t>(k)]);
        coefficients.push_back({{"variable", names[static_cast<std::size_t>(k)]}, {"coefficient", model.coefficients[k]}});
    }
    j["selected"] = selected;
    j["intercept"] = model.intercept;
    j["coefficients"] = coefficients;
    j["lambdas"] = result.grid.values;
    auto curve = nlohmann::ordered_json::array();
    for (Index l = 0; l < result.criterion_curve.size(); ++l) {
        const double v = result.criterion_curve[l];
        if (std::isfinite(v)) curve.push_back(v);
        else curve.push_back(nullptr);
    }
    j["criterion_curve"] = curve;
    j["disqualified_lambdas"] = result.disqualified_lambdas;
    auto proportions = nlohmann::ordered_json::array();
    if (!result.per_split_supports.empty()) {
        const Eigen::VectorXd prop = selection_proportions(result.per_split_supports, data.p());
        for (Index k = 0; k < data.p(); ++k) {
            proportions.push_back({{"variable", names[static_cast<std::size_t>(k)]}, {"proportion", prop[k]}});
        }
    }
    j["proportions"] = proportions;
    if (!opts.truth_path.empty()) {
        const auto truth_names = read_truth_sidecar(opts.truth_path);
        IndexSet oracle;
        for (const auto& t : truth_names) {
            const auto it = std::find(names.begin(), names.end(), t);
            if (it == names.end()) throw Error(ErrorCode::ParseError, "truth variable '" + t + "' is not a column");
            oracle.push_back(static_cast<Index>(it - names.begin()));
        }
        std::sort(oracle.begin(), oracle.end());
        TrueModel truth;
        truth.oracle = oracle;
        truth.d0 = static_cast<Index>(oracle.size());
        const Metrics m = support_metrics(result.support_hat, truth);
        j["truth"] = {{"fn", m.fn}, {"fp", m.fp}};
    }
    return j;
}

inline int cmd_fit(const FitOptions& opts, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    return detail::guarded(err, [&] {
        const CsvTable table = read_csv_file(opts.data_path);
        const auto [raw, names] = dataset_from_csv(table, opts.response);
        const auto report = fit_report(raw, names, opts);
        if (opts.out.empty()) {
            out << report.dump(2) << '\n';
        } else {
            auto file = detail::open_output(opts.out);
            file << report.dump(2) << '\n';
        }
        return 0;
    });
}

// ---------------------------------------------------------------------------
// report

struct ReportOptions
{
    std::string result_path;
    std::string out_prefix;  // writes <prefix>.proportions.csv and <prefix>.bins.csv
    std::optional<double> min_proportion;  // keep proportion > threshold
};

struct ProportionReport
{
    std::vector<std::pair<std::string, double>> pairs;  // sorted by proportion, descending
    std::vector<Index> bin_counts;                      // 20 bins of width 0.05, last one closed
};

inline constexpr Index kProportionBins = 20;

/// Histogram bin for a proportion; the last bin is [0.95, 1.0].
inline Index proportion_bin(double proportion)
{
    const auto k = static_cast<Index>(std::floor(proportion * static_cast<double>(kProportionBins) + 1e-9));
    return std::clamp<Index>(k, 0, kProportionBins - 1);
}

/**
 * Variables sorted by selection proportion plus a histogram over the
 * variables that were selected at least once (optionally only those above
 * the threshold).
 */
inline ProportionReport proportion_report(const nlohmann::json& result, std::optional<double> min_proportion)
{
    if (!result.contains("proportions") || !result.at("proportions").is_array()) {
        throw Error(ErrorCode::ParseError, "result file has no proportions array");
    }
    ProportionReport r;
    for (const auto& entry : result.at("proportions")) {
        const std::string name = entry.at("variable").get<std::string>();
        const double v = entry.at("proportion").get<double>();
        if (min_proportion && !(v > *min_proportion)) continue;
        r.pairs.emplace_back(name, v);
    }
    std::stable_sort(r.pairs.begin(), r.pairs.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    r.bin_counts.assign(static_cast<std::size_t>(kProportionBins), 0);
    for (const auto& [name, v] : r.pairs) {
        if (v > 0.0) ++r.bin_counts[static_cast<std::size_t>(proportion_bin(v))];
    }
    return r;
}

inline void write_proportions_csv(std::ostream& os, const ProportionReport& r)
{
    os << "variable,proportion\n";
    for (const auto& [name, v] : r.pairs) os << name << ',' << v << '\n';
}

inline void write_bins_csv(std::ostream& os, const ProportionReport& r)
{
    os << "bin_lower,bin_upper,count\n";
    for (Index k = 0; k < kProportionBins; ++k) {
        os << std::fixed << std::setprecision(2) << static_cast<double>(k) / kProportionBins << ','
           << static_cast<double>(k + 1) / kProportionBins << ',' << r.bin_counts[static_cast<std::size_t>(k)] << '\n';
    }
}

inline int cmd_report(const ReportOptions& opts, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    return detail::guarded(err, [&] {
        const ProportionReport r = proportion_report(detail::read_json_file(opts.result_path), opts.min_proportion);
        if (opts.out_prefix.empty()) {
            write_proportions_csv(out, r);
            out << '\n';
            write_bins_csv(out, r);
        } else {
            auto pairs = detail::open_output(opts.out_prefix + ".proportions.csv");
            write_proportions_csv(pairs, r);
            auto bins = detail::open_output(opts.out_prefix + ".bins.csv");
            write_bins_csv(bins, r);
        }
        return 0;
    });
}

} // namespace mcv
