#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include <mcv/error.hpp>
#include <mcv/methods.hpp>
#include <mcv/parallel.hpp>
#include <mcv/selector.hpp>
#include <mcv/simgen.hpp>

namespace mcv {

struct ExperimentConfig
{
    CovSpec design;
    Index n = 300;
    Index p = 1000;
    SignalExample example = SignalExample::Ex1;
    bool random_position = false;
    double sigma = 1.0;
    std::vector<std::string> methods;
    MethodParams params;
    Index reps = 100;
    std::uint64_t master_seed = 1;
    Index grid_L = kDefaultPathLength;
    std::optional<double> grid_ratio;
    double tol = 1e-7;
    long max_iter = 100000;
    std::vector<Rational> n_c_sweep;
    std::vector<Index> b_sweep;

    bool operator==(const ExperimentConfig&) const = default;

    GridParams grid_params() const
    {
        GridParams g;
        g.L = grid_L;
        g.ratio = grid_ratio;
        g.solver.tol = tol;
        g.solver.max_iter = max_iter;
        return g;
    }

    void validate() const
    {
        auto bad = [](const std::string& what) { throw Error(ErrorCode::BadConfig, what); };
        if (n < 2) bad("n must be >= 2");
        if (p < 8) bad("p must be >= 8");
        if (reps < 1) bad("reps must be >= 1");
        if (methods.empty()) bad("methods must be non-empty");
        if (params.b < 1) bad("b must be >= 1");
        if (params.K < 2 || params.K > n) bad("K must satisfy 2 <= K <= n");
        if (grid_L < 2) bad("grid.L must be >= 2");
        if (grid_ratio && !(*grid_ratio > 0.0 && *grid_ratio < 1.0)) bad("grid.ratio must lie in (0, 1)");
        if (!(sigma >= 0.0)) bad("sigma must be >= 0");
        if (!(tol > 0.0) || max_iter < 1) bad("solver tol/max_iter must be positive");
        if (design.kind != CovKind::Independent && !(design.rho >= 0.0 && design.rho < 1.0)) {
            bad("design rho must lie in [0, 1)");
        }
        for (Index b : b_sweep) {
            if (b < 1) bad("b_sweep entries must be >= 1");
        }
        if (!n_c_sweep.empty() && !b_sweep.empty()) bad("use at most one of n_c_sweep and b_sweep");
        for (const auto& name : methods) {
            try {
                find_method(name);
            } catch (const Error& e) {
                bad(e.what());
            }
        }
        auto check_nc = [&](const Rational& c) {
            const Index nc = construction_size(n, c);
            if (nc < 2 || n - nc < 1) bad("n_c exponent " + c.str() + " gives n_c=" + std::to_string(nc));
        };
        check_nc(params.n_c_exponent);
        check_nc(params.enet_n_c_exponent);
        for (const auto& c : n_c_sweep) check_nc(c);
    }
};

namespace detail {

inline std::string design_kind_name(CovKind k)
{
    switch (k) {
        case CovKind::Independent: return "independent";
        case CovKind::ExpDecay: return "expdecay";
        case CovKind::EqualCorr: return "equalcorr";
    }
    return "?";
}

inline Rational rational_from_json(const nlohmann::json& j)
{
    if (j.is_string()) return Rational::parse(j.get<std::string>());
    if (j.is_number_integer()) return {j.get<std::int64_t>(), 1};
    if (j.is_number()) {
        const double v = j.get<double>();
        return {static_cast<std::int64_t>(std::llround(v * 1e6)), 1000000};
    }
    throw Error(ErrorCode::BadConfig, "expected a fraction string like \"3/4\"");
}

} // namespace detail

inline nlohmann::ordered_json to_json(const ExperimentConfig& c)
{
    nlohmann::ordered_json j;
    j["design"] = {{"kind", detail::design_kind_name(c.design.kind)}, {"rho", c.design.rho}};
    j["n"] = c.n;
    j["p"] = c.p;
    j["example"] = c.example == SignalExample::Ex1 ? "Ex1" : "Ex2";
    j["random_position"] = c.random_position;
    j["sigma"] = c.sigma;
    j["methods"] = c.methods;
    j["n_c_exponent"] = c.params.n_c_exponent.str();
    j["enet_n_c_exponent"] = c.params.enet_n_c_exponent.str();
    j["b"] = c.params.b;
    j["K"] = c.params.K;
    j["alpha"] = c.params.alpha;
    j["ebic_gamma"] = c.params.ebic_gamma;
    j["reps"] = c.reps;
    j["master_seed"] = c.master_seed;
    j["grid"] = {{"L", c.grid_L}, {"ratio", c.grid_ratio ? nlohmann::ordered_json(*c.grid_ratio) : nullptr}};
    j["solver"] = {{"tol", c.tol}, {"max_iter", c.max_iter}};
    auto sweep = nlohmann::ordered_json::array();
    for (const auto& r : c.n_c_sweep) sweep.push_back(r.str());
    j["n_c_sweep"] = sweep;
    j["b_sweep"] = c.b_sweep;
    return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j)
{
    if (!j.is_object()) throw Error(ErrorCode::BadConfig, "config must be a JSON object");
    ExperimentConfig c;
    static const std::vector<std::string> known{"design", "n", "p", "example", "random_position", "sigma",
                                                "methods", "n_c_exponent", "enet_n_c_exponent", "b", "K", "alpha",
                                                "ebic_gamma", "reps", "master_seed", "grid", "solver", "n_c_sweep",
                                                "b_sweep"};
    for (const auto& [key, value] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw Error(ErrorCode::BadConfig, "unknown config key '" + key + "'");
        }
    }
    try {
        if (j.contains("design")) {
            const auto& d = j.at("design");
            const std::string kind = d.value("kind", std::string("independent"));
            const double rho = d.value("rho", 0.0);
            if (kind == "independent") c.design = {CovKind::Independent, rho};
            else if (kind == "expdecay") c.design = CovSpec::exp_decay(rho);
            else if (kind == "equalcorr") c.design = CovSpec::equal_corr(rho);
            else throw Error(ErrorCode::BadConfig, "unknown design kind '" + kind + "'");
        }
        if (j.contains("n")) c.n = j.at("n").get<Index>();
        if (j.contains("p")) c.p = j.at("p").get<Index>();
        if (j.contains("example")) {
            const std::string e = j.at("example").get<std::string>();
            if (e == "Ex1") c.example = SignalExample::Ex1;
            else if (e == "Ex2") c.example = SignalExample::Ex2;
            else throw Error(ErrorCode::BadConfig, "example must be Ex1 or Ex2");
        }
        if (j.contains("random_position")) c.random_position = j.at("random_position").get<bool>();
        if (j.contains("sigma")) c.sigma = j.at("sigma").get<double>();
        if (j.contains("methods")) c.methods = j.at("methods").get<std::vector<std::string>>();
        if (j.contains("n_c_exponent")) c.params.n_c_exponent = detail::rational_from_json(j.at("n_c_exponent"));
        if (j.contains("enet_n_c_exponent")) {
            c.params.enet_n_c_exponent = detail::rational_from_json(j.at("enet_n_c_exponent"));
        }
        if (j.contains("b")) c.params.b = j.at("b").get<Index>();
        if (j.contains("K")) c.params.K = j.at("K").get<Index>();
        if (j.contains("alpha")) c.params.alpha = j.at("alpha").get<double>();
        if (j.contains("ebic_gamma")) c.params.ebic_gamma = j.at("ebic_gamma").get<double>();
        if (j.contains("reps")) c.reps = j.at("reps").get<Index>();
        if (j.contains("master_seed")) c.master_seed = j.at("master_seed").get<std::uint64_t>();
        if (j.contains("grid")) {
            const auto& g = j.at("grid");
            if (g.contains("L")) c.grid_L = g.at("L").get<Index>();
            if (g.contains("ratio") && !g.at("ratio").is_null()) c.grid_ratio = g.at("ratio").get<double>();
        }
        if (j.contains("solver")) {
            const auto& s = j.at("solver");
            if (s.contains("tol")) c.tol = s.at("tol").get<double>();
            if (s.contains("max_iter")) c.max_iter = s.at("max_iter").get<long>();
        }
        if (j.contains("n_c_sweep")) {
            for (const auto& r : j.at("n_c_sweep")) c.n_c_sweep.push_back(detail::rational_from_json(r));
        }
        if (j.contains("b_sweep")) c.b_sweep = j.at("b_sweep").get<std::vector<Index>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::BadConfig, e.what());
    }
    if (!(c.params.alpha >= 0.0 && c.params.alpha < 1.0)) throw Error(ErrorCode::BadConfig, "alpha must lie in [0, 1)");
    c.validate();
    return c;
}

/// One row of a summary table: a method under one sweep setting.
struct MethodRun
{
    Index table = 0;
    std::string label;
    std::string method;
    MethodSpec spec;
};

struct TablePlan
{
    std::string title;
    Index b = 0;
    Rational n_c_exponent;
};

/// Expand a config into tables and rows (sweeps produce several tables or rows).
inline std::pair<std::vector<TablePlan>, std::vector<MethodRun>> plan_runs(const ExperimentConfig& c)
{
    std::vector<TablePlan> tables;
    std::vector<MethodRun> runs;
    auto add_rows = [&](Index table, const MethodParams& params, const std::string& suffix, bool mc_only) {
        for (const auto& name : c.methods) {
            const auto& d = find_method(name);
            if (mc_only && d.scheme != SchemeKind::MonteCarlo) continue;
            runs.push_back({table, name + suffix, name, build_method(d, c.n, params)});
        }
    };
    const std::string base = detail::design_kind_name(c.design.kind) +
                             (c.design.kind == CovKind::Independent ? "" : " rho=" + [&] {
                                 std::ostringstream os;
                                 os << c.design.rho;
                                 return os.str();
                             }());
    if (!c.n_c_sweep.empty()) {
        for (const auto& exponent : c.n_c_sweep) {
            MethodParams params = c.params;
            params.n_c_exponent = exponent;
            const Index table = static_cast<Index>(tables.size());
            tables.push_back({base + ", n_c = ceil(n^(" + exponent.str() + ")) = " +
                                  std::to_string(construction_size(c.n, exponent)),
                              params.b, exponent});
            add_rows(table, params, "", false);
        }
    } else if (!c.b_sweep.empty()) {
        tables.push_back({base + ", b sweep", c.params.b, c.params.n_c_exponent});
        for (const auto& name : c.methods) {
            if (find_method(name).scheme != SchemeKind::MonteCarlo) {
                runs.push_back({0, name, name, build_method(find_method(name), c.n, c.params)});
                continue;
            }
            for (Index b : c.b_sweep) {
                MethodParams params = c.params;
                params.b = b;
                runs.push_back({0, name + " b=" + std::to_string(b), name, build_method(find_method(name), c.n, params)});
            }
        }
    } else {
        tables.push_back({base, c.params.b, c.params.n_c_exponent});
        add_rows(0, c.params, "", false);
    }
    return {tables, runs};
}

struct ReplicationResult
{
    std::vector<Metrics> metrics;  // aligned with plan_runs().second
};

namespace detail {

using AnalysisKey = std::tuple<int, int, Index, Index>;  // penalty, scheme, K, n_v

inline AnalysisKey analysis_key(const MethodSpec& m)
{
    return {static_cast<int>(m.penalty.kind), static_cast<int>(m.scheme.kind), m.scheme.K, m.scheme.n_v};
}

inline std::uint64_t plan_stream(SchemeKind kind)
{
    // K-fold and reversed K-fold share one fold partition.
    return kind == SchemeKind::MonteCarlo ? 11 : 10;
}

inline CvAnalysis prefix(const CvAnalysis& a, Index b)
{
    if (b >= a.plan.size()) return a;
    CvAnalysis out;
    out.plan = a.plan;
    out.plan.pairs.resize(static_cast<std::size_t>(b));
    out.plan.scheme.b = b;
    out.cells.assign(a.cells.begin(), a.cells.begin() + b);
    out.supports.assign(a.supports.begin(), a.supports.begin() + b);
    return out;
}

} // namespace detail

/**
 * One simulated replication: draw truth, training and test sets from
 * `rep_seed`, run every planned method and score it. Methods sharing a
 * penalty and split scheme share one set of construction-set paths; Monte
 * Carlo runs with fewer splits use a prefix of the longest plan, which is
 * exactly the plan they would draw on their own.
 */
inline ReplicationResult run_replication(const ExperimentConfig& c, const std::vector<MethodRun>& runs,
                                         const Eigen::MatrixXd& factor, std::uint64_t rep_seed,
                                         std::size_t jobs = 1)
{
    const TrueModel truth = [&] {
        TrueModel t = standard_betas(c.example, c.p, c.random_position, derive_seed(rep_seed, 1));
        t.sigma = c.sigma;
        return t;
    }();
    if (truth.d0 >= c.n) throw Error(ErrorCode::BadConfig, "true model size must be below n");
    const Dataset train = standardize(sample_dataset(c.n, truth, factor, c.design, derive_seed(rep_seed, 2)));
    const Dataset test = sample_dataset(c.n, truth, factor, c.design, derive_seed(rep_seed, 3));
    const GridParams grid_params = c.grid_params();

    std::map<int, SolutionPath> full_paths;
    auto full_path = [&](const PenaltySpec& penalty) -> const SolutionPath& {
        const int key = static_cast<int>(penalty.kind);
        auto it = full_paths.find(key);
        if (it == full_paths.end()) {
            const LambdaGrid grid = make_grid(train, grid_params, penalty);
            it = full_paths.emplace(key, fit_path(train, grid, penalty, grid_params.solver)).first;
        }
        return it->second;
    };

    struct Need
    {
        MethodSpec spec;
        Index b = 0;
        bool lse = false;
    };
    std::map<detail::AnalysisKey, Need> needs;
    for (const auto& run : runs) {
        if (is_information_criterion(run.spec.criterion)) continue;
        auto& need = needs[detail::analysis_key(run.spec)];
        need.spec = run.spec;
        const Index b = run.spec.scheme.kind == SchemeKind::MonteCarlo ? run.spec.scheme.b : run.spec.scheme.K;
        need.b = std::max(need.b, b);
        need.lse = need.lse || needs_lse(to_criterion_kind(run.spec.criterion));
    }
    std::map<detail::AnalysisKey, CvAnalysis> analyses;
    for (auto& [key, need] : needs) {
        SplitScheme scheme = need.spec.scheme;
        if (scheme.kind == SchemeKind::MonteCarlo) scheme.b = need.b;
        const SplitPlan plan = make_plan(train.n(), scheme, derive_seed(rep_seed, detail::plan_stream(scheme.kind)));
        const SolutionPath& path = full_path(need.spec.penalty);
        analyses.emplace(key, analyze_splits(train, path.grid, plan, need.spec.penalty, grid_params.solver, need.lse,
                                             jobs));
    }

    ReplicationResult out;
    for (const auto& run : runs) {
        const SolutionPath& path = full_path(run.spec.penalty);
        SelectionResult result;
        if (is_information_criterion(run.spec.criterion)) {
            result = select_by_information(train, path, run.spec.criterion, run.spec.ebic_gamma, run.spec.refit_final);
        } else {
            const CvAnalysis& full = analyses.at(detail::analysis_key(run.spec));
            const Index b = run.spec.scheme.kind == SchemeKind::MonteCarlo ? run.spec.scheme.b : full.plan.size();
            result = select_from_analysis(train, path, detail::prefix(full, b), run.spec.criterion,
                                          run.spec.refit_final);
        }
        out.metrics.push_back(evaluate(result, truth, train, test));
    }
    return out;
}

struct Stat
{
    double mean = 0.0;
    double sd = 0.0;
};

/// Mean and sample standard deviation (0 for a single value).
inline Stat summarize_values(const std::vector<double>& v)
{
    Stat s;
    if (v.empty()) return s;
    for (double x : v) s.mean += x;
    s.mean /= static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - s.mean) * (x - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    return s;
}

struct SummaryRow
{
    std::string label;
    std::string method;
    Index b = 0;
    Index n_c = 0;
    Stat fn, fp, pe, size;
    std::vector<Metrics> per_rep;
};

struct SummaryTable
{
    std::string title;
    std::vector<SummaryRow> rows;

    const SummaryRow& row(const std::string& label) const
    {
        for (const auto& r : rows) {
            if (r.label == label) return r;
        }
        throw Error(ErrorCode::BadConfig, "no row labelled '" + label + "'");
    }
};

struct ExperimentReport
{
    ExperimentConfig config;
    std::vector<SummaryTable> tables;
};

inline std::vector<SummaryTable> summarize(const std::vector<TablePlan>& tables, const std::vector<MethodRun>& runs,
                                           const std::vector<ReplicationResult>& reps, Index n)
{
    std::vector<SummaryTable> out(tables.size());
    for (std::size_t t = 0; t < tables.size(); ++t) out[t].title = tables[t].title;
    for (std::size_t k = 0; k < runs.size(); ++k) {
        SummaryRow row;
        row.label = runs[k].label;
        row.method = runs[k].method;
        const auto& scheme = runs[k].spec.scheme;
        if (!is_information_criterion(runs[k].spec.criterion)) {
            row.b = scheme.kind == SchemeKind::MonteCarlo ? scheme.b : scheme.K;
            row.n_c = scheme.kind == SchemeKind::MonteCarlo ? n - scheme.n_v
                      : scheme.kind == SchemeKind::KFold   ? n - n / scheme.K
                                                           : n / scheme.K;
        }
        std::vector<double> fn, fp, pe, size;
        for (const auto& rep : reps) {
            const Metrics& m = rep.metrics[k];
            row.per_rep.push_back(m);
            fn.push_back(static_cast<double>(m.fn));
            fp.push_back(static_cast<double>(m.fp));
            pe.push_back(m.pe);
            size.push_back(static_cast<double>(m.model_size));
        }
        row.fn = summarize_values(fn);
        row.fp = summarize_values(fp);
        row.pe = summarize_values(pe);
        row.size = summarize_values(size);
        out[static_cast<std::size_t>(runs[k].table)].rows.push_back(std::move(row));
    }
    return out;
}

/// All replications, parallel over repetitions; seeds come from (master_seed, rep index).
inline ExperimentReport run_experiment(const ExperimentConfig& c, std::size_t jobs = 1,
                                       const std::function<void(Index, Index)>& progress = {})
{
    c.validate();
    const auto [tables, runs] = plan_runs(c);
    const Eigen::MatrixXd factor = make_covariance(c.p, c.design);
    std::vector<ReplicationResult> reps(static_cast<std::size_t>(c.reps));
    std::mutex progress_mutex;
    Index done = 0;
    parallel_for(reps.size(), jobs, [&](std::size_t r) {
        reps[r] = run_replication(c, runs, factor, derive_seed(c.master_seed, r), 1);
        if (progress) {
            std::lock_guard lock(progress_mutex);
            progress(++done, c.reps);
        }
    });
    return {c, summarize(tables, runs, reps, c.n)};
}

inline std::string format_stat(const Stat& s)
{
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << s.mean << '(' << s.sd << ')';
    return os.str();
}

/// Aligned markdown: one section per table, columns Method | FN | FP | PE.
inline void write_markdown(std::ostream& os, const ExperimentReport& report)
{
    for (std::size_t t = 0; t < report.tables.size(); ++t) {
        const auto& table = report.tables[t];
        if (t) os << '\n';
        os << "### " << table.title << "\n\n";
        std::vector<std::array<std::string, 4>> cells{{"Method", "FN", "FP", "PE"}};
        for (const auto& r : table.rows) cells.push_back({r.label, format_stat(r.fn), format_stat(r.fp), format_stat(r.pe)});
        std::array<std::size_t, 4> width{};
        for (const auto& row : cells) {
            for (std::size_t k = 0; k < 4; ++k) width[k] = std::max(width[k], row[k].size());
        }
        auto emit = [&](const std::array<std::string, 4>& row) {
            os << '|';
            for (std::size_t k = 0; k < 4; ++k) {
                const std::string pad(width[k] - row[k].size(), ' ');
                os << ' ' << (k == 0 ? row[k] + pad : pad + row[k]) << " |";
            }
            os << '\n';
        };
        emit(cells[0]);
        os << '|' << std::string(width[0] + 2, '-') << '|';
        for (std::size_t k = 1; k < 4; ++k) os << std::string(width[k] + 1, '-') << ":|";
        os << '\n';
        for (std::size_t r = 1; r < cells.size(); ++r) emit(cells[r]);
    }
}

inline void write_csv(std::ostream& os, const ExperimentReport& report)
{
    os << "table,method,label,b,n_c,fn_mean,fn_sd,fp_mean,fp_sd,pe_mean,pe_sd,size_mean,size_sd\n";
    os << std::setprecision(10);
    for (const auto& table : report.tables) {
        for (const auto& r : table.rows) {
            os << '"' << table.title << "\"," << r.method << ',' << '"' << r.label << "\"," << r.b << ',' << r.n_c
               << ',' << r.fn.mean << ',' << r.fn.sd << ',' << r.fp.mean << ',' << r.fp.sd << ',' << r.pe.mean << ','
               << r.pe.sd << ',' << r.size.mean << ',' << r.size.sd << '\n';
        }
    }
}

} // namespace mcv
