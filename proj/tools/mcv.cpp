#include <CLI11.hpp>

#include <mcv/commands.hpp>

int main(int argc, char** argv)
{
    CLI::App app{"Modified cross-validation for penalized linear regression"};
    app.require_subcommand(1);

    mcv::SimulateOptions sim;
    std::uint64_t sim_seed = 0;
    mcv::Index sim_reps = 0;
    auto* simulate = app.add_subcommand("simulate", "run a configured simulation experiment");
    simulate->add_option("config", sim.config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    auto* sim_seed_opt = simulate->add_option("--seed", sim_seed, "override master_seed");
    auto* sim_reps_opt = simulate->add_option("--reps", sim_reps, "override reps");
    simulate->add_option("--jobs", sim.jobs, "worker threads (0 = all cores)");
    simulate->add_option("--out", sim.out, "markdown table path (default stdout)");
    simulate->add_option("--csv", sim.csv_out, "CSV table path");
    simulate->add_flag("--quiet", sim.quiet, "no progress output");

    mcv::GenerateOptions gen;
    auto* generate = app.add_subcommand("generate", "write a simulated dataset as CSV plus a truth sidecar");
    generate->add_option("--n", gen.n, "rows");
    generate->add_option("--p", gen.p, "covariates");
    generate->add_option("--example", gen.example, "Ex1 or Ex2")->check(CLI::IsMember({"Ex1", "Ex2"}));
    generate->add_option("--design", gen.design, "independent, expdecay or equalcorr")
        ->check(CLI::IsMember({"independent", "expdecay", "equalcorr"}));
    generate->add_option("--rho", gen.rho, "correlation parameter");
    generate->add_flag("--random-position", gen.random_position, "place signals at random coordinates");
    generate->add_option("--sigma", gen.sigma, "noise standard deviation");
    generate->add_option("--seed", gen.seed, "seed");
    generate->add_option("--out", gen.out, "CSV path")->required();
    generate->add_option("--truth-out", gen.truth_out, "truth sidecar path (default <out>.truth.txt)");

    mcv::FitOptions fit;
    std::string fit_nc = fit.params.n_c_exponent.str();
    std::string fit_enet_nc = fit.params.enet_n_c_exponent.str();
    double fit_ratio = 0.0;
    auto* fitcmd = app.add_subcommand("fit", "select lambda on a CSV dataset");
    fitcmd->add_option("data", fit.data_path, "CSV with header row")->required()->check(CLI::ExistingFile);
    fitcmd->add_option("--response", fit.response, "response column name");
    fitcmd->add_option("--method", fit.method, "method name, e.g. m-MCCV, em-MCCV, K-fold, EBIC");
    fitcmd->add_option("--n-c-exponent", fit_nc, "construction size exponent c, n_c = ceil(n^c)");
    fitcmd->add_option("--enet-n-c-exponent", fit_enet_nc, "construction size exponent for elastic net");
    fitcmd->add_option("--b", fit.params.b, "Monte Carlo splits");
    fitcmd->add_option("--K", fit.params.K, "folds");
    fitcmd->add_option("--alpha", fit.params.alpha, "elastic net ridge weight");
    fitcmd->add_option("--ebic-gamma", fit.params.ebic_gamma, "EBIC gamma");
    fitcmd->add_option("--grid-length", fit.grid_L, "number of lambda values");
    auto* ratio_opt = fitcmd->add_option("--grid-ratio", fit_ratio, "lambda_min / lambda_max");
    fitcmd->add_option("--seed", fit.seed, "split seed");
    fitcmd->add_option("--jobs", fit.jobs, "worker threads (0 = all cores)");
    fitcmd->add_option("--out", fit.out, "result JSON path (default stdout)");
    fitcmd->add_option("--truth", fit.truth_path, "file listing the true nonzero column names");

    mcv::ReportOptions rep;
    double min_prop = 0.0;
    auto* report = app.add_subcommand("report", "selection-proportion histogram data from a fit result");
    report->add_option("result", rep.result_path, "result JSON from `fit`")->required();
    report->add_option("--out", rep.out_prefix, "output prefix (default stdout)");
    auto* min_opt = report->add_option("--min-proportion", min_prop, "keep variables with proportion above this");

    CLI11_PARSE(app, argc, argv);

    if (simulate->parsed()) {
        if (*sim_seed_opt) sim.seed = sim_seed;
        if (*sim_reps_opt) sim.reps = sim_reps;
        return mcv::cmd_simulate(sim);
    }
    if (generate->parsed()) return mcv::cmd_generate(gen);
    if (fitcmd->parsed()) {
        try {
            fit.params.n_c_exponent = mcv::Rational::parse(fit_nc);
            fit.params.enet_n_c_exponent = mcv::Rational::parse(fit_enet_nc);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 1;
        }
        if (*ratio_opt) fit.grid_ratio = fit_ratio;
        return mcv::cmd_fit(fit);
    }
    if (report->parsed()) {
        if (*min_opt) rep.min_proportion = min_prop;
        return mcv::cmd_report(rep);
    }
    return 1;
}
