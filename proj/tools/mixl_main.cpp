#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mixl/benchmark.hpp"
#include "mixl/data.hpp"
#include "mixl/dgp.hpp"
#include "mixl/errors.hpp"
#include "mixl/eval.hpp"
#include "mixl/io.hpp"
#include "mixl/mcmc.hpp"
#include "mixl/vb.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Loads the run configuration, or builds the defaults adjusted to a dataset's
// coefficient count when no file was given.
mixl::io::RunConfig resolve_config(const std::string& config_path, int num_coeffs) {
    if (!config_path.empty()) {
        mixl::io::RunConfig cfg = mixl::io::load_run_config(config_path);
        if (num_coeffs > 0 && cfg.dgp.num_coeffs != num_coeffs) {
            throw mixl::ValidationError(
                "config num_coeffs " + std::to_string(cfg.dgp.num_coeffs) +
                " does not match the dataset (" + std::to_string(num_coeffs) + ")");
        }
        return cfg;
    }
    if (num_coeffs > 0) {
        return mixl::io::parse_run_config(json{{"dgp", json{{"num_coeffs", num_coeffs}}}});
    }
    return mixl::io::default_run_config();
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir) {
    const mixl::io::RunConfig cfg = resolve_config(config_path, 0);
    const mixl::SimulatedData sim = mixl::simulate_dataset(cfg.dgp);
    const mixl::ValidationScenarios scenarios =
        mixl::make_validation_scenarios(cfg.dgp, cfg.scenario_count);

    const fs::path out(out_dir);
    mixl::io::save_dataset_csv(sim.data, out / "dataset.csv");
    mixl::io::save_truth({cfg.dgp, sim.truth, scenarios}, out / "truth.json");
    std::vector<std::pair<std::string, std::string>> inputs;
    if (!config_path.empty()) inputs.emplace_back("config", config_path);
    mixl::io::write_manifest(out, "simulate", inputs, {"dataset.csv", "truth.json"},
                             mixl::io::run_config_to_json(cfg));

    std::cout << "simulated " << sim.data.num_persons() << " persons, "
              << sim.data.total_occasions() << " occasions, " << cfg.dgp.num_coeffs
              << " coefficients, " << cfg.dgp.num_alternatives << " alternatives\n"
              << "realized error rate: " << mixl::realized_error_rate(sim.data, sim.truth)
              << "\nwrote " << (out / "dataset.csv").string() << " and "
              << (out / "truth.json").string() << std::endl;
    return 0;
}

int cmd_fit(const std::string& kind, const std::string& data_path,
            const std::string& config_path, const std::string& out_dir) {
    const mixl::ChoiceDataset data = mixl::io::load_dataset_csv(data_path);
    const mixl::io::RunConfig cfg = resolve_config(config_path, data.num_coeffs);
    const fs::path out(out_dir);
    const json echo = mixl::io::run_config_to_json(cfg);

    if (kind == "mcmc") {
        std::cout << "running MCMC: " << cfg.mcmc.n_chains << " chains, " << cfg.mcmc.n_iter
                  << " iterations (" << cfg.mcmc.n_burn << " burn-in, thin " << cfg.mcmc.thin
                  << ")" << std::endl;
        const mixl::McmcDraws draws = mixl::run_mcmc(data, cfg.hyper, cfg.mcmc);
        mixl::io::save_mcmc_fit(draws, echo, out / "fit.json");
        std::cout << "retained " << draws.total_draws() << " draws in " << draws.wall_seconds
                  << " s";
        if (draws.split_rhat_zeta.size() > 0) {
            std::cout << ", max split R-hat " << draws.split_rhat_zeta.maxCoeff();
        }
        std::cout << std::endl;
    } else {
        std::cout << "running variational fit: tolerance " << cfg.vb.tolerance << ", at most "
                  << cfg.vb.max_iter << " sweeps" << std::endl;
        const mixl::VbFit fit = mixl::run_vb(data, cfg.hyper, cfg.vb);
        mixl::io::save_vb_fit(fit, echo, out / "fit.json");
        std::cout << (fit.converged ? "converged" : "stopped unconverged") << " after "
                  << fit.iterations << " sweeps in " << fit.wall_seconds << " s (final delta "
                  << fit.final_delta << ")" << std::endl;
        if (!fit.converged) {
            std::cerr << "warning: coordinate ascent did not reach the tolerance" << std::endl;
        }
    }

    std::vector<std::pair<std::string, std::string>> inputs{{"data", data_path}};
    if (!config_path.empty()) inputs.emplace_back("config", config_path);
    mixl::io::write_manifest(out, "fit-" + kind, inputs, {"fit.json"}, echo);
    std::cout << "wrote " << (out / "fit.json").string() << std::endl;
    return 0;
}

int cmd_evaluate(const std::string& fit_path, const std::string& truth_path,
                 const std::string& data_path, const std::string& config_path,
                 const std::string& out_dir) {
    const mixl::io::LoadedFit fit = mixl::io::load_fit(fit_path);
    const mixl::io::TruthBundle truth = mixl::io::load_truth(truth_path);
    const mixl::ChoiceDataset data = mixl::io::load_dataset_csv(data_path);

    if (data.num_coeffs != truth.config.num_coeffs) {
        throw mixl::ValidationError("dataset and truth disagree on the coefficient count");
    }
    if (data.num_persons() != static_cast<int>(truth.truth.mu.size())) {
        throw mixl::ValidationError("dataset and truth disagree on the person count");
    }

    mixl::EvalConfig eval_cfg;
    if (!config_path.empty()) {
        eval_cfg = mixl::io::load_run_config(config_path).eval;
    } else if (fit.config_echo.is_object() && !fit.config_echo.empty()) {
        eval_cfg = mixl::io::parse_run_config(fit.config_echo).eval;
    }

    mixl::PredictiveReport report;
    if (fit.kind == "mcmc") {
        if (fit.mcmc.num_coeffs != data.num_coeffs) {
            throw mixl::ValidationError("fit and dataset disagree on the coefficient count");
        }
        const mixl::McmcDrawSource src(fit.mcmc);
        report = mixl::evaluate(truth.scenarios, truth.truth, src, eval_cfg);
    } else {
        if (fit.vb.posterior.zeta_mean.size() != data.num_coeffs) {
            throw mixl::ValidationError("fit and dataset disagree on the coefficient count");
        }
        const mixl::VbDrawSource src(fit.vb.posterior);
        report = mixl::evaluate(truth.scenarios, truth.truth, src, eval_cfg);
    }

    const fs::path out(out_dir);
    mixl::io::save_report(report, out / "report.json", out / "report.csv");
    std::vector<std::pair<std::string, std::string>> inputs{
        {"fit", fit_path}, {"truth", truth_path}, {"data", data_path}};
    if (!config_path.empty()) inputs.emplace_back("config", config_path);
    json echo;
    echo["eval"] = json{{"n_outer", eval_cfg.n_outer},
                        {"n_inner", eval_cfg.n_inner},
                        {"n_true", eval_cfg.n_true},
                        {"parallel", eval_cfg.parallel},
                        {"seed", eval_cfg.seed}};
    mixl::io::write_manifest(out, "evaluate", inputs, {"report.json", "report.csv"}, echo);

    std::cout << "method: " << report.method << "\nmean TVD, new persons:   "
              << report.mean_tvd_between << "\nmean TVD, new occasions: "
              << report.mean_tvd_within << "\nwrote " << (out / "report.json").string()
              << std::endl;
    return 0;
}

int cmd_benchmark(const std::string& config_path, const std::string& out_dir) {
    const mixl::io::RunConfig cfg = resolve_config(config_path, 0);
    mixl::BenchmarkConfig bench;
    bench.dgp_template = cfg.dgp;
    bench.hyper = cfg.hyper;
    bench.mcmc = cfg.mcmc;
    bench.vb = cfg.vb;
    bench.eval = cfg.eval;
    bench.scenario_count = cfg.scenario_count;
    bench.replications = cfg.replications;
    for (const auto& c : cfg.conditions) {
        bench.conditions.push_back({c.num_persons, c.occasions_per_person});
    }
    bench.master_seed = cfg.master_seed;

    const mixl::BenchmarkResult result = mixl::run_benchmark(bench, &std::cout);

    const fs::path out(out_dir);
    const json echo = mixl::io::run_config_to_json(cfg);
    mixl::io::save_benchmark(result, echo, out);
    std::vector<std::pair<std::string, std::string>> inputs;
    if (!config_path.empty()) inputs.emplace_back("config", config_path);
    mixl::io::write_manifest(out, "benchmark", inputs,
                             {"summary.csv", "replications.csv", "results.json"}, echo);

    std::cout << "\nmethod  persons  occasions  mean TVD (new persons)  mean TVD (new occasions)"
                 "  mean fit wall s\n";
    for (const auto& s : result.summaries) {
        std::cout << s.method << (s.method == "vb" ? "    " : "  ") << "  " << s.num_persons
                  << "  " << s.occasions_per_person << "  " << s.mean_tvd_between << " (se "
                  << s.se_tvd_between << ")  " << s.mean_tvd_within << " (se " << s.se_tvd_within
                  << ")  " << s.mean_fit_wall_seconds << std::endl;
    }
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << std::endl;
    std::cout << "wrote " << (out / "summary.csv").string() << std::endl;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mixed logit with inter- and intra-individual heterogeneity: simulation, "
                 "MCMC and variational fitting, predictive evaluation"};
    app.require_subcommand(1);

    std::string config_path, out_dir, data_path, fit_path, truth_path;

    auto* sim = app.add_subcommand("simulate", "Draw a synthetic panel dataset and its truth");
    sim->add_option("--config", config_path, "Run configuration JSON");
    sim->add_option("--out", out_dir, "Output directory")->required();

    auto* fit_vb = app.add_subcommand("fit-vb", "Fit the variational approximation");
    fit_vb->add_option("--data", data_path, "Dataset CSV")->required();
    fit_vb->add_option("--config", config_path, "Run configuration JSON");
    fit_vb->add_option("--out", out_dir, "Output directory")->required();

    auto* fit_mcmc = app.add_subcommand("fit-mcmc", "Fit by Markov chain Monte Carlo");
    fit_mcmc->add_option("--data", data_path, "Dataset CSV")->required();
    fit_mcmc->add_option("--config", config_path, "Run configuration JSON");
    fit_mcmc->add_option("--out", out_dir, "Output directory")->required();

    auto* eval = app.add_subcommand("evaluate", "Score a fit against the truth by predictive "
                                                "total variation distance");
    eval->add_option("--fit", fit_path, "Fit JSON")->required();
    eval->add_option("--truth", truth_path, "Truth JSON")->required();
    eval->add_option("--data", data_path, "Dataset CSV")->required();
    eval->add_option("--config", config_path, "Run configuration JSON");
    eval->add_option("--out", out_dir, "Output directory")->required();

    auto* bench = app.add_subcommand("benchmark", "Run the full method comparison study");
    bench->add_option("--config", config_path, "Run configuration JSON");
    bench->add_option("--out", out_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (sim->parsed()) return cmd_simulate(config_path, out_dir);
        if (fit_vb->parsed()) return cmd_fit("vb", data_path, config_path, out_dir);
        if (fit_mcmc->parsed()) return cmd_fit("mcmc", data_path, config_path, out_dir);
        if (eval->parsed()) {
            return cmd_evaluate(fit_path, truth_path, data_path, config_path, out_dir);
        }
        if (bench->parsed()) return cmd_benchmark(config_path, out_dir);
    } catch (const mixl::ValidationError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    } catch (const mixl::IoError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 3;
    } catch (const mixl::NumericalError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << std::endl;
        return 2;
    }
    return 0;
}
