#include "mixl/benchmark.hpp"

#include <cmath>
#include <utility>

#include "mixl/errors.hpp"

namespace mixl {

void BenchmarkConfig::validate() const {
    dgp_template.validate();
    hyper.validate(dgp_template.num_coeffs);
    mcmc.validate();
    vb.validate();
    eval.validate();
    if (scenario_count < 1) throw ValidationError("scenario_count must be positive");
    if (replications < 1) throw ValidationError("replications must be positive");
    if (conditions.empty()) throw ValidationError("at least one condition is required");
    for (const auto& c : conditions) {
        if (c.num_persons < 1 || c.occasions_per_person < 1) {
            throw ValidationError("condition sizes must be positive");
        }
        if (c.num_persons < scenario_count) {
            throw ValidationError("condition num_persons must cover the scenario count");
        }
    }
}

namespace {

struct Accumulator {
    std::vector<double> tvd_b, tvd_w, wall;
};

std::pair<double, double> mean_se(const std::vector<double>& xs) {
    const auto n = static_cast<double>(xs.size());
    if (xs.empty()) return {0.0, 0.0};
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

}  // namespace

BenchmarkResult run_benchmark(const BenchmarkConfig& config, std::ostream* progress) {
    config.validate();
    BenchmarkResult result;

    for (std::size_t ci = 0; ci < config.conditions.size(); ++ci) {
        const auto& cond = config.conditions[ci];
        Accumulator acc_mcmc, acc_vb;

        for (int rep = 0; rep < config.replications; ++rep) {
            DgpConfig dgp = config.dgp_template;
            dgp.num_persons = cond.num_persons;
            dgp.occasions_per_person = cond.occasions_per_person;
            dgp.seed = config.master_seed + 9973ULL * static_cast<std::uint64_t>(ci) +
                       static_cast<std::uint64_t>(rep);

            McmcConfig mcmc_cfg = config.mcmc;
            mcmc_cfg.seed = dgp.seed + 101;
            EvalConfig eval_cfg = config.eval;
            eval_cfg.seed = dgp.seed + 202;

            if (progress) {
                *progress << "[benchmark] N=" << cond.num_persons
                          << " T=" << cond.occasions_per_person << " replication " << (rep + 1)
                          << "/" << config.replications << std::endl;
            }

            try {
                const SimulatedData sim = simulate_dataset(dgp);
                const ValidationScenarios scenarios =
                    make_validation_scenarios(dgp, config.scenario_count);

                const McmcDraws draws = run_mcmc(sim.data, config.hyper, mcmc_cfg);
                const McmcDrawSource mcmc_src(draws);
                const PredictiveReport mcmc_report =
                    evaluate(scenarios, sim.truth, mcmc_src, eval_cfg);

                const VbFit fit = run_vb(sim.data, config.hyper, config.vb);
                const VbDrawSource vb_src(fit.posterior);
                const PredictiveReport vb_report =
                    evaluate(scenarios, sim.truth, vb_src, eval_cfg);

                BenchmarkRow mrow;
                mrow.method = "mcmc";
                mrow.num_persons = cond.num_persons;
                mrow.occasions_per_person = cond.occasions_per_person;
                mrow.replication = rep;
                mrow.tvd_between = mcmc_report.mean_tvd_between;
                mrow.tvd_within = mcmc_report.mean_tvd_within;
                mrow.fit_wall_seconds = draws.wall_seconds;
                mrow.eval_wall_seconds = mcmc_report.wall_seconds;
                mrow.mcmc_max_rhat =
                    draws.split_rhat_zeta.size() > 0 ? draws.split_rhat_zeta.maxCoeff() : 0.0;

                BenchmarkRow vrow;
                vrow.method = "vb";
                vrow.num_persons = cond.num_persons;
                vrow.occasions_per_person = cond.occasions_per_person;
                vrow.replication = rep;
                vrow.tvd_between = vb_report.mean_tvd_between;
                vrow.tvd_within = vb_report.mean_tvd_within;
                vrow.fit_wall_seconds = fit.wall_seconds;
                vrow.eval_wall_seconds = vb_report.wall_seconds;
                vrow.vb_iterations = fit.iterations;
                vrow.vb_converged = fit.converged;

                acc_mcmc.tvd_b.push_back(mrow.tvd_between);
                acc_mcmc.tvd_w.push_back(mrow.tvd_within);
                acc_mcmc.wall.push_back(mrow.fit_wall_seconds);
                acc_vb.tvd_b.push_back(vrow.tvd_between);
                acc_vb.tvd_w.push_back(vrow.tvd_within);
                acc_vb.wall.push_back(vrow.fit_wall_seconds);
                result.rows.push_back(std::move(mrow));
                result.rows.push_back(std::move(vrow));
            } catch (const NumericalError& e) {
                std::string warning = "excluded N=" + std::to_string(cond.num_persons) +
                                      " T=" + std::to_string(cond.occasions_per_person) +
                                      " replication " + std::to_string(rep) + ": " + e.what();
                if (progress) *progress << "[benchmark] " << warning << std::endl;
                result.warnings.push_back(std::move(warning));
            }
        }

        for (const auto* pair : {&acc_mcmc, &acc_vb}) {
            BenchmarkSummary s;
            s.method = pair == &acc_mcmc ? "mcmc" : "vb";
            s.num_persons = cond.num_persons;
            s.occasions_per_person = cond.occasions_per_person;
            s.replications_used = static_cast<int>(pair->tvd_b.size());
            std::tie(s.mean_tvd_between, s.se_tvd_between) = mean_se(pair->tvd_b);
            std::tie(s.mean_tvd_within, s.se_tvd_within) = mean_se(pair->tvd_w);
            std::tie(s.mean_fit_wall_seconds, s.se_fit_wall_seconds) = mean_se(pair->wall);
            result.summaries.push_back(std::move(s));
        }
    }
    return result;
}

}  // namespace mixl
