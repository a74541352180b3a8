#include <chrono>
#include <cstdio>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mixl/data.hpp"
#include "mixl/dgp.hpp"
#include "mixl/errors.hpp"
#include "mixl/eval.hpp"
#include "mixl/mcmc.hpp"
#include "mixl/reference.hpp"
#include "mixl/rng.hpp"
#include "mixl/vb.hpp"

namespace {

template <typename F>
double best_ms(F&& body, int reps) {
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        body();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

void print_row(const char* kernel, double engine_ms, double reference_ms, bool identical) {
    std::printf("%-18s %12.2f %12.2f %9.2fx   %s\n", kernel, engine_ms, reference_ms,
                reference_ms / engine_ms, identical ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Times the parallel kernels against their serial reference implementations "
                 "and checks that both produce bit-identical results"};
    int num_persons = 200;
    int occasions = 10;
    int num_coeffs = 4;
    int num_alts = 5;
    int reps = 3;
    std::uint64_t seed = 42;
    app.add_option("--persons", num_persons, "Panel size");
    app.add_option("--occasions", occasions, "Occasions per person");
    app.add_option("--coeffs", num_coeffs, "Taste coefficients");
    app.add_option("--alts", num_alts, "Alternatives per occasion");
    app.add_option("--reps", reps, "Timing repetitions (best is kept)");
    app.add_option("--seed", seed, "Root seed");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        const mixl::DgpConfig dgp =
            mixl::DgpConfig::study_defaults(num_persons, occasions, num_coeffs, num_alts, seed);
        const mixl::SimulatedData sim = mixl::simulate_dataset(dgp);
        const mixl::Hyperparameters hyper = mixl::Hyperparameters::defaults(num_coeffs);
        const int scenario_count = std::min(25, num_persons);
        const mixl::ValidationScenarios scenarios =
            mixl::make_validation_scenarios(dgp, scenario_count);

        std::cout << "panel: " << num_persons << " persons, " << occasions
                  << " occasions each, " << num_coeffs << " coefficients, " << num_alts
                  << " alternatives\n\n";
        std::printf("%-18s %12s %12s %10s   %s\n", "kernel", "engine ms", "reference ms",
                    "speedup", "outputs");

        {
            const mixl::Rng chain_root = mixl::Rng(seed).substream(3, 0);
            auto streams0 = mixl::make_occasion_streams(chain_root, sim.data);
            mixl::ParameterState st_engine = sim.truth;
            mixl::ParameterState st_ref = sim.truth;
            long acc_engine = 0, acc_ref = 0;
            auto streams = streams0;
            const double engine_ms = best_ms(
                [&] {
                    st_engine = sim.truth;
                    streams = streams0;
                    acc_engine = mixl::mh_beta_sweep(st_engine, sim.data, 0.1, streams, true);
                },
                reps);
            const double ref_ms = best_ms(
                [&] {
                    st_ref = sim.truth;
                    streams = streams0;
                    acc_ref = mixl::reference::mh_beta_sweep(st_ref, sim.data, 0.1, streams);
                },
                reps);
            bool same = acc_engine == acc_ref;
            for (std::size_t n = 0; same && n < st_engine.beta.size(); ++n) {
                for (std::size_t t = 0; same && t < st_engine.beta[n].size(); ++t) {
                    same = st_engine.beta[n][t] == st_ref.beta[n][t];
                }
            }
            print_row("taste proposals", engine_ms, ref_ms, same);
        }

        {
            mixl::VbConfig cfg;
            const auto vp0 = mixl::VariationalPosterior::neutral(sim.data, hyper);
            auto vp_engine = vp0;
            auto vp_ref = vp0;
            const double engine_ms = best_ms(
                [&] {
                    vp_engine = vp0;
                    cfg.parallel = true;
                    mixl::vb_sweep(vp_engine, sim.data, hyper, cfg);
                },
                reps);
            const double ref_ms = best_ms(
                [&] {
                    vp_ref = vp0;
                    mixl::reference::vb_sweep(vp_ref, sim.data, hyper, cfg);
                },
                reps);
            const Eigen::VectorXd a = mixl::convergence_state(vp_engine);
            const Eigen::VectorXd b = mixl::convergence_state(vp_ref);
            bool same = a.size() == b.size();
            for (Eigen::Index i = 0; same && i < a.size(); ++i) same = a[i] == b[i];
            for (int n = 0; same && n < sim.data.num_persons(); ++n) {
                same = vp_engine.mu_mean[n] == vp_ref.mu_mean[n];
            }
            print_row("coordinate sweep", engine_ms, ref_ms, same);
        }

        {
            mixl::EvalConfig cfg;
            cfg.n_outer = 100;
            cfg.n_inner = 100;
            cfg.n_true = 20000;
            cfg.seed = seed + 202;
            const mixl::TruthDrawSource src(sim.truth);
            mixl::PredictiveReport rep_engine, rep_ref;
            const double engine_ms = best_ms(
                [&] {
                    cfg.parallel = true;
                    rep_engine = mixl::evaluate(scenarios, sim.truth, src, cfg);
                },
                reps);
            const double ref_ms = best_ms(
                [&] { rep_ref = mixl::reference::evaluate(scenarios, sim.truth, src, cfg); },
                reps);
            bool same = rep_engine.tvd_between == rep_ref.tvd_between &&
                        rep_engine.tvd_within == rep_ref.tvd_within;
            print_row("predictive eval", engine_ms, ref_ms, same);
        }
        return 0;
    } catch (const mixl::ValidationError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    }
}
