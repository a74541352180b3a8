#include <doctest.h>
#include <Eigen/Dense>

#include "mixl/dgp.hpp"
#include "mixl/eval.hpp"
#include "mixl/mcmc.hpp"
#include "mixl/reference.hpp"
#include "mixl/rng.hpp"
#include "mixl/vb.hpp"

using namespace mixl;

// The parallel kernels contract: identical streams, identical arithmetic,
// identical results regardless of threading. Every comparison here is
// bitwise, not approximate.

namespace {

struct Fixture {
    ChoiceDataset data;
    ParameterState truth;
    Hyperparameters hyper;
    DgpConfig cfg;

    Fixture() : cfg(DgpConfig::study_defaults(15, 4, 3, 4, 7001)) {
        SimulatedData sim = simulate_dataset(cfg);
        data = sim.data;
        truth = sim.truth;
        hyper = Hyperparameters::defaults(3);
    }
};

}  // namespace

TEST_CASE("taste proposal sweep: engine equals reference across chained sweeps") {
    Fixture f;
    const Rng chain_root = Rng(31).substream(3, 0);
    auto streams_e = make_occasion_streams(chain_root, f.data);
    auto streams_r = make_occasion_streams(chain_root, f.data);
    ParameterState engine = f.truth;
    ParameterState reference = f.truth;
    for (int sweep = 0; sweep < 3; ++sweep) {
        const long acc_e = mh_beta_sweep(engine, f.data, 0.2, streams_e, true);
        const long acc_r = reference::mh_beta_sweep(reference, f.data, 0.2, streams_r);
        CHECK(acc_e == acc_r);
    }
    for (int n = 0; n < f.data.num_persons(); ++n) {
        for (int t = 0; t < f.data.num_occasions(n); ++t) {
            CHECK(engine.beta[n][t] == reference.beta[n][t]);
        }
    }
}

TEST_CASE("taste proposal sweep: parallel flag does not change results") {
    Fixture f;
    const Rng chain_root = Rng(33).substream(3, 0);
    auto streams_p = make_occasion_streams(chain_root, f.data);
    auto streams_s = make_occasion_streams(chain_root, f.data);
    ParameterState par = f.truth;
    ParameterState ser = f.truth;
    CHECK(mh_beta_sweep(par, f.data, 0.15, streams_p, true) ==
          mh_beta_sweep(ser, f.data, 0.15, streams_s, false));
    CHECK(par.beta[14][3] == ser.beta[14][3]);
}

TEST_CASE("coordinate sweep: engine equals reference across chained sweeps") {
    Fixture f;
    VbConfig cfg;
    VariationalPosterior engine = VariationalPosterior::neutral(f.data, f.hyper);
    VariationalPosterior reference = VariationalPosterior::neutral(f.data, f.hyper);
    for (int sweep = 0; sweep < 4; ++sweep) {
        const SweepStats se = vb_sweep(engine, f.data, f.hyper, cfg);
        const SweepStats sr = reference::vb_sweep(reference, f.data, f.hyper, cfg);
        CHECK(se.damped == sr.damped);
        CHECK(se.skipped == sr.skipped);
    }
    CHECK(engine.zeta_mean == reference.zeta_mean);
    CHECK(engine.zeta_cov.matrix() == reference.zeta_cov.matrix());
    CHECK(engine.iw_scale_b.matrix() == reference.iw_scale_b.matrix());
    CHECK(engine.iw_scale_w.matrix() == reference.iw_scale_w.matrix());
    CHECK(engine.a_rate_b == reference.a_rate_b);
    CHECK(engine.a_rate_w == reference.a_rate_w);
    for (int n = 0; n < f.data.num_persons(); ++n) {
        CHECK(engine.mu_mean[n] == reference.mu_mean[n]);
        CHECK(engine.mu_cov[n].matrix() == reference.mu_cov[n].matrix());
        for (int t = 0; t < f.data.num_occasions(n); ++t) {
            CHECK(engine.beta_mean[n][t] == reference.beta_mean[n][t]);
            CHECK(engine.beta_cov[n][t] == reference.beta_cov[n][t]);
        }
    }
}

TEST_CASE("coordinate sweep: parallel flag does not change results") {
    Fixture f;
    VbConfig par_cfg;
    par_cfg.parallel = true;
    VbConfig ser_cfg;
    ser_cfg.parallel = false;
    VariationalPosterior par = VariationalPosterior::neutral(f.data, f.hyper);
    VariationalPosterior ser = VariationalPosterior::neutral(f.data, f.hyper);
    for (int sweep = 0; sweep < 3; ++sweep) {
        vb_sweep(par, f.data, f.hyper, par_cfg);
        vb_sweep(ser, f.data, f.hyper, ser_cfg);
    }
    CHECK(par.zeta_mean == ser.zeta_mean);
    CHECK(par.beta_mean[9][1] == ser.beta_mean[9][1]);
}

TEST_CASE("predictive evaluation: engine equals reference for every source kind") {
    Fixture f;
    const ValidationScenarios sc = make_validation_scenarios(f.cfg, 6);
    EvalConfig ecfg;
    ecfg.n_outer = 20;
    ecfg.n_inner = 40;
    ecfg.n_true = 3000;
    ecfg.seed = 909;

    const TruthDrawSource truth_src(f.truth);
    const PredictiveReport te = evaluate(sc, f.truth, truth_src, ecfg);
    const PredictiveReport tr = reference::evaluate(sc, f.truth, truth_src, ecfg);
    CHECK(te.tvd_between == tr.tvd_between);
    CHECK(te.tvd_within == tr.tvd_within);

    const VbFit fit = run_vb(f.data, f.hyper, VbConfig{});
    const VbDrawSource vb_src(fit.posterior);
    const PredictiveReport ve = evaluate(sc, f.truth, vb_src, ecfg);
    const PredictiveReport vr = reference::evaluate(sc, f.truth, vb_src, ecfg);
    CHECK(ve.tvd_between == vr.tvd_between);
    CHECK(ve.tvd_within == vr.tvd_within);

    EvalConfig serial_cfg = ecfg;
    serial_cfg.parallel = false;
    const PredictiveReport vs = evaluate(sc, f.truth, vb_src, serial_cfg);
    CHECK(ve.tvd_between == vs.tvd_between);
    CHECK(ve.tvd_within == vs.tvd_within);
}

TEST_CASE("full sampler runs identically with and without threading") {
    Fixture f;
    McmcConfig mc;
    mc.n_chains = 1;
    mc.n_iter = 80;
    mc.n_burn = 30;
    mc.thin = 5;
    mc.n_track_mu = 4;
    mc.seed = 515;
    mc.parallel = true;
    const McmcDraws par = run_mcmc(f.data, f.hyper, mc);
    mc.parallel = false;
    const McmcDraws ser = run_mcmc(f.data, f.hyper, mc);
    REQUIRE(par.total_draws() == ser.total_draws());
    for (long i = 0; i < par.total_draws(); ++i) {
        CHECK(par.zeta_draw(i) == ser.zeta_draw(i));
        CHECK(par.sigma_b_draw(i) == ser.sigma_b_draw(i));
        CHECK(par.mu_tracked_draw(i) == ser.mu_tracked_draw(i));
    }
}
