#include <cmath>

#include <doctest.h>
#include <Eigen/Dense>

#include "mixl/dgp.hpp"
#include "mixl/errors.hpp"
#include "mixl/eval.hpp"
#include "mixl/rng.hpp"

using namespace mixl;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd random_simplex(int j, Rng& rng) {
    VectorXd p(j);
    for (int i = 0; i < j; ++i) p[i] = -std::log(rng.uniform_pos());
    return p / p.sum();
}

}  // namespace

TEST_CASE("total variation distance worked examples") {
    VectorXd p(2), q(2);
    p << 0.5, 0.5;
    q << 0.5, 0.5;
    CHECK(tvd(p, q) == 0.0);
    q << 1.0, 0.0;
    CHECK(tvd(p, q) == doctest::Approx(0.5).epsilon(1e-15));
    VectorXd a(4), b(4);
    a << 1.0, 0.0, 0.0, 0.0;
    b << 0.0, 0.0, 0.0, 1.0;
    CHECK(tvd(a, b) == doctest::Approx(1.0).epsilon(1e-15));
    a << 0.4, 0.3, 0.2, 0.1;
    b << 0.1, 0.2, 0.3, 0.4;
    CHECK(tvd(a, b) == doctest::Approx(0.4).epsilon(1e-14));
}

TEST_CASE("total variation distance properties on random simplex pairs") {
    Rng rng(501);
    for (int trial = 0; trial < 1000; ++trial) {
        const int j = 2 + static_cast<int>(rng.uniform() * 6);
        const VectorXd p = random_simplex(j, rng);
        const VectorXd q = random_simplex(j, rng);
        const double d = tvd(p, q);
        CHECK(d >= 0.0);
        CHECK(d <= 1.0 + 1e-12);
        CHECK(tvd(q, p) == d);
        CHECK(tvd(p, p) == 0.0);
    }
}

TEST_CASE("total variation distance input validation") {
    VectorXd p(2), q(3);
    p << 0.5, 0.5;
    q << 0.4, 0.3, 0.3;
    CHECK_THROWS_AS(tvd(p, q), ValidationError);
    VectorXd bad(2);
    bad << 0.7, 0.7;
    CHECK_THROWS_AS(tvd(p, bad), ValidationError);
    bad << -0.2, 1.2;
    CHECK_THROWS_AS(tvd(p, bad), ValidationError);
    VectorXd empty(0);
    CHECK_THROWS_AS(tvd(empty, empty), ValidationError);
}

TEST_CASE("config validation") {
    EvalConfig cfg;
    cfg.n_outer = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = EvalConfig{};
    cfg.n_inner = -1;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = EvalConfig{};
    cfg.n_true = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("truth source returns the true parameters") {
    const DgpConfig cfg = DgpConfig::study_defaults(4, 2, 2, 3, 601);
    const SimulatedData sim = simulate_dataset(cfg);
    const TruthDrawSource src(sim.truth);
    CHECK(src.max_outer_draws() == 1);
    Rng rng(1);
    VectorXd zeta;
    MatrixXd cb, cw;
    src.population_draw(0, rng, zeta, cb, cw);
    CHECK(zeta == sim.truth.zeta);
    CHECK((cb * cb.transpose() - sim.truth.sigma_b.matrix()).norm() < 1e-12);
    VectorXd mu;
    src.person_draw(0, 2, rng, mu, cw);
    CHECK(mu == sim.truth.mu[2]);
    CHECK((cw * cw.transpose() - sim.truth.sigma_w.matrix()).norm() < 1e-12);
}

TEST_CASE("predictive distributions are simplex points and reproducible") {
    const DgpConfig cfg = DgpConfig::study_defaults(4, 2, 2, 4, 603);
    const SimulatedData sim = simulate_dataset(cfg);
    const TruthDrawSource src(sim.truth);
    const ValidationScenarios sc = make_validation_scenarios(cfg, 3);

    Rng r1(7), r2(7);
    const VectorXd p1 = predictive_new_person(sc.between[0].design, src, 1, 2000, r1);
    const VectorXd p2 = predictive_new_person(sc.between[0].design, src, 1, 2000, r2);
    CHECK(p1 == p2);
    CHECK(p1.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p1.minCoeff() >= 0.0);

    Rng r3(7);
    const VectorXd w1 =
        predictive_new_occasion(sc.within[1].design, sc.within[1].person, src, 1, 2000, r3);
    CHECK(w1.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("evaluating the truth against itself lands near zero distance") {
    const DgpConfig cfg = DgpConfig::study_defaults(6, 2, 2, 3, 605);
    const SimulatedData sim = simulate_dataset(cfg);
    const ValidationScenarios sc = make_validation_scenarios(cfg, 4);
    const TruthDrawSource src(sim.truth);
    EvalConfig ecfg;
    ecfg.n_outer = 60;
    ecfg.n_inner = 400;
    ecfg.n_true = 50000;
    ecfg.seed = 42;
    const PredictiveReport rep = evaluate(sc, sim.truth, src, ecfg);
    CHECK(rep.method == "truth");
    REQUIRE(rep.tvd_between.size() == 4);
    REQUIRE(rep.tvd_within.size() == 4);
    for (double d : rep.tvd_between) CHECK(d < 0.05);
    for (double d : rep.tvd_within) CHECK(d < 0.05);
    CHECK(rep.mean_tvd_between ==
          doctest::Approx((rep.tvd_between[0] + rep.tvd_between[1] + rep.tvd_between[2] +
                           rep.tvd_between[3]) /
                          4.0)
              .epsilon(1e-12));
}

TEST_CASE("evaluation is reproducible for a fixed seed") {
    const DgpConfig cfg = DgpConfig::study_defaults(5, 2, 2, 3, 607);
    const SimulatedData sim = simulate_dataset(cfg);
    const ValidationScenarios sc = make_validation_scenarios(cfg, 3);
    const TruthDrawSource src(sim.truth);
    EvalConfig ecfg;
    ecfg.n_outer = 10;
    ecfg.n_inner = 50;
    ecfg.n_true = 2000;
    ecfg.seed = 11;
    const PredictiveReport a = evaluate(sc, sim.truth, src, ecfg);
    const PredictiveReport b = evaluate(sc, sim.truth, src, ecfg);
    CHECK(a.tvd_between == b.tvd_between);
    CHECK(a.tvd_within == b.tvd_within);
}

TEST_CASE("finite draw stores stride across their whole range") {
    const DgpConfig cfg = DgpConfig::study_defaults(5, 3, 2, 3, 609);
    const SimulatedData sim = simulate_dataset(cfg);
    const Hyperparameters hyper = Hyperparameters::defaults(2);
    McmcConfig mc;
    mc.n_chains = 2;
    mc.n_iter = 120;
    mc.n_burn = 40;
    mc.thin = 4;
    mc.n_track_mu = 5;
    mc.seed = 13;
    const McmcDraws draws = run_mcmc(sim.data, hyper, mc);
    const McmcDrawSource src(draws);
    CHECK(src.max_outer_draws() == draws.total_draws());

    Rng rng(3);
    VectorXd zeta;
    MatrixXd cb, cw;
    src.population_draw(0, rng, zeta, cb, cw);
    CHECK(zeta == draws.zeta_draw(0));
    src.population_draw(draws.total_draws() - 1, rng, zeta, cb, cw);
    CHECK(zeta == draws.zeta_draw(draws.total_draws() - 1));
    CHECK((cb * cb.transpose() - draws.sigma_b_draw(draws.total_draws() - 1)).norm() < 1e-10);

    VectorXd mu;
    src.person_draw(5, 3, rng, mu, cw);
    CHECK(mu == draws.mu_tracked_draw(5).row(3).transpose());
    CHECK_THROWS_AS(src.person_draw(0, 4999, rng, mu, cw), ValidationError);
}

TEST_CASE("variational source draws vary and are seed reproducible") {
    const DgpConfig cfg = DgpConfig::study_defaults(5, 3, 2, 3, 611);
    const SimulatedData sim = simulate_dataset(cfg);
    const Hyperparameters hyper = Hyperparameters::defaults(2);
    const VbFit fit = run_vb(sim.data, hyper, VbConfig{});
    const VbDrawSource src(fit.posterior);
    CHECK(src.max_outer_draws() == 0);

    Rng r1(5), r2(5), r3(6);
    VectorXd za, zb, zc;
    MatrixXd cb, cw;
    src.population_draw(0, r1, za, cb, cw);
    src.population_draw(0, r2, zb, cb, cw);
    src.population_draw(0, r3, zc, cb, cw);
    CHECK(za == zb);
    CHECK(za != zc);

    VectorXd mu;
    src.person_draw(0, 2, r1, mu, cw);
    CHECK(mu.size() == 2);
    CHECK_THROWS_AS(src.person_draw(0, 99, r1, mu, cw), ValidationError);
}
