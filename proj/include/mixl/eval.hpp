#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixl/data.hpp"
#include "mixl/dgp.hpp"
#include "mixl/mcmc.hpp"
#include "mixl/rng.hpp"
#include "mixl/vb.hpp"

namespace mixl {

struct EvalConfig {
    int n_outer = 500;
    int n_inner = 200;
    long n_true = 100000;
    bool parallel = true;
    std::uint64_t seed = 0;

    void validate() const;
};

// Total variation distance between two distributions on the same support.
double tvd(const Eigen::Ref<const Eigen::VectorXd>& p,
           const Eigen::Ref<const Eigen::VectorXd>& q);

// Uniform interface over posterior representations for predictive
// simulation. Draw index semantics: sources backed by a finite draw store
// report it via max_outer_draws and are addressed by stored index; sampling
// sources report 0 and ignore the index beyond determinism.
class PosteriorDrawSource {
public:
    virtual ~PosteriorDrawSource() = default;
    virtual std::string name() const = 0;
    virtual long max_outer_draws() const = 0;

    // Population mean and lower-triangular factors of both covariances.
    virtual void population_draw(long idx, Rng& rng, Eigen::VectorXd& zeta,
                                 Eigen::MatrixXd& chol_b, Eigen::MatrixXd& chol_w) const = 0;

    // Mean and within-covariance factor for one training person.
    virtual void person_draw(long idx, int person, Rng& rng, Eigen::VectorXd& mu_n,
                             Eigen::MatrixXd& chol_w) const = 0;
};

class McmcDrawSource : public PosteriorDrawSource {
public:
    explicit McmcDrawSource(const McmcDraws& draws);
    std::string name() const override { return "mcmc"; }
    long max_outer_draws() const override;
    void population_draw(long idx, Rng& rng, Eigen::VectorXd& zeta, Eigen::MatrixXd& chol_b,
                         Eigen::MatrixXd& chol_w) const override;
    void person_draw(long idx, int person, Rng& rng, Eigen::VectorXd& mu_n,
                     Eigen::MatrixXd& chol_w) const override;

private:
    const McmcDraws* draws_;
};

class VbDrawSource : public PosteriorDrawSource {
public:
    explicit VbDrawSource(const VariationalPosterior& vp);
    std::string name() const override { return "vb"; }
    long max_outer_draws() const override { return 0; }
    void population_draw(long idx, Rng& rng, Eigen::VectorXd& zeta, Eigen::MatrixXd& chol_b,
                         Eigen::MatrixXd& chol_w) const override;
    void person_draw(long idx, int person, Rng& rng, Eigen::VectorXd& mu_n,
                     Eigen::MatrixXd& chol_w) const override;

private:
    const VariationalPosterior* vp_;
};

// Degenerate source pinned at the true parameters; the evaluation of an
// estimator against itself should land at zero distance up to noise.
class TruthDrawSource : public PosteriorDrawSource {
public:
    explicit TruthDrawSource(const ParameterState& truth);
    std::string name() const override { return "truth"; }
    long max_outer_draws() const override { return 1; }
    void population_draw(long idx, Rng& rng, Eigen::VectorXd& zeta, Eigen::MatrixXd& chol_b,
                         Eigen::MatrixXd& chol_w) const override;
    void person_draw(long idx, int person, Rng& rng, Eigen::VectorXd& mu_n,
                     Eigen::MatrixXd& chol_w) const override;

private:
    const ParameterState* truth_;
};

// Monte Carlo choice distribution for a fresh person: integrates the
// population draw, the person mean, and the occasion taste.
Eigen::VectorXd predictive_new_person(const Eigen::Ref<const Eigen::MatrixXd>& design,
                                      const PosteriorDrawSource& src, int n_outer, int n_inner,
                                      Rng& rng);

// Monte Carlo choice distribution for a new occasion of a known person:
// integrates that person's mean and the occasion taste.
Eigen::VectorXd predictive_new_occasion(const Eigen::Ref<const Eigen::MatrixXd>& design,
                                        int person, const PosteriorDrawSource& src, int n_outer,
                                        int n_inner, Rng& rng);

struct PredictiveReport {
    std::string method;
    std::vector<double> tvd_between;
    std::vector<double> tvd_within;
    double mean_tvd_between = 0.0;
    double mean_tvd_within = 0.0;
    int n_outer = 0;
    int n_inner = 0;
    long n_true = 0;
    double wall_seconds = 0.0;
};

// Scores a posterior against the truth on held-out scenarios: per scenario,
// total variation distance between the estimated predictive distribution and
// the true one.
PredictiveReport evaluate(const ValidationScenarios& scenarios, const ParameterState& truth,
                          const PosteriorDrawSource& src, const EvalConfig& config);

}  // namespace mixl
