#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "mixl/data.hpp"
#include "mixl/rng.hpp"

namespace mixl {

struct McmcConfig {
    int n_chains = 2;
    long n_iter = 200000;
    long n_burn = 100000;
    int thin = 10;
    double proposal_step = 0.1;
    double adapt_target = 0.30;
    bool adapt = true;
    int adapt_batch = 100;
    int n_track_mu = 25;
    bool parallel = true;
    std::uint64_t seed = 0;

    void validate() const;
};

// Retained posterior draws plus run diagnostics. Draw containers are indexed
// [chain][retained draw].
struct McmcDraws {
    int num_coeffs = 0;
    std::vector<std::vector<Eigen::VectorXd>> zeta;
    std::vector<std::vector<Eigen::MatrixXd>> sigma_b;
    std::vector<std::vector<Eigen::MatrixXd>> sigma_w;
    // Per-person posterior means for tracked persons, one row per person.
    std::vector<int> tracked_persons;
    std::vector<std::vector<Eigen::MatrixXd>> mu_tracked;

    std::vector<std::vector<double>> acceptance_trace;
    std::vector<double> final_proposal_step;
    Eigen::VectorXd split_rhat_zeta;
    double wall_seconds = 0.0;

    long draws_per_chain() const { return zeta.empty() ? 0 : static_cast<long>(zeta[0].size()); }
    long total_draws() const { return static_cast<long>(zeta.size()) * draws_per_chain(); }

    // Flat addressing across chains, chain-major.
    const Eigen::VectorXd& zeta_draw(long i) const;
    const Eigen::MatrixXd& sigma_b_draw(long i) const;
    const Eigen::MatrixXd& sigma_w_draw(long i) const;
    const Eigen::MatrixXd& mu_tracked_draw(long i) const;
};

// Individual conjugate conditional updates; each redraws one block from its
// full conditional given the rest of the state.
namespace gibbs {

void update_scale_b(ParameterState& state, const Hyperparameters& hyper, Rng& rng);
void update_sigma_b(ParameterState& state, const Hyperparameters& hyper, Rng& rng);
void update_scale_w(ParameterState& state, const Hyperparameters& hyper, Rng& rng);
void update_sigma_w(ParameterState& state, const ChoiceDataset& data,
                    const Hyperparameters& hyper, Rng& rng);
void update_zeta(ParameterState& state, const Hyperparameters& hyper, Rng& rng);
void update_person_means(ParameterState& state, const ChoiceDataset& data, Rng& rng);

}  // namespace gibbs

// One full pass over the conjugate blocks in sweep order.
void gibbs_conjugate_step(ParameterState& state, const ChoiceDataset& data,
                          const Hyperparameters& hyper, Rng& rng);

// One dedicated generator per (person, occasion), derived from the chain root
// by counter tags; consumption advances independently per occasion, so the
// sweep result does not depend on scheduling.
std::vector<Rng> make_occasion_streams(const Rng& chain_root, const ChoiceDataset& data);

// Random-walk update of every occasion-level coefficient vector. The proposal
// is beta + sqrt(step) * chol(Sigma_w) * z. Returns the number of accepted
// moves. Bit-identical for parallel true and false.
long mh_beta_sweep(ParameterState& state, const ChoiceDataset& data, double proposal_step,
                   std::vector<Rng>& occasion_streams, bool parallel);

// Potential scale reduction on retained draws, split-half form, per component.
Eigen::VectorXd split_rhat(const std::vector<std::vector<Eigen::VectorXd>>& chains);

// Overdispersed chain start: person means and occasion tastes drawn with unit
// spread around zero. An all-zero start makes the first covariance draws see
// zero scatter, both covariances collapse, and the proposal scale collapses
// with them; escaping that trap takes far longer than any practical burn-in.
ParameterState overdispersed_init(const ChoiceDataset& data, Rng& rng);

McmcDraws run_mcmc(const ChoiceDataset& data, const Hyperparameters& hyper,
                   const McmcConfig& config);

}  // namespace mixl
