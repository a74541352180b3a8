#pragma once

#include <Eigen/Dense>

#include "mixl/data.hpp"

namespace mixl {

// Softmax choice probabilities for one occasion.
Eigen::VectorXd mnl_choice_prob(const Eigen::Ref<const Eigen::MatrixXd>& design,
                                const Eigen::Ref<const Eigen::VectorXd>& beta);

// Log probability of the chosen alternative.
double mnl_log_prob(const Eigen::Ref<const Eigen::MatrixXd>& design, int chosen,
                    const Eigen::Ref<const Eigen::VectorXd>& beta);

// Unnormalized joint log density of data and latent state, split into the
// blocks the samplers condition on.
struct JointLogDensityTerms {
    double log_likelihood = 0.0;
    double log_beta_given_mu = 0.0;
    double log_mu_given_zeta = 0.0;
    double log_zeta_prior = 0.0;
    double log_sigma_b_prior = 0.0;
    double log_sigma_w_prior = 0.0;
    double log_a_b_prior = 0.0;
    double log_a_w_prior = 0.0;

    double total() const {
        return log_likelihood + log_beta_given_mu + log_mu_given_zeta + log_zeta_prior +
               log_sigma_b_prior + log_sigma_w_prior + log_a_b_prior + log_a_w_prior;
    }
};

JointLogDensityTerms joint_log_density_terms(const ChoiceDataset& data,
                                             const ParameterState& state,
                                             const Hyperparameters& hyper);

double joint_log_density(const ChoiceDataset& data, const ParameterState& state,
                         const Hyperparameters& hyper);

}  // namespace mixl
