#include "mixl/model.hpp"

#include "mixl/errors.hpp"
#include "mixl/stats.hpp"

namespace mixl {

Eigen::VectorXd mnl_choice_prob(const Eigen::Ref<const Eigen::MatrixXd>& design,
                                const Eigen::Ref<const Eigen::VectorXd>& beta) {
    if (design.cols() != beta.size()) {
        throw ValidationError("mnl_choice_prob dimension mismatch");
    }
    Eigen::VectorXd util = design * beta;
    util.array() -= util.maxCoeff();
    Eigen::VectorXd p = util.array().exp();
    p /= p.sum();
    return p;
}

double mnl_log_prob(const Eigen::Ref<const Eigen::MatrixXd>& design, int chosen,
                    const Eigen::Ref<const Eigen::VectorXd>& beta) {
    if (design.cols() != beta.size()) {
        throw ValidationError("mnl_log_prob dimension mismatch");
    }
    if (chosen < 0 || chosen >= design.rows()) {
        throw ValidationError("mnl_log_prob chosen index out of range");
    }
    const Eigen::VectorXd util = design * beta;
    return util[chosen] - log_sum_exp(util);
}

JointLogDensityTerms joint_log_density_terms(const ChoiceDataset& data,
                                             const ParameterState& state,
                                             const Hyperparameters& hyper) {
    state.validate_shapes(data);
    hyper.validate(data.num_coeffs);
    const int k = data.num_coeffs;

    JointLogDensityTerms terms;
    for (int n = 0; n < data.num_persons(); ++n) {
        for (int t = 0; t < data.num_occasions(n); ++t) {
            const auto& occ = data.persons[n][t];
            terms.log_likelihood += mnl_log_prob(occ.design, occ.chosen, state.beta[n][t]);
            terms.log_beta_given_mu += logpdf_mvn(state.beta[n][t], state.mu[n], state.sigma_w);
        }
        terms.log_mu_given_zeta += logpdf_mvn(state.mu[n], state.zeta, state.sigma_b);
    }
    terms.log_zeta_prior = logpdf_mvn(state.zeta, hyper.zeta_prior_mean, hyper.zeta_prior_cov);

    const SpdMatrix scale_b(Hyperparameters::iw_prior_scale(hyper.nu_b, state.a_b));
    const SpdMatrix scale_w(Hyperparameters::iw_prior_scale(hyper.nu_w, state.a_w));
    terms.log_sigma_b_prior =
        logpdf_inverse_wishart(state.sigma_b, hyper.iw_prior_dof_b(k), scale_b);
    terms.log_sigma_w_prior =
        logpdf_inverse_wishart(state.sigma_w, hyper.iw_prior_dof_w(k), scale_w);

    const Eigen::VectorXd rate_b = hyper.a_prior_rate_b();
    const Eigen::VectorXd rate_w = hyper.a_prior_rate_w();
    for (int i = 0; i < k; ++i) {
        terms.log_a_b_prior += logpdf_gamma_shape_rate(state.a_b[i], hyper.a_prior_shape(), rate_b[i]);
        terms.log_a_w_prior += logpdf_gamma_shape_rate(state.a_w[i], hyper.a_prior_shape(), rate_w[i]);
    }
    return terms;
}

double joint_log_density(const ChoiceDataset& data, const ParameterState& state,
                         const Hyperparameters& hyper) {
    return joint_log_density_terms(data, state, hyper).total();
}

}  // namespace mixl
