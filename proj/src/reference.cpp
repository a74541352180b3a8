#include "mixl/reference.hpp"

#include <chrono>
#include <cmath>

#include "mixl/errors.hpp"
#include "mixl/model.hpp"
#include "mixl/stats.hpp"

namespace mixl::reference {

long mh_beta_sweep(ParameterState& state, const ChoiceDataset& data, double proposal_step,
                   std::vector<Rng>& occasion_streams) {
    if (occasion_streams.size() != static_cast<std::size_t>(data.total_occasions())) {
        throw ValidationError("occasion stream count does not match dataset");
    }
    const Eigen::MatrixXd chol_w = state.sigma_w.factor();
    const double log_det_w = state.sigma_w.log_det();
    const double sqrt_step = std::sqrt(proposal_step);
    const int k = data.num_coeffs;

    long accepted = 0;
    std::size_t idx = 0;
    for (int n = 0; n < data.num_persons(); ++n) {
        for (int t = 0; t < data.num_occasions(n); ++t, ++idx) {
            Rng& rng = occasion_streams[idx];
            const auto& occ = data.persons[n][t];
            Eigen::VectorXd& beta = state.beta[n][t];

            Eigen::VectorXd eta(k);
            for (int i = 0; i < k; ++i) eta[i] = rng.normal();
            Eigen::VectorXd proposal = chol_w * eta;
            proposal = beta + sqrt_step * proposal;

            const double log_ratio = mnl_log_prob(occ.design, occ.chosen, proposal) +
                                     logpdf_mvn_chol(proposal, state.mu[n], chol_w, log_det_w) -
                                     mnl_log_prob(occ.design, occ.chosen, beta) -
                                     logpdf_mvn_chol(beta, state.mu[n], chol_w, log_det_w);
            if (std::log(rng.uniform_pos()) <= log_ratio) {
                beta = proposal;
                ++accepted;
            }
        }
    }
    return accepted;
}

SweepStats vb_sweep(VariationalPosterior& vp, const ChoiceDataset& data,
                    const Hyperparameters& hyper, const VbConfig& config) {
    const int k = data.num_coeffs;
    const int n_persons = data.num_persons();
    SweepStats stats;

    const Eigen::MatrixXd prec_w = vp.expected_prec_w();
    for (int n = 0; n < n_persons; ++n) {
        for (int t = 0; t < data.num_occasions(n); ++t) {
            const auto& occ = data.persons[n][t];
            NcvmpUpdate upd = ncvmp_beta_update(occ.design, occ.chosen, vp.beta_mean[n][t],
                                                vp.beta_cov[n][t], vp.mu_mean[n], prec_w,
                                                config.step_cap);
            vp.beta_mean[n][t] = std::move(upd.mu);
            vp.beta_cov[n][t] = std::move(upd.sigma);
            stats.damped += upd.damped ? 1 : 0;
            stats.skipped += upd.skipped ? 1 : 0;
        }
    }

    const Eigen::MatrixXd prec_b = vp.expected_prec_b();
    for (int n = 0; n < n_persons; ++n) {
        const int t_n = data.num_occasions(n);
        Eigen::VectorXd beta_sum = Eigen::VectorXd::Zero(k);
        for (int t = 0; t < t_n; ++t) beta_sum += vp.beta_mean[n][t];
        const SpdMatrix cov((prec_b + t_n * prec_w).inverse());
        vp.mu_mean[n] = cov.matrix() * (prec_b * vp.zeta_mean + prec_w * beta_sum);
        vp.mu_cov[n] = cov;
    }

    const Eigen::MatrixXd prior_prec = hyper.zeta_prior_cov.inverse();
    Eigen::VectorXd mu_sum = Eigen::VectorXd::Zero(k);
    for (int n = 0; n < n_persons; ++n) mu_sum += vp.mu_mean[n];
    vp.zeta_cov = SpdMatrix((prior_prec + n_persons * prec_b).inverse());
    vp.zeta_mean = vp.zeta_cov.matrix() * (prior_prec * hyper.zeta_prior_mean + prec_b * mu_sum);

    Eigen::MatrixXd theta_b = Hyperparameters::iw_prior_scale(hyper.nu_b, vp.expected_a_b());
    theta_b.noalias() += static_cast<double>(n_persons) * vp.zeta_cov.matrix();
    for (int n = 0; n < n_persons; ++n) {
        const Eigen::VectorXd r = vp.mu_mean[n] - vp.zeta_mean;
        theta_b.noalias() += vp.mu_cov[n].matrix() + r * r.transpose();
    }
    vp.iw_scale_b = SpdMatrix(theta_b);

    Eigen::MatrixXd theta_w = Hyperparameters::iw_prior_scale(hyper.nu_w, vp.expected_a_w());
    for (int n = 0; n < n_persons; ++n) {
        const int t_n = data.num_occasions(n);
        theta_w.noalias() += static_cast<double>(t_n) * vp.mu_cov[n].matrix();
        for (int t = 0; t < t_n; ++t) {
            const Eigen::VectorXd r = vp.beta_mean[n][t] - vp.mu_mean[n];
            theta_w.noalias() += vp.beta_cov[n][t] + r * r.transpose();
        }
    }
    vp.iw_scale_w = SpdMatrix(theta_w);

    vp.a_rate_b = hyper.a_prior_rate_b() + vp.iw_dof_b * hyper.nu_b * vp.iw_scale_b.inverse().diagonal();
    vp.a_rate_w = hyper.a_prior_rate_w() + vp.iw_dof_w * hyper.nu_w * vp.iw_scale_w.inverse().diagonal();
    return stats;
}

PredictiveReport evaluate(const ValidationScenarios& scenarios, const ParameterState& truth,
                          const PosteriorDrawSource& src, const EvalConfig& config) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    const TruthDrawSource truth_src(truth);
    const Rng root(config.seed);

    PredictiveReport report;
    report.method = src.name();
    report.n_outer = config.n_outer;
    report.n_inner = config.n_inner;
    report.n_true = config.n_true;

    for (std::size_t j = 0; j < scenarios.between.size(); ++j) {
        const auto& sc = scenarios.between[j];
        Rng est_rng = root.substream(1, static_cast<std::uint64_t>(j));
        Rng true_rng = root.substream(3, static_cast<std::uint64_t>(j));
        const Eigen::VectorXd p_est =
            predictive_new_person(sc.design, src, config.n_outer, config.n_inner, est_rng);
        const Eigen::VectorXd p_true = predictive_new_person(
            sc.design, truth_src, 1, static_cast<int>(config.n_true), true_rng);
        report.tvd_between.push_back(tvd(p_est, p_true));
    }
    for (std::size_t j = 0; j < scenarios.within.size(); ++j) {
        const auto& sc = scenarios.within[j];
        Rng est_rng = root.substream(2, static_cast<std::uint64_t>(j));
        Rng true_rng = root.substream(4, static_cast<std::uint64_t>(j));
        const Eigen::VectorXd p_est = predictive_new_occasion(sc.design, sc.person, src,
                                                              config.n_outer, config.n_inner,
                                                              est_rng);
        const Eigen::VectorXd p_true = predictive_new_occasion(
            sc.design, sc.person, truth_src, 1, static_cast<int>(config.n_true), true_rng);
        report.tvd_within.push_back(tvd(p_est, p_true));
    }

    auto mean_of = [](const std::vector<double>& v) {
        double acc = 0.0;
        for (double x : v) acc += x;
        return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
    };
    report.mean_tvd_between = mean_of(report.tvd_between);
    report.mean_tvd_within = mean_of(report.tvd_within);
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace mixl::reference
