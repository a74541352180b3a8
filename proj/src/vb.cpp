#include "mixl/vb.hpp"

#include <chrono>
#include <cmath>

#include "mixl/errors.hpp"
#include "mixl/stats.hpp"

namespace mixl {

void VbConfig::validate() const {
    if (!(tolerance > 0.0)) throw ValidationError("convergence tolerance must be positive");
    if (max_iter < 1) throw ValidationError("iteration cap must be positive");
    if (!(step_cap > 0.0)) throw ValidationError("step cap must be positive");
}

VariationalPosterior VariationalPosterior::neutral(const ChoiceDataset& data,
                                                   const Hyperparameters& hyper) {
    const int k = data.num_coeffs;
    const int n_persons = data.num_persons();

    VariationalPosterior vp;
    vp.a_shape_b = 0.5 * (hyper.nu_b + k);
    vp.a_shape_w = 0.5 * (hyper.nu_w + k);
    vp.iw_dof_b = hyper.nu_b + n_persons + k - 1;
    vp.iw_dof_w = hyper.nu_w + static_cast<double>(data.total_occasions()) + k - 1;

    vp.a_rate_b = Eigen::VectorXd::Constant(k, vp.a_shape_b);
    vp.a_rate_w = Eigen::VectorXd::Constant(k, vp.a_shape_w);
    vp.iw_scale_b = SpdMatrix(vp.iw_dof_b * Eigen::MatrixXd::Identity(k, k));
    vp.iw_scale_w = SpdMatrix(vp.iw_dof_w * Eigen::MatrixXd::Identity(k, k));

    vp.zeta_mean = Eigen::VectorXd::Zero(k);
    vp.zeta_cov = SpdMatrix::identity(k);
    vp.mu_mean.assign(n_persons, Eigen::VectorXd::Zero(k));
    vp.mu_cov.assign(n_persons, SpdMatrix::identity(k));
    vp.beta_mean.resize(n_persons);
    vp.beta_cov.resize(n_persons);
    for (int n = 0; n < n_persons; ++n) {
        vp.beta_mean[n].assign(data.persons[n].size(), Eigen::VectorXd::Zero(k));
        vp.beta_cov[n].assign(data.persons[n].size(), Eigen::MatrixXd::Identity(k, k));
    }
    return vp;
}

double expected_lse(const Eigen::Ref<const Eigen::MatrixXd>& design,
                    const Eigen::Ref<const Eigen::VectorXd>& mu,
                    const Eigen::Ref<const Eigen::MatrixXd>& sigma,
                    LogitLinearization* lin) {
    if (design.cols() != mu.size() || sigma.rows() != mu.size() || sigma.cols() != mu.size()) {
        throw ValidationError("expected_lse dimension mismatch");
    }
    const Eigen::VectorXd util = design * mu;
    const double lse0 = log_sum_exp(util);
    const Eigen::VectorXd p0 = (util.array() - lse0).exp();
    const Eigen::MatrixXd hess = Eigen::MatrixXd(p0.asDiagonal()) - p0 * p0.transpose();
    const Eigen::MatrixXd a = design * sigma * design.transpose();
    const double correction = 0.5 * hess.cwiseProduct(a).sum();
    if (lin != nullptr) {
        lin->p0 = p0;
        lin->hessian = hess;
    }
    return lse0 + correction;
}

double ncvmp_objective(const Eigen::Ref<const Eigen::MatrixXd>& design, int chosen,
                       const Eigen::Ref<const Eigen::VectorXd>& mu,
                       const Eigen::Ref<const Eigen::MatrixXd>& sigma,
                       const Eigen::Ref<const Eigen::VectorXd>& prior_mean,
                       const Eigen::Ref<const Eigen::MatrixXd>& prior_prec) {
    const Eigen::VectorXd resid = mu - prior_mean;
    const double prior_term =
        -0.5 * resid.dot(prior_prec * resid) - 0.5 * prior_prec.cwiseProduct(sigma).sum();
    const double chosen_util = design.row(chosen).dot(mu);
    return prior_term + chosen_util - expected_lse(design, mu, sigma);
}

Eigen::VectorXd ncvmp_mu_gradient(const Eigen::Ref<const Eigen::MatrixXd>& design, int chosen,
                                  const Eigen::Ref<const Eigen::VectorXd>& mu,
                                  const Eigen::Ref<const Eigen::MatrixXd>& sigma,
                                  const Eigen::Ref<const Eigen::VectorXd>& prior_mean,
                                  const Eigen::Ref<const Eigen::MatrixXd>& prior_prec) {
    LogitLinearization lin;
    expected_lse(design, mu, sigma, &lin);
    const Eigen::MatrixXd a = design * sigma * design.transpose();
    Eigen::VectorXd residual_prob = -lin.p0;
    residual_prob[chosen] += 1.0;
    // Gradient of the curvature correction: the softmax Hessian is evaluated
    // at mu while the factor covariance stays fixed.
    const Eigen::VectorXd curv = lin.hessian * (a * lin.p0 - 0.5 * a.diagonal());
    return -prior_prec * (mu - prior_mean) + design.transpose() * (residual_prob + curv);
}

Eigen::MatrixXd ncvmp_sigma_gradient(const Eigen::Ref<const Eigen::MatrixXd>& design,
                                     const Eigen::Ref<const Eigen::VectorXd>& mu,
                                     const Eigen::Ref<const Eigen::MatrixXd>& prior_prec) {
    LogitLinearization lin;
    const Eigen::MatrixXd zero =
        Eigen::MatrixXd::Zero(mu.size(), mu.size());
    expected_lse(design, mu, zero, &lin);
    return -0.5 * (prior_prec + design.transpose() * lin.hessian * design);
}

NcvmpUpdate ncvmp_beta_update(const Eigen::Ref<const Eigen::MatrixXd>& design, int chosen,
                              const Eigen::Ref<const Eigen::VectorXd>& mu,
                              const Eigen::Ref<const Eigen::MatrixXd>& sigma,
                              const Eigen::Ref<const Eigen::VectorXd>& prior_mean,
                              const Eigen::Ref<const Eigen::MatrixXd>& prior_prec,
                              double step_cap) {
    NcvmpUpdate out;
    out.mu = mu;
    out.sigma = sigma;

    LogitLinearization lin;
    expected_lse(design, mu, sigma, &lin);
    const Eigen::MatrixXd prec_new =
        prior_prec + design.transpose() * lin.hessian * design;
    const Eigen::LLT<Eigen::MatrixXd> llt(prec_new);
    if (llt.info() != Eigen::Success) {
        out.skipped = true;
        return out;
    }
    Eigen::MatrixXd sigma_new = llt.solve(Eigen::MatrixXd::Identity(mu.size(), mu.size()));
    sigma_new = 0.5 * (sigma_new + sigma_new.transpose());

    const Eigen::MatrixXd a = design * sigma * design.transpose();
    Eigen::VectorXd residual_prob = -lin.p0;
    residual_prob[chosen] += 1.0;
    const Eigen::VectorXd curv = lin.hessian * (a * lin.p0 - 0.5 * a.diagonal());
    const Eigen::VectorXd grad =
        -prior_prec * (mu - prior_mean) + design.transpose() * (residual_prob + curv);

    Eigen::VectorXd step = sigma_new * grad;
    if (step.lpNorm<Eigen::Infinity>() > step_cap) {
        step *= 0.5;
        out.damped = true;
        if (step.lpNorm<Eigen::Infinity>() > step_cap) {
            out.skipped = true;
            return out;
        }
    }
    out.mu = mu + step;
    out.sigma = std::move(sigma_new);
    return out;
}

SweepStats vb_sweep(VariationalPosterior& vp, const ChoiceDataset& data,
                    const Hyperparameters& hyper, const VbConfig& config) {
    const int k = data.num_coeffs;
    const int n_persons = data.num_persons();
    SweepStats stats;

    // Occasion factors, previous-iteration expected precisions throughout.
    const Eigen::MatrixXd prec_w = vp.expected_prec_w();
    const auto flat = data.flat_occasions();
    const long n_flat = static_cast<long>(flat.size());
    long damped = 0;
    long skipped = 0;
#ifdef _OPENMP
#pragma omp parallel for reduction(+ : damped, skipped) schedule(static) if (config.parallel)
#endif
    for (long i = 0; i < n_flat; ++i) {
        const auto [n, t] = flat[static_cast<std::size_t>(i)];
        const auto& occ = data.persons[n][t];
        NcvmpUpdate upd = ncvmp_beta_update(occ.design, occ.chosen, vp.beta_mean[n][t],
                                            vp.beta_cov[n][t], vp.mu_mean[n], prec_w,
                                            config.step_cap);
        vp.beta_mean[n][t] = std::move(upd.mu);
        vp.beta_cov[n][t] = std::move(upd.sigma);
        damped += upd.damped ? 1 : 0;
        skipped += upd.skipped ? 1 : 0;
    }
    stats.damped += damped;
    stats.skipped += skipped;

    // Person means.
    const Eigen::MatrixXd prec_b = vp.expected_prec_b();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (config.parallel)
#endif
    for (int n = 0; n < n_persons; ++n) {
        const int t_n = data.num_occasions(n);
        Eigen::VectorXd beta_sum = Eigen::VectorXd::Zero(k);
        for (int t = 0; t < t_n; ++t) beta_sum += vp.beta_mean[n][t];
        const SpdMatrix cov((prec_b + t_n * prec_w).inverse());
        vp.mu_mean[n] = cov.matrix() * (prec_b * vp.zeta_mean + prec_w * beta_sum);
        vp.mu_cov[n] = cov;
    }

    // Population mean.
    const Eigen::MatrixXd prior_prec = hyper.zeta_prior_cov.inverse();
    Eigen::VectorXd mu_sum = Eigen::VectorXd::Zero(k);
    for (int n = 0; n < n_persons; ++n) mu_sum += vp.mu_mean[n];
    vp.zeta_cov = SpdMatrix((prior_prec + n_persons * prec_b).inverse());
    vp.zeta_mean = vp.zeta_cov.matrix() * (prior_prec * hyper.zeta_prior_mean + prec_b * mu_sum);

    // Between-level inverse Wishart scale.
    Eigen::MatrixXd theta_b = Hyperparameters::iw_prior_scale(hyper.nu_b, vp.expected_a_b());
    theta_b.noalias() += static_cast<double>(n_persons) * vp.zeta_cov.matrix();
    for (int n = 0; n < n_persons; ++n) {
        const Eigen::VectorXd r = vp.mu_mean[n] - vp.zeta_mean;
        theta_b.noalias() += vp.mu_cov[n].matrix() + r * r.transpose();
    }
    vp.iw_scale_b = SpdMatrix(theta_b);

    // Within-level inverse Wishart scale.
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

    // Gamma rates.
    const Eigen::VectorXd diag_inv_b = vp.iw_scale_b.inverse().diagonal();
    const Eigen::VectorXd diag_inv_w = vp.iw_scale_w.inverse().diagonal();
    vp.a_rate_b = hyper.a_prior_rate_b() + vp.iw_dof_b * hyper.nu_b * diag_inv_b;
    vp.a_rate_w = hyper.a_prior_rate_w() + vp.iw_dof_w * hyper.nu_w * diag_inv_w;
    return stats;
}

Eigen::VectorXd convergence_state(const VariationalPosterior& vp) {
    const int k = static_cast<int>(vp.zeta_mean.size());
    Eigen::VectorXd state(5 * k);
    state.segment(0, k) = vp.zeta_mean;
    state.segment(k, k) = vp.iw_scale_b.matrix().diagonal();
    state.segment(2 * k, k) = vp.iw_scale_w.matrix().diagonal();
    state.segment(3 * k, k) = vp.a_rate_b;
    state.segment(4 * k, k) = vp.a_rate_w;
    return state;
}

ConvergenceMonitor::ConvergenceMonitor(double tolerance, int window)
    : tolerance_(tolerance), window_(window) {
    if (!(tolerance > 0.0) || window < 1) {
        throw ValidationError("monitor needs positive tolerance and window");
    }
}

void ConvergenceMonitor::record(const VariationalPosterior& vp) {
    history_.push_back(convergence_state(vp));
    const int have = static_cast<int>(history_.size());
    if (have < window_) return;

    Eigen::VectorXd avg = Eigen::VectorXd::Zero(history_.back().size());
    for (int i = have - window_; i < have; ++i) avg += history_[static_cast<std::size_t>(i)];
    avg /= static_cast<double>(window_);

    if (prev_avg_.size() > 0) {
        double worst = 0.0;
        for (Eigen::Index i = 0; i < avg.size(); ++i) {
            const double denom = std::max(std::abs(prev_avg_[i]), 1e-12);
            worst = std::max(worst, std::abs(avg[i] - prev_avg_[i]) / denom);
        }
        delta_ = worst;
        has_delta_ = true;
    }
    prev_avg_ = avg;
}

bool ConvergenceMonitor::has_delta() const { return has_delta_; }

double ConvergenceMonitor::delta() const {
    if (!has_delta_) throw ValidationError("delta undefined before window fills twice");
    return delta_;
}

bool ConvergenceMonitor::converged() const { return has_delta_ && delta_ < tolerance_; }

VbFit run_vb(const ChoiceDataset& data, const Hyperparameters& hyper, const VbConfig& config) {
    data.validate();
    hyper.validate(data.num_coeffs);
    config.validate();

    const auto start = std::chrono::steady_clock::now();
    VbFit fit;
    fit.posterior = VariationalPosterior::neutral(data, hyper);
    ConvergenceMonitor monitor(config.tolerance);

    for (int iter = 1; iter <= config.max_iter; ++iter) {
        const SweepStats stats = vb_sweep(fit.posterior, data, hyper, config);
        fit.damped += stats.damped;
        fit.skipped += stats.skipped;
        fit.iterations = iter;
        monitor.record(fit.posterior);
        if (monitor.converged()) {
            fit.converged = true;
            break;
        }
    }
    if (monitor.has_delta()) fit.final_delta = monitor.delta();
    fit.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return fit;
}

}  // namespace mixl
