#include "mixl/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>

#include "mixl/errors.hpp"
#include "mixl/model.hpp"
#include "mixl/stats.hpp"

namespace mixl {

void EvalConfig::validate() const {
    if (n_outer < 1 || n_inner < 1 || n_true < 1) {
        throw ValidationError("draw counts must be positive");
    }
    if (n_true > std::numeric_limits<int>::max()) {
        throw ValidationError("true-side draw count too large");
    }
}

double tvd(const Eigen::Ref<const Eigen::VectorXd>& p,
           const Eigen::Ref<const Eigen::VectorXd>& q) {
    if (p.size() != q.size() || p.size() == 0) {
        throw ValidationError("tvd needs two distributions on the same non-empty support");
    }
    auto check_simplex = [](const Eigen::Ref<const Eigen::VectorXd>& v) {
        if ((v.array() < -1e-12).any() || std::abs(v.sum() - 1.0) > 1e-8) {
            throw ValidationError("tvd input is not a probability vector");
        }
    };
    check_simplex(p);
    check_simplex(q);
    return 0.5 * (p - q).cwiseAbs().sum();
}

namespace {

Eigen::MatrixXd lower_cholesky(const Eigen::MatrixXd& m, const char* what) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) {
        throw NumericalError(std::string(what) + ": stored covariance draw is not positive definite");
    }
    return llt.matrixL();
}

Eigen::VectorXd standard_normal_vector(int dim, Rng& rng) {
    Eigen::VectorXd z(dim);
    for (int i = 0; i < dim; ++i) z[i] = rng.normal();
    return z;
}

}  // namespace

McmcDrawSource::McmcDrawSource(const McmcDraws& draws) : draws_(&draws) {
    if (draws.total_draws() < 1) {
        throw ValidationError("posterior draw store is empty");
    }
}

long McmcDrawSource::max_outer_draws() const { return draws_->total_draws(); }

void McmcDrawSource::population_draw(long idx, Rng&, Eigen::VectorXd& zeta,
                                     Eigen::MatrixXd& chol_b, Eigen::MatrixXd& chol_w) const {
    zeta = draws_->zeta_draw(idx);
    chol_b = lower_cholesky(draws_->sigma_b_draw(idx), "between covariance");
    chol_w = lower_cholesky(draws_->sigma_w_draw(idx), "within covariance");
}

void McmcDrawSource::person_draw(long idx, int person, Rng&, Eigen::VectorXd& mu_n,
                                 Eigen::MatrixXd& chol_w) const {
    const auto& tracked = draws_->tracked_persons;
    const auto it = std::find(tracked.begin(), tracked.end(), person);
    if (it == tracked.end()) {
        throw ValidationError("person " + std::to_string(person) +
                              " has no stored posterior mean draws");
    }
    const auto row = static_cast<Eigen::Index>(it - tracked.begin());
    mu_n = draws_->mu_tracked_draw(idx).row(row).transpose();
    chol_w = lower_cholesky(draws_->sigma_w_draw(idx), "within covariance");
}

VbDrawSource::VbDrawSource(const VariationalPosterior& vp) : vp_(&vp) {}

void VbDrawSource::population_draw(long, Rng& rng, Eigen::VectorXd& zeta,
                                   Eigen::MatrixXd& chol_b, Eigen::MatrixXd& chol_w) const {
    zeta = sample_mvn(vp_->zeta_mean, vp_->zeta_cov, rng);
    chol_b = sample_inverse_wishart(vp_->iw_dof_b, vp_->iw_scale_b, rng).factor();
    chol_w = sample_inverse_wishart(vp_->iw_dof_w, vp_->iw_scale_w, rng).factor();
}

void VbDrawSource::person_draw(long, int person, Rng& rng, Eigen::VectorXd& mu_n,
                               Eigen::MatrixXd& chol_w) const {
    if (person < 0 || person >= static_cast<int>(vp_->mu_mean.size())) {
        throw ValidationError("person " + std::to_string(person) + " outside the fitted panel");
    }
    mu_n = sample_mvn(vp_->mu_mean[static_cast<std::size_t>(person)],
                      vp_->mu_cov[static_cast<std::size_t>(person)], rng);
    chol_w = sample_inverse_wishart(vp_->iw_dof_w, vp_->iw_scale_w, rng).factor();
}

TruthDrawSource::TruthDrawSource(const ParameterState& truth) : truth_(&truth) {}

void TruthDrawSource::population_draw(long, Rng&, Eigen::VectorXd& zeta, Eigen::MatrixXd& chol_b,
                                      Eigen::MatrixXd& chol_w) const {
    zeta = truth_->zeta;
    chol_b = truth_->sigma_b.factor();
    chol_w = truth_->sigma_w.factor();
}

void TruthDrawSource::person_draw(long, int person, Rng&, Eigen::VectorXd& mu_n,
                                  Eigen::MatrixXd& chol_w) const {
    if (person < 0 || person >= static_cast<int>(truth_->mu.size())) {
        throw ValidationError("person " + std::to_string(person) + " outside the panel");
    }
    mu_n = truth_->mu[static_cast<std::size_t>(person)];
    chol_w = truth_->sigma_w.factor();
}

namespace {

// Maps the s-th requested outer draw onto a stored index with even striding
// when the source is finite.
long outer_index(long s, long effective, long max_draws) {
    if (max_draws <= 0) return s;
    return (s * max_draws) / effective;
}

long effective_outer(int requested, const PosteriorDrawSource& src) {
    const long max_draws = src.max_outer_draws();
    if (max_draws <= 0) return requested;
    return std::min(static_cast<long>(requested), max_draws);
}

}  // namespace

Eigen::VectorXd predictive_new_person(const Eigen::Ref<const Eigen::MatrixXd>& design,
                                      const PosteriorDrawSource& src, int n_outer, int n_inner,
                                      Rng& rng) {
    const int k = static_cast<int>(design.cols());
    const long eff = effective_outer(n_outer, src);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(design.rows());
    Eigen::VectorXd zeta(k);
    Eigen::MatrixXd chol_b(k, k), chol_w(k, k);
    for (long s = 0; s < eff; ++s) {
        src.population_draw(outer_index(s, eff, src.max_outer_draws()), rng, zeta, chol_b, chol_w);
        Eigen::VectorXd inner_acc = Eigen::VectorXd::Zero(design.rows());
        for (int i = 0; i < n_inner; ++i) {
            const Eigen::VectorXd mu = zeta + chol_b * standard_normal_vector(k, rng);
            const Eigen::VectorXd beta = mu + chol_w * standard_normal_vector(k, rng);
            inner_acc += mnl_choice_prob(design, beta);
        }
        acc += inner_acc;
    }
    return acc / (static_cast<double>(eff) * n_inner);
}

Eigen::VectorXd predictive_new_occasion(const Eigen::Ref<const Eigen::MatrixXd>& design,
                                        int person, const PosteriorDrawSource& src, int n_outer,
                                        int n_inner, Rng& rng) {
    const int k = static_cast<int>(design.cols());
    const long eff = effective_outer(n_outer, src);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(design.rows());
    Eigen::VectorXd mu_n(k);
    Eigen::MatrixXd chol_w(k, k);
    for (long s = 0; s < eff; ++s) {
        src.person_draw(outer_index(s, eff, src.max_outer_draws()), person, rng, mu_n, chol_w);
        Eigen::VectorXd inner_acc = Eigen::VectorXd::Zero(design.rows());
        for (int i = 0; i < n_inner; ++i) {
            const Eigen::VectorXd beta = mu_n + chol_w * standard_normal_vector(k, rng);
            inner_acc += mnl_choice_prob(design, beta);
        }
        acc += inner_acc;
    }
    return acc / (static_cast<double>(eff) * n_inner);
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
    report.tvd_between.resize(scenarios.between.size());
    report.tvd_within.resize(scenarios.within.size());

    // A throw must not unwind across the parallel region; the first failure
    // is captured and rethrown afterwards.
    std::exception_ptr failure = nullptr;

    const long n_between = static_cast<long>(scenarios.between.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (config.parallel)
#endif
    for (long j = 0; j < n_between; ++j) {
        try {
            const auto& sc = scenarios.between[static_cast<std::size_t>(j)];
            Rng est_rng = root.substream(1, static_cast<std::uint64_t>(j));
            Rng true_rng = root.substream(3, static_cast<std::uint64_t>(j));
            const Eigen::VectorXd p_est =
                predictive_new_person(sc.design, src, config.n_outer, config.n_inner, est_rng);
            const Eigen::VectorXd p_true = predictive_new_person(
                sc.design, truth_src, 1, static_cast<int>(config.n_true), true_rng);
            report.tvd_between[static_cast<std::size_t>(j)] = tvd(p_est, p_true);
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical(mixl_eval_failure)
#endif
            if (failure == nullptr) failure = std::current_exception();
        }
    }
    if (failure != nullptr) std::rethrow_exception(failure);

    const long n_within = static_cast<long>(scenarios.within.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (config.parallel)
#endif
    for (long j = 0; j < n_within; ++j) {
        try {
            const auto& sc = scenarios.within[static_cast<std::size_t>(j)];
            Rng est_rng = root.substream(2, static_cast<std::uint64_t>(j));
            Rng true_rng = root.substream(4, static_cast<std::uint64_t>(j));
            const Eigen::VectorXd p_est = predictive_new_occasion(sc.design, sc.person, src,
                                                                  config.n_outer, config.n_inner,
                                                                  est_rng);
            const Eigen::VectorXd p_true = predictive_new_occasion(
                sc.design, sc.person, truth_src, 1, static_cast<int>(config.n_true), true_rng);
            report.tvd_within[static_cast<std::size_t>(j)] = tvd(p_est, p_true);
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical(mixl_eval_failure)
#endif
            if (failure == nullptr) failure = std::current_exception();
        }
    }
    if (failure != nullptr) std::rethrow_exception(failure);

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

}  // namespace mixl
