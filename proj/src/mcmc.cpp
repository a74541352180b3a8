#include "mixl/mcmc.hpp"

#include <chrono>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mixl/errors.hpp"
#include "mixl/model.hpp"
#include "mixl/stats.hpp"

namespace mixl {

void McmcConfig::validate() const {
    if (n_chains < 1) throw ValidationError("need at least one chain");
    if (n_iter < 1 || n_burn < 0 || n_burn >= n_iter) {
        throw ValidationError("iteration counts must satisfy 0 <= burn-in < iterations");
    }
    if (thin < 1) throw ValidationError("thinning interval must be positive");
    if (!(proposal_step > 0.0)) throw ValidationError("proposal step must be positive");
    if (!(adapt_target > 0.0 && adapt_target < 1.0)) {
        throw ValidationError("acceptance target must lie in (0, 1)");
    }
    if (adapt_batch < 1) throw ValidationError("adaptation batch must be positive");
    if (n_track_mu < 0) throw ValidationError("tracked person count must be non-negative");
}

const Eigen::VectorXd& McmcDraws::zeta_draw(long i) const {
    const long per = draws_per_chain();
    return zeta[static_cast<std::size_t>(i / per)][static_cast<std::size_t>(i % per)];
}

const Eigen::MatrixXd& McmcDraws::sigma_b_draw(long i) const {
    const long per = draws_per_chain();
    return sigma_b[static_cast<std::size_t>(i / per)][static_cast<std::size_t>(i % per)];
}

const Eigen::MatrixXd& McmcDraws::sigma_w_draw(long i) const {
    const long per = draws_per_chain();
    return sigma_w[static_cast<std::size_t>(i / per)][static_cast<std::size_t>(i % per)];
}

const Eigen::MatrixXd& McmcDraws::mu_tracked_draw(long i) const {
    const long per = draws_per_chain();
    return mu_tracked[static_cast<std::size_t>(i / per)][static_cast<std::size_t>(i % per)];
}

namespace gibbs {

namespace {

// a_k | Sigma ~ Gamma((nu + K) / 2, scale_k^-2 + nu * (Sigma^-1)_kk).
void update_scale(Eigen::VectorXd& a, const SpdMatrix& sigma, double nu,
                  const Eigen::VectorXd& prior_rate, Rng& rng) {
    const int k = static_cast<int>(a.size());
    const Eigen::MatrixXd prec = sigma.inverse();
    const double shape = 0.5 * (nu + k);
    for (int i = 0; i < k; ++i) {
        a[i] = sample_gamma(shape, prior_rate[i] + nu * prec(i, i), rng);
    }
}

}  // namespace

void update_scale_b(ParameterState& state, const Hyperparameters& hyper, Rng& rng) {
    update_scale(state.a_b, state.sigma_b, hyper.nu_b, hyper.a_prior_rate_b(), rng);
}

void update_scale_w(ParameterState& state, const Hyperparameters& hyper, Rng& rng) {
    update_scale(state.a_w, state.sigma_w, hyper.nu_w, hyper.a_prior_rate_w(), rng);
}

void update_sigma_b(ParameterState& state, const Hyperparameters& hyper, Rng& rng) {
    const int k = static_cast<int>(state.zeta.size());
    const int n_persons = static_cast<int>(state.mu.size());
    Eigen::MatrixXd scatter = Hyperparameters::iw_prior_scale(hyper.nu_b, state.a_b);
    for (int n = 0; n < n_persons; ++n) {
        const Eigen::VectorXd r = state.mu[n] - state.zeta;
        scatter.noalias() += r * r.transpose();
    }
    const double dof = hyper.nu_b + n_persons + k - 1;
    state.sigma_b = sample_inverse_wishart(dof, SpdMatrix(scatter), rng);
}

void update_sigma_w(ParameterState& state, const ChoiceDataset& data,
                    const Hyperparameters& hyper, Rng& rng) {
    const int k = data.num_coeffs;
    Eigen::MatrixXd scatter = Hyperparameters::iw_prior_scale(hyper.nu_w, state.a_w);
    for (int n = 0; n < data.num_persons(); ++n) {
        for (int t = 0; t < data.num_occasions(n); ++t) {
            const Eigen::VectorXd r = state.beta[n][t] - state.mu[n];
            scatter.noalias() += r * r.transpose();
        }
    }
    const double dof = hyper.nu_w + static_cast<double>(data.total_occasions()) + k - 1;
    state.sigma_w = sample_inverse_wishart(dof, SpdMatrix(scatter), rng);
}

void update_zeta(ParameterState& state, const Hyperparameters& hyper, Rng& rng) {
    const int n_persons = static_cast<int>(state.mu.size());
    const Eigen::MatrixXd prior_prec = hyper.zeta_prior_cov.inverse();
    const Eigen::MatrixXd prec_b = state.sigma_b.inverse();
    const SpdMatrix cov((prior_prec + n_persons * prec_b).inverse());

    Eigen::VectorXd mu_sum = Eigen::VectorXd::Zero(state.zeta.size());
    for (const auto& mu_n : state.mu) mu_sum += mu_n;
    const Eigen::VectorXd mean =
        cov.matrix() * (prior_prec * hyper.zeta_prior_mean + prec_b * mu_sum);
    state.zeta = sample_mvn(mean, cov, rng);
}

void update_person_means(ParameterState& state, const ChoiceDataset& data, Rng& rng) {
    const Eigen::MatrixXd prec_b = state.sigma_b.inverse();
    const Eigen::MatrixXd prec_w = state.sigma_w.inverse();
    const Eigen::VectorXd prec_b_zeta = prec_b * state.zeta;
    for (int n = 0; n < data.num_persons(); ++n) {
        const int t_n = data.num_occasions(n);
        const SpdMatrix cov((prec_b + t_n * prec_w).inverse());
        Eigen::VectorXd beta_sum = Eigen::VectorXd::Zero(data.num_coeffs);
        for (int t = 0; t < t_n; ++t) beta_sum += state.beta[n][t];
        const Eigen::VectorXd mean = cov.matrix() * (prec_b_zeta + prec_w * beta_sum);
        state.mu[n] = sample_mvn(mean, cov, rng);
    }
}

}  // namespace gibbs

void gibbs_conjugate_step(ParameterState& state, const ChoiceDataset& data,
                          const Hyperparameters& hyper, Rng& rng) {
    gibbs::update_scale_b(state, hyper, rng);
    gibbs::update_sigma_b(state, hyper, rng);
    gibbs::update_scale_w(state, hyper, rng);
    gibbs::update_sigma_w(state, data, hyper, rng);
    gibbs::update_zeta(state, hyper, rng);
    gibbs::update_person_means(state, data, rng);
}

std::vector<Rng> make_occasion_streams(const Rng& chain_root, const ChoiceDataset& data) {
    std::vector<Rng> streams;
    streams.reserve(static_cast<std::size_t>(data.total_occasions()));
    for (int n = 0; n < data.num_persons(); ++n) {
        for (int t = 0; t < data.num_occasions(n); ++t) {
            streams.push_back(chain_root.substream(2, static_cast<std::uint64_t>(n),
                                                   static_cast<std::uint64_t>(t)));
        }
    }
    return streams;
}

namespace {

struct MhWorkspace {
    Eigen::VectorXd eta;
    Eigen::VectorXd proposal;

    explicit MhWorkspace(int num_coeffs) : eta(num_coeffs), proposal(num_coeffs) {}
};

// One Metropolis move on a single occasion. The acceptance ratio multiplies
// the choice likelihood by the taste density around the person mean; the
// proposal is symmetric, so it cancels.
bool mh_update_one(const ChoiceOccasion& occ, Eigen::VectorXd& beta,
                   const Eigen::VectorXd& mu_n, const Eigen::MatrixXd& chol_w,
                   double log_det_w, double sqrt_step, Rng& rng, MhWorkspace& ws) {
    for (Eigen::Index i = 0; i < ws.eta.size(); ++i) ws.eta[i] = rng.normal();
    ws.proposal.noalias() = chol_w * ws.eta;
    ws.proposal = beta + sqrt_step * ws.proposal;

    const double log_ratio =
        mnl_log_prob(occ.design, occ.chosen, ws.proposal) +
        logpdf_mvn_chol(ws.proposal, mu_n, chol_w, log_det_w) -
        mnl_log_prob(occ.design, occ.chosen, beta) -
        logpdf_mvn_chol(beta, mu_n, chol_w, log_det_w);

    const double u = rng.uniform_pos();
    if (std::log(u) <= log_ratio) {
        beta = ws.proposal;
        return true;
    }
    return false;
}

}  // namespace

long mh_beta_sweep(ParameterState& state, const ChoiceDataset& data, double proposal_step,
                   std::vector<Rng>& occasion_streams, bool parallel) {
    const auto flat = data.flat_occasions();
    if (occasion_streams.size() != flat.size()) {
        throw ValidationError("occasion stream count does not match dataset");
    }
    const Eigen::MatrixXd& chol_w = state.sigma_w.factor();
    const double log_det_w = state.sigma_w.log_det();
    const double sqrt_step = std::sqrt(proposal_step);
    const long count = static_cast<long>(flat.size());

    long accepted = 0;
#ifdef _OPENMP
#pragma omp parallel if (parallel)
    {
        MhWorkspace ws(data.num_coeffs);
#pragma omp for reduction(+ : accepted) schedule(static)
        for (long i = 0; i < count; ++i) {
            const auto [n, t] = flat[static_cast<std::size_t>(i)];
            if (mh_update_one(data.persons[n][t], state.beta[n][t], state.mu[n], chol_w,
                              log_det_w, sqrt_step, occasion_streams[static_cast<std::size_t>(i)],
                              ws)) {
                ++accepted;
            }
        }
    }
#else
    (void)parallel;
    MhWorkspace ws(data.num_coeffs);
    for (long i = 0; i < count; ++i) {
        const auto [n, t] = flat[static_cast<std::size_t>(i)];
        if (mh_update_one(data.persons[n][t], state.beta[n][t], state.mu[n], chol_w, log_det_w,
                          sqrt_step, occasion_streams[static_cast<std::size_t>(i)], ws)) {
            ++accepted;
        }
    }
#endif
    return accepted;
}

Eigen::VectorXd split_rhat(const std::vector<std::vector<Eigen::VectorXd>>& chains) {
    if (chains.empty() || chains[0].empty()) {
        throw ValidationError("split_rhat needs retained draws");
    }
    const int k = static_cast<int>(chains[0][0].size());
    const long len = static_cast<long>(chains[0].size());
    const long half = len / 2;
    if (half < 2) {
        throw ValidationError("split_rhat needs at least four retained draws per chain");
    }

    Eigen::VectorXd rhat(k);
    for (int c = 0; c < k; ++c) {
        std::vector<double> means;
        std::vector<double> vars;
        for (const auto& chain : chains) {
            for (int part = 0; part < 2; ++part) {
                const long begin = part * half;
                double mean = 0.0;
                for (long i = 0; i < half; ++i) mean += chain[static_cast<std::size_t>(begin + i)][c];
                mean /= static_cast<double>(half);
                double var = 0.0;
                for (long i = 0; i < half; ++i) {
                    const double d = chain[static_cast<std::size_t>(begin + i)][c] - mean;
                    var += d * d;
                }
                var /= static_cast<double>(half - 1);
                means.push_back(mean);
                vars.push_back(var);
            }
        }
        const double m = static_cast<double>(means.size());
        double grand = 0.0;
        for (double v : means) grand += v;
        grand /= m;
        double b = 0.0;
        for (double v : means) b += (v - grand) * (v - grand);
        b *= static_cast<double>(half) / (m - 1.0);
        double w = 0.0;
        for (double v : vars) w += v;
        w /= m;
        const double var_plus = (static_cast<double>(half - 1) / half) * w + b / half;
        rhat[c] = std::sqrt(var_plus / w);
    }
    return rhat;
}

ParameterState overdispersed_init(const ChoiceDataset& data, Rng& rng) {
    ParameterState state = ParameterState::neutral(data);
    for (int n = 0; n < data.num_persons(); ++n) {
        for (Eigen::Index k = 0; k < state.mu[n].size(); ++k) state.mu[n][k] = rng.normal();
        for (int t = 0; t < data.num_occasions(n); ++t) {
            for (Eigen::Index k = 0; k < state.beta[n][t].size(); ++k) {
                state.beta[n][t][k] = state.mu[n][k] + rng.normal();
            }
        }
    }
    return state;
}

McmcDraws run_mcmc(const ChoiceDataset& data, const Hyperparameters& hyper,
                   const McmcConfig& config) {
    data.validate();
    hyper.validate(data.num_coeffs);
    config.validate();

    const auto start = std::chrono::steady_clock::now();
    const Rng root(config.seed);
    const int n_track = std::min(config.n_track_mu, data.num_persons());

    McmcDraws out;
    out.num_coeffs = data.num_coeffs;
    out.tracked_persons.resize(n_track);
    for (int i = 0; i < n_track; ++i) out.tracked_persons[i] = i;
    out.zeta.resize(config.n_chains);
    out.sigma_b.resize(config.n_chains);
    out.sigma_w.resize(config.n_chains);
    out.mu_tracked.resize(config.n_chains);
    out.acceptance_trace.resize(config.n_chains);
    out.final_proposal_step.resize(config.n_chains);

    const long retained = (config.n_iter - config.n_burn) / config.thin;
    const long total_occ = data.total_occasions();

    for (int c = 0; c < config.n_chains; ++c) {
        const Rng chain_root = root.substream(3, static_cast<std::uint64_t>(c));
        Rng conj_rng = chain_root.substream(1);
        Rng init_rng = chain_root.substream(0);
        std::vector<Rng> occ_streams = make_occasion_streams(chain_root, data);

        ParameterState state = overdispersed_init(data, init_rng);
        double step = config.proposal_step;
        long batch_accepted = 0;

        out.zeta[c].reserve(retained);
        out.sigma_b[c].reserve(retained);
        out.sigma_w[c].reserve(retained);
        out.mu_tracked[c].reserve(retained);

        for (long iter = 1; iter <= config.n_iter; ++iter) {
            gibbs_conjugate_step(state, data, hyper, conj_rng);
            batch_accepted += mh_beta_sweep(state, data, step, occ_streams, config.parallel);

            if (iter % config.adapt_batch == 0) {
                const double rate = static_cast<double>(batch_accepted) /
                                    (static_cast<double>(config.adapt_batch) * total_occ);
                out.acceptance_trace[c].push_back(rate);
                if (config.adapt && iter <= config.n_burn) {
                    step *= (rate > config.adapt_target) ? 1.01 : 0.99;
                }
                batch_accepted = 0;
            }

            if (iter > config.n_burn && (iter - config.n_burn) % config.thin == 0) {
                out.zeta[c].push_back(state.zeta);
                out.sigma_b[c].push_back(state.sigma_b.matrix());
                out.sigma_w[c].push_back(state.sigma_w.matrix());
                Eigen::MatrixXd mu_rows(n_track, data.num_coeffs);
                for (int i = 0; i < n_track; ++i) mu_rows.row(i) = state.mu[i].transpose();
                out.mu_tracked[c].push_back(std::move(mu_rows));
            }
        }
        out.final_proposal_step[c] = step;
    }

    if (retained >= 4) {
        out.split_rhat_zeta = split_rhat(out.zeta);
    }
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

}  // namespace mixl
