#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mixl/data.hpp"

namespace mixl {

struct VbConfig {
    double tolerance = 0.005;
    int max_iter = 500;
    double step_cap = 10.0;
    bool parallel = true;

    void validate() const;
};

// Mean-field factors: Gaussians for zeta, person means, and occasion tastes;
// inverse Wishart for both covariances; gamma for the scale augmenters.
struct VariationalPosterior {
    // Gamma shapes (fixed by the model) and inverse Wishart degrees of freedom.
    double a_shape_b = 0.0;
    double a_shape_w = 0.0;
    double iw_dof_b = 0.0;
    double iw_dof_w = 0.0;

    Eigen::VectorXd a_rate_b;
    Eigen::VectorXd a_rate_w;
    SpdMatrix iw_scale_b;
    SpdMatrix iw_scale_w;

    Eigen::VectorXd zeta_mean;
    SpdMatrix zeta_cov;
    std::vector<Eigen::VectorXd> mu_mean;
    std::vector<SpdMatrix> mu_cov;
    std::vector<std::vector<Eigen::VectorXd>> beta_mean;
    std::vector<std::vector<Eigen::MatrixXd>> beta_cov;

    // Unit expected precisions and unit expected scale augmenters.
    static VariationalPosterior neutral(const ChoiceDataset& data, const Hyperparameters& hyper);

    Eigen::MatrixXd expected_prec_b() const { return iw_dof_b * iw_scale_b.inverse(); }
    Eigen::MatrixXd expected_prec_w() const { return iw_dof_w * iw_scale_w.inverse(); }
    Eigen::VectorXd expected_a_b() const { return a_shape_b * a_rate_b.cwiseInverse(); }
    Eigen::VectorXd expected_a_w() const { return a_shape_w * a_rate_w.cwiseInverse(); }
};

// Softmax and its curvature at the expansion point.
struct LogitLinearization {
    Eigen::VectorXd p0;
    Eigen::MatrixXd hessian;
};

// Second-order approximation of E[log sum exp(design * beta)] under
// beta ~ N(mu, sigma). Exact when sigma is zero or there is one alternative.
// Fills *lin with the expansion when requested.
double expected_lse(const Eigen::Ref<const Eigen::MatrixXd>& design,
                    const Eigen::Ref<const Eigen::VectorXd>& mu,
                    const Eigen::Ref<const Eigen::MatrixXd>& sigma,
                    LogitLinearization* lin = nullptr);

// Local variational objective for one occasion: expected log choice
// probability plus the Gaussian prior term around the person mean, as a
// function of the occasion factor's moments.
double ncvmp_objective(const Eigen::Ref<const Eigen::MatrixXd>& design, int chosen,
                       const Eigen::Ref<const Eigen::VectorXd>& mu,
                       const Eigen::Ref<const Eigen::MatrixXd>& sigma,
                       const Eigen::Ref<const Eigen::VectorXd>& prior_mean,
                       const Eigen::Ref<const Eigen::MatrixXd>& prior_prec);

// Analytic gradients of the local objective; the mean gradient is evaluated
// holding the linearization covariance fixed at sigma.
Eigen::VectorXd ncvmp_mu_gradient(const Eigen::Ref<const Eigen::MatrixXd>& design, int chosen,
                                  const Eigen::Ref<const Eigen::VectorXd>& mu,
                                  const Eigen::Ref<const Eigen::MatrixXd>& sigma,
                                  const Eigen::Ref<const Eigen::VectorXd>& prior_mean,
                                  const Eigen::Ref<const Eigen::MatrixXd>& prior_prec);

Eigen::MatrixXd ncvmp_sigma_gradient(const Eigen::Ref<const Eigen::MatrixXd>& design,
                                     const Eigen::Ref<const Eigen::VectorXd>& mu,
                                     const Eigen::Ref<const Eigen::MatrixXd>& prior_prec);

struct NcvmpUpdate {
    Eigen::VectorXd mu;
    Eigen::MatrixXd sigma;
    bool damped = false;
    bool skipped = false;
};

// Fixed-point update of one occasion factor: new covariance from the
// curvature-corrected precision, new mean from one natural-gradient step.
// Oversized steps halve once; a still-oversized step or a failed
// factorization keeps the previous factor.
NcvmpUpdate ncvmp_beta_update(const Eigen::Ref<const Eigen::MatrixXd>& design, int chosen,
                              const Eigen::Ref<const Eigen::VectorXd>& mu,
                              const Eigen::Ref<const Eigen::MatrixXd>& sigma,
                              const Eigen::Ref<const Eigen::VectorXd>& prior_mean,
                              const Eigen::Ref<const Eigen::MatrixXd>& prior_prec,
                              double step_cap);

struct SweepStats {
    long damped = 0;
    long skipped = 0;
};

// One full coordinate sweep in fixed order: occasion factors, person means,
// population mean, both inverse Wishart scales, both gamma rates.
SweepStats vb_sweep(VariationalPosterior& vp, const ChoiceDataset& data,
                    const Hyperparameters& hyper, const VbConfig& config);

// Convergence state vector: population mean, both inverse Wishart scale
// diagonals, both gamma rate vectors.
Eigen::VectorXd convergence_state(const VariationalPosterior& vp);

// Relative-change test on a trailing five-iteration average of the
// convergence state. Needs at least six recorded iterations to report a
// delta.
class ConvergenceMonitor {
public:
    explicit ConvergenceMonitor(double tolerance, int window = 5);

    void record(const VariationalPosterior& vp);
    bool has_delta() const;
    double delta() const;
    bool converged() const;

private:
    double tolerance_;
    int window_;
    std::vector<Eigen::VectorXd> history_;
    Eigen::VectorXd prev_avg_;
    double delta_ = 0.0;
    bool has_delta_ = false;
};

struct VbFit {
    VariationalPosterior posterior;
    int iterations = 0;
    bool converged = false;
    double final_delta = 0.0;
    long damped = 0;
    long skipped = 0;
    double wall_seconds = 0.0;
};

VbFit run_vb(const ChoiceDataset& data, const Hyperparameters& hyper, const VbConfig& config);

}  // namespace mixl
