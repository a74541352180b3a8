#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mixl/spd_matrix.hpp"

namespace mixl {

// One choice occasion: alternatives-by-coefficients design matrix and the
// 0-based index of the chosen alternative.
struct ChoiceOccasion {
    Eigen::MatrixXd design;
    int chosen = 0;
};

// Panel choice data, ragged over persons.
struct ChoiceDataset {
    int num_coeffs = 0;
    std::vector<std::vector<ChoiceOccasion>> persons;

    int num_persons() const { return static_cast<int>(persons.size()); }
    int num_occasions(int person) const { return static_cast<int>(persons[person].size()); }
    long total_occasions() const;
    int max_alternatives() const;

    // (person, occasion) pairs in person-major order; index space for the
    // parallel kernels.
    std::vector<std::pair<int, int>> flat_occasions() const;

    // Throws ValidationError on inconsistent shapes, out-of-range chosen
    // indices, or non-finite attributes.
    void validate() const;
};

// Priors: normal population mean, half-t covariance scales on both levels.
struct Hyperparameters {
    Eigen::VectorXd zeta_prior_mean;
    SpdMatrix zeta_prior_cov;
    double nu_b = 2.0;
    double nu_w = 2.0;
    Eigen::VectorXd half_t_scale_b;
    Eigen::VectorXd half_t_scale_w;

    static Hyperparameters defaults(int num_coeffs);
    void validate(int num_coeffs) const;

    // The half-t construction: a_k ~ Gamma(shape 1/2, rate scale_k^-2) and
    // Sigma | a ~ InverseWishart(nu + K - 1, 2 * nu * diag(a)).
    double a_prior_shape() const { return 0.5; }
    Eigen::VectorXd a_prior_rate_b() const;
    Eigen::VectorXd a_prior_rate_w() const;
    double iw_prior_dof_b(int num_coeffs) const { return nu_b + num_coeffs - 1; }
    double iw_prior_dof_w(int num_coeffs) const { return nu_w + num_coeffs - 1; }
    static Eigen::MatrixXd iw_prior_scale(double nu, const Eigen::VectorXd& a);
};

// Full latent state of the hierarchy.
struct ParameterState {
    Eigen::VectorXd zeta;
    SpdMatrix sigma_b;
    SpdMatrix sigma_w;
    Eigen::VectorXd a_b;
    Eigen::VectorXd a_w;
    std::vector<Eigen::VectorXd> mu;
    std::vector<std::vector<Eigen::VectorXd>> beta;

    // Zeros for locations, identity covariances, unit scale augmenters.
    static ParameterState neutral(const ChoiceDataset& data);
    void validate_shapes(const ChoiceDataset& data) const;
};

}  // namespace mixl
