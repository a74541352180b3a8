#pragma once

#include <Eigen/Dense>

#include "mixl/rng.hpp"
#include "mixl/spd_matrix.hpp"

namespace mixl {

// log(sum(exp(v))) with max subtraction; exact under common shifts of v.
double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v);

// Multivariate normal log density.
double logpdf_mvn(const Eigen::Ref<const Eigen::VectorXd>& x,
                  const Eigen::Ref<const Eigen::VectorXd>& mean,
                  const SpdMatrix& cov);

// Same density through a prefactored lower Cholesky factor of the covariance;
// log_det is 2*sum(log(diag(chol_lower))), passed in to keep hot loops cheap.
double logpdf_mvn_chol(const Eigen::Ref<const Eigen::VectorXd>& x,
                       const Eigen::Ref<const Eigen::VectorXd>& mean,
                       const Eigen::Ref<const Eigen::MatrixXd>& chol_lower,
                       double log_det);

// Gamma log density in shape-rate form: p(x) proportional to x^(shape-1) exp(-rate*x).
double logpdf_gamma_shape_rate(double x, double shape, double rate);

// log of the multivariate gamma function, dimension dim at argument a.
double log_multivariate_gamma(int dim, double a);

// Inverse Wishart log density with degrees of freedom dof and scale matrix
// scale; the mean is scale / (dof - dim - 1) when that is positive.
double logpdf_inverse_wishart(const SpdMatrix& x, double dof, const SpdMatrix& scale);

// Samplers. Gamma is shape-rate (mean shape/rate); the implementation converts
// to the scale form the standard library expects.
double sample_gamma(double shape, double rate, Rng& rng);

Eigen::VectorXd sample_mvn(const Eigen::Ref<const Eigen::VectorXd>& mean,
                           const SpdMatrix& cov, Rng& rng);

// mean + chol_lower * z for z standard normal; shared by all hot paths.
Eigen::VectorXd sample_mvn_chol(const Eigen::Ref<const Eigen::VectorXd>& mean,
                                const Eigen::Ref<const Eigen::MatrixXd>& chol_lower,
                                Rng& rng);

// Inverse Wishart draw via the Bartlett construction on the inverse scale.
SpdMatrix sample_inverse_wishart(double dof, const SpdMatrix& scale, Rng& rng);

}  // namespace mixl
