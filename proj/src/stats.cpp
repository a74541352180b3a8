#include "mixl/stats.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "mixl/errors.hpp"

namespace mixl {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454835606594728112;
constexpr double kLogPi = 1.1447298858494001741434273513531;

}  // namespace

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v) {
    if (v.size() == 0) {
        throw ValidationError("log_sum_exp of an empty vector");
    }
    const double m = v.maxCoeff();
    if (!std::isfinite(m)) {
        // All -inf collapses to -inf; any +inf or NaN propagates.
        return m;
    }
    double acc = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) acc += std::exp(v[i] - m);
    return m + std::log(acc);
}

double logpdf_mvn(const Eigen::Ref<const Eigen::VectorXd>& x,
                  const Eigen::Ref<const Eigen::VectorXd>& mean,
                  const SpdMatrix& cov) {
    if (x.size() != mean.size() || x.size() != cov.dim()) {
        throw ValidationError("logpdf_mvn dimension mismatch");
    }
    const double quad = cov.quad_form_inv(x - mean);
    return -0.5 * (cov.dim() * kLogTwoPi + cov.log_det() + quad);
}

double logpdf_mvn_chol(const Eigen::Ref<const Eigen::VectorXd>& x,
                       const Eigen::Ref<const Eigen::VectorXd>& mean,
                       const Eigen::Ref<const Eigen::MatrixXd>& chol_lower,
                       double log_det) {
    const double quad =
        chol_lower.triangularView<Eigen::Lower>().solve(x - mean).squaredNorm();
    return -0.5 * (x.size() * kLogTwoPi + log_det + quad);
}

double logpdf_gamma_shape_rate(double x, double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0)) {
        throw ValidationError("gamma density requires positive shape and rate");
    }
    if (!(x > 0.0)) {
        return -std::numeric_limits<double>::infinity();
    }
    return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double log_multivariate_gamma(int dim, double a) {
    if (dim < 1) {
        throw ValidationError("log_multivariate_gamma requires dim >= 1");
    }
    double out = 0.25 * dim * (dim - 1) * kLogPi;
    for (int j = 1; j <= dim; ++j) {
        out += std::lgamma(a + 0.5 * (1.0 - j));
    }
    return out;
}

double logpdf_inverse_wishart(const SpdMatrix& x, double dof, const SpdMatrix& scale) {
    const int k = x.dim();
    if (scale.dim() != k) {
        throw ValidationError("logpdf_inverse_wishart dimension mismatch");
    }
    if (!(dof > k - 1)) {
        throw ValidationError("inverse Wishart requires dof > dim - 1");
    }
    const double trace_term = x.solve_matrix(scale.matrix()).trace();
    return 0.5 * dof * scale.log_det() - 0.5 * dof * k * std::log(2.0) -
           log_multivariate_gamma(k, 0.5 * dof) -
           0.5 * (dof + k + 1.0) * x.log_det() - 0.5 * trace_term;
}

double sample_gamma(double shape, double rate, Rng& rng) {
    if (!(shape > 0.0) || !(rate > 0.0)) {
        throw ValidationError("gamma sampler requires positive shape and rate");
    }
    std::gamma_distribution<double> dist(shape, 1.0 / rate);
    return dist(rng);
}

Eigen::VectorXd sample_mvn(const Eigen::Ref<const Eigen::VectorXd>& mean,
                           const SpdMatrix& cov, Rng& rng) {
    if (mean.size() != cov.dim()) {
        throw ValidationError("sample_mvn dimension mismatch");
    }
    return sample_mvn_chol(mean, cov.factor(), rng);
}

Eigen::VectorXd sample_mvn_chol(const Eigen::Ref<const Eigen::VectorXd>& mean,
                                const Eigen::Ref<const Eigen::MatrixXd>& chol_lower,
                                Rng& rng) {
    Eigen::VectorXd z(mean.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
    return mean + chol_lower * z;
}

SpdMatrix sample_inverse_wishart(double dof, const SpdMatrix& scale, Rng& rng) {
    const int k = scale.dim();
    if (!(dof > k - 1)) {
        throw ValidationError("inverse Wishart sampler requires dof > dim - 1");
    }
    // W ~ Wishart(dof, scale^{-1}) by Bartlett; the returned draw is W^{-1}.
    // Any square root B with B*B^T = scale^{-1} works; B = L^{-T} for the
    // Cholesky factor L of the scale.
    Eigen::MatrixXd bartlett = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) {
        const double df_i = dof - i;
        bartlett(i, i) = std::sqrt(sample_gamma(0.5 * df_i, 0.5, rng));
        for (int j = 0; j < i; ++j) bartlett(i, j) = rng.normal();
    }
    // M = L^{-T} * A, so W = M * M^T and W^{-1} = M^{-T} * M^{-1}.
    Eigen::MatrixXd m = scale.factor()
                            .triangularView<Eigen::Lower>()
                            .transpose()
                            .solve(bartlett);
    Eigen::MatrixXd m_inv = m.partialPivLu().solve(Eigen::MatrixXd::Identity(k, k));
    Eigen::MatrixXd draw = m_inv.transpose() * m_inv;
    return SpdMatrix(0.5 * (draw + draw.transpose()));
}

}  // namespace mixl
