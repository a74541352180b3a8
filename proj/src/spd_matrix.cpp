#include "mixl/spd_matrix.hpp"

#include <cmath>
#include <string>

#include "mixl/errors.hpp"

namespace mixl {

namespace {

void check_square_symmetric(const Eigen::MatrixXd& m) {
    if (m.rows() == 0 || m.rows() != m.cols()) {
        throw ValidationError("covariance matrix must be square and non-empty");
    }
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (!(asym <= 1e-10 * scale)) {
        throw ValidationError("covariance matrix must be symmetric");
    }
    if (!m.allFinite()) {
        throw NumericalError("covariance matrix has non-finite entries");
    }
}

}  // namespace

SpdMatrix::SpdMatrix(const Eigen::MatrixXd& m) {
    check_square_symmetric(m);
    Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    Eigen::LLT<Eigen::MatrixXd> llt(sym);
    if (llt.info() != Eigen::Success) {
        const double jitter = 1e-10 * std::max(1.0, sym.trace() / sym.rows());
        sym += jitter * Eigen::MatrixXd::Identity(sym.rows(), sym.cols());
        llt.compute(sym);
        if (llt.info() != Eigen::Success) {
            throw NumericalError("Cholesky factorization failed: matrix is not positive definite");
        }
    }
    matrix_ = sym;
    factor_ = llt.matrixL();
    strict_ = true;
}

SpdMatrix SpdMatrix::identity(int dim) {
    return SpdMatrix(Eigen::MatrixXd::Identity(dim, dim));
}

SpdMatrix SpdMatrix::from_psd(const Eigen::MatrixXd& m) {
    check_square_symmetric(m);
    const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    if (eig.info() != Eigen::Success) {
        throw NumericalError("eigendecomposition failed");
    }
    Eigen::VectorXd lambda = eig.eigenvalues();
    const double lam_max = std::max(lambda.maxCoeff(), 0.0);
    const double tol = 1e-12 * std::max(1.0, lam_max);
    for (int i = 0; i < lambda.size(); ++i) {
        if (lambda[i] < -tol * std::max(1.0, lam_max)) {
            throw NumericalError("matrix has a negative eigenvalue: " + std::to_string(lambda[i]));
        }
        if (lambda[i] < 0.0) lambda[i] = 0.0;
    }
    SpdMatrix out;
    out.matrix_ = sym;
    out.strict_ = lambda.minCoeff() > tol;
    if (out.strict_) {
        Eigen::LLT<Eigen::MatrixXd> llt(sym);
        if (llt.info() == Eigen::Success) {
            out.factor_ = llt.matrixL();
            return out;
        }
        out.strict_ = false;
    }
    out.factor_ = eig.eigenvectors() * lambda.cwiseSqrt().asDiagonal();
    return out;
}

void SpdMatrix::require_strict(const char* op) const {
    if (!strict_) {
        throw NumericalError(std::string(op) + " requires a strictly positive definite matrix");
    }
}

double SpdMatrix::log_det() const {
    require_strict("log_det");
    return 2.0 * factor_.diagonal().array().log().sum();
}

Eigen::VectorXd SpdMatrix::solve(const Eigen::Ref<const Eigen::VectorXd>& rhs) const {
    require_strict("solve");
    Eigen::VectorXd x = factor_.triangularView<Eigen::Lower>().solve(rhs);
    factor_.triangularView<Eigen::Lower>().transpose().solveInPlace(x);
    return x;
}

Eigen::MatrixXd SpdMatrix::solve_matrix(const Eigen::Ref<const Eigen::MatrixXd>& rhs) const {
    require_strict("solve_matrix");
    Eigen::MatrixXd x = factor_.triangularView<Eigen::Lower>().solve(rhs);
    factor_.triangularView<Eigen::Lower>().transpose().solveInPlace(x);
    return x;
}

Eigen::MatrixXd SpdMatrix::inverse() const {
    Eigen::MatrixXd inv = solve_matrix(Eigen::MatrixXd::Identity(dim(), dim()));
    return 0.5 * (inv + inv.transpose());
}

double SpdMatrix::quad_form_inv(const Eigen::Ref<const Eigen::VectorXd>& v) const {
    require_strict("quad_form_inv");
    return factor_.triangularView<Eigen::Lower>().solve(v).squaredNorm();
}

}  // namespace mixl
