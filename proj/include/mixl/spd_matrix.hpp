#pragma once

#include <Eigen/Dense>

namespace mixl {

// Symmetric positive (semi-)definite matrix with a cached factorization.
//
// The strict constructor requires positive definiteness and keeps the Cholesky
// factor, enabling solve/inverse/log_det. from_psd() accepts semidefinite input
// (covariances with zero directions are legal model inputs) and keeps an
// eigenvalue square root usable for sampling; rank-deficient instances refuse
// the solve family.
class SpdMatrix {
public:
    SpdMatrix() = default;

    // Requires symmetry and positive definiteness. A single jitter retry
    // (1e-10 * mean diagonal) absorbs roundoff-scale indefiniteness; anything
    // worse throws NumericalError.
    explicit SpdMatrix(const Eigen::MatrixXd& m);

    static SpdMatrix identity(int dim);

    // Accepts PSD input via symmetric eigendecomposition. Eigenvalues below
    // roundoff tolerance clamp to zero; genuinely negative ones throw.
    static SpdMatrix from_psd(const Eigen::MatrixXd& m);

    int dim() const { return static_cast<int>(matrix_.rows()); }
    const Eigen::MatrixXd& matrix() const { return matrix_; }

    // Factor F with F * F^T == matrix(). Lower-triangular Cholesky when
    // strictly positive definite, eigenvalue square root otherwise.
    const Eigen::MatrixXd& factor() const { return factor_; }

    bool strictly_positive() const { return strict_; }

    double log_det() const;
    Eigen::VectorXd solve(const Eigen::Ref<const Eigen::VectorXd>& rhs) const;
    Eigen::MatrixXd solve_matrix(const Eigen::Ref<const Eigen::MatrixXd>& rhs) const;
    Eigen::MatrixXd inverse() const;

    // v^T * matrix()^{-1} * v through the triangular factor.
    double quad_form_inv(const Eigen::Ref<const Eigen::VectorXd>& v) const;

private:
    void require_strict(const char* op) const;

    Eigen::MatrixXd matrix_;
    Eigen::MatrixXd factor_;
    bool strict_ = false;
};

}  // namespace mixl
