#include "mixl/data.hpp"

#include <string>

#include "mixl/errors.hpp"

namespace mixl {

long ChoiceDataset::total_occasions() const {
    long total = 0;
    for (const auto& person : persons) total += static_cast<long>(person.size());
    return total;
}

int ChoiceDataset::max_alternatives() const {
    int max_j = 0;
    for (const auto& person : persons) {
        for (const auto& occ : person) {
            max_j = std::max(max_j, static_cast<int>(occ.design.rows()));
        }
    }
    return max_j;
}

std::vector<std::pair<int, int>> ChoiceDataset::flat_occasions() const {
    std::vector<std::pair<int, int>> flat;
    flat.reserve(static_cast<std::size_t>(total_occasions()));
    for (int n = 0; n < num_persons(); ++n) {
        for (int t = 0; t < num_occasions(n); ++t) flat.emplace_back(n, t);
    }
    return flat;
}

void ChoiceDataset::validate() const {
    if (num_coeffs < 1) {
        throw ValidationError("dataset needs at least one coefficient column");
    }
    if (persons.empty()) {
        throw ValidationError("dataset has no persons");
    }
    for (int n = 0; n < num_persons(); ++n) {
        if (persons[n].empty()) {
            throw ValidationError("person " + std::to_string(n) + " has no occasions");
        }
        for (int t = 0; t < num_occasions(n); ++t) {
            const auto& occ = persons[n][t];
            const auto where = "person " + std::to_string(n) + " occasion " + std::to_string(t);
            if (occ.design.rows() < 1) {
                throw ValidationError(where + ": occasion has no alternatives");
            }
            if (occ.design.cols() != num_coeffs) {
                throw ValidationError(where + ": design has " + std::to_string(occ.design.cols()) +
                                      " columns, expected " + std::to_string(num_coeffs));
            }
            if (occ.chosen < 0 || occ.chosen >= occ.design.rows()) {
                throw ValidationError(where + ": chosen index " + std::to_string(occ.chosen) +
                                      " out of range");
            }
            if (!occ.design.allFinite()) {
                throw ValidationError(where + ": design has non-finite entries");
            }
        }
    }
}

Hyperparameters Hyperparameters::defaults(int num_coeffs) {
    Hyperparameters h;
    h.zeta_prior_mean = Eigen::VectorXd::Zero(num_coeffs);
    h.zeta_prior_cov = SpdMatrix(10.0 * Eigen::MatrixXd::Identity(num_coeffs, num_coeffs));
    h.nu_b = 2.0;
    h.nu_w = 2.0;
    h.half_t_scale_b = Eigen::VectorXd::Constant(num_coeffs, 1.04);
    h.half_t_scale_w = Eigen::VectorXd::Constant(num_coeffs, 1.04);
    return h;
}

void Hyperparameters::validate(int num_coeffs) const {
    if (zeta_prior_mean.size() != num_coeffs) {
        throw ValidationError("zeta prior mean has wrong dimension");
    }
    if (zeta_prior_cov.dim() != num_coeffs || !zeta_prior_cov.strictly_positive()) {
        throw ValidationError("zeta prior covariance must be positive definite with matching dimension");
    }
    if (!(nu_b > 0.0) || !(nu_w > 0.0)) {
        throw ValidationError("half-t degrees of freedom must be positive");
    }
    if (half_t_scale_b.size() != num_coeffs || half_t_scale_w.size() != num_coeffs) {
        throw ValidationError("half-t scale vectors have wrong dimension");
    }
    if ((half_t_scale_b.array() <= 0.0).any() || (half_t_scale_w.array() <= 0.0).any()) {
        throw ValidationError("half-t scales must be positive");
    }
}

Eigen::VectorXd Hyperparameters::a_prior_rate_b() const {
    return half_t_scale_b.array().square().inverse();
}

Eigen::VectorXd Hyperparameters::a_prior_rate_w() const {
    return half_t_scale_w.array().square().inverse();
}

Eigen::MatrixXd Hyperparameters::iw_prior_scale(double nu, const Eigen::VectorXd& a) {
    return 2.0 * nu * a.asDiagonal();
}

ParameterState ParameterState::neutral(const ChoiceDataset& data) {
    const int k = data.num_coeffs;
    ParameterState s;
    s.zeta = Eigen::VectorXd::Zero(k);
    s.sigma_b = SpdMatrix::identity(k);
    s.sigma_w = SpdMatrix::identity(k);
    s.a_b = Eigen::VectorXd::Ones(k);
    s.a_w = Eigen::VectorXd::Ones(k);
    s.mu.assign(data.num_persons(), Eigen::VectorXd::Zero(k));
    s.beta.resize(data.num_persons());
    for (int n = 0; n < data.num_persons(); ++n) {
        s.beta[n].assign(data.persons[n].size(), Eigen::VectorXd::Zero(k));
    }
    return s;
}

void ParameterState::validate_shapes(const ChoiceDataset& data) const {
    const int k = data.num_coeffs;
    auto check = [&](bool ok, const char* what) {
        if (!ok) throw ValidationError(std::string("parameter state: ") + what);
    };
    check(zeta.size() == k, "zeta dimension mismatch");
    check(sigma_b.dim() == k && sigma_w.dim() == k, "covariance dimension mismatch");
    check(a_b.size() == k && a_w.size() == k, "scale augmenter dimension mismatch");
    check(static_cast<int>(mu.size()) == data.num_persons(), "person mean count mismatch");
    check(static_cast<int>(beta.size()) == data.num_persons(), "beta person count mismatch");
    for (int n = 0; n < data.num_persons(); ++n) {
        check(mu[n].size() == k, "person mean dimension mismatch");
        check(beta[n].size() == data.persons[n].size(),
              "beta occasion count mismatch");
        for (const auto& b : beta[n]) check(b.size() == k, "beta dimension mismatch");
    }
}

}  // namespace mixl
