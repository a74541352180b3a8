#include "mixl/dgp.hpp"

#include <string>

#include "mixl/errors.hpp"

namespace mixl {

namespace {

Eigen::MatrixXd uniform_design(int rows, int cols, Rng& rng) {
    Eigen::MatrixXd x(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) x(r, c) = rng.uniform();
    }
    return x;
}

Eigen::VectorXd standard_normal_vector(int dim, Rng& rng) {
    Eigen::VectorXd z(dim);
    for (int i = 0; i < dim; ++i) z[i] = rng.normal();
    return z;
}

}  // namespace

DgpConfig DgpConfig::study_defaults(int num_persons, int occasions_per_person, int num_coeffs,
                                    int num_alternatives, std::uint64_t seed) {
    DgpConfig cfg;
    cfg.num_persons = num_persons;
    cfg.occasions_per_person = occasions_per_person;
    cfg.num_coeffs = num_coeffs;
    cfg.num_alternatives = num_alternatives;
    cfg.seed = seed;

    const double pattern[4] = {-1.4, 0.8, 1.0, 1.5};
    cfg.zeta_true.resize(num_coeffs);
    for (int i = 0; i < num_coeffs; ++i) cfg.zeta_true[i] = pattern[i % 4];

    Eigen::MatrixXd base = Eigen::MatrixXd::Constant(num_coeffs, num_coeffs, 0.8);
    base.diagonal().setOnes();
    cfg.sigma_b_true = 1.5 * base;
    cfg.sigma_w_true = 0.5 * base;
    return cfg;
}

void DgpConfig::validate() const {
    if (num_persons < 1 || occasions_per_person < 1) {
        throw ValidationError("generator needs at least one person and one occasion");
    }
    if (num_coeffs < 1) {
        throw ValidationError("generator needs at least one coefficient");
    }
    if (num_alternatives < 1) {
        throw ValidationError("generator needs at least one alternative");
    }
    if (zeta_true.size() != num_coeffs) {
        throw ValidationError("true population mean has wrong dimension");
    }
    if (sigma_b_true.rows() != num_coeffs || sigma_b_true.cols() != num_coeffs ||
        sigma_w_true.rows() != num_coeffs || sigma_w_true.cols() != num_coeffs) {
        throw ValidationError("true covariance has wrong dimension");
    }
}

SimulatedData simulate_dataset(const DgpConfig& config) {
    config.validate();
    const SpdMatrix sigma_b = SpdMatrix::from_psd(config.sigma_b_true);
    const SpdMatrix sigma_w = SpdMatrix::from_psd(config.sigma_w_true);
    const Rng root(config.seed);

    SimulatedData out;
    out.data.num_coeffs = config.num_coeffs;
    out.data.persons.resize(config.num_persons);
    out.truth.zeta = config.zeta_true;
    out.truth.sigma_b = sigma_b;
    out.truth.sigma_w = sigma_w;
    out.truth.a_b = Eigen::VectorXd::Ones(config.num_coeffs);
    out.truth.a_w = Eigen::VectorXd::Ones(config.num_coeffs);
    out.truth.mu.resize(config.num_persons);
    out.truth.beta.resize(config.num_persons);

    for (int n = 0; n < config.num_persons; ++n) {
        Rng rng = root.substream(0, static_cast<std::uint64_t>(n));
        const Eigen::VectorXd mu_n =
            config.zeta_true + sigma_b.factor() * standard_normal_vector(config.num_coeffs, rng);
        out.truth.mu[n] = mu_n;
        out.truth.beta[n].reserve(config.occasions_per_person);
        auto& occasions = out.data.persons[n];
        occasions.reserve(config.occasions_per_person);
        for (int t = 0; t < config.occasions_per_person; ++t) {
            Eigen::VectorXd beta =
                mu_n + sigma_w.factor() * standard_normal_vector(config.num_coeffs, rng);
            Eigen::MatrixXd x = uniform_design(config.num_alternatives, config.num_coeffs, rng);
            Eigen::VectorXd util = x * beta;
            for (int j = 0; j < config.num_alternatives; ++j) util[j] += rng.gumbel();
            int chosen = 0;
            util.maxCoeff(&chosen);
            occasions.push_back(ChoiceOccasion{std::move(x), chosen});
            out.truth.beta[n].push_back(std::move(beta));
        }
    }
    return out;
}

ValidationScenarios make_validation_scenarios(const DgpConfig& config, int count) {
    config.validate();
    if (count < 1) {
        throw ValidationError("scenario count must be positive");
    }
    if (config.num_persons < count) {
        throw ValidationError("new-occasion scenarios need at least " + std::to_string(count) +
                              " training persons, have " + std::to_string(config.num_persons));
    }
    const Rng root(config.seed);
    ValidationScenarios out;
    out.between.reserve(count);
    out.within.reserve(count);
    for (int j = 0; j < count; ++j) {
        Rng rng = root.substream(1, static_cast<std::uint64_t>(j));
        out.between.push_back(
            {uniform_design(config.num_alternatives, config.num_coeffs, rng), -1});
    }
    for (int j = 0; j < count; ++j) {
        Rng rng = root.substream(2, static_cast<std::uint64_t>(j));
        out.within.push_back(
            {uniform_design(config.num_alternatives, config.num_coeffs, rng), j});
    }
    return out;
}

double realized_error_rate(const ChoiceDataset& data, const ParameterState& truth) {
    truth.validate_shapes(data);
    long errors = 0;
    long total = 0;
    for (int n = 0; n < data.num_persons(); ++n) {
        for (int t = 0; t < data.num_occasions(n); ++t) {
            const auto& occ = data.persons[n][t];
            const Eigen::VectorXd util = occ.design * truth.beta[n][t];
            int best = 0;
            util.maxCoeff(&best);
            errors += (best != occ.chosen) ? 1 : 0;
            ++total;
        }
    }
    return static_cast<double>(errors) / static_cast<double>(total);
}

}  // namespace mixl
