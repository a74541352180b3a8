#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "mixl/data.hpp"
#include "mixl/rng.hpp"

namespace mixl {

// Synthetic panel generator configuration. Covariances may be semidefinite
// (zero matrices collapse the corresponding heterogeneity level).
struct DgpConfig {
    int num_persons = 1000;
    int occasions_per_person = 20;
    int num_coeffs = 4;
    int num_alternatives = 5;
    Eigen::VectorXd zeta_true;
    Eigen::MatrixXd sigma_b_true;
    Eigen::MatrixXd sigma_w_true;
    std::uint64_t seed = 0;

    // Standard synthetic study: population mean cycles the pattern
    // (-1.4, 0.8, 1.0, 1.5), base covariance has unit diagonal and 0.8
    // off-diagonal, between scale 1.5, within scale 0.5.
    static DgpConfig study_defaults(int num_persons = 1000, int occasions_per_person = 20,
                                    int num_coeffs = 4, int num_alternatives = 5,
                                    std::uint64_t seed = 0);

    void validate() const;
};

struct SimulatedData {
    ChoiceDataset data;
    ParameterState truth;
};

// Draws the taste hierarchy and utility-maximizing choices under additive
// standard Gumbel noise. Attributes are iid uniform on [0, 1). Each person
// consumes a dedicated substream, so the panel for a fixed seed does not
// depend on how many persons follow.
SimulatedData simulate_dataset(const DgpConfig& config);

// Held-out choice set: person < 0 marks a fresh person (new-person
// prediction); person >= 0 refers to a training person (new-occasion
// prediction for that person).
struct ValidationScenario {
    Eigen::MatrixXd design;
    int person = -1;
};

struct ValidationScenarios {
    std::vector<ValidationScenario> between;
    std::vector<ValidationScenario> within;
};

// Fresh designs for held-out prediction, derived from config.seed on
// substreams disjoint from the training panel. Within scenarios attach to the
// first `count` training persons; throws if the panel has fewer.
ValidationScenarios make_validation_scenarios(const DgpConfig& config, int count = 25);

// Fraction of occasions whose observed choice differs from the noise-free
// utility maximizer under the true tastes.
double realized_error_rate(const ChoiceDataset& data, const ParameterState& truth);

}  // namespace mixl
