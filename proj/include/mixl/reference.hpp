#pragma once

#include <vector>

#include "mixl/data.hpp"
#include "mixl/eval.hpp"
#include "mixl/rng.hpp"
#include "mixl/vb.hpp"

namespace mixl::reference {

// Plain serial implementations of the parallel kernels. They consume the same
// substreams and apply the same arithmetic, so results must match the engine
// bit for bit at any thread count; the unit suite and the kernel benchmark
// hold the engine to that.

long mh_beta_sweep(ParameterState& state, const ChoiceDataset& data, double proposal_step,
                   std::vector<Rng>& occasion_streams);

SweepStats vb_sweep(VariationalPosterior& vp, const ChoiceDataset& data,
                    const Hyperparameters& hyper, const VbConfig& config);

PredictiveReport evaluate(const ValidationScenarios& scenarios, const ParameterState& truth,
                          const PosteriorDrawSource& src, const EvalConfig& config);

}  // namespace mixl::reference
