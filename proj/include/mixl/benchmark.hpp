#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "mixl/data.hpp"
#include "mixl/dgp.hpp"
#include "mixl/eval.hpp"
#include "mixl/mcmc.hpp"
#include "mixl/vb.hpp"

namespace mixl {

struct BenchmarkCondition {
    int num_persons = 0;
    int occasions_per_person = 0;
};

// One synthetic-data study: for each panel size, simulate `replications`
// datasets, fit both engines on each, and score their predictives against the
// truth on shared held-out scenarios. Both engines are evaluated with the same
// evaluation seed per replication, so their distances are paired.
struct BenchmarkConfig {
    DgpConfig dgp_template;  // sizes come from the condition, the rest from here
    Hyperparameters hyper;
    McmcConfig mcmc;
    VbConfig vb;
    EvalConfig eval;
    int scenario_count = 25;
    int replications = 10;
    std::vector<BenchmarkCondition> conditions;
    std::uint64_t master_seed = 0;

    void validate() const;
};

struct BenchmarkRow {
    std::string method;  // "mcmc" or "vb"
    int num_persons = 0;
    int occasions_per_person = 0;
    int replication = 0;
    double tvd_between = 0.0;
    double tvd_within = 0.0;
    double fit_wall_seconds = 0.0;
    double eval_wall_seconds = 0.0;
    int vb_iterations = 0;       // 0 for mcmc rows
    bool vb_converged = false;   // false for mcmc rows
    double mcmc_max_rhat = 0.0;  // 0 for vb rows
};

struct BenchmarkSummary {
    std::string method;
    int num_persons = 0;
    int occasions_per_person = 0;
    int replications_used = 0;
    double mean_tvd_between = 0.0;
    double se_tvd_between = 0.0;
    double mean_tvd_within = 0.0;
    double se_tvd_within = 0.0;
    double mean_fit_wall_seconds = 0.0;
    double se_fit_wall_seconds = 0.0;
};

struct BenchmarkResult {
    std::vector<BenchmarkRow> rows;
    std::vector<BenchmarkSummary> summaries;
    std::vector<std::string> warnings;  // one entry per excluded replication
};

// Runs the full study. A replication that fails numerically is dropped for
// both methods (pairing preserved) and noted in `warnings`. Progress lines go
// to `progress` when given.
BenchmarkResult run_benchmark(const BenchmarkConfig& config, std::ostream* progress = nullptr);

}  // namespace mixl
