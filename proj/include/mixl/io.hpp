#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mixl/benchmark.hpp"
#include "mixl/data.hpp"
#include "mixl/dgp.hpp"
#include "mixl/eval.hpp"
#include "mixl/mcmc.hpp"
#include "mixl/vb.hpp"

namespace mixl::io {

// Shortest decimal form that round-trips the exact double.
std::string format_double(double value);

// Long-format CSV, one row per alternative, header
// person_id,occasion_id,alt_id,chosen,x1,...,xK with 1-based sequential ids.
void save_dataset_csv(const ChoiceDataset& data, const std::filesystem::path& path);

// Strict loader: ids must be sequential and grouped, each occasion needs
// exactly one chosen row. Errors cite the offending line.
ChoiceDataset load_dataset_csv(const std::filesystem::path& path);

// Generator output: configuration, latent truth, held-out scenarios.
struct TruthBundle {
    DgpConfig config;
    ParameterState truth;
    ValidationScenarios scenarios;
};

void save_truth(const TruthBundle& bundle, const std::filesystem::path& path);
TruthBundle load_truth(const std::filesystem::path& path);

// Fit artifacts share one envelope, discriminated by kind. The variational
// payload keeps the population and per-person factors; occasion-level factors
// are fitting state and are not persisted.
void save_mcmc_fit(const McmcDraws& draws, const nlohmann::json& config_echo,
                   const std::filesystem::path& path);
void save_vb_fit(const VbFit& fit, const nlohmann::json& config_echo,
                 const std::filesystem::path& path);

struct LoadedFit {
    std::string kind;
    McmcDraws mcmc;
    VbFit vb;
    nlohmann::json config_echo;
};

LoadedFit load_fit(const std::filesystem::path& path);

// Writes summary.csv (one line per method and condition), replications.csv
// (one line per method and replication), and results.json under out_dir.
void save_benchmark(const BenchmarkResult& result, const nlohmann::json& config_echo,
                    const std::filesystem::path& out_dir);

void save_report(const PredictiveReport& report, const std::filesystem::path& json_path,
                 const std::filesystem::path& csv_path);

// Full run configuration with defaults for every omitted key; unknown keys
// are rejected. Engine seeds derive from the top-level seed unless a section
// pins its own.
struct RunConfig {
    std::uint64_t master_seed = 0;
    DgpConfig dgp;
    Hyperparameters hyper;
    McmcConfig mcmc;
    VbConfig vb;
    EvalConfig eval;
    int scenario_count = 25;
    int replications = 10;
    struct Condition {
        int num_persons = 0;
        int occasions_per_person = 0;
    };
    std::vector<Condition> conditions;
};

RunConfig default_run_config();
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json run_config_to_json(const RunConfig& config);

// Provenance record dropped next to every command's outputs.
void write_manifest(const std::filesystem::path& out_dir, const std::string& command,
                    const std::vector<std::pair<std::string, std::string>>& inputs,
                    const std::vector<std::string>& outputs, const nlohmann::json& config_echo);

}  // namespace mixl::io
