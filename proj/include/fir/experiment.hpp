#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fir/strategies.hpp"
#include "fir/synthetic.hpp"

namespace fir {

enum class IpPool { original, remaining };

struct ExperimentConfig {
    std::uint64_t seed = 0;

    // data source: synthetic by default, or a labeled CSV whose hidden
    // labels play the oracle
    SyntheticSpec synthetic;
    std::optional<std::string> csv_pool;      // labeled CSV path
    std::optional<std::string> csv_heldout;   // labeled CSV path
    std::optional<int> csv_classes;

    int initial_labeled = 10;   // n0
    int iterations = 10;        // i_max
    StrategyConfig strategy;
    IpPool ip_pool = IpPool::original;  // pool for the I_p estimate
    bool warm_start = true;             // refit from the previous theta

    void validate() const;
};

struct IterationRecord {
    int iteration = 0;               // 0 is the initial fit
    std::vector<int> query_ids;      // original pool indices (pool-based)
    MatrixXd query_samples;          // synthesized covariates (fukumizu)
    VectorXd theta;
    int labeled_count = 0;
    double fir_value = 0.0;          // tr[Iq(theta; X_L)^{-1} Ip(theta; pool)]
    double heldout_accuracy = 0.0;
    double seconds = 0.0;            // wall time; kept out of result files
};

struct ExperimentRecord {
    ExperimentConfig config;
    ModelParams theta0;              // synthetic runs only (else empty theta)
    std::vector<IterationRecord> iterations;
};

// Algorithm: initial fit on n0 oracle-labeled pool points, then
// i_max rounds of select -> oracle-label -> append -> refit. Labeled
// points leave the candidate pool; with-replacement duplicates within
// a chaudhuri batch re-query the oracle. Fully reproducible from
// (config, seed).
ExperimentRecord run_active_learning(const ExperimentConfig& config);

double heldout_accuracy(const ModelParams& params, const LabeledSet& heldout);

// JSON config (schema "v1") and result writers. record_json and
// curve_csv are byte-deterministic for a fixed (config, seed); wall
// times go into the separate timing file.
ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& config);
std::string record_to_json(const ExperimentRecord& record);
std::string curve_to_csv(const ExperimentRecord& record);
std::string timing_to_csv(const ExperimentRecord& record);
void write_result_files(const ExperimentRecord& record, const std::string& out_dir);

}  // namespace fir
