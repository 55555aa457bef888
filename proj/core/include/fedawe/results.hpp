#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fedawe/algorithms.hpp"
#include "fedawe/config.hpp"

namespace fedawe {

struct ResultRow {
    std::string algorithm;
    std::uint64_t seed = 0;
    int round = 0;
    double loss = 0.0;
    double grad_norm_sq = 0.0;
    double consensus_error = 0.0;
    double approx_error = 0.0;
    int active_count = 0;
    double wallclock = 0.0;  // seconds; 0 unless timing is enabled
};

std::string csv_header();
std::string csv_line(const ResultRow& row);
void write_csv(const std::string& path, const std::vector<ResultRow>& rows);

/// Config echo + version + seeds, written next to the CSV.
nlohmann::json make_manifest(const ExperimentConfig& config, double total_wall_seconds);
void write_manifest(const std::string& path, const nlohmann::json& manifest);

/// Mean and unbiased (n-1) standard deviation.
struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};
MeanStd mean_std(const std::vector<double>& values);

/// Executes one (algorithm, seed) run of a config and flattens the records.
std::vector<ResultRow> run_config_single(const ExperimentConfig& config,
                                         const std::string& algorithm, std::uint64_t seed,
                                         bool timing = false);

/// Runs every (algorithm, seed) pair, optionally on a worker pool. Output
/// order is deterministic: by algorithm, then seed, then round.
std::vector<ResultRow> run_config(const ExperimentConfig& config, int workers = 1,
                                  bool timing = false);

}  // namespace fedawe
