#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fedawe/algorithms.hpp"

namespace fedawe {

/// Objective section of a run config. Either a list of quadratic minimizers
/// or a synthetic Dirichlet-partitioned logistic task.
struct ObjectiveSpec {
    std::string kind = "quadratic";  // "quadratic" | "logistic"

    // quadratic
    std::vector<std::vector<double>> minimizers;

    // logistic
    double alpha = 0.1;
    int classes = 10;
    int feat_dim = 20;
    int samples_per_client = 200;
    double mean_scale = 3.0;
};

/// Dynamics section. base_p comes either from an explicit list, a uniform
/// value, or the class-contribution construction p_i = <nu_i, phi> (logistic
/// tasks only).
struct DynamicsConfig {
    std::string family = "stationary";
    std::string base_kind = "uniform";  // "uniform" | "list" | "class_contribution"
    double uniform_p = 0.5;
    std::vector<double> base_list;
    std::vector<double> phi_caps;  // caps for the class-contribution draw
    double p_min = 0.02;
    double gamma = 0.3;
    int period = 20;
    double cutoff = 0.1;
    double staircase_low = 0.4;
};

struct ExperimentConfig {
    std::string name = "run";
    std::vector<std::string> algorithms = {"fedawe"};
    int m = 10;
    ObjectiveSpec objective;
    DynamicsConfig dynamics;

    double eta0 = 0.05;
    std::string schedule = "sqrt_decay";  // "constant" | "sqrt_decay"
    double eta_g = 1.0;
    int local_steps = 1;
    int rounds = 200;
    double sigma = 0.0;
    int batch = 0;

    std::vector<std::uint64_t> seeds = {1};
    std::string out_dir = "results";

    void validate() const;
    HyperParams hyper_params() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);
ExperimentConfig load_config(const std::string& path);

/// Materialized problem instance for one config: objectives plus the
/// fully-resolved dynamics (base probabilities included).
struct ProblemInstance {
    std::vector<ObjectivePtr> objectives;
    DynamicsSpec dynamics;
    ModelVector x0;
};

ProblemInstance build_problem(const ExperimentConfig& c, std::uint64_t seed);

}  // namespace fedawe
