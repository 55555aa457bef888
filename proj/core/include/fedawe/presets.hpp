#pragma once

#include <string>
#include <vector>

#include "fedawe/results.hpp"

namespace fedawe {

/// Closed-form expected FedAvg-over-active fixed point on the two-quadratic
/// problem with stationary availability (p1, p2), noiseless gradients:
/// averaging the per-availability-pattern targets weighted by pattern
/// probability, conditioned on a non-empty active set.
double fedavg_two_client_fixed_point(double p1, double p2, double u1, double u2);

struct BiasSurfacePoint {
    double p1 = 0.0;
    double p2 = 0.0;
    double x_output_fedavg = 0.0;
    double x_output_fedawe = 0.0;
    double closed_form_prediction = 0.0;
};

struct BiasPresetOptions {
    std::vector<double> grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    int replications = 10;
    int rounds = 20000;
    double eta0 = 0.005;  // constant schedule; the steady-state offset scales with eta0
    double u1 = 0.0;
    double u2 = 100.0;
    std::uint64_t master_seed = 1;
    int workers = 1;
};

/// Participation-bias surface: FedAvg-active vs FedAWE on two quadratics,
/// x_output estimated as the mean of the last 20% of iterates over
/// replications.
std::vector<BiasSurfacePoint> preset_bias_surface(const BiasPresetOptions& opts);

struct NonstationaryCell {
    double gamma = 0.0;
    double p = 0.0;
    std::string algorithm;
    double final_loss = 0.0;   // averaged over the last 50 rounds and seeds
    double final_loss_std = 0.0;
    double final_accuracy = 0.0;
};

struct NonstationaryPresetOptions {
    std::vector<double> gammas = {0.1, 0.3, 0.5};
    std::vector<double> ps = {0.1, 0.3};
    int m = 20;
    int rounds = 300;
    int local_steps = 2;
    int batch = 20;
    double eta0 = 0.3;
    double alpha = 0.1;
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    int workers = 1;
};

/// Non-stationarity degradation study: sine availability p_i^t = p * f(t) on
/// the synthetic logistic task, FedAvg-active vs FedAWE per (gamma, p).
std::vector<NonstationaryCell> preset_nonstationary(
    const NonstationaryPresetOptions& opts);

struct SpeedupPoint {
    int m = 0;
    double avg_grad_norm_sq = 0.0;  // time-averaged, averaged over seeds
};

struct SpeedupPresetOptions {
    std::vector<int> ms = {8, 16, 32};
    int rounds = 500;
    double delta = 0.5;  // uniform stationary participation probability
    double sigma = 1.0;
    int batch = 10;
    int local_steps = 2;
    double eta0 = 0.1;
    double alpha = 100.0;  // mild heterogeneity isolates the variance effect
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    int workers = 1;
};

std::vector<SpeedupPoint> preset_speedup(const SpeedupPresetOptions& opts);

/// CSV renderers for the preset outputs.
void write_bias_csv(const std::string& path, const std::vector<BiasSurfacePoint>& rows);
void write_nonstationary_csv(const std::string& path, const std::vector<NonstationaryCell>& rows);
void write_speedup_csv(const std::string& path, const std::vector<SpeedupPoint>& rows);

}  // namespace fedawe
