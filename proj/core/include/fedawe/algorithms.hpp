#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fedawe/availability.hpp"
#include "fedawe/objectives.hpp"

namespace fedawe {

enum class Algorithm { FedAWE, FedAvgActive, FedAvgAll, FedAvgKnownP, MIFA };

const char* algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);

enum class LrSchedule { Constant, SqrtDecay };

struct HyperParams {
    double eta0 = 0.05;
    LrSchedule schedule = LrSchedule::Constant;
    double eta_g = 1.0;
    int local_steps = 1;
    int rounds = 100;
    NoiseSpec noise;

    /// eta_l(t); sqrt decay is eta0 / sqrt(t/10 + 1).
    double eta_l(int t) const {
        return schedule == LrSchedule::Constant ? eta0 : eta0 / std::sqrt(t / 10.0 + 1.0);
    }
    void validate() const;
};

struct ServerState {
    ModelVector x;              // global model
    Eigen::MatrixXd clients;    // d x m, column i = x_i
    AvailabilityState avail;
    Eigen::MatrixXd mifa_table; // d x m stored innovations, zero-initialized

    ServerState(const ModelVector& x0, int m);
    int round() const { return avail.round; }
    int m() const { return static_cast<int>(clients.cols()); }
};

struct LocalSgdResult {
    ModelVector x_end;
    ModelVector innovation;  // x_start - x_end
};

LocalSgdResult local_sgd(const Objective& obj, const ModelVector& x_start, int steps,
                         double eta_l, const NoiseSpec& noise, Rng& rng, int round = -1);

/// One-round transitions. Each advances tau and the round counter.
void fedawe_round(ServerState& state, const std::vector<int>& active,
                  const std::vector<ObjectivePtr>& objectives, const HyperParams& hp,
                  std::vector<Rng>& client_rngs);
void fedavg_active_round(ServerState& state, const std::vector<int>& active,
                         const std::vector<ObjectivePtr>& objectives, const HyperParams& hp,
                         std::vector<Rng>& client_rngs);
void fedavg_all_round(ServerState& state, const std::vector<int>& active,
                      const std::vector<ObjectivePtr>& objectives, const HyperParams& hp,
                      std::vector<Rng>& client_rngs);
void fedavg_knownp_round(ServerState& state, const std::vector<int>& active,
                         const std::vector<double>& probs,
                         const std::vector<ObjectivePtr>& objectives, const HyperParams& hp,
                         std::vector<Rng>& client_rngs);
void mifa_round(ServerState& state, const std::vector<int>& active,
                const std::vector<ObjectivePtr>& objectives, const HyperParams& hp,
                std::vector<Rng>& client_rngs);

struct RoundRecord {
    int round = 0;
    int active_count = 0;
    double loss = 0.0;
    double grad_norm_sq = 0.0;    // ||grad F(x_bar)||^2 at the round-end mean model
    double consensus_error = 0.0;
    double approx_error = 0.0;    // 0 when auxiliary tracking is off
};

/// Observer invoked after every round. `tau_before` is tau at the start of
/// the round, `state` the post-round server state.
class RoundObserver {
  public:
    virtual ~RoundObserver() = default;
    virtual void on_round(int t, const std::vector<int>& active,
                          const std::vector<int>& tau_before, const ServerState& state) = 0;
};

struct RunOptions {
    bool record_metrics = true;
    RoundObserver* observer = nullptr;
    double divergence_limit = 1e8;  // abort when ||x||_inf exceeds this
};

struct RunResult {
    std::vector<RoundRecord> records;
    ServerState final_state;
};

/// Executes T rounds of the tagged algorithm. Deterministic given seed: the
/// availability stream and one gradient stream per client are derived from it.
RunResult run_training(Algorithm algorithm, const std::vector<ObjectivePtr>& objectives,
                       const DynamicsSpec& dynamics, const HyperParams& hp,
                       const ModelVector& x0, std::uint64_t seed,
                       const RunOptions& options = {});

}  // namespace fedawe
