#include "fedawe/algorithms.hpp"

#include <cmath>

#include "fedawe/mixing.hpp"

namespace fedawe {

const char* algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::FedAWE: return "fedawe";
        case Algorithm::FedAvgActive: return "fedavg_active";
        case Algorithm::FedAvgAll: return "fedavg_all";
        case Algorithm::FedAvgKnownP: return "fedavg_knownp";
        case Algorithm::MIFA: return "mifa";
    }
    return "?";
}

Algorithm algorithm_from_name(const std::string& name) {
    if (name == "fedawe") return Algorithm::FedAWE;
    if (name == "fedavg_active") return Algorithm::FedAvgActive;
    if (name == "fedavg_all") return Algorithm::FedAvgAll;
    if (name == "fedavg_knownp") return Algorithm::FedAvgKnownP;
    if (name == "mifa") return Algorithm::MIFA;
    throw InvalidInput("unknown algorithm: " + name);
}

void HyperParams::validate() const {
    if (eta0 <= 0) throw InvalidInput("HyperParams: eta0 must be > 0");
    if (eta_g < 1.0) throw InvalidInput("HyperParams: eta_g must be >= 1");
    if (local_steps < 1) throw InvalidInput("HyperParams: local_steps must be >= 1");
    if (rounds < 0) throw InvalidInput("HyperParams: rounds must be >= 0");
}

ServerState::ServerState(const ModelVector& x0, int m)
    : x(x0), clients(x0.size(), m), avail(m), mifa_table(Eigen::MatrixXd::Zero(x0.size(), m)) {
    for (int i = 0; i < m; ++i) clients.col(i) = x0;
}

LocalSgdResult local_sgd(const Objective& obj, const ModelVector& x_start, int steps,
                         double eta_l, const NoiseSpec& noise, Rng& rng, int round) {
    if (steps < 1) throw InvalidInput("local_sgd: steps must be >= 1");
    ModelVector x = x_start;
    for (int k = 0; k < steps; ++k) {
        x -= eta_l * obj.stochastic_grad(x, noise, rng);
        if (!x.allFinite())
            throw NumericalDivergence(round, "local_sgd: non-finite iterate");
    }
    return {x, x_start - x};
}

void fedawe_round(ServerState& state, const std::vector<int>& active,
                  const std::vector<ObjectivePtr>& objectives, const HyperParams& hp,
                  std::vector<Rng>& client_rngs) {
    const int t = state.round();
    const double eta_l = hp.eta_l(t);
    if (!active.empty()) {
        ModelVector sum = ModelVector::Zero(state.x.size());
        std::vector<ModelVector> echoed;
        echoed.reserve(active.size());
        for (int i : active) {
            const ModelVector start = state.clients.col(i);
            auto res = local_sgd(*objectives[i], start, hp.local_steps, eta_l, hp.noise,
                                 client_rngs[i], t);
            const double echo = static_cast<double>(t - state.avail.tau[i]);
            echoed.push_back(start - hp.eta_g * echo * res.innovation);
        }
        for (const auto& xd : echoed) sum += xd;  // fixed client order, bit-reproducible
        state.x = sum / static_cast<double>(active.size());
        for (int i : active) state.clients.col(i) = state.x;
    }
    advance_tau(state.avail, active);
}

namespace {

// Shared skeleton of the FedAvg-style rounds: active clients start from the
// broadcast global model; `weight(i)` scales each innovation in the sum, and
// `denom` normalizes it.
template <typename WeightFn>
void fedavg_style_round(ServerState& state, const std::vector<int>& active,
                        const std::vector<ObjectivePtr>& objectives, const HyperParams& hp,
                        std::vector<Rng>& client_rngs, WeightFn weight, double denom) {
    const int t = state.round();
    const double eta_l = hp.eta_l(t);
    if (!active.empty()) {
        ModelVector sum = ModelVector::Zero(state.x.size());
        for (int i : active) {
            auto res = local_sgd(*objectives[i], state.x, hp.local_steps, eta_l, hp.noise,
                                 client_rngs[i], t);
            sum += weight(i) * res.innovation;
        }
        state.x -= hp.eta_g * sum / denom;
        for (int i = 0; i < state.m(); ++i) state.clients.col(i) = state.x;
    }
    advance_tau(state.avail, active);
}

}  // namespace

void fedavg_active_round(ServerState& state, const std::vector<int>& active,
                         const std::vector<ObjectivePtr>& objectives, const HyperParams& hp,
                         std::vector<Rng>& client_rngs) {
    fedavg_style_round(state, active, objectives, hp, client_rngs, [](int) { return 1.0; },
                       static_cast<double>(std::max<std::size_t>(active.size(), 1)));
}

void fedavg_all_round(ServerState& state, const std::vector<int>& active,
                      const std::vector<ObjectivePtr>& objectives, const HyperParams& hp,
                      std::vector<Rng>& client_rngs) {
    fedavg_style_round(state, active, objectives, hp, client_rngs, [](int) { return 1.0; },
                       static_cast<double>(state.m()));
}

void fedavg_knownp_round(ServerState& state, const std::vector<int>& active,
                         const std::vector<double>& probs,
                         const std::vector<ObjectivePtr>& objectives, const HyperParams& hp,
                         std::vector<Rng>& client_rngs) {
    for (int i : active)
        if (probs[i] <= 0.0)
            throw InvalidInput("fedavg_knownp_round: active client with p = 0");
    fedavg_style_round(state, active, objectives, hp, client_rngs,
                       [&probs](int i) { return 1.0 / probs[i]; },
                       static_cast<double>(state.m()));
}

void mifa_round(ServerState& state, const std::vector<int>& active,
                const std::vector<ObjectivePtr>& objectives, const HyperParams& hp,
                std::vector<Rng>& client_rngs) {
    const int t = state.round();
    const double eta_l = hp.eta_l(t);
    if (!active.empty()) {
        for (int i : active) {
            auto res = local_sgd(*objectives[i], state.x, hp.local_steps, eta_l, hp.noise,
                                 client_rngs[i], t);
            state.mifa_table.col(i) = res.innovation;
        }
        ModelVector sum = ModelVector::Zero(state.x.size());
        for (int i = 0; i < state.m(); ++i) sum += state.mifa_table.col(i);
        state.x -= hp.eta_g * sum / static_cast<double>(state.m());
        for (int i = 0; i < state.m(); ++i) state.clients.col(i) = state.x;
    }
    advance_tau(state.avail, active);
}

RunResult run_training(Algorithm algorithm, const std::vector<ObjectivePtr>& objectives,
                       const DynamicsSpec& dynamics, const HyperParams& hp,
                       const ModelVector& x0, std::uint64_t seed, const RunOptions& options) {
    hp.validate();
    dynamics.validate();
    const int m = static_cast<int>(objectives.size());
    if (m == 0) throw InvalidInput("run_training: no objectives");
    if (dynamics.num_clients() != m)
        throw InvalidInput("run_training: dynamics and objectives disagree on m");
    for (const auto& f : objectives)
        if (f->dim() != x0.size()) throw InvalidInput("run_training: objective dimension mismatch");

    Rng avail_rng = make_stream(seed, StreamPurpose::Availability);
    std::vector<Rng> client_rngs;
    client_rngs.reserve(m);
    for (int i = 0; i < m; ++i) client_rngs.push_back(make_stream(seed, StreamPurpose::Gradient, i));

    RunResult out{{}, ServerState(x0, m)};
    ServerState& state = out.final_state;
    out.records.reserve(hp.rounds);

    for (int t = 0; t < hp.rounds; ++t) {
        const std::vector<int> active = sample_active(dynamics, t, avail_rng);
        const std::vector<int> tau_before = state.avail.tau;

        switch (algorithm) {
            case Algorithm::FedAWE:
                fedawe_round(state, active, objectives, hp, client_rngs);
                break;
            case Algorithm::FedAvgActive:
                fedavg_active_round(state, active, objectives, hp, client_rngs);
                break;
            case Algorithm::FedAvgAll:
                fedavg_all_round(state, active, objectives, hp, client_rngs);
                break;
            case Algorithm::FedAvgKnownP: {
                std::vector<double> p(m);
                for (int i = 0; i < m; ++i) p[i] = prob_at(dynamics, i, t);
                fedavg_knownp_round(state, active, p, objectives, hp, client_rngs);
                break;
            }
            case Algorithm::MIFA:
                mifa_round(state, active, objectives, hp, client_rngs);
                break;
        }

        if (state.clients.cwiseAbs().maxCoeff() > options.divergence_limit)
            throw NumericalDivergence(t, "run_training: iterate magnitude exceeded limit");

        if (options.observer) options.observer->on_round(t, active, tau_before, state);

        if (options.record_metrics) {
            RoundRecord rec;
            rec.round = t;
            rec.active_count = static_cast<int>(active.size());
            const ModelVector xbar = state.clients.rowwise().mean();
            rec.loss = global_eval(objectives, xbar);
            rec.grad_norm_sq = global_grad(objectives, xbar).squaredNorm();
            rec.consensus_error = consensus_error(state.clients);
            out.records.push_back(rec);
        }
    }
    return out;
}

}  // namespace fedawe
