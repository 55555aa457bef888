#pragma once

#include <vector>

#include "fedawe/common.hpp"

namespace fedawe {

enum class DynamicsFamily { Stationary, Staircase, Sine, InterleavedSine };

const char* family_name(DynamicsFamily f);
DynamicsFamily family_from_name(const std::string& name);

/// Per-round availability p_i^t = base_p[i] * f_i(t) for the four trajectory
/// families. interleaved_sine may reach exactly 0; the other families keep a
/// strictly positive floor.
struct DynamicsSpec {
    DynamicsFamily family = DynamicsFamily::Stationary;
    std::vector<double> base_p;
    double gamma = 0.3;
    int period = 20;
    double cutoff = 0.1;         // interleaved_sine lower cut
    double staircase_low = 0.4;  // multiplier on the second half-period

    int num_clients() const { return static_cast<int>(base_p.size()); }
    void validate() const;

    /// Smallest p_i^t over one full period (the delta of the moment bounds).
    double min_prob() const;
};

/// Uniform draws [phi]_c ~ Uniform(0, Phi_c) weighting each class's
/// contribution to a client's base availability.
struct ClassContribution {
    Eigen::VectorXd phi;
    Eigen::VectorXd caps;

    static ClassContribution draw(const Eigen::VectorXd& caps, Rng& rng);
};

/// p_i = <nu_i, phi>, clamped to [p_min, 1].
std::vector<double> base_probs(const std::vector<Eigen::VectorXd>& nus,
                               const ClassContribution& phi, double p_min = 0.02);

double prob_at(const DynamicsSpec& spec, int client, int t);

std::vector<int> sample_active(const DynamicsSpec& spec, int t, Rng& rng);

/// tau[i] = last round in which client i was active, -1 if never.
struct AvailabilityState {
    std::vector<int> tau;
    int round = 0;

    explicit AvailabilityState(int m) : tau(m, -1) {}
};

void advance_tau(AvailabilityState& state, const std::vector<int>& active);

struct GapMoments {
    std::vector<double> mean_gap;
    std::vector<double> mean_sq_gap;
    double delta;          // min_t p_i^t used for the bounds
    double mean_bound;     // 1/delta
    double sq_bound;       // 2/delta^2
};

/// Monte-Carlo first and second moments of t - tau_i(t), averaged over rounds
/// and replications. Not defined for interleaved_sine (delta = 0 there).
GapMoments unavailability_moments(const DynamicsSpec& spec, int horizon, int replications,
                                  Rng& rng);

}  // namespace fedawe
