#include "fedawe/availability.hpp"

#include <algorithm>
#include <cmath>

namespace fedawe {

const char* family_name(DynamicsFamily f) {
    switch (f) {
        case DynamicsFamily::Stationary: return "stationary";
        case DynamicsFamily::Staircase: return "staircase";
        case DynamicsFamily::Sine: return "sine";
        case DynamicsFamily::InterleavedSine: return "interleaved_sine";
    }
    return "?";
}

DynamicsFamily family_from_name(const std::string& name) {
    if (name == "stationary") return DynamicsFamily::Stationary;
    if (name == "staircase") return DynamicsFamily::Staircase;
    if (name == "sine") return DynamicsFamily::Sine;
    if (name == "interleaved_sine") return DynamicsFamily::InterleavedSine;
    throw InvalidInput("unknown dynamics family: " + name);
}

void DynamicsSpec::validate() const {
    if (base_p.empty()) throw InvalidInput("DynamicsSpec: base_p is empty");
    for (double p : base_p)
        if (!(p > 0.0 && p <= 1.0)) throw InvalidInput("DynamicsSpec: base_p entries must be in (0,1]");
    if (gamma < 0.0 || gamma >= 1.0) throw InvalidInput("DynamicsSpec: gamma must be in [0,1)");
    if (period < 1) throw InvalidInput("DynamicsSpec: period must be positive");
    if (cutoff < 0.0 || cutoff >= 1.0) throw InvalidInput("DynamicsSpec: cutoff must be in [0,1)");
    if (!(staircase_low > 0.0 && staircase_low <= 1.0))
        throw InvalidInput("DynamicsSpec: staircase_low must be in (0,1]");
}

double DynamicsSpec::min_prob() const {
    double lo = 1.0;
    for (int i = 0; i < num_clients(); ++i)
        for (int t = 0; t < period; ++t) lo = std::min(lo, prob_at(*this, i, t));
    return lo;
}

ClassContribution ClassContribution::draw(const Eigen::VectorXd& caps, Rng& rng) {
    ClassContribution cc;
    cc.caps = caps;
    cc.phi.resize(caps.size());
    for (Eigen::Index c = 0; c < caps.size(); ++c) {
        if (caps[c] < 0) throw InvalidInput("ClassContribution: caps must be >= 0");
        std::uniform_real_distribution<double> u(0.0, caps[c]);
        cc.phi[c] = u(rng);
    }
    return cc;
}

std::vector<double> base_probs(const std::vector<Eigen::VectorXd>& nus,
                               const ClassContribution& phi, double p_min) {
    std::vector<double> p;
    p.reserve(nus.size());
    for (const auto& nu : nus) {
        if (nu.size() != phi.phi.size()) throw InvalidInput("base_probs: dimension mismatch");
        p.push_back(std::clamp(nu.dot(phi.phi), p_min, 1.0));
    }
    return p;
}

double prob_at(const DynamicsSpec& spec, int client, int t) {
    if (client < 0 || client >= spec.num_clients()) throw InvalidInput("prob_at: client out of range");
    if (t < 0) throw InvalidInput("prob_at: round must be >= 0");
    const double p = spec.base_p[client];
    double f = 1.0;
    switch (spec.family) {
        case DynamicsFamily::Stationary:
            f = 1.0;
            break;
        case DynamicsFamily::Staircase:
            f = (t % spec.period) < spec.period / 2 ? 1.0 : spec.staircase_low;
            break;
        case DynamicsFamily::Sine:
            f = spec.gamma * std::sin(2.0 * M_PI * t / spec.period) + (1.0 - spec.gamma);
            break;
        case DynamicsFamily::InterleavedSine: {
            const double g = spec.gamma * std::sin(2.0 * M_PI * t / spec.period) + (1.0 - spec.gamma);
            f = (p * g >= spec.cutoff) ? g : 0.0;
            break;
        }
    }
    return std::clamp(p * f, 0.0, 1.0);
}

std::vector<int> sample_active(const DynamicsSpec& spec, int t, Rng& rng) {
    std::vector<int> active;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < spec.num_clients(); ++i)
        if (u(rng) < prob_at(spec, i, t)) active.push_back(i);
    return active;
}

void advance_tau(AvailabilityState& state, const std::vector<int>& active) {
    for (int i : active) state.tau[i] = state.round;
    ++state.round;
}

GapMoments unavailability_moments(const DynamicsSpec& spec, int horizon, int replications,
                                  Rng& rng) {
    spec.validate();
    if (spec.family == DynamicsFamily::InterleavedSine)
        throw UnsupportedDynamics("unavailability_moments: interleaved_sine violates the delta > 0 assumption");
    if (horizon < 1 || replications < 1)
        throw InvalidInput("unavailability_moments: horizon and replications must be >= 1");

    const int m = spec.num_clients();
    GapMoments out;
    out.mean_gap.assign(m, 0.0);
    out.mean_sq_gap.assign(m, 0.0);
    out.delta = spec.min_prob();
    if (out.delta <= 0.0)
        throw UnsupportedDynamics("unavailability_moments: min_t p_i^t is 0, bounds undefined");
    out.mean_bound = 1.0 / out.delta;
    out.sq_bound = 2.0 / (out.delta * out.delta);

    for (int r = 0; r < replications; ++r) {
        AvailabilityState st(m);
        for (int t = 0; t < horizon; ++t) {
            for (int i = 0; i < m; ++i) {
                const double gap = t - st.tau[i];
                out.mean_gap[i] += gap;
                out.mean_sq_gap[i] += gap * gap;
            }
            advance_tau(st, sample_active(spec, t, rng));
        }
    }
    const double norm = static_cast<double>(horizon) * replications;
    for (int i = 0; i < m; ++i) {
        out.mean_gap[i] /= norm;
        out.mean_sq_gap[i] /= norm;
    }
    return out;
}

}  // namespace fedawe
