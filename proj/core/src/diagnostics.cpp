#include "fedawe/diagnostics.hpp"

#include <cmath>

namespace fedawe {

ModelVector auxiliary_value(const Objective& obj, const ModelVector& x_i, int tau_i, int t,
                            double eta_l, double eta_g, int s) {
    const double stretch = static_cast<double>(t - tau_i - 1);
    if (stretch == 0.0) return x_i;
    return x_i - eta_l * eta_g * s * stretch * obj.true_grad(x_i);
}

double approximation_error(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z) {
    if (X.rows() != Z.rows() || X.cols() != Z.cols())
        throw InvalidInput("approximation_error: shape mismatch");
    return (X - Z).squaredNorm() / X.cols();
}

AuxTracker::AuxTracker(const std::vector<ObjectivePtr>& objectives, const HyperParams& hp,
                       const ModelVector& x0, double tol)
    : objectives_(objectives), hp_(hp), z_(x0.size(), objectives.size()), tol_(tol) {
    if (hp.schedule != LrSchedule::Constant)
        throw InvalidInput("AuxTracker: auxiliary sequence needs a constant eta_l schedule");
    for (Eigen::Index i = 0; i < z_.cols(); ++i) z_.col(i) = x0;  // z_i^0 = x_i^0
}

void AuxTracker::on_round(int t, const std::vector<int>& active,
                          const std::vector<int>& tau_before, const ServerState& state) {
    const double step = hp_.eta0 * hp_.eta_g * hp_.local_steps;
    std::vector<bool> is_active(state.m(), false);
    for (int i : active) is_active[i] = true;

    for (int i = 0; i < state.m(); ++i) {
        if (is_active[i]) {
            // z_i^{t+1} = x_i^{t+1} after an active round.
            z_.col(i) = state.clients.col(i);
            const ModelVector scratch = auxiliary_value(*objectives_[i], state.clients.col(i),
                                                        state.avail.tau[i], t + 1, hp_.eta0,
                                                        hp_.eta_g, hp_.local_steps);
            const double adev = (z_.col(i) - scratch).cwiseAbs().maxCoeff();
            max_active_dev_ = std::max(max_active_dev_, adev);
            if (adev > tol_) identities_hold_ = false;
        } else {
            // z_i^{t+1} = z_i^t - eta_l eta_g s grad F_i(x_i^{tau_i+1}); the
            // client's model is frozen at x_i^{tau_i+1} while inactive.
            z_.col(i) -= step * objectives_[i]->true_grad(state.clients.col(i));
            const ModelVector expected =
                static_cast<ModelVector>(state.clients.col(i)) -
                step * static_cast<double>(t - state.avail.tau[i]) *
                    objectives_[i]->true_grad(state.clients.col(i));
            const double dev = (z_.col(i) - expected).cwiseAbs().maxCoeff();
            max_inactive_dev_ = std::max(max_inactive_dev_, dev);
            ++checked_inactive_;
            if (dev > tol_) identities_hold_ = false;
        }
    }
    approx_errors_.push_back(approximation_error(state.clients, z_));
}

IdentityReport verify_inactive_identity(const std::vector<ObjectivePtr>& objectives,
                                        const DynamicsSpec& dynamics, const HyperParams& hp,
                                        const ModelVector& x0, std::uint64_t seed, double tol) {
    AuxTracker tracker(objectives, hp, x0, tol);
    RunOptions opts;
    opts.record_metrics = false;
    opts.observer = &tracker;
    run_training(Algorithm::FedAWE, objectives, dynamics, hp, x0, seed, opts);

    IdentityReport rep;
    rep.pass = tracker.identities_hold();
    rep.max_active_deviation = tracker.max_active_deviation();
    rep.max_inactive_deviation = tracker.max_inactive_deviation();
    rep.checked_inactive = tracker.checked_inactive();
    rep.approx_errors = tracker.approx_errors();
    return rep;
}

GradNormTrajectory grad_norm_trajectory(const std::vector<RoundRecord>& records) {
    GradNormTrajectory out;
    out.per_round.reserve(records.size());
    out.running_average.reserve(records.size());
    double sum = 0.0;
    for (std::size_t t = 0; t < records.size(); ++t) {
        out.per_round.push_back(records[t].grad_norm_sq);
        sum += records[t].grad_norm_sq;
        out.running_average.push_back(sum / (t + 1));
    }
    return out;
}

}  // namespace fedawe
