#pragma once

#include <vector>

#include "fedawe/algorithms.hpp"

namespace fedawe {

/// Auxiliary iterate z_i^t = x_i^t - eta_l eta_g s (t - tau_i(t) - 1) grad F_i(x_i),
/// where x_i is the model frozen since the last active round.
ModelVector auxiliary_value(const Objective& obj, const ModelVector& x_i, int tau_i, int t,
                            double eta_l, double eta_g, int s);

/// (1/m) sum_i ||x_i - z_i||^2.
double approximation_error(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z);

/// Incrementally maintains the auxiliary sequence alongside a FedAWE run and
/// checks the active/inactive identities every round. Requires a constant
/// learning-rate schedule and cheap true gradients.
class AuxTracker final : public RoundObserver {
  public:
    AuxTracker(const std::vector<ObjectivePtr>& objectives, const HyperParams& hp,
               const ModelVector& x0, double tol = 1e-9);

    void on_round(int t, const std::vector<int>& active, const std::vector<int>& tau_before,
                  const ServerState& state) override;

    const Eigen::MatrixXd& z() const { return z_; }
    const std::vector<double>& approx_errors() const { return approx_errors_; }

    // Identity-check report accumulated over the run.
    bool identities_hold() const { return identities_hold_; }
    double max_active_deviation() const { return max_active_dev_; }
    double max_inactive_deviation() const { return max_inactive_dev_; }
    long checked_inactive() const { return checked_inactive_; }

  private:
    const std::vector<ObjectivePtr>& objectives_;
    HyperParams hp_;
    Eigen::MatrixXd z_;
    std::vector<double> approx_errors_;
    double tol_;
    bool identities_hold_ = true;
    double max_active_dev_ = 0.0;
    double max_inactive_dev_ = 0.0;
    long checked_inactive_ = 0;
};

struct IdentityReport {
    bool pass = true;
    double max_active_deviation = 0.0;
    double max_inactive_deviation = 0.0;
    long checked_inactive = 0;
    std::vector<double> approx_errors;
};

/// Runs FedAWE for hp.rounds and verifies the auxiliary-sequence identities
/// along the trace: z_i = x_i after every active round, and the inactive
/// displacement x_i - z_i = eta_l eta_g s (t - tau_i) grad F_i(x_i).
IdentityReport verify_inactive_identity(const std::vector<ObjectivePtr>& objectives,
                                        const DynamicsSpec& dynamics, const HyperParams& hp,
                                        const ModelVector& x0, std::uint64_t seed,
                                        double tol = 1e-9);

/// Per-round ||grad F(x_bar)||^2 plus the running time-average.
struct GradNormTrajectory {
    std::vector<double> per_round;
    std::vector<double> running_average;
};

GradNormTrajectory grad_norm_trajectory(const std::vector<RoundRecord>& records);

}  // namespace fedawe
