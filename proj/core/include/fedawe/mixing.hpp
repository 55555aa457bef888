#pragma once

#include <vector>

#include "fedawe/common.hpp"

namespace fedawe {

/// Doubly stochastic mixing matrix induced by an active set: W_ij = 1/|A| for
/// i,j in A, W_ii = 1 for i outside A, 0 otherwise. Empty set gives identity.
Eigen::MatrixXd build_W(const std::vector<int>& active, int m);

/// (1/m) sum_i ||x_i - x_bar||^2 over the columns of X.
double consensus_error(const Eigen::MatrixXd& X);

/// Spectral bound rho <= 1 - delta^4 (1-(1-delta)^m)^2 / 8.
double rho_bound(double delta, int m);

struct RhoEstimate {
    double lambda2 = 0.0;
    double std_error = 0.0;
    bool reliable = true;  // false when the sample count is too small
};

/// Monte-Carlo second-largest eigenvalue of E[W^2] under uniform stationary
/// availability with probability delta. m = 1 returns 0 by convention.
RhoEstimate empirical_rho(double delta, int m, int samples, Rng& rng);

struct ContractionReport {
    double estimate = 0.0;   // Monte-Carlo E||B(prod W - J)||_F^2
    double std_error = 0.0;
    double bound = 0.0;      // rho_bound(delta,m)^t * ||B||_F^2
    bool pass = false;
};

/// Checks E||B(prod_{r=1..t} W_r - J)||_F^2 <= rho^t ||B||_F^2 by sampling
/// W-chains under uniform stationary availability.
ContractionReport contraction_check(const Eigen::MatrixXd& B, double delta, int m, int t_steps,
                                    int replications, Rng& rng);

}  // namespace fedawe
