#include "fedawe/mixing.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace fedawe {

Eigen::MatrixXd build_W(const std::vector<int>& active, int m) {
    Eigen::MatrixXd W = Eigen::MatrixXd::Identity(m, m);
    if (active.empty()) return W;
    const double w = 1.0 / active.size();
    for (int i : active) {
        W(i, i) = w;
        for (int j : active)
            if (j != i) W(i, j) = w;
    }
    return W;
}

double consensus_error(const Eigen::MatrixXd& X) {
    const Eigen::Index m = X.cols();
    Eigen::VectorXd mean = X.rowwise().mean();
    double s = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) s += (X.col(i) - mean).squaredNorm();
    return s / m;
}

double rho_bound(double delta, int m) {
    if (!(delta > 0.0 && delta <= 1.0)) throw InvalidInput("rho_bound: delta must be in (0,1]");
    if (m < 1) throw InvalidInput("rho_bound: m must be >= 1");
    const double q = 1.0 - std::pow(1.0 - delta, m);
    return 1.0 - std::pow(delta, 4) * q * q / 8.0;
}

namespace {

double lambda2_of(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();  // ascending
    return ev[ev.size() - 2];
}

std::vector<int> sample_uniform_active(double delta, int m, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<int> a;
    for (int i = 0; i < m; ++i)
        if (u(rng) < delta) a.push_back(i);
    return a;
}

}  // namespace

RhoEstimate empirical_rho(double delta, int m, int samples, Rng& rng) {
    if (!(delta > 0.0 && delta <= 1.0)) throw InvalidInput("empirical_rho: delta must be in (0,1]");
    if (m < 1 || samples < 1) throw InvalidInput("empirical_rho: m and samples must be >= 1");

    RhoEstimate out;
    out.reliable = samples >= 1000;
    if (m == 1) return out;

    const int num_batches = 10;
    const int per_batch = std::max(1, samples / num_batches);
    Eigen::MatrixXd total = Eigen::MatrixXd::Zero(m, m);
    std::vector<double> batch_l2;
    int drawn = 0;
    for (int b = 0; b < num_batches && drawn < samples; ++b) {
        Eigen::MatrixXd batch = Eigen::MatrixXd::Zero(m, m);
        int n = 0;
        for (; n < per_batch && drawn < samples; ++n, ++drawn) {
            Eigen::MatrixXd W = build_W(sample_uniform_active(delta, m, rng), m);
            batch.noalias() += W * W;
        }
        batch /= n;
        batch_l2.push_back(lambda2_of(batch));
        total += batch * n;
    }
    total /= drawn;
    out.lambda2 = lambda2_of(total);

    if (batch_l2.size() > 1) {
        double mean = 0.0;
        for (double v : batch_l2) mean += v;
        mean /= batch_l2.size();
        double var = 0.0;
        for (double v : batch_l2) var += (v - mean) * (v - mean);
        var /= (batch_l2.size() - 1);
        out.std_error = std::sqrt(var / batch_l2.size());
    }
    return out;
}

ContractionReport contraction_check(const Eigen::MatrixXd& B, double delta, int m, int t_steps,
                                    int replications, Rng& rng) {
    if (B.cols() != m) throw InvalidInput("contraction_check: B must have m columns");
    if (t_steps < 0 || replications < 1)
        throw InvalidInput("contraction_check: t_steps >= 0 and replications >= 1 required");

    const Eigen::MatrixXd J = Eigen::MatrixXd::Constant(m, m, 1.0 / m);
    double sum = 0.0, sumsq = 0.0;
    for (int r = 0; r < replications; ++r) {
        Eigen::MatrixXd P = Eigen::MatrixXd::Identity(m, m);
        for (int t = 0; t < t_steps; ++t)
            P = P * build_W(sample_uniform_active(delta, m, rng), m);
        const double v = (B * (P - J)).squaredNorm();
        sum += v;
        sumsq += v * v;
    }
    ContractionReport rep;
    rep.estimate = sum / replications;
    if (replications > 1) {
        const double var = (sumsq - sum * sum / replications) / (replications - 1);
        rep.std_error = std::sqrt(std::max(0.0, var) / replications);
    }
    rep.bound = std::pow(rho_bound(delta, m), t_steps) * B.squaredNorm();
    rep.pass = rep.estimate <= rep.bound + 3.0 * rep.std_error + rep.bound * 1e-12;
    return rep;
}

}  // namespace fedawe
