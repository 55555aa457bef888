#pragma once

#include <memory>
#include <vector>

#include "fedawe/common.hpp"

namespace fedawe {

/// Stochastic-gradient noise scale. Total injected variance is sigma^2
/// (sigma^2/d per coordinate).
struct NoiseSpec {
    double sigma = 0.0;
    int batch = 0;  // minibatch size for dataset objectives; 0 = full batch

    NoiseSpec() = default;
    explicit NoiseSpec(double s, int b = 0) : sigma(s), batch(b) {
        if (sigma < 0) throw InvalidInput("NoiseSpec: sigma must be >= 0");
        if (batch < 0) throw InvalidInput("NoiseSpec: batch must be >= 0");
    }
};

class Objective {
  public:
    virtual ~Objective() = default;
    virtual int dim() const = 0;
    virtual double value(const ModelVector& x) const = 0;
    virtual ModelVector true_grad(const ModelVector& x) const = 0;
    virtual ModelVector stochastic_grad(const ModelVector& x, const NoiseSpec& noise,
                                        Rng& rng) const;

  protected:
    void check_dim(const ModelVector& x) const;
};

/// F_i(x) = ||x - u_i||^2 / 2 with minimizer u_i.
class QuadraticObjective final : public Objective {
  public:
    explicit QuadraticObjective(ModelVector minimizer) : u_(std::move(minimizer)) {}

    int dim() const override { return static_cast<int>(u_.size()); }
    double value(const ModelVector& x) const override;
    ModelVector true_grad(const ModelVector& x) const override;
    const ModelVector& minimizer() const { return u_; }

  private:
    ModelVector u_;
};

/// Multinomial logistic regression over a fixed local dataset. The parameter
/// vector is the row-major flattening of a C x d_feat weight matrix.
class LogisticObjective final : public Objective {
  public:
    LogisticObjective(Eigen::MatrixXd features, std::vector<int> labels, int num_classes,
                      Eigen::VectorXd class_dist);

    int dim() const override { return num_classes_ * feat_dim_; }
    int num_classes() const { return num_classes_; }
    int feat_dim() const { return feat_dim_; }
    int num_samples() const { return static_cast<int>(labels_.size()); }
    const Eigen::VectorXd& class_dist() const { return nu_; }

    double value(const ModelVector& x) const override;
    ModelVector true_grad(const ModelVector& x) const override;
    ModelVector stochastic_grad(const ModelVector& x, const NoiseSpec& noise,
                                Rng& rng) const override;

    /// Fraction of local samples classified correctly by x.
    double accuracy(const ModelVector& x) const;

  private:
    ModelVector grad_on(const ModelVector& x, const std::vector<int>& idx) const;

    Eigen::MatrixXd features_;  // n x d_feat
    std::vector<int> labels_;
    int num_classes_;
    int feat_dim_;
    Eigen::VectorXd nu_;
};

using ObjectivePtr = std::shared_ptr<Objective>;

/// F(x) = (1/m) sum_i F_i(x).
double global_eval(const std::vector<ObjectivePtr>& objectives, const ModelVector& x);

/// (1/m) sum_i grad F_i(x).
ModelVector global_grad(const std::vector<ObjectivePtr>& objectives, const ModelVector& x);

/// Class-conditional Gaussian generator: unit covariance, one mean per class,
/// means placed on a scaled simplex (scale * e_c embedded in dim coordinates).
struct SamplePool {
    int num_classes = 10;
    int feat_dim = 20;
    double mean_scale = 3.0;

    Eigen::VectorXd class_mean(int c) const;
    Eigen::VectorXd draw(int c, Rng& rng) const;
};

Eigen::VectorXd draw_dirichlet(double alpha, int k, Rng& rng);

/// Per-client heterogeneous datasets: nu_i ~ Dirichlet(alpha 1_C), labels from
/// nu_i, features from the class-conditional generator.
std::vector<std::shared_ptr<LogisticObjective>> generate_dirichlet_partition(
    double alpha, int m, const SamplePool& pool, int samples_per_client, Rng& rng);

}  // namespace fedawe
