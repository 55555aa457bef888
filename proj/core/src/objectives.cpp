#include "fedawe/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fedawe {

void Objective::check_dim(const ModelVector& x) const {
    if (static_cast<int>(x.size()) != dim())
        throw InvalidInput("objective: dimension mismatch, expected " + std::to_string(dim()) +
                           ", got " + std::to_string(x.size()));
}

ModelVector Objective::stochastic_grad(const ModelVector& x, const NoiseSpec& noise,
                                       Rng& rng) const {
    ModelVector g = true_grad(x);
    if (noise.sigma > 0) {
        const double coord_sd = noise.sigma / std::sqrt(static_cast<double>(dim()));
        std::normal_distribution<double> n(0.0, coord_sd);
        for (Eigen::Index k = 0; k < g.size(); ++k) g[k] += n(rng);
    }
    return g;
}

double QuadraticObjective::value(const ModelVector& x) const {
    check_dim(x);
    return 0.5 * (x - u_).squaredNorm();
}

ModelVector QuadraticObjective::true_grad(const ModelVector& x) const {
    check_dim(x);
    return x - u_;
}

LogisticObjective::LogisticObjective(Eigen::MatrixXd features, std::vector<int> labels,
                                     int num_classes, Eigen::VectorXd class_dist)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      num_classes_(num_classes),
      feat_dim_(static_cast<int>(features_.cols())),
      nu_(std::move(class_dist)) {
    if (features_.rows() != static_cast<Eigen::Index>(labels_.size()))
        throw InvalidInput("LogisticObjective: features/labels size mismatch");
    if (labels_.empty()) throw InvalidInput("LogisticObjective: empty dataset");
    if (nu_.size() != num_classes_ || std::abs(nu_.sum() - 1.0) > 1e-9 || nu_.minCoeff() < 0)
        throw InvalidInput("LogisticObjective: class_dist must be a probability vector");
    for (int y : labels_)
        if (y < 0 || y >= num_classes_) throw InvalidInput("LogisticObjective: label out of range");
}

namespace {

// Row c of W applied to feature vector f, for W flattened row-major.
Eigen::VectorXd logits_of(const ModelVector& x, const Eigen::VectorXd& f, int C, int d) {
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> W(
        x.data(), C, d);
    return W * f;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& z) {
    Eigen::VectorXd p = (z.array() - z.maxCoeff()).exp();
    return p / p.sum();
}

}  // namespace

double LogisticObjective::value(const ModelVector& x) const {
    check_dim(x);
    double loss = 0.0;
    for (int n = 0; n < num_samples(); ++n) {
        Eigen::VectorXd z = logits_of(x, features_.row(n), num_classes_, feat_dim_);
        const double zmax = z.maxCoeff();
        const double lse = zmax + std::log((z.array() - zmax).exp().sum());
        loss += lse - z[labels_[n]];
    }
    return loss / num_samples();
}

ModelVector LogisticObjective::grad_on(const ModelVector& x, const std::vector<int>& idx) const {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> G(num_classes_,
                                                                             feat_dim_);
    G.setZero();
    for (int n : idx) {
        Eigen::VectorXd f = features_.row(n);
        Eigen::VectorXd p = softmax(logits_of(x, f, num_classes_, feat_dim_));
        p[labels_[n]] -= 1.0;
        G.noalias() += p * f.transpose();
    }
    G /= static_cast<double>(idx.size());
    return Eigen::Map<ModelVector>(G.data(), dim());
}

ModelVector LogisticObjective::true_grad(const ModelVector& x) const {
    check_dim(x);
    std::vector<int> all(num_samples());
    std::iota(all.begin(), all.end(), 0);
    return grad_on(x, all);
}

ModelVector LogisticObjective::stochastic_grad(const ModelVector& x, const NoiseSpec& noise,
                                               Rng& rng) const {
    check_dim(x);
    ModelVector g;
    if (noise.batch > 0 && noise.batch < num_samples()) {
        std::uniform_int_distribution<int> pick(0, num_samples() - 1);
        std::vector<int> idx(noise.batch);
        for (int& v : idx) v = pick(rng);
        g = grad_on(x, idx);
    } else {
        g = true_grad(x);
    }
    if (noise.sigma > 0) {
        const double coord_sd = noise.sigma / std::sqrt(static_cast<double>(dim()));
        std::normal_distribution<double> n(0.0, coord_sd);
        for (Eigen::Index k = 0; k < g.size(); ++k) g[k] += n(rng);
    }
    return g;
}

double LogisticObjective::accuracy(const ModelVector& x) const {
    check_dim(x);
    int correct = 0;
    for (int n = 0; n < num_samples(); ++n) {
        Eigen::VectorXd z = logits_of(x, features_.row(n), num_classes_, feat_dim_);
        Eigen::Index argmax;
        z.maxCoeff(&argmax);
        if (static_cast<int>(argmax) == labels_[n]) ++correct;
    }
    return static_cast<double>(correct) / num_samples();
}

double global_eval(const std::vector<ObjectivePtr>& objectives, const ModelVector& x) {
    if (objectives.empty()) throw InvalidInput("global_eval: empty objective list");
    double s = 0.0;
    for (const auto& f : objectives) s += f->value(x);
    return s / objectives.size();
}

ModelVector global_grad(const std::vector<ObjectivePtr>& objectives, const ModelVector& x) {
    if (objectives.empty()) throw InvalidInput("global_grad: empty objective list");
    ModelVector g = ModelVector::Zero(x.size());
    for (const auto& f : objectives) g += f->true_grad(x);
    return g / objectives.size();
}

Eigen::VectorXd SamplePool::class_mean(int c) const {
    if (c < 0 || c >= num_classes) throw InvalidInput("SamplePool: class out of range");
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(feat_dim);
    mu[c % feat_dim] = mean_scale;
    return mu;
}

Eigen::VectorXd SamplePool::draw(int c, Rng& rng) const {
    Eigen::VectorXd v = class_mean(c);
    std::normal_distribution<double> n(0.0, 1.0);
    for (Eigen::Index k = 0; k < v.size(); ++k) v[k] += n(rng);
    return v;
}

Eigen::VectorXd draw_dirichlet(double alpha, int k, Rng& rng) {
    if (alpha <= 0) throw InvalidInput("draw_dirichlet: alpha must be > 0");
    std::gamma_distribution<double> g(alpha, 1.0);
    Eigen::VectorXd v(k);
    double sum = 0.0;
    for (int c = 0; c < k; ++c) {
        v[c] = g(rng);
        sum += v[c];
    }
    if (sum <= 0) {
        // All gamma draws underflowed (tiny alpha); fall back to a one-hot.
        std::uniform_int_distribution<int> pick(0, k - 1);
        v.setZero();
        v[pick(rng)] = 1.0;
        return v;
    }
    return v / sum;
}

std::vector<std::shared_ptr<LogisticObjective>> generate_dirichlet_partition(
    double alpha, int m, const SamplePool& pool, int samples_per_client, Rng& rng) {
    if (alpha <= 0) throw InvalidInput("generate_dirichlet_partition: alpha must be > 0");
    if (m < 1 || samples_per_client < 1)
        throw InvalidInput("generate_dirichlet_partition: m and n_i must be >= 1");

    std::vector<std::shared_ptr<LogisticObjective>> out;
    out.reserve(m);
    for (int i = 0; i < m; ++i) {
        Eigen::VectorXd nu = draw_dirichlet(alpha, pool.num_classes, rng);
        std::discrete_distribution<int> label_dist(nu.data(), nu.data() + nu.size());
        Eigen::MatrixXd feats(samples_per_client, pool.feat_dim);
        std::vector<int> labels(samples_per_client);
        for (int n = 0; n < samples_per_client; ++n) {
            labels[n] = label_dist(rng);
            feats.row(n) = pool.draw(labels[n], rng);
        }
        out.push_back(std::make_shared<LogisticObjective>(std::move(feats), std::move(labels),
                                                          pool.num_classes, std::move(nu)));
    }
    return out;
}

}  // namespace fedawe
