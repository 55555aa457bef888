#include "fedawe/config.hpp"

#include <fstream>

namespace fedawe {

using nlohmann::json;

void ExperimentConfig::validate() const {
    if (seeds.empty()) throw InvalidInput("config: seeds must be non-empty");
    if (m < 1) throw InvalidInput("config: m must be >= 1");
    if (algorithms.empty()) throw InvalidInput("config: algorithms must be non-empty");
    for (const auto& a : algorithms) algorithm_from_name(a);
    family_from_name(dynamics.family);
    if (objective.kind != "quadratic" && objective.kind != "logistic")
        throw InvalidInput("config: objective.kind must be quadratic or logistic");
    if (objective.kind == "quadratic" && !objective.minimizers.empty() &&
        static_cast<int>(objective.minimizers.size()) != m)
        throw InvalidInput("config: objective.minimizers must list one vector per client");
    if (objective.kind == "logistic" && objective.alpha <= 0)
        throw InvalidInput("config: objective.alpha must be > 0");
    if (schedule != "constant" && schedule != "sqrt_decay")
        throw InvalidInput("config: schedule must be constant or sqrt_decay");
    if (dynamics.base_kind == "list" && static_cast<int>(dynamics.base_list.size()) != m)
        throw InvalidInput("config: dynamics.base_list must have m entries");
    if (dynamics.base_kind == "class_contribution" && objective.kind != "logistic")
        throw InvalidInput("config: class_contribution base probabilities need a logistic objective");
    hyper_params().validate();
}

HyperParams ExperimentConfig::hyper_params() const {
    HyperParams hp;
    hp.eta0 = eta0;
    hp.schedule = schedule == "constant" ? LrSchedule::Constant : LrSchedule::SqrtDecay;
    hp.eta_g = eta_g;
    hp.local_steps = local_steps;
    hp.rounds = rounds;
    hp.noise = NoiseSpec(sigma, batch);
    return hp;
}

namespace {

template <typename T>
void maybe(const json& j, const char* key, T& dst) {
    if (j.contains(key)) dst = j.at(key).get<T>();
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    try {
        maybe(j, "name", c.name);
        maybe(j, "algorithms", c.algorithms);
        maybe(j, "m", c.m);
        maybe(j, "eta0", c.eta0);
        maybe(j, "schedule", c.schedule);
        maybe(j, "eta_g", c.eta_g);
        maybe(j, "local_steps", c.local_steps);
        maybe(j, "rounds", c.rounds);
        maybe(j, "sigma", c.sigma);
        maybe(j, "batch", c.batch);
        maybe(j, "seeds", c.seeds);
        maybe(j, "out_dir", c.out_dir);
        if (j.contains("objective")) {
            const json& o = j.at("objective");
            maybe(o, "kind", c.objective.kind);
            maybe(o, "minimizers", c.objective.minimizers);
            maybe(o, "alpha", c.objective.alpha);
            maybe(o, "classes", c.objective.classes);
            maybe(o, "feat_dim", c.objective.feat_dim);
            maybe(o, "samples_per_client", c.objective.samples_per_client);
            maybe(o, "mean_scale", c.objective.mean_scale);
        }
        if (j.contains("dynamics")) {
            const json& d = j.at("dynamics");
            maybe(d, "family", c.dynamics.family);
            maybe(d, "base_kind", c.dynamics.base_kind);
            maybe(d, "uniform_p", c.dynamics.uniform_p);
            maybe(d, "base_list", c.dynamics.base_list);
            maybe(d, "phi_caps", c.dynamics.phi_caps);
            maybe(d, "p_min", c.dynamics.p_min);
            maybe(d, "gamma", c.dynamics.gamma);
            maybe(d, "period", c.dynamics.period);
            maybe(d, "cutoff", c.dynamics.cutoff);
            maybe(d, "staircase_low", c.dynamics.staircase_low);
        }
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("config: malformed field: ") + e.what());
    }
    c.validate();
    return c;
}

json config_to_json(const ExperimentConfig& c) {
    json o = {{"kind", c.objective.kind},
              {"alpha", c.objective.alpha},
              {"classes", c.objective.classes},
              {"feat_dim", c.objective.feat_dim},
              {"samples_per_client", c.objective.samples_per_client},
              {"mean_scale", c.objective.mean_scale}};
    if (!c.objective.minimizers.empty()) o["minimizers"] = c.objective.minimizers;
    json d = {{"family", c.dynamics.family},
              {"base_kind", c.dynamics.base_kind},
              {"uniform_p", c.dynamics.uniform_p},
              {"p_min", c.dynamics.p_min},
              {"gamma", c.dynamics.gamma},
              {"period", c.dynamics.period},
              {"cutoff", c.dynamics.cutoff},
              {"staircase_low", c.dynamics.staircase_low}};
    if (!c.dynamics.base_list.empty()) d["base_list"] = c.dynamics.base_list;
    if (!c.dynamics.phi_caps.empty()) d["phi_caps"] = c.dynamics.phi_caps;
    return json{{"name", c.name},
                {"algorithms", c.algorithms},
                {"m", c.m},
                {"objective", o},
                {"dynamics", d},
                {"eta0", c.eta0},
                {"schedule", c.schedule},
                {"eta_g", c.eta_g},
                {"local_steps", c.local_steps},
                {"rounds", c.rounds},
                {"sigma", c.sigma},
                {"batch", c.batch},
                {"seeds", c.seeds},
                {"out_dir", c.out_dir}};
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("config: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("config: parse error in ") + path + ": " + e.what());
    }
    return config_from_json(j);
}

ProblemInstance build_problem(const ExperimentConfig& c, std::uint64_t seed) {
    ProblemInstance p;
    Rng data_rng = make_stream(seed, StreamPurpose::DataGen);

    std::vector<Eigen::VectorXd> nus;
    if (c.objective.kind == "quadratic") {
        if (!c.objective.minimizers.empty()) {
            for (const auto& u : c.objective.minimizers) {
                ModelVector v = Eigen::Map<const ModelVector>(u.data(), u.size());
                p.objectives.push_back(std::make_shared<QuadraticObjective>(v));
            }
        } else {
            // Default: one-dimensional minimizers spread uniformly on [0, 100].
            for (int i = 0; i < c.m; ++i) {
                ModelVector v(1);
                v[0] = c.m == 1 ? 0.0 : 100.0 * i / (c.m - 1);
                p.objectives.push_back(std::make_shared<QuadraticObjective>(v));
            }
        }
        p.x0 = ModelVector::Zero(p.objectives.front()->dim());
    } else {
        SamplePool pool;
        pool.num_classes = c.objective.classes;
        pool.feat_dim = c.objective.feat_dim;
        pool.mean_scale = c.objective.mean_scale;
        auto logi = generate_dirichlet_partition(c.objective.alpha, c.m, pool,
                                                 c.objective.samples_per_client, data_rng);
        for (const auto& f : logi) {
            nus.push_back(f->class_dist());
            p.objectives.push_back(f);
        }
        p.x0 = ModelVector::Zero(p.objectives.front()->dim());
    }

    p.dynamics.family = family_from_name(c.dynamics.family);
    p.dynamics.gamma = c.dynamics.gamma;
    p.dynamics.period = c.dynamics.period;
    p.dynamics.cutoff = c.dynamics.cutoff;
    p.dynamics.staircase_low = c.dynamics.staircase_low;
    if (c.dynamics.base_kind == "uniform") {
        p.dynamics.base_p.assign(c.m, c.dynamics.uniform_p);
    } else if (c.dynamics.base_kind == "list") {
        p.dynamics.base_p = c.dynamics.base_list;
    } else if (c.dynamics.base_kind == "class_contribution") {
        Eigen::VectorXd caps;
        if (!c.dynamics.phi_caps.empty()) {
            caps = Eigen::Map<const Eigen::VectorXd>(c.dynamics.phi_caps.data(),
                                                     c.dynamics.phi_caps.size());
        } else {
            // Default caps: 1 for the first half of the classes, 0.5 after.
            caps.resize(c.objective.classes);
            for (int cc = 0; cc < c.objective.classes; ++cc)
                caps[cc] = cc < c.objective.classes / 2 ? 1.0 : 0.5;
        }
        ClassContribution phi = ClassContribution::draw(caps, data_rng);
        const double floor =
            p.dynamics.family == DynamicsFamily::InterleavedSine ? 1e-12 : c.dynamics.p_min;
        p.dynamics.base_p = base_probs(nus, phi, floor);
    } else {
        throw InvalidInput("config: unknown dynamics.base_kind " + c.dynamics.base_kind);
    }
    p.dynamics.validate();
    return p;
}

}  // namespace fedawe
