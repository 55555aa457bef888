#include "fedawe/presets.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <future>

namespace fedawe {

namespace {

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body) {
    if (workers <= 1) {
        for (std::size_t k = 0; k < n; ++k) body(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= n) return;
            body(k);
        }
    };
    std::vector<std::future<void>> pool;
    for (int w = 0; w < workers; ++w) pool.push_back(std::async(std::launch::async, worker));
    for (auto& f : pool) f.get();
}

// Captures the scalar global model every round.
class GlobalModelTrace final : public RoundObserver {
  public:
    std::vector<double> xs;
    void on_round(int, const std::vector<int>&, const std::vector<int>&,
                  const ServerState& state) override {
        xs.push_back(state.x[0]);
    }
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

double fedavg_two_client_fixed_point(double p1, double p2, double u1, double u2) {
    if (!(p1 > 0 && p1 <= 1 && p2 > 0 && p2 <= 1))
        throw InvalidInput("fedavg_two_client_fixed_point: probabilities must be in (0,1]");
    const double both = p1 * p2;
    const double only1 = p1 * (1 - p2);
    const double only2 = (1 - p1) * p2;
    return (both * (u1 + u2) / 2 + only1 * u1 + only2 * u2) / (both + only1 + only2);
}

std::vector<BiasSurfacePoint> preset_bias_surface(const BiasPresetOptions& opts) {
    for (double p : opts.grid)
        if (!(p > 0 && p <= 1)) throw InvalidInput("preset_bias_surface: grid values must be in (0,1]");

    std::vector<ObjectivePtr> objectives = {
        std::make_shared<QuadraticObjective>(ModelVector::Constant(1, opts.u1)),
        std::make_shared<QuadraticObjective>(ModelVector::Constant(1, opts.u2))};

    HyperParams hp;
    hp.eta0 = opts.eta0;
    hp.schedule = LrSchedule::Constant;
    hp.eta_g = 1.0;
    hp.local_steps = 1;
    hp.rounds = opts.rounds;

    const ModelVector x0 = ModelVector::Zero(1);
    const int n = static_cast<int>(opts.grid.size());
    std::vector<BiasSurfacePoint> out(n * n);

    parallel_for(static_cast<std::size_t>(n) * n, opts.workers, [&](std::size_t k) {
        const int gi = static_cast<int>(k) / n;
        const int gj = static_cast<int>(k) % n;
        BiasSurfacePoint& pt = out[k];
        pt.p1 = opts.grid[gi];
        pt.p2 = opts.grid[gj];
        pt.closed_form_prediction = fedavg_two_client_fixed_point(pt.p1, pt.p2, opts.u1, opts.u2);

        DynamicsSpec dyn;
        dyn.family = DynamicsFamily::Stationary;
        dyn.base_p = {pt.p1, pt.p2};

        for (Algorithm alg : {Algorithm::FedAvgActive, Algorithm::FedAWE}) {
            double acc = 0.0;
            for (int r = 0; r < opts.replications; ++r) {
                const std::uint64_t seed =
                    splitmix64(opts.master_seed ^ splitmix64(k * 1000003 + r * 31 +
                                                             (alg == Algorithm::FedAWE ? 7 : 0)));
                GlobalModelTrace trace;
                RunOptions ro;
                ro.record_metrics = false;
                ro.observer = &trace;
                run_training(alg, objectives, dyn, hp, x0, seed, ro);
                const std::size_t tail = std::max<std::size_t>(1, trace.xs.size() / 5);
                double s = 0.0;
                for (std::size_t t = trace.xs.size() - tail; t < trace.xs.size(); ++t)
                    s += trace.xs[t];
                acc += s / tail;
            }
            acc /= opts.replications;
            if (alg == Algorithm::FedAvgActive)
                pt.x_output_fedavg = acc;
            else
                pt.x_output_fedawe = acc;
        }
    });
    return out;
}

namespace {

double mean_client_accuracy(const std::vector<ObjectivePtr>& objectives, const ModelVector& x) {
    double acc = 0.0;
    int n = 0;
    for (const auto& f : objectives) {
        if (auto* lg = dynamic_cast<const LogisticObjective*>(f.get())) {
            acc += lg->accuracy(x);
            ++n;
        }
    }
    return n ? acc / n : 0.0;
}

}  // namespace

std::vector<NonstationaryCell> preset_nonstationary(
    const NonstationaryPresetOptions& opts) {
    struct Cell {
        double gamma, p;
        Algorithm alg;
    };
    std::vector<Cell> cells;
    for (double g : opts.gammas)
        for (double p : opts.ps)
            for (Algorithm a : {Algorithm::FedAvgActive, Algorithm::FedAWE})
                cells.push_back({g, p, a});

    std::vector<NonstationaryCell> out(cells.size());
    parallel_for(cells.size(), opts.workers, [&](std::size_t k) {
        const Cell& c = cells[k];
        ExperimentConfig cfg;
        cfg.m = opts.m;
        cfg.objective.kind = "logistic";
        cfg.objective.alpha = opts.alpha;
        cfg.dynamics.family = "sine";
        cfg.dynamics.base_kind = "uniform";
        cfg.dynamics.uniform_p = c.p;
        cfg.dynamics.gamma = c.gamma;
        cfg.eta0 = opts.eta0;
        cfg.schedule = "sqrt_decay";
        cfg.local_steps = opts.local_steps;
        cfg.rounds = opts.rounds;
        cfg.batch = opts.batch;
        cfg.seeds = opts.seeds;

        std::vector<double> losses, accs;
        for (std::uint64_t seed : opts.seeds) {
            ProblemInstance prob = build_problem(cfg, seed);
            RunResult res = run_training(c.alg, prob.objectives, prob.dynamics,
                                         cfg.hyper_params(), prob.x0, seed);
            const std::size_t tail = std::min<std::size_t>(50, res.records.size());
            double s = 0.0;
            for (std::size_t t = res.records.size() - tail; t < res.records.size(); ++t)
                s += res.records[t].loss;
            losses.push_back(s / tail);
            const ModelVector xbar = res.final_state.clients.rowwise().mean();
            accs.push_back(mean_client_accuracy(prob.objectives, xbar));
        }
        NonstationaryCell& row = out[k];
        row.gamma = c.gamma;
        row.p = c.p;
        row.algorithm = algorithm_name(c.alg);
        const MeanStd ms = mean_std(losses);
        row.final_loss = ms.mean;
        row.final_loss_std = ms.std;
        row.final_accuracy = mean_std(accs).mean;
    });
    return out;
}

std::vector<SpeedupPoint> preset_speedup(const SpeedupPresetOptions& opts) {
    std::vector<SpeedupPoint> out(opts.ms.size());
    parallel_for(opts.ms.size(), opts.workers, [&](std::size_t k) {
        ExperimentConfig cfg;
        cfg.m = opts.ms[k];
        cfg.objective.kind = "logistic";
        cfg.objective.alpha = opts.alpha;
        cfg.dynamics.family = "stationary";
        cfg.dynamics.base_kind = "uniform";
        cfg.dynamics.uniform_p = opts.delta;
        cfg.eta0 = opts.eta0;
        cfg.schedule = "sqrt_decay";
        cfg.local_steps = opts.local_steps;
        cfg.rounds = opts.rounds;
        cfg.sigma = opts.sigma;
        cfg.batch = opts.batch;
        cfg.seeds = opts.seeds;

        double avg = 0.0;
        for (std::uint64_t seed : opts.seeds) {
            ProblemInstance prob = build_problem(cfg, seed);
            RunResult res = run_training(Algorithm::FedAWE, prob.objectives, prob.dynamics,
                                         cfg.hyper_params(), prob.x0, seed);
            double s = 0.0;
            for (const auto& rec : res.records) s += rec.grad_norm_sq;
            avg += s / res.records.size();
        }
        out[k].m = opts.ms[k];
        out[k].avg_grad_norm_sq = avg / opts.seeds.size();
    });
    return out;
}

void write_bias_csv(const std::string& path, const std::vector<BiasSurfacePoint>& rows) {
    std::ofstream outp(path, std::ios::binary);
    if (!outp) throw InvalidInput("write_bias_csv: cannot open " + path);
    outp << "p1,p2,x_output_fedavg,x_output_fedawe,closed_form_prediction\n";
    for (const auto& r : rows)
        outp << fmt(r.p1) << ',' << fmt(r.p2) << ',' << fmt(r.x_output_fedavg) << ','
             << fmt(r.x_output_fedawe) << ',' << fmt(r.closed_form_prediction) << "\n";
}

void write_nonstationary_csv(const std::string& path, const std::vector<NonstationaryCell>& rows) {
    std::ofstream outp(path, std::ios::binary);
    if (!outp) throw InvalidInput("write_nonstationary_csv: cannot open " + path);
    outp << "gamma,p,algorithm,final_loss,final_loss_std,final_accuracy\n";
    for (const auto& r : rows)
        outp << fmt(r.gamma) << ',' << fmt(r.p) << ',' << r.algorithm << ',' << fmt(r.final_loss)
             << ',' << fmt(r.final_loss_std) << ',' << fmt(r.final_accuracy) << "\n";
}

void write_speedup_csv(const std::string& path, const std::vector<SpeedupPoint>& rows) {
    std::ofstream outp(path, std::ios::binary);
    if (!outp) throw InvalidInput("write_speedup_csv: cannot open " + path);
    outp << "m,avg_grad_norm_sq\n";
    for (const auto& r : rows) outp << r.m << ',' << fmt(r.avg_grad_norm_sq) << "\n";
}

}  // namespace fedawe
