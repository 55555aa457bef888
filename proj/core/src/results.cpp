#include "fedawe/results.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <memory>

#include "fedawe/diagnostics.hpp"

namespace fedawe {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string csv_header() {
    return "algorithm,seed,round,loss,grad_norm_sq,consensus_error,approx_error,active_count,wallclock";
}

std::string csv_line(const ResultRow& r) {
    std::string s = r.algorithm;
    s += ',';
    s += std::to_string(r.seed);
    s += ',';
    s += std::to_string(r.round);
    s += ',';
    s += fmt_double(r.loss);
    s += ',';
    s += fmt_double(r.grad_norm_sq);
    s += ',';
    s += fmt_double(r.consensus_error);
    s += ',';
    s += fmt_double(r.approx_error);
    s += ',';
    s += std::to_string(r.active_count);
    s += ',';
    s += fmt_double(r.wallclock);
    return s;
}

void write_csv(const std::string& path, const std::vector<ResultRow>& rows) {
    std::ofstream out(path, std::ios::binary);  // binary: fixed \n line endings
    if (!out) throw InvalidInput("write_csv: cannot open " + path);
    out << csv_header() << "\n";
    for (const auto& r : rows) {
        if (!std::isfinite(r.loss) || !std::isfinite(r.grad_norm_sq) ||
            !std::isfinite(r.consensus_error) || !std::isfinite(r.approx_error))
            throw InvalidInput("write_csv: non-finite metric in row");
        out << csv_line(r) << "\n";
    }
}

nlohmann::json make_manifest(const ExperimentConfig& config, double total_wall_seconds) {
    return nlohmann::json{{"version", "0.1.0"},
                          {"config", config_to_json(config)},
                          {"seeds", config.seeds},
                          {"total_wall_seconds", total_wall_seconds}};
}

void write_manifest(const std::string& path, const nlohmann::json& manifest) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("write_manifest: cannot open " + path);
    out << manifest.dump(2) << "\n";
}

MeanStd mean_std(const std::vector<double>& values) {
    MeanStd ms;
    if (values.empty()) throw InvalidInput("mean_std: empty input");
    for (double v : values) ms.mean += v;
    ms.mean /= values.size();
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - ms.mean) * (v - ms.mean);
        ms.std = std::sqrt(ss / (values.size() - 1));
    }
    return ms;
}

std::vector<ResultRow> run_config_single(const ExperimentConfig& config,
                                         const std::string& algorithm, std::uint64_t seed,
                                         bool timing) {
    ProblemInstance prob = build_problem(config, seed);
    HyperParams hp = config.hyper_params();
    Algorithm alg = algorithm_from_name(algorithm);

    // Auxiliary tracking only where true gradients are cheap: FedAWE on
    // quadratics or full-batch logistic, constant schedule.
    const bool track_aux = alg == Algorithm::FedAWE && hp.schedule == LrSchedule::Constant &&
                           (config.objective.kind == "quadratic" || config.batch == 0);

    RunOptions opts;
    std::unique_ptr<AuxTracker> tracker;
    if (track_aux) {
        tracker = std::make_unique<AuxTracker>(prob.objectives, hp, prob.x0);
        opts.observer = tracker.get();
    }

    const auto start = std::chrono::steady_clock::now();
    RunResult res = run_training(alg, prob.objectives, prob.dynamics, hp, prob.x0, seed, opts);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::vector<ResultRow> rows;
    rows.reserve(res.records.size());
    for (std::size_t t = 0; t < res.records.size(); ++t) {
        const RoundRecord& rec = res.records[t];
        ResultRow row;
        row.algorithm = algorithm;
        row.seed = seed;
        row.round = rec.round;
        row.loss = rec.loss;
        row.grad_norm_sq = rec.grad_norm_sq;
        row.consensus_error = rec.consensus_error;
        row.approx_error = tracker ? tracker->approx_errors()[t] : 0.0;
        row.active_count = rec.active_count;
        row.wallclock = timing ? elapsed / res.records.size() : 0.0;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<ResultRow> run_config(const ExperimentConfig& config, int workers, bool timing) {
    config.validate();
    struct Job {
        std::string algorithm;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (const auto& alg : config.algorithms)
        for (std::uint64_t s : config.seeds) jobs.push_back({alg, s});

    std::vector<std::vector<ResultRow>> parts(jobs.size());
    if (workers <= 1) {
        for (std::size_t k = 0; k < jobs.size(); ++k)
            parts[k] = run_config_single(config, jobs[k].algorithm, jobs[k].seed, timing);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            for (;;) {
                const std::size_t k = next.fetch_add(1);
                if (k >= jobs.size()) return;
                parts[k] = run_config_single(config, jobs[k].algorithm, jobs[k].seed, timing);
            }
        };
        std::vector<std::future<void>> pool;
        for (int w = 0; w < workers; ++w) pool.push_back(std::async(std::launch::async, worker));
        for (auto& f : pool) f.get();  // rethrows run errors
    }

    std::vector<ResultRow> all;
    for (auto& p : parts)
        for (auto& r : p) all.push_back(std::move(r));
    return all;
}

}  // namespace fedawe
