#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fedawe/presets.hpp"
#include "fedawe/results.hpp"

using namespace fedawe;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny_config() {
    ExperimentConfig c;
    c.name = "tiny";
    c.algorithms = {"fedawe", "fedavg_active"};
    c.m = 3;
    c.objective.kind = "quadratic";
    c.objective.minimizers = {{0.0}, {50.0}, {100.0}};
    c.dynamics.family = "stationary";
    c.dynamics.base_kind = "uniform";
    c.dynamics.uniform_p = 0.6;
    c.eta0 = 0.05;
    c.schedule = "constant";
    c.rounds = 25;
    c.seeds = {1, 2};
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config json round-trip preserves every field") {
    auto c = tiny_config();
    c.objective.kind = "logistic";
    c.objective.alpha = 0.7;
    c.objective.classes = 5;
    c.dynamics.family = "sine";
    c.dynamics.gamma = 0.25;
    c.dynamics.period = 40;
    c.sigma = 1.5;
    c.batch = 8;
    c.eta_g = 2.0;
    c.local_steps = 3;

    auto j = config_to_json(c);
    auto back = config_from_json(j);
    CHECK(back.name == c.name);
    CHECK(back.algorithms == c.algorithms);
    CHECK(back.m == c.m);
    CHECK(back.objective.kind == c.objective.kind);
    CHECK(back.objective.alpha == c.objective.alpha);
    CHECK(back.objective.classes == c.objective.classes);
    CHECK(back.dynamics.family == c.dynamics.family);
    CHECK(back.dynamics.gamma == c.dynamics.gamma);
    CHECK(back.dynamics.period == c.dynamics.period);
    CHECK(back.sigma == c.sigma);
    CHECK(back.batch == c.batch);
    CHECK(back.eta_g == c.eta_g);
    CHECK(back.local_steps == c.local_steps);
    CHECK(back.seeds == c.seeds);
    CHECK(config_to_json(back) == j);
}

TEST_CASE("config validation names the offending field") {
    auto require_mention = [](ExperimentConfig c, const std::string& field) {
        try {
            c.validate();
            FAIL("expected rejection for ", field);
        } catch (const InvalidInput& e) {
            CHECK(std::string(e.what()).find(field) != std::string::npos);
        }
    };
    auto c = tiny_config();

    c.m = 0;
    require_mention(c, "m");

    c = tiny_config();
    c.eta0 = -0.1;
    require_mention(c, "eta0");

    c = tiny_config();
    c.eta_g = 0.5;  // must be >= 1
    require_mention(c, "eta_g");

    c = tiny_config();
    c.rounds = -1;
    require_mention(c, "rounds");

    c = tiny_config();
    c.algorithms = {"nonsense"};
    CHECK_THROWS_AS(c.validate(), InvalidInput);

    c = tiny_config();
    c.dynamics.family = "nonsense";
    CHECK_THROWS_AS(c.validate(), InvalidInput);

    c = tiny_config();
    c.objective.minimizers = {{0.0}, {1.0}};  // 2 != m = 3
    CHECK_THROWS_AS(c.validate(), InvalidInput);

    c = tiny_config();
    c.dynamics.base_kind = "class_contribution";  // needs a logistic objective
    CHECK_THROWS_AS(c.validate(), InvalidInput);
}

TEST_CASE("load_config rejects malformed files") {
    const fs::path p = fs::temp_directory_path() / "fedawe_bad_config.json";
    {
        std::ofstream out(p);
        out << "{ not json";
    }
    CHECK_THROWS_AS(load_config(p.string()), InvalidInput);
    CHECK_THROWS_AS(load_config("/nonexistent/path.json"), InvalidInput);
    fs::remove(p);
}

TEST_CASE("build_problem") {
    SUBCASE("quadratic: minimizers materialized verbatim") {
        auto c = tiny_config();
        auto prob = build_problem(c, 1);
        REQUIRE(prob.objectives.size() == 3);
        CHECK(prob.objectives[1]->value(ModelVector::Constant(1, 50.0)) == 0.0);
        CHECK(prob.dynamics.base_p == std::vector<double>{0.6, 0.6, 0.6});
    }
    SUBCASE("logistic: per-client datasets and resolved base probabilities") {
        auto c = tiny_config();
        c.objective.kind = "logistic";
        c.objective.classes = 4;
        c.objective.feat_dim = 6;
        c.objective.samples_per_client = 40;
        c.dynamics.base_kind = "class_contribution";
        c.dynamics.phi_caps = {1.0, 1.0, 0.5, 0.5};
        auto prob = build_problem(c, 3);
        REQUIRE(prob.objectives.size() == 3);
        REQUIRE(prob.dynamics.base_p.size() == 3);
        for (double p : prob.dynamics.base_p) {
            CHECK(p >= c.dynamics.p_min);
            CHECK(p <= 1.0);
        }
        // Same seed, same problem.
        auto again = build_problem(c, 3);
        CHECK(prob.dynamics.base_p == again.dynamics.base_p);
        ModelVector x = ModelVector::Zero(prob.objectives[0]->dim());
        CHECK(prob.objectives[0]->value(x) == again.objectives[0]->value(x));
    }
}

TEST_CASE("csv schema and formatting") {
    ResultRow row;
    row.algorithm = "fedawe";
    row.seed = 7;
    row.round = 3;
    row.loss = 1.0 / 3.0;
    row.grad_norm_sq = 2e-17;
    row.active_count = 4;

    CHECK(csv_header() ==
          "algorithm,seed,round,loss,grad_norm_sq,consensus_error,approx_error,"
          "active_count,wallclock");
    auto line = csv_line(row);
    CHECK(line.substr(0, 11) == "fedawe,7,3,");
    // Round-trippable double formatting.
    std::istringstream ss(line.substr(11));
    double loss;
    ss >> loss;
    CHECK(loss == 1.0 / 3.0);

    SUBCASE("non-finite values are rejected at write time") {
        row.loss = std::numeric_limits<double>::quiet_NaN();
        const fs::path p = fs::temp_directory_path() / "fedawe_nan.csv";
        CHECK_THROWS_AS(write_csv(p.string(), {row}), InvalidInput);
        fs::remove(p);
    }
}

TEST_CASE("mean_std uses the n-1 denominator") {
    auto ms = mean_std({1.0, 2.0, 3.0, 4.0});
    CHECK(ms.mean == doctest::Approx(2.5));
    CHECK(ms.std == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(mean_std({7.0}).std == 0.0);
    CHECK_THROWS_AS(mean_std({}), InvalidInput);
}

TEST_CASE("run_config is deterministic and ordered") {
    auto c = tiny_config();
    auto rows1 = run_config(c, 1);
    auto rows2 = run_config(c, 1);
    REQUIRE(rows1.size() == rows2.size());
    CHECK(rows1.size() == c.algorithms.size() * c.seeds.size() * c.rounds);
    for (std::size_t k = 0; k < rows1.size(); ++k) {
        CHECK(rows1[k].loss == rows2[k].loss);
        CHECK(rows1[k].algorithm == rows2[k].algorithm);
        CHECK(rows1[k].wallclock == 0.0);
    }
    // Ordering: algorithm blocks, seeds inside, rounds inside that.
    CHECK(rows1.front().algorithm == "fedawe");
    CHECK(rows1.front().round == 0);
    CHECK(rows1.back().algorithm == "fedavg_active");
    CHECK(rows1.back().round == c.rounds - 1);

    SUBCASE("worker pool yields the identical row sequence") {
        auto par = run_config(c, 4);
        REQUIRE(par.size() == rows1.size());
        for (std::size_t k = 0; k < par.size(); ++k) {
            CHECK(par[k].loss == rows1[k].loss);
            CHECK(par[k].consensus_error == rows1[k].consensus_error);
        }
    }
}

TEST_CASE("written csv is byte-identical across repeated runs") {
    auto c = tiny_config();
    const fs::path a = fs::temp_directory_path() / "fedawe_rep_a.csv";
    const fs::path b = fs::temp_directory_path() / "fedawe_rep_b.csv";
    write_csv(a.string(), run_config(c, 1));
    write_csv(b.string(), run_config(c, 2));  // different worker count, same bytes
    CHECK(slurp(a) == slurp(b));
    fs::remove(a);
    fs::remove(b);
}

TEST_CASE("manifest echoes the config") {
    auto c = tiny_config();
    auto m = make_manifest(c, 1.25);
    CHECK(m.contains("config"));
    CHECK(m["config"]["name"] == "tiny");
    CHECK(m["total_wall_seconds"] == 1.25);
    CHECK(config_from_json(m["config"]).rounds == c.rounds);
}

TEST_CASE("two-client fixed point formula") {
    // Symmetric availability has no bias.
    CHECK(fedavg_two_client_fixed_point(0.5, 0.5, 0.0, 100.0) == doctest::Approx(50.0));
    CHECK(fedavg_two_client_fixed_point(1.0, 1.0, 0.0, 100.0) == doctest::Approx(50.0));
    // p2 -> 0: only client 1 ever participates.
    CHECK(fedavg_two_client_fixed_point(0.5, 1e-12, 0.0, 100.0) == doctest::Approx(0.0));
    // Independent arithmetic for p1 = 1, p2 = 0.5:
    // [0.5*50 + 0.5*0] / 1 = 25.
    CHECK(fedavg_two_client_fixed_point(1.0, 0.5, 0.0, 100.0) == doctest::Approx(25.0));
    // Monte-Carlo cross-check at an asymmetric point.
    {
        const double p1 = 0.8, p2 = 0.3, u1 = 0.0, u2 = 100.0;
        Rng rng(99);
        std::bernoulli_distribution b1(p1), b2(p2);
        double acc = 0.0;
        long n = 0;
        for (long k = 0; k < 400000; ++k) {
            const bool a1 = b1(rng), a2 = b2(rng);
            if (!a1 && !a2) continue;
            acc += a1 && a2 ? (u1 + u2) / 2 : (a1 ? u1 : u2);
            ++n;
        }
        CHECK(fedavg_two_client_fixed_point(p1, p2, u1, u2) ==
              doctest::Approx(acc / n).epsilon(0.01));
    }
}

TEST_CASE("preset smoke tests") {
    SUBCASE("bias surface, reduced grid") {
        BiasPresetOptions o;
        o.grid = {0.4, 1.0};
        o.replications = 2;
        o.rounds = 300;
        o.workers = 2;
        auto rows = preset_bias_surface(o);
        REQUIRE(rows.size() == 4);
        for (const auto& r : rows) {
            CHECK(std::isfinite(r.x_output_fedavg));
            CHECK(std::isfinite(r.x_output_fedawe));
            CHECK(r.closed_form_prediction ==
                  doctest::Approx(fedavg_two_client_fixed_point(r.p1, r.p2, o.u1, o.u2)));
        }
        const fs::path p = fs::temp_directory_path() / "fedawe_bias.csv";
        write_bias_csv(p.string(), rows);
        CHECK(fs::file_size(p) > 0);
        fs::remove(p);
    }
    SUBCASE("nonstationary study, reduced size") {
        NonstationaryPresetOptions o;
        o.gammas = {0.3};
        o.ps = {0.3};
        o.m = 4;
        o.rounds = 20;
        o.batch = 5;
        o.seeds = {1};
        o.workers = 2;
        auto cells = preset_nonstationary(o);
        REQUIRE(cells.size() == 2);  // two algorithms for the single (gamma, p)
        for (const auto& cell : cells) {
            CHECK(std::isfinite(cell.final_loss));
            CHECK(cell.final_accuracy >= 0.0);
            CHECK(cell.final_accuracy <= 1.0);
        }
    }
    SUBCASE("speedup curve, reduced size") {
        SpeedupPresetOptions o;
        o.ms = {4, 8};
        o.rounds = 40;
        o.seeds = {1};
        o.workers = 2;
        auto pts = preset_speedup(o);
        REQUIRE(pts.size() == 2);
        CHECK(pts[0].m == 4);
        CHECK(pts[1].m == 8);
        for (const auto& pt : pts) CHECK(std::isfinite(pt.avg_grad_norm_sq));
    }
}
