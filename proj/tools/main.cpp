// Command-line front end: `run` executes the active-learning loop,
// `theory` runs the asymptotic validators, `check` runs the
// submodularity/greedy/trace certificates, `bench` times the querying
// strategies. Exit codes: 0 success, 2 validation error, 3 solver
// non-convergence.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fir/bench.hpp"
#include "fir/experiment.hpp"
#include "fir/rng.hpp"
#include "fir/submodular.hpp"
#include "fir/theory.hpp"

namespace {

using nlohmann::json;

constexpr int kExitValidation = 2;
constexpr int kExitNonConvergence = 3;

json report_to_json(const fir::ValidationReport& rep) {
    json j;
    j["schema"] = "v1";
    j["validator"] = rep.validator;
    j["nonconverged_fraction"] = rep.nonconverged_fraction;
    j["instability_flag"] = rep.instability_flag;
    json checks = json::array();
    for (const fir::CheckRow& r : rep.checks) {
        checks.push_back({{"name", r.name},
                          {"estimate", r.estimate},
                          {"target", r.target},
                          {"tolerance", r.tolerance},
                          {"mc_se", r.mc_se},
                          {"pass", r.pass},
                          {"diagnostic", r.diagnostic}});
    }
    j["checks"] = std::move(checks);
    return j;
}

void print_report(const fir::ValidationReport& rep) {
    std::printf("validator %s  (nonconverged %.3f%%)\n", rep.validator.c_str(),
                100.0 * rep.nonconverged_fraction);
    for (const fir::CheckRow& r : rep.checks) {
        std::printf("  [%s] %-28s estimate=%-12.6g target=%-12.6g se=%.3g\n",
                    r.diagnostic ? "info" : (r.pass ? "pass" : "FAIL"), r.name.c_str(),
                    r.estimate, r.target, r.mc_se);
    }
}

// The shipped 4-point-PMF binary spec used by the validators.
fir::SimSpec shipped_spec(std::uint64_t seed) {
    fir::SimSpec spec;
    spec.theta0.classes = 2;
    spec.theta0.features = 1;
    spec.theta0.theta = Eigen::Vector2d(1.0, 0.0);
    spec.train_q.support.resize(4, 1);
    spec.train_q.support << -2.0, -1.0, 1.0, 2.0;
    spec.train_q.weights = Eigen::VectorXd::Constant(4, 0.25);
    spec.test_p.support = spec.train_q.support;
    spec.test_p.weights.resize(4);
    spec.test_p.weights << 0.1, 0.2, 0.3, 0.4;
    spec.sizes = {200, 1000, 5000};
    spec.reps = 400;
    spec.seed = seed;
    return spec;
}

void write_or_print(const std::optional<std::string>& out_dir, const std::string& name,
                    const std::string& text) {
    if (!out_dir) return;
    std::filesystem::create_directories(*out_dir);
    std::ofstream f(std::filesystem::path(*out_dir) / name, std::ios::binary);
    f << text;
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            std::optional<std::string> strategy, std::optional<std::string> out_dir) {
    std::ifstream in(config_path);
    if (!in) {
        std::fprintf(stderr, "cannot open config %s\n", config_path.c_str());
        return kExitValidation;
    }
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    fir::ExperimentConfig config = fir::config_from_json(text);
    if (seed) config.seed = *seed;
    if (strategy) config.strategy.kind = fir::strategy_from_name(*strategy);

    const fir::ExperimentRecord record = fir::run_active_learning(config);
    const std::string dir = out_dir.value_or("results");
    fir::write_result_files(record, dir);

    const fir::IterationRecord& last = record.iterations.back();
    std::printf("%s: %d iterations, %d labels, fir %.4f, heldout accuracy %.4f\n",
                fir::strategy_name(config.strategy.kind).c_str(),
                static_cast<int>(record.iterations.size()) - 1, last.labeled_count,
                last.fir_value, last.heldout_accuracy);
    std::printf("results written to %s\n", dir.c_str());
    return 0;
}

int cmd_theory(const std::string& name, std::uint64_t seed, int reps,
               std::optional<std::string> out_dir) {
    fir::SimSpec spec = shipped_spec(seed);
    if (reps > 0) spec.reps = reps;

    std::vector<fir::ValidationReport> reports;
    const bool all = name == "all";
    if (all || name == "mle_normality") {
        fir::SimSpec s = spec;
        s.sizes = {200, 5000};
        s.reps = std::max(s.reps, 1000);
        reports.push_back(fir::validate_mle_normality(s));
    }
    if (all || name == "llr_case1") {
        Eigen::VectorXd probe(1);
        probe << 2.0;
        reports.push_back(fir::validate_llr_case1(spec, probe, 2));
    }
    if (all || name == "llr_chisq") {
        const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(2, 2);
        Eigen::MatrixXd h(2, 2);
        h << 1.0, 0.0, 0.0, 2.0;
        reports.push_back(fir::validate_llr_case2_chisq(2, eye, h, 1000000, seed));
    }
    if (all || name == "fir_bound") {
        fir::SimSpec s = spec;
        s.sizes = {500, 2000};
        s.reps = 500;
        reports.push_back(fir::validate_fir_bound(s));
    }
    if (all || name == "replacement") {
        reports.push_back(fir::diagnose_replacement(spec, {100, 400, 1600}, 10.0));
    }
    if (all || name == "training_llr") {
        fir::SimSpec s = spec;
        s.sizes = {2000};
        reports.push_back(fir::validate_training_llr(s));
    }
    if (reports.empty()) {
        std::fprintf(stderr,
                     "unknown validator '%s' (mle_normality, llr_case1, llr_chisq, "
                     "fir_bound, replacement, training_llr, all)\n",
                     name.c_str());
        return kExitValidation;
    }

    json out = json::array();
    bool ok = true;
    for (const fir::ValidationReport& rep : reports) {
        print_report(rep);
        out.push_back(report_to_json(rep));
        ok = ok && rep.all_pass() && !rep.instability_flag;
    }
    write_or_print(out_dir, "theory_" + name + ".json", out.dump(2));
    return ok ? 0 : kExitNonConvergence;
}

int cmd_check(std::uint64_t seed, std::optional<std::string> out_dir) {
    int failures = 0;
    json out;

    {  // Submodularity / monotonicity certificates on a 30-point pool
        fir::Rng rng(seed);
        fir::ModelParams params;
        params.classes = 2;
        params.features = 2;
        params.theta = 0.7 * rng.normal_vector(3);
        Eigen::MatrixXd pool(30, 2);
        for (int i = 0; i < pool.size(); ++i) pool(i / 2, i % 2) = rng.normal();
        fir::SurrogateObjective obj(params, pool, 0.01, 3);
        const fir::SubmodularReport rep = fir::check_submodularity(obj, 200, seed);
        std::printf("[%s] submodularity: %d monotonicity + %d diminishing-return "
                    "violations in %d trials\n",
                    rep.monotonicity_violations + rep.submodularity_violations == 0
                        ? "pass" : "FAIL",
                    rep.monotonicity_violations, rep.submodularity_violations, rep.trials);
        failures += rep.monotonicity_violations + rep.submodularity_violations;
        out["submodularity"] = {{"trials", rep.trials},
                                {"monotonicity_violations", rep.monotonicity_violations},
                                {"submodularity_violations", rep.submodularity_violations}};
    }

    {  // Greedy vs brute force on 50 seeded instances
        int holds = 0;
        const int instances = 50;
        for (int t = 0; t < instances; ++t) {
            fir::Rng rng = fir::Rng::stream(seed, t);
            fir::ModelParams params;
            params.classes = 2;
            params.features = 2;
            params.theta = rng.normal_vector(3);
            Eigen::MatrixXd pool(10 + (t % 3), 2);
            for (int i = 0; i < pool.rows(); ++i)
                for (int j = 0; j < 2; ++j) pool(i, j) = 2.0 * rng.normal();
            fir::SurrogateObjective obj(params, pool, 0.01, 3);
            const double empty = fir::f_eval(obj, fir::QuerySet{});
            const double greedy = fir::f_eval(obj, fir::greedy_maximize(obj, 3)) - empty;
            const double best = fir::f_eval(obj, fir::brute_force_max(obj, 3)) - empty;
            const double bound = (1.0 - std::pow(2.0 / 3.0, 3)) * best;
            if (greedy >= bound - 1e-12) ++holds;
        }
        std::printf("[%s] greedy bound: holds on %d/%d instances\n",
                    holds == instances ? "pass" : "FAIL", holds, instances);
        if (holds != instances) ++failures;
        out["nemhauser"] = {{"instances", instances}, {"holds", holds}};
    }

    {  // Trace inequality on 500 random SPD pairs
        int holds = 0;
        const int pairs = 500;
        fir::Rng rng(seed + 17);
        for (int t = 0; t < pairs; ++t) {
            const int d = 2 + rng.uniform_int(5);  // up to 6
            auto spd = [&](int dim) {
                Eigen::MatrixXd a(dim, dim);
                for (int i = 0; i < dim; ++i)
                    for (int j = 0; j < dim; ++j) a(i, j) = rng.normal();
                Eigen::MatrixXd m = a * a.transpose();
                m.diagonal().array() += 0.1;
                return m;
            };
            fir::FisherMatrix A{spd(d), 0.0, d};
            fir::FisherMatrix B{spd(d), 0.0, d};
            const auto [lhs, rhs] = fir::trace_bound_check(A, B);
            if (lhs <= rhs + 1e-9 * std::abs(rhs)) ++holds;
        }
        std::printf("[%s] trace inequality: holds on %d/%d SPD pairs\n",
                    holds == pairs ? "pass" : "FAIL", holds, pairs);
        if (holds != pairs) ++failures;
        out["trace_inequality"] = {{"pairs", pairs}, {"holds", holds}};
    }

    write_or_print(out_dir, "check.json", out.dump(2));
    return failures == 0 ? 0 : kExitNonConvergence;
}

int cmd_bench(const std::string& pools, const std::string& ks, int reps,
              std::uint64_t seed, std::optional<std::string> out_dir) {
    fir::BenchConfig config;
    config.seed = seed;
    config.reps = reps;
    auto parse_ints = [](const std::string& csv) {
        std::vector<int> vals;
        std::stringstream ss(csv);
        std::string tok;
        while (std::getline(ss, tok, ',')) vals.push_back(std::stoi(tok));
        return vals;
    };
    if (!pools.empty()) config.pool_sizes = parse_ints(pools);
    if (!ks.empty()) config.batches = parse_ints(ks);

    const fir::BenchTable table = fir::bench_strategies(config);
    std::printf("%s", table.format().c_str());

    json out = json::array();
    for (const fir::BenchCell& c : table.cells)
        out.push_back({{"strategy", fir::strategy_name(c.strategy)},
                       {"pool", c.pool_size},
                       {"k", c.batch},
                       {"median_seconds", c.median_seconds}});
    write_or_print(out_dir, "bench.json", out.dump(2));

    for (const fir::BenchSeries& r : table.series)
        if (!r.monotone_in_pool) {
            std::fprintf(stderr, "bench: %s (k=%d) is not monotone in |X_p|\n",
                         fir::strategy_name(r.strategy).c_str(), r.batch);
            return kExitNonConvergence;
        }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fisher-information-ratio active learning toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> strategy_override;
    std::optional<std::string> out_dir;
    auto* run = app.add_subcommand("run", "run the active-learning loop");
    run->add_option("--config", config_path, "experiment config JSON")->required();
    run->add_option("--seed", seed_override, "seed override");
    run->add_option("--strategy", strategy_override, "strategy override");
    run->add_option("--out", out_dir, "output directory");

    std::string validator = "all";
    std::uint64_t seed = 0;
    int reps = 0;
    auto* theory = app.add_subcommand("theory", "run asymptotic validators");
    theory->add_option("--name", validator, "validator name or 'all'");
    theory->add_option("--seed", seed, "simulation seed");
    theory->add_option("--reps", reps, "replicates override");
    theory->add_option("--out", out_dir, "output directory");

    auto* check = app.add_subcommand("check", "run certificate suites");
    check->add_option("--seed", seed, "certificate seed");
    check->add_option("--out", out_dir, "output directory");

    std::string pools, ks;
    int bench_reps = 5;
    auto* bench = app.add_subcommand("bench", "time the querying strategies");
    bench->add_option("--pools", pools, "comma-separated pool sizes");
    bench->add_option("--ks", ks, "comma-separated batch sizes");
    bench->add_option("--reps", bench_reps, "repetitions per cell");
    bench->add_option("--seed", seed, "bench seed");
    bench->add_option("--out", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(config_path, seed_override, strategy_override, out_dir);
        if (theory->parsed()) return cmd_theory(validator, seed, reps, out_dir);
        if (check->parsed()) return cmd_check(seed, out_dir);
        if (bench->parsed()) return cmd_bench(pools, ks, bench_reps, seed, out_dir);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNonConvergence;
    }
    return 0;
}
