#include "fir/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "fir/csv.hpp"

namespace fir {

using nlohmann::json;

void ExperimentConfig::validate() const {
    if (initial_labeled < 1)
        throw std::invalid_argument("config: initial_labeled must be >= 1");
    if (iterations < 1) throw std::invalid_argument("config: iterations must be >= 1");
    if (strategy.batch < 1) throw std::invalid_argument("config: batch must be >= 1");
    const bool pool_consuming = strategy.kind != StrategyKind::fukumizu;
    const int pool_size = csv_pool ? -1 : synthetic.pool_size;
    if (pool_consuming && pool_size > 0 &&
        pool_size < initial_labeled + iterations * strategy.batch)
        throw std::invalid_argument(
            "config: pool of " + std::to_string(pool_size) + " exhausted by " +
            std::to_string(initial_labeled) + " + " + std::to_string(iterations) +
            " x " + std::to_string(strategy.batch) + " queries");
    if (csv_pool && strategy.kind == StrategyKind::fukumizu)
        throw std::invalid_argument(
            "config: fukumizu synthesizes covariates and needs a model oracle; "
            "use a synthetic data source");
}

double heldout_accuracy(const ModelParams& params, const LabeledSet& heldout) {
    if (heldout.size() == 0) return 0.0;
    int hits = 0;
    for (int i = 0; i < heldout.size(); ++i)
        if (predict(params, heldout.x.row(i).transpose()) == heldout.y[i]) ++hits;
    return static_cast<double>(hits) / heldout.size();
}

namespace {

// Oracle interface: model-faithful draws for synthetic data, label
// reveal for CSV data.
struct OracleFn {
    LabelOracle* model = nullptr;
    const VectorXi* hidden = nullptr;

    int operator()(const VectorXd& x, int original_index) {
        if (model) return model->label(x);
        return (*hidden)[original_index];
    }
};

void assert_disjoint(const MatrixXd& pool, const LabeledSet& heldout) {
    std::set<std::vector<double>> rows;
    for (int i = 0; i < pool.rows(); ++i) {
        std::vector<double> r(pool.cols());
        for (int j = 0; j < pool.cols(); ++j) r[j] = pool(i, j);
        rows.insert(std::move(r));
    }
    for (int i = 0; i < heldout.size(); ++i) {
        std::vector<double> r(heldout.x.cols());
        for (int j = 0; j < heldout.x.cols(); ++j) r[j] = heldout.x(i, j);
        if (rows.count(r))
            throw std::runtime_error(
                "evaluation hygiene: held-out point duplicates a pool point");
    }
}

}  // namespace

ExperimentRecord run_active_learning(const ExperimentConfig& config) {
    config.validate();

    MatrixXd pool;
    LabeledSet heldout;
    ModelParams theta0;
    std::optional<LabelOracle> model_oracle;
    VectorXi hidden_labels;
    int classes = 0;

    if (config.csv_pool) {
        const CsvData data = load_csv(*config.csv_pool, config.csv_classes);
        if (!data.labeled())
            throw std::invalid_argument("csv pool needs a label column for the oracle");
        pool = data.features;
        hidden_labels = *data.labels;
        classes = config.csv_classes ? *config.csv_classes : hidden_labels.maxCoeff();
        if (config.csv_heldout)
            heldout = load_csv(*config.csv_heldout, classes).as_labeled();
    } else {
        const SyntheticData data = gen_synthetic(config.synthetic, config.seed);
        pool = data.pool;
        heldout = data.heldout;
        theta0 = data.theta0;
        classes = config.synthetic.classes;
        model_oracle.emplace(data.theta0, Rng::stream(config.seed, 100).next_u64());
    }
    const int features = static_cast<int>(pool.cols());
    if (heldout.size() > 0) assert_disjoint(pool, heldout);

    OracleFn oracle{model_oracle ? &*model_oracle : nullptr,
                    model_oracle ? nullptr : &hidden_labels};

    // Initial labeled set: a seeded draw from the pool.
    Rng init_rng = Rng::stream(config.seed, 200);
    std::vector<int> initial = init_rng.sample_without_replacement(
        static_cast<int>(pool.rows()), config.initial_labeled);

    LabeledSet labeled;
    labeled.x.resize(0, features);
    std::vector<bool> consumed(pool.rows(), false);
    for (int id : initial) {
        const VectorXd x = pool.row(id).transpose();
        labeled.append(x, oracle(x, id));
        consumed[id] = true;
    }

    const FitOptions fit_opts;  // defaults; grad_tol 1e-8
    ModelParams init_params = ModelParams::zeros(classes, features);
    FitResult fit = fit_mle(labeled, init_params, fit_opts);

    ExperimentRecord record;
    record.config = config;
    record.theta0 = theta0;

    auto push_record = [&](int iter, const QueryResult* q, double seconds) {
        IterationRecord row;
        row.iteration = iter;
        if (q) {
            row.query_ids = q->indices;
            row.query_samples = q->samples;
        }
        row.theta = fit.params.theta;
        row.labeled_count = labeled.size();
        FisherMatrix iq =
            fisher_mc(fit.params, labeled.x, config.strategy.delta, FisherSource::query);
        MatrixXd ip_basis;
        if (config.ip_pool == IpPool::original) {
            ip_basis = pool;
        } else {
            int remaining = 0;
            for (bool c : consumed) remaining += c ? 0 : 1;
            ip_basis.resize(remaining, features);
            int at = 0;
            for (int i = 0; i < pool.rows(); ++i)
                if (!consumed[i]) ip_basis.row(at++) = pool.row(i);
        }
        FisherMatrix ip =
            fisher_mc(fit.params, ip_basis, config.strategy.delta, FisherSource::pool);
        row.fir_value = fir_trace(iq, ip);
        row.heldout_accuracy = heldout_accuracy(fit.params, heldout);
        row.seconds = seconds;
        record.iterations.push_back(std::move(row));
    };

    push_record(0, nullptr, 0.0);

    for (int iter = 1; iter <= config.iterations; ++iter) {
        const auto tic = std::chrono::steady_clock::now();

        // Candidate pool = unconsumed points, remembering original ids.
        std::vector<int> candidate_ids;
        for (int i = 0; i < pool.rows(); ++i)
            if (!consumed[i]) candidate_ids.push_back(i);
        MatrixXd candidates(candidate_ids.size(), features);
        for (std::size_t i = 0; i < candidate_ids.size(); ++i)
            candidates.row(static_cast<int>(i)) = pool.row(candidate_ids[i]);

        StrategyConfig scfg = config.strategy;
        scfg.seed = Rng::stream(config.seed, 300 + iter).next_u64();
        QueryResult q = select_queries(fit.params, candidates, scfg, &labeled.x);

        if (q.samples.rows() > 0) {
            // synthesized covariates (fukumizu)
            for (int i = 0; i < q.samples.rows(); ++i) {
                const VectorXd x = q.samples.row(i).transpose();
                labeled.append(x, oracle(x, -1));
            }
        } else {
            std::vector<int> original;
            original.reserve(q.indices.size());
            for (int local : q.indices) {
                const int id = candidate_ids[local];
                original.push_back(id);
                const VectorXd x = pool.row(id).transpose();
                labeled.append(x, oracle(x, id));
                consumed[id] = true;
            }
            q.indices = std::move(original);
        }

        const ModelParams warm = config.warm_start ? fit.params : init_params;
        fit = fit_mle(labeled, warm, fit_opts);

        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count();
        push_record(iter, &q, seconds);
    }
    return record;
}

// ---------------------------------------------------------------------------
// JSON / CSV serialization (schema "v1")

namespace {

json vector_to_json(const VectorXd& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

VectorXd vector_from_json(const json& a) {
    VectorXd v(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<int>(i)] = a[i].get<double>();
    return v;
}

json matrix_to_json(const MatrixXd& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

MatrixXd matrix_from_json(const json& rows) {
    if (rows.empty()) return MatrixXd(0, 0);
    MatrixXd m(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<int>(i), static_cast<int>(j)) = rows[i][j].get<double>();
    return m;
}

}  // namespace

ExperimentConfig config_from_json(const std::string& text) {
    const json j = json::parse(text);
    if (!j.contains("schema") || j["schema"].get<std::string>() != "v1")
        throw std::invalid_argument("config: missing or unsupported schema (expect \"v1\")");

    ExperimentConfig c;
    c.seed = j.value("seed", std::uint64_t{0});
    c.initial_labeled = j.value("initial_labeled", 10);
    c.iterations = j.value("iterations", 10);
    if (j.contains("ip_pool")) {
        const std::string v = j["ip_pool"].get<std::string>();
        if (v == "original") c.ip_pool = IpPool::original;
        else if (v == "remaining") c.ip_pool = IpPool::remaining;
        else throw std::invalid_argument("config: ip_pool must be original|remaining");
    }
    c.warm_start = j.value("warm_start", true);

    if (j.contains("data")) {
        const json& d = j["data"];
        const std::string type = d.value("type", "synthetic");
        if (type == "csv") {
            c.csv_pool = d.at("pool").get<std::string>();
            if (d.contains("heldout")) c.csv_heldout = d["heldout"].get<std::string>();
            if (d.contains("classes")) c.csv_classes = d["classes"].get<int>();
        } else if (type == "synthetic") {
            c.synthetic.classes = d.value("classes", 2);
            c.synthetic.features = d.value("features", 2);
            c.synthetic.pool_size = d.value("pool_size", 500);
            c.synthetic.heldout_size = d.value("heldout_size", 500);
            c.synthetic.theta0_scale = d.value("theta0_scale", 2.0);
            if (d.contains("theta0")) c.synthetic.theta0 = vector_from_json(d["theta0"]);
            if (d.contains("mixture")) {
                const json& mx = d["mixture"];
                c.synthetic.mixture.weights = vector_from_json(mx.at("weights"));
                c.synthetic.mixture.means = matrix_from_json(mx.at("means"));
                c.synthetic.mixture.stds = matrix_from_json(mx.at("stds"));
            }
        } else {
            throw std::invalid_argument("config: data.type must be synthetic|csv");
        }
    }

    if (j.contains("strategy")) {
        const json& s = j["strategy"];
        c.strategy.kind = strategy_from_name(s.value("kind", "random"));
        c.strategy.batch = s.value("batch", 1);
        c.strategy.delta = s.value("delta", kDefaultDelta);
        c.strategy.mixing_exponent = s.value("mixing_exponent", 1.0 / 6.0);
        c.strategy.hoi_seed_labeled = s.value("hoi_seed_labeled", false);
        c.strategy.hoi_surrogate_diagnostic = s.value("hoi_surrogate_diagnostic", true);
        c.strategy.fk_budget = s.value("fk_budget", 256);
        c.strategy.fk_iters = s.value("fk_iters", 200);
        c.strategy.fk_step = s.value("fk_step", 0.05);
        c.strategy.fw.tol = s.value("fw_tol", 1e-6);
        c.strategy.fw.max_iter = s.value("fw_max_iter", 50000);
    }
    return c;
}

std::string config_to_json(const ExperimentConfig& c) {
    json j;
    j["schema"] = "v1";
    j["seed"] = c.seed;
    j["initial_labeled"] = c.initial_labeled;
    j["iterations"] = c.iterations;
    j["ip_pool"] = c.ip_pool == IpPool::original ? "original" : "remaining";
    j["warm_start"] = c.warm_start;

    json d;
    if (c.csv_pool) {
        d["type"] = "csv";
        d["pool"] = *c.csv_pool;
        if (c.csv_heldout) d["heldout"] = *c.csv_heldout;
        if (c.csv_classes) d["classes"] = *c.csv_classes;
    } else {
        d["type"] = "synthetic";
        d["classes"] = c.synthetic.classes;
        d["features"] = c.synthetic.features;
        d["pool_size"] = c.synthetic.pool_size;
        d["heldout_size"] = c.synthetic.heldout_size;
        d["theta0_scale"] = c.synthetic.theta0_scale;
        if (c.synthetic.theta0.size() > 0) d["theta0"] = vector_to_json(c.synthetic.theta0);
        if (c.synthetic.mixture.weights.size() > 0) {
            d["mixture"] = {{"weights", vector_to_json(c.synthetic.mixture.weights)},
                            {"means", matrix_to_json(c.synthetic.mixture.means)},
                            {"stds", matrix_to_json(c.synthetic.mixture.stds)}};
        }
    }
    j["data"] = std::move(d);

    json s;
    s["kind"] = strategy_name(c.strategy.kind);
    s["batch"] = c.strategy.batch;
    s["delta"] = c.strategy.delta;
    s["mixing_exponent"] = c.strategy.mixing_exponent;
    s["hoi_seed_labeled"] = c.strategy.hoi_seed_labeled;
    s["hoi_surrogate_diagnostic"] = c.strategy.hoi_surrogate_diagnostic;
    s["fk_budget"] = c.strategy.fk_budget;
    s["fk_iters"] = c.strategy.fk_iters;
    s["fk_step"] = c.strategy.fk_step;
    s["fw_tol"] = c.strategy.fw.tol;
    s["fw_max_iter"] = c.strategy.fw.max_iter;
    j["strategy"] = std::move(s);
    return j.dump(2);
}

std::string record_to_json(const ExperimentRecord& record) {
    json j;
    j["schema"] = "v1";
    j["config"] = json::parse(config_to_json(record.config));
    if (record.theta0.theta.size() > 0) j["theta0"] = vector_to_json(record.theta0.theta);
    json iters = json::array();
    for (const IterationRecord& r : record.iterations) {
        json row;
        row["iteration"] = r.iteration;
        row["query_ids"] = r.query_ids;
        if (r.query_samples.rows() > 0) row["query_samples"] = matrix_to_json(r.query_samples);
        row["theta"] = vector_to_json(r.theta);
        row["labeled_count"] = r.labeled_count;
        row["fir"] = r.fir_value;
        row["heldout_accuracy"] = r.heldout_accuracy;
        iters.push_back(std::move(row));
    }
    j["iterations"] = std::move(iters);
    return j.dump(2);
}

std::string curve_to_csv(const ExperimentRecord& record) {
    std::string out = "iteration,labeled,fir,heldout_accuracy\n";
    char buf[96];
    for (const IterationRecord& r : record.iterations) {
        std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g\n", r.iteration,
                      r.labeled_count, r.fir_value, r.heldout_accuracy);
        out += buf;
    }
    return out;
}

std::string timing_to_csv(const ExperimentRecord& record) {
    std::string out = "iteration,seconds\n";
    char buf[64];
    for (const IterationRecord& r : record.iterations) {
        std::snprintf(buf, sizeof buf, "%d,%.6f\n", r.iteration, r.seconds);
        out += buf;
    }
    return out;
}

void write_result_files(const ExperimentRecord& record, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    auto dump = [&](const std::string& name, const std::string& text) {
        std::ofstream f(fs::path(out_dir) / name, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + name + " in " + out_dir);
        f << text;
    };
    dump("record.json", record_to_json(record));
    dump("curve.csv", curve_to_csv(record));
    dump("timing.csv", timing_to_csv(record));
}

}  // namespace fir
