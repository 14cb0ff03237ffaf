#include "fir/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "fir/synthetic.hpp"

namespace fir {

namespace {

using Clock = std::chrono::steady_clock;

double time_once(const ModelParams& params, const MatrixXd& pool,
                 const StrategyConfig& cfg, int inner) {
    double sink = 0.0;
    const auto tic = Clock::now();
    for (int i = 0; i < inner; ++i) {
        const QueryResult q = select_queries(params, pool, cfg);
        sink += q.indices.empty() ? q.objective : q.indices.front();
    }
    const double elapsed = std::chrono::duration<double>(Clock::now() - tic).count();
    volatile double keep = sink;
    (void)keep;
    return elapsed / inner;
}

}  // namespace

const BenchCell& BenchTable::cell(StrategyKind s, int n, int k) const {
    for (const BenchCell& c : cells)
        if (c.strategy == s && c.pool_size == n && c.batch == k) return c;
    throw std::out_of_range("BenchTable: no such cell");
}

const BenchSeries& BenchTable::row(StrategyKind s, int k) const {
    for (const BenchSeries& r : series)
        if (r.strategy == s && r.batch == k) return r;
    throw std::out_of_range("BenchTable: no such series");
}

std::string BenchTable::format() const {
    std::string out = "strategy    k   |X_p|    median_s\n";
    char buf[128];
    for (const BenchCell& c : cells) {
        std::snprintf(buf, sizeof buf, "%-10s %3d %7d  %10.6f\n",
                      strategy_name(c.strategy).c_str(), c.batch, c.pool_size,
                      c.median_seconds);
        out += buf;
    }
    out += "\nstrategy    k   pool-exponent  monotone\n";
    for (const BenchSeries& r : series) {
        std::snprintf(buf, sizeof buf, "%-10s %3d  %13.3f  %s\n",
                      strategy_name(r.strategy).c_str(), r.batch, r.pool_exponent,
                      r.monotone_in_pool ? "yes" : "no");
        out += buf;
    }
    return out;
}

BenchTable bench_strategies(const BenchConfig& config) {
    if (config.pool_sizes.empty() || config.batches.empty() || config.reps < 1)
        throw std::invalid_argument("bench: empty grid");

    const int max_pool =
        *std::max_element(config.pool_sizes.begin(), config.pool_sizes.end());

    SyntheticSpec spec;
    spec.classes = config.classes;
    spec.features = config.features;
    spec.pool_size = max_pool;
    spec.heldout_size = 0;
    const SyntheticData data = gen_synthetic(spec, config.seed);

    // A realistic parameter estimate: fit on a small oracle-labeled slice.
    LabelOracle oracle(data.theta0, Rng::stream(config.seed, 7).next_u64());
    LabeledSet warmup;
    warmup.x.resize(0, config.features);
    for (int i = 0; i < std::min(100, max_pool); ++i)
        warmup.append(data.pool.row(i).transpose(), oracle.label(data.pool.row(i).transpose()));
    const ModelParams params =
        fit_mle(warmup, ModelParams::zeros(config.classes, config.features)).params;

    BenchTable table;
    for (StrategyKind s : config.strategies) {
        for (int k : config.batches) {
            std::vector<double> medians;
            for (int n : config.pool_sizes) {
                const MatrixXd pool = data.pool.topRows(n);
                StrategyConfig cfg;
                cfg.kind = s;
                cfg.batch = std::min(k, n);
                cfg.seed = config.seed;
                cfg.hoi_surrogate_diagnostic = false;
                // fixed iteration budget: deterministic work per pool size
                cfg.fw.tol = 0.0;
                cfg.fw.max_iter = 30;
                cfg.fw.allow_nonconverged = true;
                cfg.fk_iters = 10;
                cfg.fk_budget = 128;

                // calibrate the inner repeat count on one untimed run
                const double probe = time_once(params, pool, cfg, 1);
                const int inner = std::max(
                    1, static_cast<int>(config.min_sample_seconds / std::max(probe, 1e-9)));

                std::vector<double> times;
                for (int r = 0; r < config.reps; ++r)
                    times.push_back(time_once(params, pool, cfg, inner));
                std::sort(times.begin(), times.end());

                BenchCell cell;
                cell.strategy = s;
                cell.pool_size = n;
                cell.batch = k;
                cell.median_seconds = times[times.size() / 2];
                cell.min_seconds = times.front();
                cell.max_seconds = times.back();
                table.cells.push_back(cell);
                medians.push_back(cell.median_seconds);
            }

            BenchSeries row;
            row.strategy = s;
            row.batch = k;
            for (std::size_t i = 1; i < medians.size(); ++i)
                if (medians[i] < medians[i - 1]) row.monotone_in_pool = false;
            // least-squares slope of log t against log n
            const int m = static_cast<int>(medians.size());
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            for (int i = 0; i < m; ++i) {
                const double x = std::log(static_cast<double>(config.pool_sizes[i]));
                const double y = std::log(medians[i]);
                sx += x;
                sy += y;
                sxx += x * x;
                sxy += x * y;
            }
            row.pool_exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);
            table.series.push_back(row);
        }
    }
    return table;
}

}  // namespace fir
