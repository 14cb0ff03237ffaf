#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fir/strategies.hpp"

namespace fir {

struct BenchConfig {
    std::vector<StrategyKind> strategies = {
        StrategyKind::zhang, StrategyKind::entropy, StrategyKind::random_pick,
        StrategyKind::settles, StrategyKind::hoi, StrategyKind::chaudhuri};
    std::vector<int> pool_sizes = {1000, 2000, 4000, 8000};
    std::vector<int> batches = {1, 4};
    int reps = 5;
    std::uint64_t seed = 1;
    int classes = 2;
    int features = 2;
    double min_sample_seconds = 0.02;  // inner-loop amplification target
};

struct BenchCell {
    StrategyKind strategy;
    int pool_size = 0;
    int batch = 0;
    double median_seconds = 0.0;
    double min_seconds = 0.0;
    double max_seconds = 0.0;
};

struct BenchSeries {
    StrategyKind strategy;
    int batch = 0;
    double pool_exponent = 0.0;   // log-log slope of time vs pool size
    bool monotone_in_pool = true;
};

struct BenchTable {
    std::vector<BenchCell> cells;
    std::vector<BenchSeries> series;

    const BenchCell& cell(StrategyKind s, int n, int k) const;
    const BenchSeries& row(StrategyKind s, int k) const;
    std::string format() const;
};

// Median wall time per (strategy, pool size, batch); tiny workloads are
// amplified by an inner repeat loop so medians dominate timer noise.
// Chaudhuri runs with a fixed Frank-Wolfe iteration budget so its cost
// is a deterministic function of the pool size.
BenchTable bench_strategies(const BenchConfig& config);

}  // namespace fir
