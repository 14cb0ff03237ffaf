#pragma once

#include <cstdint>
#include <vector>

#include "fir/fisher.hpp"

namespace fir {

// Sorted, duplicate-free indices into a pool.
struct QuerySet {
    std::vector<int> idx;

    int size() const { return static_cast<int>(idx.size()); }
    bool contains(int i) const;
    static QuerySet of(std::vector<int> indices, int pool_size);
};

// The surrogate set objective
//   f(Xq) = sum_{x in Xp - Xq} sum_y  -1 / ( delta/|v(x,y)|^2
//                                           + sum_{x' in Xq} g(x,y,x') ),
// a monotone non-decreasing submodular function of Xq.
//
// g is evaluated with the normalization constant frozen at
// construction (g_norm): the derivation's 1/|Xq| factor refers to the
// fixed cardinality of the batch being optimized, and the
// monotonicity/submodularity proof needs g to be a fixed kernel of
// (x, y, x'). Set g_norm to the batch size when mirroring the greedy
// trace objective.
class SurrogateObjective {
public:
    SurrogateObjective(const ModelParams& params, const MatrixXd& pool,
                       double delta, int g_norm = 1);

    int pool_size() const { return cache_.pool_size(); }
    int classes() const { return cache_.classes(); }
    double delta() const { return delta_; }
    int g_norm() const { return g_norm_; }
    const ScoreKernelCache& cache() const { return cache_; }

    // g(x_i, y, x_j) with the frozen normalization.
    double pair_g(int i, int y, int j) const;

    // delta / |v(x_i, y)|^2, the empty-set denominator.
    double base_denom(int i, int y) const;

private:
    ScoreKernelCache cache_;
    double delta_ = kDefaultDelta;
    int g_norm_ = 1;
    VectorXd base_;      // (n*c) base denominators
    MatrixXd pair_g_;    // (n*c) x n kernel table when small enough
    bool have_table_ = false;
};

double f_eval(const SurrogateObjective& obj, const QuerySet& qset);

struct GreedyTrace {
    std::vector<int> chain;          // selection order
    std::vector<double> gains;       // marginal gain per step
    std::vector<double> values;      // f after each step
};

// Greedy maximization under a cardinality constraint; ties break
// toward the smallest pool index.
QuerySet greedy_maximize(const SurrogateObjective& obj, int k,
                         GreedyTrace* trace = nullptr);

// Lazy-greedy variant with cached marginal gains; produces the
// identical chain as greedy_maximize.
QuerySet greedy_maximize_lazy(const SurrogateObjective& obj, int k,
                              GreedyTrace* trace = nullptr);

struct SubmodularReport {
    int trials = 0;
    int monotonicity_violations = 0;
    int submodularity_violations = 0;
    double worst_monotonicity_margin = 0.0;   // min rho observed
    double worst_submodularity_margin = 0.0;  // min rho(Xq) - rho(Xq')
};

// Randomized certificate run over sampled (Xq subset of Xq', xi) triples:
// checks rho(Xq; xi) >= rho(Xq'; xi) - tol and rho(Xq; xi) >= -tol.
SubmodularReport check_submodularity(const SurrogateObjective& obj, int trials,
                                     std::uint64_t seed, double tol = 1e-9);

// Exact maximizer by enumeration; lexicographically smallest on ties.
// Requires C(n, k) <= 1e6.
QuerySet brute_force_max(const SurrogateObjective& obj, int k);

}  // namespace fir
