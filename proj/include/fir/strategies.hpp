#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fir/fisher.hpp"
#include "fir/simplex.hpp"
#include "fir/submodular.hpp"

namespace fir {

enum class StrategyKind { fukumizu, zhang, settles, hoi, chaudhuri, random_pick, entropy };

StrategyKind strategy_from_name(const std::string& name);
std::string strategy_name(StrategyKind kind);

struct StrategyConfig {
    StrategyKind kind = StrategyKind::random_pick;
    int batch = 1;                     // k
    double delta = kDefaultDelta;
    std::uint64_t seed = 0;

    // chaudhuri: lambda = 1 - k^{-mixing_exponent}; Frank-Wolfe tolerances
    double mixing_exponent = 1.0 / 6.0;
    FrankWolfeOptions fw;

    // hoi
    bool hoi_seed_labeled = false;        // seed the greedy chain with X_L
    bool hoi_surrogate_diagnostic = true; // run the surrogate-f greedy check

    // fukumizu proposal-family optimizer (diagonal Gaussian)
    int fk_budget = 256;     // samples per gradient estimate
    int fk_iters = 200;
    double fk_step = 0.05;
    double fk_grad_limit = 1e8;
};

struct QueryResult {
    std::vector<int> indices;       // selection order (pool-based kinds)
    MatrixXd samples;               // synthesized covariates (fukumizu)
    bool with_replacement = false;  // chaudhuri draws may repeat
    double objective = 0.0;         // objective value at selection
    std::vector<double> step_values;  // per-step objectives / marginal gains
    VectorXd weights;               // chaudhuri: the mixed PMF q~

    // hoi diagnostics: agreement between the exact-trace greedy and the
    // surrogate-f greedy, with the conditioning that governs it
    std::optional<bool> surrogate_first_match;
    double surrogate_objective_gap = 0.0;
    double query_fisher_condition = 0.0;
};

// Algorithm ranking pool points by sum_y p(y|x,theta) |score|^2 and
// taking the top k (batch mode sorts the whole pool by the objective).
QueryResult select_zhang(const ModelParams& params, const MatrixXd& pool, int k);

// Greedy argmin of tr[(I(theta,x) + delta I)^{-1} Ip] over the
// remaining pool; the per-step score ignores previously chosen queries.
QueryResult select_settles(const ModelParams& params, const MatrixXd& pool, int k,
                           double delta = kDefaultDelta);

// Greedy argmin of tr[I_hat(theta; Xq + {x})^{-1} Ip] with the
// accumulated query set inside the inverted matrix. The exact-trace
// path is authoritative; a surrogate-f greedy runs as a diagnostic.
QueryResult select_hoi(const ModelParams& params, const MatrixXd& pool, int k,
                       double delta = kDefaultDelta,
                       const MatrixXd* labeled_seed = nullptr,
                       bool surrogate_diagnostic = true);

// Simplex-weight optimization of the FIR objective followed by mixing
// with the uniform PMF (lambda = 1 - k^{-exponent}) and k i.i.d. draws
// with replacement.
QueryResult select_chaudhuri(const ModelParams& params, const MatrixXd& pool, int k,
                             double mixing_exponent = 1.0 / 6.0,
                             double delta = kDefaultDelta, std::uint64_t seed = 0,
                             const FrankWolfeOptions& fw = {});

// Parametric proposal optimization (diagonal Gaussian over feature
// space) by score-function gradient ascent on
// E_{q(x;alpha)}[ sum_y p(y|x,theta) |score|^2 ], then k draws from the
// fitted proposal. Returns synthesized samples, not pool indices.
QueryResult select_fukumizu(const ModelParams& params, int features, int k,
                            const StrategyConfig& cfg);

// Uncertainty sampling: top k by posterior entropy, ties by index.
QueryResult select_entropy(const ModelParams& params, const MatrixXd& pool, int k);

// Uniform without replacement, seeded.
QueryResult select_random(const MatrixXd& pool, int k, std::uint64_t seed);

// Dispatch on cfg.kind. labeled_x feeds hoi's optional chain seeding;
// fukumizu infers the feature count from the pool.
QueryResult select_queries(const ModelParams& params, const MatrixXd& pool,
                           const StrategyConfig& cfg,
                           const MatrixXd* labeled_x = nullptr);

// The per-point objective of zhang/fukumizu: sum_y p(y|x,theta)|score|^2
// = tr[I(theta, x)].
double point_information(const ModelParams& params, const VectorXd& x);

// Posterior entropy -sum_y p log p at theta.
double posterior_entropy(const ModelParams& params, const VectorXd& x);

}  // namespace fir
