#include "fir/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fir/rng.hpp"

namespace fir {

StrategyKind strategy_from_name(const std::string& name) {
    if (name == "fukumizu") return StrategyKind::fukumizu;
    if (name == "zhang") return StrategyKind::zhang;
    if (name == "settles") return StrategyKind::settles;
    if (name == "hoi") return StrategyKind::hoi;
    if (name == "chaudhuri") return StrategyKind::chaudhuri;
    if (name == "random") return StrategyKind::random_pick;
    if (name == "entropy") return StrategyKind::entropy;
    throw std::invalid_argument("unknown strategy: " + name);
}

std::string strategy_name(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::fukumizu: return "fukumizu";
        case StrategyKind::zhang: return "zhang";
        case StrategyKind::settles: return "settles";
        case StrategyKind::hoi: return "hoi";
        case StrategyKind::chaudhuri: return "chaudhuri";
        case StrategyKind::random_pick: return "random";
        case StrategyKind::entropy: return "entropy";
    }
    throw std::invalid_argument("unknown strategy kind");
}

double point_information(const ModelParams& params, const VectorXd& x) {
    const VectorXd probs = predict_proba(params, x);
    double acc = 0.0;
    for (int y = 1; y <= params.classes; ++y)
        acc += probs[y - 1] * score(params, x, y).squaredNorm();
    return acc;
}

double posterior_entropy(const ModelParams& params, const VectorXd& x) {
    const VectorXd probs = predict_proba(params, x);
    double h = 0.0;
    for (int j = 0; j < probs.size(); ++j)
        if (probs[j] > 0.0) h -= probs[j] * std::log(probs[j]);
    return h;
}

namespace {

void check_pool_k(const MatrixXd& pool, int k) {
    if (k < 1) throw std::invalid_argument("batch size k must be >= 1");
    if (k > pool.rows())
        throw std::invalid_argument("batch size k exceeds the pool size");
}

// Indices of the k best keys; `better(a, b)` orders a before b, ties
// resolve toward the smaller index.
std::vector<int> top_k_by(const VectorXd& key, int k, bool descending) {
    std::vector<int> order(key.size());
    std::iota(order.begin(), order.end(), 0);
    auto cmp = [&](int a, int b) {
        if (key[a] != key[b]) return descending ? key[a] > key[b] : key[a] < key[b];
        return a < b;
    };
    std::partial_sort(order.begin(), order.begin() + k, order.end(), cmp);
    order.resize(k);
    return order;
}

}  // namespace

QueryResult select_zhang(const ModelParams& params, const MatrixXd& pool, int k) {
    check_pool_k(pool, k);
    VectorXd u(pool.rows());
    for (int i = 0; i < pool.rows(); ++i)
        u[i] = point_information(params, pool.row(i).transpose());
    QueryResult res;
    res.indices = top_k_by(u, k, /*descending=*/true);
    res.objective = u[res.indices.front()];
    for (int i : res.indices) res.step_values.push_back(u[i]);
    return res;
}

QueryResult select_entropy(const ModelParams& params, const MatrixXd& pool, int k) {
    check_pool_k(pool, k);
    VectorXd h(pool.rows());
    for (int i = 0; i < pool.rows(); ++i)
        h[i] = posterior_entropy(params, pool.row(i).transpose());
    QueryResult res;
    res.indices = top_k_by(h, k, /*descending=*/true);
    res.objective = h[res.indices.front()];
    for (int i : res.indices) res.step_values.push_back(h[i]);
    return res;
}

QueryResult select_random(const MatrixXd& pool, int k, std::uint64_t seed) {
    check_pool_k(pool, k);
    Rng rng(seed);
    QueryResult res;
    res.indices = rng.sample_without_replacement(static_cast<int>(pool.rows()), k);
    return res;
}

QueryResult select_settles(const ModelParams& params, const MatrixXd& pool, int k,
                           double delta) {
    check_pool_k(pool, k);
    const FisherMatrix ip = fisher_mc(params, pool, delta, FisherSource::pool);
    const int n = static_cast<int>(pool.rows());
    VectorXd scorev(n);
    for (int i = 0; i < n; ++i) {
        FisherMatrix single;
        single.mat = conditional_fisher(params, pool.row(i).transpose());
        single.mat.diagonal().array() += delta;
        single.ridge = delta;
        single.source_size = 1;
        single.source = FisherSource::query;
        scorev[i] = fir_trace(single, ip);
    }
    QueryResult res;
    res.indices = top_k_by(scorev, k, /*descending=*/false);
    res.objective = scorev[res.indices.front()];
    for (int i : res.indices) res.step_values.push_back(scorev[i]);
    return res;
}

QueryResult select_hoi(const ModelParams& params, const MatrixXd& pool, int k,
                       double delta, const MatrixXd* labeled_seed,
                       bool surrogate_diagnostic) {
    check_pool_k(pool, k);
    const FisherMatrix ip = fisher_mc(params, pool, delta, FisherSource::pool);
    const int n = static_cast<int>(pool.rows());
    const int d = params.dim();

    std::vector<MatrixXd> bank;
    bank.reserve(n);
    for (int i = 0; i < n; ++i)
        bank.push_back(conditional_fisher(params, pool.row(i).transpose()));

    MatrixXd accum = MatrixXd::Zero(d, d);
    int accum_count = 0;
    if (labeled_seed && labeled_seed->rows() > 0) {
        for (int i = 0; i < labeled_seed->rows(); ++i)
            accum += conditional_fisher(params, labeled_seed->row(i).transpose());
        accum_count = static_cast<int>(labeled_seed->rows());
    }

    QueryResult res;
    std::vector<bool> taken(n, false);
    MatrixXd last_iq;
    for (int step = 0; step < k; ++step) {
        int best = -1;
        double best_val = 0.0;
        MatrixXd best_mat;
        for (int cand = 0; cand < n; ++cand) {
            if (taken[cand]) continue;
            FisherMatrix iq;
            iq.mat = (accum + bank[cand]) / static_cast<double>(accum_count + 1);
            iq.mat.diagonal().array() += delta;
            iq.ridge = delta;
            iq.source_size = accum_count + 1;
            iq.source = FisherSource::query;
            const double val = fir_trace(iq, ip);
            if (best < 0 || val < best_val) {
                best = cand;
                best_val = val;
                best_mat = iq.mat;
            }
        }
        taken[best] = true;
        accum += bank[best];
        ++accum_count;
        res.indices.push_back(best);
        res.step_values.push_back(best_val);
        last_iq = best_mat;
    }
    res.objective = res.step_values.back();

    {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(last_iq);
        res.query_fisher_condition =
            es.eigenvalues().maxCoeff() / std::max(es.eigenvalues().minCoeff(), 1e-300);
    }

    if (surrogate_diagnostic) {
        SurrogateObjective obj(params, pool, delta, k);
        GreedyTrace trace;
        const QuerySet sur = greedy_maximize(obj, k, &trace);
        res.surrogate_first_match = (trace.chain.front() == res.indices.front());
        // Objective gap between the two selections, measured on the
        // authoritative trace objective.
        FisherMatrix iq_sur;
        iq_sur.mat = MatrixXd::Zero(d, d);
        for (int i : sur.idx) iq_sur.mat += bank[i];
        iq_sur.mat /= static_cast<double>(sur.size());
        iq_sur.mat.diagonal().array() += delta;
        iq_sur.ridge = delta;
        res.surrogate_objective_gap = fir_trace(iq_sur, ip) - res.objective;
    }
    return res;
}

QueryResult select_chaudhuri(const ModelParams& params, const MatrixXd& pool, int k,
                             double mixing_exponent, double delta, std::uint64_t seed,
                             const FrankWolfeOptions& fw) {
    if (k < 1) throw std::invalid_argument("batch size k must be >= 1");
    const int n = static_cast<int>(pool.rows());
    if (n == 0) throw std::invalid_argument("select_chaudhuri: empty pool");

    const FisherMatrix ip = fisher_mc(params, pool, delta, FisherSource::pool);
    const ConditionalFisherBank bank(params, pool);
    FrankWolfeOptions opts = fw;
    opts.delta = delta;
    const SimplexWeights sol = solve_weights(bank, ip, opts);
    if (!sol.converged && !opts.allow_nonconverged)
        throw std::runtime_error(
            "select_chaudhuri: simplex solver did not reach the gap tolerance "
            "(gap " + std::to_string(sol.gap) + " after " +
            std::to_string(sol.iterations) + " iterations)");

    const double lambda = 1.0 - std::pow(static_cast<double>(k), -mixing_exponent);
    VectorXd mixed = lambda * sol.q + (1.0 - lambda) * VectorXd::Constant(n, 1.0 / n);

    Rng rng(seed);
    QueryResult res;
    res.with_replacement = true;
    res.weights = mixed;
    res.objective = sol.objective;
    for (int i = 0; i < k; ++i) res.indices.push_back(rng.sample_pmf(mixed));
    return res;
}

QueryResult select_fukumizu(const ModelParams& params, int features, int k,
                            const StrategyConfig& cfg) {
    if (k < 1) throw std::invalid_argument("batch size k must be >= 1");
    if (features < 1)
        throw std::invalid_argument("select_fukumizu: needs at least one feature");

    // alpha = (mean, log-std) of a diagonal Gaussian proposal.
    VectorXd mean = VectorXd::Zero(features);
    VectorXd log_std = VectorXd::Zero(features);

    for (int it = 0; it < cfg.fk_iters; ++it) {
        Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(it));
        const VectorXd sd = log_std.array().exp();
        VectorXd grad_mean = VectorXd::Zero(features);
        VectorXd grad_log_std = VectorXd::Zero(features);
        VectorXd vals(cfg.fk_budget);
        MatrixXd eps(cfg.fk_budget, features);
        for (int s = 0; s < cfg.fk_budget; ++s) {
            eps.row(s) = rng.normal_vector(features).transpose();
            const VectorXd x = mean + sd.cwiseProduct(eps.row(s).transpose());
            vals[s] = point_information(params, x);
        }
        const double baseline = vals.mean();
        for (int s = 0; s < cfg.fk_budget; ++s) {
            const double w = vals[s] - baseline;
            // grad log q: (x-mean)/sd^2 = eps/sd for the mean block,
            // eps^2 - 1 for the log-std block.
            grad_mean += w * eps.row(s).transpose().cwiseQuotient(sd);
            grad_log_std +=
                w * (eps.row(s).transpose().array().square() - 1.0).matrix();
        }
        grad_mean /= cfg.fk_budget;
        grad_log_std /= cfg.fk_budget;

        const double gnorm = std::sqrt(grad_mean.squaredNorm() + grad_log_std.squaredNorm());
        if (!std::isfinite(gnorm) || gnorm > cfg.fk_grad_limit)
            throw std::runtime_error(
                "select_fukumizu: gradient estimate blew up; increase fk_budget");
        const double clip = gnorm > 10.0 ? 10.0 / gnorm : 1.0;
        mean += cfg.fk_step * clip * grad_mean;
        log_std += cfg.fk_step * clip * grad_log_std;
    }

    Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(cfg.fk_iters) + 1);
    const VectorXd sd = log_std.array().exp();
    QueryResult res;
    res.samples.resize(k, features);
    for (int i = 0; i < k; ++i) {
        const VectorXd x = mean + sd.cwiseProduct(rng.normal_vector(features));
        res.samples.row(i) = x.transpose();
        res.step_values.push_back(point_information(params, x));
    }
    res.weights = mean;  // fitted proposal mean, for diagnostics
    res.objective =
        std::accumulate(res.step_values.begin(), res.step_values.end(), 0.0) / k;
    return res;
}

QueryResult select_queries(const ModelParams& params, const MatrixXd& pool,
                           const StrategyConfig& cfg, const MatrixXd* labeled_x) {
    switch (cfg.kind) {
        case StrategyKind::zhang:
            return select_zhang(params, pool, cfg.batch);
        case StrategyKind::entropy:
            return select_entropy(params, pool, cfg.batch);
        case StrategyKind::random_pick:
            return select_random(pool, cfg.batch, cfg.seed);
        case StrategyKind::settles:
            return select_settles(params, pool, cfg.batch, cfg.delta);
        case StrategyKind::hoi:
            return select_hoi(params, pool, cfg.batch, cfg.delta,
                              cfg.hoi_seed_labeled ? labeled_x : nullptr,
                              cfg.hoi_surrogate_diagnostic);
        case StrategyKind::chaudhuri:
            return select_chaudhuri(params, pool, cfg.batch, cfg.mixing_exponent,
                                    cfg.delta, cfg.seed, cfg.fw);
        case StrategyKind::fukumizu:
            return select_fukumizu(params, static_cast<int>(pool.cols()), cfg.batch, cfg);
    }
    throw std::invalid_argument("select_queries: unknown strategy kind");
}

}  // namespace fir
