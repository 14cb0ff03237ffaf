#include "fir/submodular.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

#include "fir/rng.hpp"

namespace fir {

bool QuerySet::contains(int i) const {
    return std::binary_search(idx.begin(), idx.end(), i);
}

QuerySet QuerySet::of(std::vector<int> indices, int pool_size) {
    std::sort(indices.begin(), indices.end());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] < 0 || indices[i] >= pool_size)
            throw std::invalid_argument("QuerySet: index out of range");
        if (i > 0 && indices[i] == indices[i - 1])
            throw std::invalid_argument("QuerySet: duplicate index");
    }
    return QuerySet{std::move(indices)};
}

SurrogateObjective::SurrogateObjective(const ModelParams& params, const MatrixXd& pool,
                                       double delta, int g_norm)
    : cache_(params, pool), delta_(delta), g_norm_(g_norm) {
    if (delta < 0.0) throw std::invalid_argument("SurrogateObjective: delta must be >= 0");
    if (g_norm < 1) throw std::invalid_argument("SurrogateObjective: g_norm must be >= 1");
    const int n = cache_.pool_size();
    const int c = cache_.classes();
    base_.resize(n * c);
    for (int r = 0; r < n * c; ++r) base_[r] = delta_ / cache_.v_rows().row(r).squaredNorm();

    // Materialize the pairwise kernel when it fits comfortably.
    const long table = static_cast<long>(n) * c * n;
    if (table <= 4'000'000) {
        pair_g_.resize(n * c, n);
        const MatrixXd& v = cache_.v_rows();
        const MatrixXd dots = v * v.transpose();  // (nc) x (nc)
        for (int r = 0; r < n * c; ++r) {
            const double inv_n2 = 1.0 / v.row(r).squaredNorm();
            for (int j = 0; j < n; ++j) {
                double acc = 0.0;
                for (int yp = 0; yp < c; ++yp) {
                    const double t = dots(r, j * c + yp) * inv_n2;
                    acc += t * t;
                }
                pair_g_(r, j) = acc / g_norm_;
            }
        }
        have_table_ = true;
    }
}

double SurrogateObjective::pair_g(int i, int y, int j) const {
    if (have_table_) return pair_g_(i * classes() + (y - 1), j);
    return cache_.g(i, y, j, g_norm_);
}

double SurrogateObjective::base_denom(int i, int y) const {
    return base_[i * classes() + (y - 1)];
}

double f_eval(const SurrogateObjective& obj, const QuerySet& qset) {
    const int n = obj.pool_size();
    const int c = obj.classes();
    for (int i : qset.idx)
        if (i < 0 || i >= n) throw std::invalid_argument("f_eval: index out of range");
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        if (qset.contains(i)) continue;
        for (int y = 1; y <= c; ++y) {
            double denom = obj.base_denom(i, y);
            for (int j : qset.idx) denom += obj.pair_g(i, y, j);
            total -= 1.0 / denom;
        }
    }
    return total;
}

namespace {

// Denominator state for every (i, y); keeps greedy steps O(n c) after
// the per-candidate kernel lookups.
struct GreedyState {
    const SurrogateObjective& obj;
    VectorXd denom;                 // n*c
    std::vector<bool> member;
    double value;                   // current f

    explicit GreedyState(const SurrogateObjective& o)
        : obj(o), member(o.pool_size(), false) {
        const int n = o.pool_size();
        const int c = o.classes();
        denom.resize(n * c);
        value = 0.0;
        for (int i = 0; i < n; ++i)
            for (int y = 1; y <= c; ++y) {
                denom[i * c + (y - 1)] = o.base_denom(i, y);
                value -= 1.0 / denom[i * c + (y - 1)];
            }
    }

    double gain(int cand) const {
        const int n = obj.pool_size();
        const int c = obj.classes();
        double g = 0.0;
        for (int i = 0; i < n; ++i) {
            if (member[i]) continue;
            for (int y = 1; y <= c; ++y) {
                const double d0 = denom[i * c + (y - 1)];
                if (i == cand) {
                    g += 1.0 / d0;  // candidate's own term leaves the outer sum
                } else {
                    const double d1 = d0 + obj.pair_g(i, y, cand);
                    g += 1.0 / d0 - 1.0 / d1;
                }
            }
        }
        return g;
    }

    void add(int cand) {
        const int n = obj.pool_size();
        const int c = obj.classes();
        value += gain(cand);
        for (int i = 0; i < n; ++i) {
            if (member[i] || i == cand) continue;
            for (int y = 1; y <= c; ++y)
                denom[i * c + (y - 1)] += obj.pair_g(i, y, cand);
        }
        member[cand] = true;
    }
};

void record_step(GreedyTrace* trace, int pick, double gain, double value) {
    if (!trace) return;
    trace->chain.push_back(pick);
    trace->gains.push_back(gain);
    trace->values.push_back(value);
}

}  // namespace

QuerySet greedy_maximize(const SurrogateObjective& obj, int k, GreedyTrace* trace) {
    const int n = obj.pool_size();
    if (k < 1 || k > n) throw std::invalid_argument("greedy_maximize: k out of range");
    GreedyState state(obj);
    std::vector<int> chain;
    for (int step = 0; step < k; ++step) {
        int best = -1;
        double best_gain = 0.0;
        for (int cand = 0; cand < n; ++cand) {
            if (state.member[cand]) continue;
            const double g = state.gain(cand);
            if (best < 0 || g > best_gain) {
                best = cand;
                best_gain = g;
            }
        }
        state.add(best);
        chain.push_back(best);
        record_step(trace, best, best_gain, state.value);
    }
    return QuerySet::of(chain, n);
}

QuerySet greedy_maximize_lazy(const SurrogateObjective& obj, int k, GreedyTrace* trace) {
    const int n = obj.pool_size();
    if (k < 1 || k > n) throw std::invalid_argument("greedy_maximize_lazy: k out of range");
    GreedyState state(obj);

    // Max-heap of stale upper bounds; submodularity makes cached gains
    // valid upper bounds once a member is added. Ties resolve toward
    // the smaller index to match plain greedy.
    struct Entry {
        double gain;
        int idx;
        int stamp;
        bool operator<(const Entry& o) const {
            if (gain != o.gain) return gain < o.gain;
            return idx > o.idx;
        }
    };
    std::priority_queue<Entry> heap;
    for (int i = 0; i < n; ++i) heap.push({state.gain(i), i, 0});

    std::vector<int> chain;
    for (int step = 0; step < k; ++step) {
        for (;;) {
            Entry top = heap.top();
            heap.pop();
            if (top.stamp == step) {
                state.add(top.idx);
                chain.push_back(top.idx);
                record_step(trace, top.idx, top.gain, state.value);
                break;
            }
            top.gain = state.gain(top.idx);
            top.stamp = step;
            heap.push(top);
        }
    }
    return QuerySet::of(chain, n);
}

SubmodularReport check_submodularity(const SurrogateObjective& obj, int trials,
                                     std::uint64_t seed, double tol) {
    const int n = obj.pool_size();
    if (n < 3) throw std::invalid_argument("check_submodularity: pool must have >= 3 points");
    Rng rng(seed);
    SubmodularReport rep;
    rep.trials = trials;
    rep.worst_monotonicity_margin = std::numeric_limits<double>::infinity();
    rep.worst_submodularity_margin = std::numeric_limits<double>::infinity();

    for (int t = 0; t < trials; ++t) {
        // Random nested pair Xq subset of Xq', and xi outside Xq'.
        std::vector<int> small, large;
        int xi = -1;
        for (int i = 0; i < n; ++i) {
            const double u = rng.uniform();
            if (u < 0.25) {
                small.push_back(i);
                large.push_back(i);
            } else if (u < 0.5) {
                large.push_back(i);
            } else if (xi < 0 && u < 0.6) {
                xi = i;
            }
        }
        if (xi < 0) xi = n - 1;
        large.erase(std::remove(large.begin(), large.end(), xi), large.end());
        small.erase(std::remove(small.begin(), small.end(), xi), small.end());

        const QuerySet qs = QuerySet::of(small, n);
        const QuerySet ql = QuerySet::of(large, n);
        auto with = [n](const QuerySet& q, int extra) {
            std::vector<int> v = q.idx;
            v.push_back(extra);
            return QuerySet::of(std::move(v), n);
        };
        const double rho_small = f_eval(obj, with(qs, xi)) - f_eval(obj, qs);
        const double rho_large = f_eval(obj, with(ql, xi)) - f_eval(obj, ql);

        rep.worst_monotonicity_margin = std::min(rep.worst_monotonicity_margin, rho_small);
        rep.worst_monotonicity_margin = std::min(rep.worst_monotonicity_margin, rho_large);
        rep.worst_submodularity_margin =
            std::min(rep.worst_submodularity_margin, rho_small - rho_large);
        if (rho_small < -tol || rho_large < -tol) ++rep.monotonicity_violations;
        if (rho_small < rho_large - tol) ++rep.submodularity_violations;
    }
    return rep;
}

QuerySet brute_force_max(const SurrogateObjective& obj, int k) {
    const int n = obj.pool_size();
    if (k < 1 || k > n) throw std::invalid_argument("brute_force_max: k out of range");
    double combos = 1.0;
    for (int i = 0; i < k; ++i) combos *= static_cast<double>(n - i) / (i + 1);
    if (combos > 1e6)
        throw std::runtime_error("brute_force_max: combinatorial budget exceeded");

    std::vector<int> comb(k);
    for (int i = 0; i < k; ++i) comb[i] = i;
    std::vector<int> best;
    double best_val = -std::numeric_limits<double>::infinity();
    for (;;) {
        const double val = f_eval(obj, QuerySet::of(comb, n));
        if (val > best_val) {  // strict keeps the lexicographically first
            best_val = val;
            best = comb;
        }
        // next combination in lexicographic order
        int i = k - 1;
        while (i >= 0 && comb[i] == n - k + i) --i;
        if (i < 0) break;
        ++comb[i];
        for (int j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
    }
    return QuerySet::of(best, n);
}

}  // namespace fir
