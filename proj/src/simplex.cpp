#include "fir/simplex.hpp"

#include <cmath>
#include <stdexcept>

namespace fir {

namespace {

struct EigenPairs {
    VectorXd sigma;
    MatrixXd u;
};

EigenPairs decompose(const FisherMatrix& ip) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(ip.mat);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("solve_weights: eigendecomposition of ip failed");
    return {es.eigenvalues(), es.eigenvectors()};
}

void check_q(const ConditionalFisherBank& bank, const VectorXd& q) {
    if (q.size() != bank.size())
        throw std::invalid_argument("simplex weights length must match the bank");
}

double objective_at(const ConditionalFisherBank& bank, const EigenPairs& ep,
                    const VectorXd& q, double delta) {
    MatrixXd m = bank.mix(q);
    m.diagonal().array() += delta;
    Eigen::LLT<MatrixXd> llt(m);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("simplex objective: I_q(q) + delta I is singular");
    double f = 0.0;
    for (int j = 0; j < ep.sigma.size(); ++j) {
        const VectorXd w = llt.solve(ep.u.col(j));
        f += ep.sigma[j] * ep.u.col(j).dot(w);
    }
    return f;
}

VectorXd gradient_at(const ConditionalFisherBank& bank, const EigenPairs& ep,
                     const VectorXd& q, double delta) {
    MatrixXd m = bank.mix(q);
    m.diagonal().array() += delta;
    Eigen::LLT<MatrixXd> llt(m);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("simplex gradient: I_q(q) + delta I is singular");
    const int d = bank.dim();
    MatrixXd w(d, ep.sigma.size());
    for (int j = 0; j < ep.sigma.size(); ++j) w.col(j) = llt.solve(ep.u.col(j));
    VectorXd grad(bank.size());
    for (int i = 0; i < bank.size(); ++i) {
        double gi = 0.0;
        for (int j = 0; j < ep.sigma.size(); ++j)
            gi += ep.sigma[j] * w.col(j).dot(bank.at(i) * w.col(j));
        grad[i] = -gi;
    }
    return grad;
}

double gap_at(const VectorXd& grad, const VectorXd& q, int* vertex = nullptr) {
    int s = 0;
    for (int i = 1; i < grad.size(); ++i)
        if (grad[i] < grad[s]) s = i;  // ties keep the smaller index
    if (vertex) *vertex = s;
    return q.dot(grad) - grad[s];
}

}  // namespace

ConditionalFisherBank::ConditionalFisherBank(const ModelParams& params,
                                             const MatrixXd& pool) {
    if (pool.rows() == 0)
        throw std::invalid_argument("ConditionalFisherBank: empty pool");
    dim_ = params.dim();
    mats_.reserve(pool.rows());
    for (int i = 0; i < pool.rows(); ++i)
        mats_.push_back(conditional_fisher(params, pool.row(i).transpose()));
}

MatrixXd ConditionalFisherBank::mix(const VectorXd& q) const {
    check_q(*this, q);
    MatrixXd m = MatrixXd::Zero(dim_, dim_);
    for (int i = 0; i < size(); ++i) m += q[i] * mats_[i];
    return m;
}

double simplex_objective(const ConditionalFisherBank& bank, const FisherMatrix& ip,
                         const VectorXd& q, double delta) {
    check_q(bank, q);
    return objective_at(bank, decompose(ip), q, delta);
}

VectorXd simplex_gradient(const ConditionalFisherBank& bank, const FisherMatrix& ip,
                          const VectorXd& q, double delta) {
    check_q(bank, q);
    return gradient_at(bank, decompose(ip), q, delta);
}

double fw_gap(const ConditionalFisherBank& bank, const FisherMatrix& ip,
              const VectorXd& q, double delta) {
    check_q(bank, q);
    const EigenPairs ep = decompose(ip);
    return gap_at(gradient_at(bank, ep, q, delta), q);
}

SimplexWeights solve_weights(const ConditionalFisherBank& bank, const FisherMatrix& ip,
                             const FrankWolfeOptions& opt) {
    if (ip.mat.rows() != bank.dim())
        throw std::invalid_argument("solve_weights: ip dimension mismatch");
    const int n = bank.size();
    const EigenPairs ep = decompose(ip);

    VectorXd q = VectorXd::Constant(n, 1.0 / n);
    double f = objective_at(bank, ep, q, opt.delta);

    // Golden-section minimization of F along q + t * dir, t in [0, t_max].
    auto line_search = [&](const VectorXd& dir, double t_max) {
        auto phi = [&](double t) {
            return objective_at(bank, ep, q + t * dir, opt.delta);
        };
        const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
        const double tol = opt.line_search_tol * (1.0 + t_max);
        double a = 0.0, b = t_max;
        double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
        double f1 = phi(x1), f2 = phi(x2);
        while (b - a > tol) {
            if (f1 <= f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - inv_phi * (b - a);
                f1 = phi(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + inv_phi * (b - a);
                f2 = phi(x2);
            }
        }
        double t = 0.5 * (a + b);
        if (t_max - t <= tol) t = t_max;  // snap onto the face (drop step)
        return t;
    };

    // Away-step Frank-Wolfe: the toward-vertex step is standard FW, the
    // away step shrinks a heavy active coordinate and can drop it to
    // exactly zero, which avoids the O(1/t) crawl toward faces. The
    // reported certificate stays the plain FW duality gap.
    SimplexWeights out;
    for (int it = 0; it < opt.max_iter; ++it) {
        const VectorXd grad = gradient_at(bank, ep, q, opt.delta);
        int s = 0;
        const double gap = gap_at(grad, q, &s);
        if (gap <= opt.tol) {
            out.q = q;
            out.gap = gap;
            out.objective = f;
            out.iterations = it;
            out.converged = true;
            return out;
        }

        int away = -1;
        for (int i = 0; i < n; ++i)
            if (q[i] > 0.0 && (away < 0 || grad[i] > grad[away])) away = i;
        const double away_gap = grad[away] - q.dot(grad);

        VectorXd dir;
        double t_max;
        bool is_away = away_gap > gap && q[away] < 1.0;
        if (is_away) {
            dir = q;
            dir[away] -= 1.0;  // q - e_away
            t_max = q[away] / (1.0 - q[away]);
        } else {
            dir = -q;
            dir[s] += 1.0;  // e_s - q
            t_max = 1.0;
        }

        const double t = line_search(dir, t_max);
        q += t * dir;
        if (is_away && t == t_max) q[away] = 0.0;
        q = q.cwiseMax(0.0);
        q /= q.sum();  // counter drift; keeps feasibility to 1e-16
        f = objective_at(bank, ep, q, opt.delta);
        out.iterations = it + 1;
    }

    out.q = q;
    out.gap = gap_at(gradient_at(bank, ep, q, opt.delta), q);
    out.objective = f;
    out.converged = out.gap <= opt.tol;
    return out;
}

}  // namespace fir
