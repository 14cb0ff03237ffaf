#pragma once

#include <vector>

#include "fir/fisher.hpp"

namespace fir {

// Per-pool-point conditional Fisher matrices I(theta, x_i).
class ConditionalFisherBank {
public:
    ConditionalFisherBank(const ModelParams& params, const MatrixXd& pool);

    int size() const { return static_cast<int>(mats_.size()); }
    int dim() const { return dim_; }
    const MatrixXd& at(int i) const { return mats_[i]; }

    // sum_i q_i I(theta, x_i)
    MatrixXd mix(const VectorXd& q) const;

private:
    std::vector<MatrixXd> mats_;
    int dim_ = 0;
};

struct SimplexWeights {
    VectorXd q;
    double gap = 0.0;       // Frank-Wolfe duality gap at return
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct FrankWolfeOptions {
    double tol = 1e-6;          // stop when the duality gap falls below
    int max_iter = 50000;
    double delta = kDefaultDelta;  // ridge inside I_q(q)
    double line_search_tol = 1e-10;
    bool allow_nonconverged = false;  // callers may accept the best iterate
};

// Minimize  F(q) = sum_j sigma_j u_j^T (I_q(q) + delta I)^{-1} u_j
// over the probability simplex, where I_q(q) = sum_i q_i I(theta, x_i)
// and (sigma_j, u_j) eigendecompose ip. Frank-Wolfe from the uniform
// start with exact golden-section line search; the returned gap is a
// convergence certificate (gap = 0 iff optimal).
SimplexWeights solve_weights(const ConditionalFisherBank& bank, const FisherMatrix& ip,
                             const FrankWolfeOptions& opt = {});

// F(q) and the duality gap max_i <-grad F(q), e_i - q> at a feasible q.
double simplex_objective(const ConditionalFisherBank& bank, const FisherMatrix& ip,
                         const VectorXd& q, double delta = kDefaultDelta);
double fw_gap(const ConditionalFisherBank& bank, const FisherMatrix& ip,
              const VectorXd& q, double delta = kDefaultDelta);

// grad F(q):  dF/dq_i = -sum_j sigma_j (u_j^T M^{-1} I(theta,x_i) M^{-1} u_j),
// with M = I_q(q) + delta I.
VectorXd simplex_gradient(const ConditionalFisherBank& bank, const FisherMatrix& ip,
                          const VectorXd& q, double delta = kDefaultDelta);

}  // namespace fir
