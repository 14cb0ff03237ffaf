#pragma once

#include <Eigen/Dense>

namespace fir {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

// Multinomial logistic regression over m features and c classes.
// theta stacks one weight block per non-reference class:
//   theta = [w_1; ...; w_{c-1}],  w_j in R^{m+1}  (features, then bias),
// so d = (c-1)(m+1). Class c is the reference class with logit 0.
struct ModelParams {
    VectorXd theta;
    int classes = 2;
    int features = 0;

    int dim() const { return (classes - 1) * (features + 1); }

    static ModelParams zeros(int classes, int features);
};

// Labeled pairs; rows of x are samples, labels are 1-based in {1, ..., c}.
struct LabeledSet {
    MatrixXd x;   // n x m
    VectorXi y;   // n

    int size() const { return static_cast<int>(x.rows()); }
    void append(const VectorXd& xi, int yi);
};

void validate_params(const ModelParams& p);
void validate_sample(const ModelParams& p, const VectorXd& x);
void validate_pair(const ModelParams& p, const VectorXd& x, int y);

// x augmented with the constant bias entry: [x; 1].
VectorXd augment(const VectorXd& x);

// Class logits (length c, reference class fixed at 0).
VectorXd logits(const ModelParams& p, const VectorXd& x);

// Softmax posterior p(y|x,theta), computed with log-sum-exp stabilization.
VectorXd predict_proba(const ModelParams& p, const VectorXd& x);

// log p(y|x,theta) for a single pair.
double log_likelihood(const ModelParams& p, const VectorXd& x, int y);

// Conditional log-likelihood of a labeled set (sum over pairs).
double log_likelihood(const ModelParams& p, const LabeledSet& data);

// Score: gradient of log p(y|x,theta) in theta. Block j equals
// (1[y==j] - p_j) * [x; 1].
VectorXd score(const ModelParams& p, const VectorXd& x, int y);

// Hessian of log p(y|x,theta) in theta; independent of y for this
// family, so no label argument. Symmetric negative semi-definite.
MatrixXd hessian(const ModelParams& p, const VectorXd& x);

// argmax_y p(y|x,theta); ties break toward the smallest class index.
int predict(const ModelParams& p, const VectorXd& x);

struct FitOptions {
    double grad_tol = 1e-8;   // infinity norm of the objective gradient
    int max_iter = 500;
    double ridge = 1e-8;      // eps in  l(theta) - eps*|theta|^2; keeps
                              // theta finite on separable data
    double newton_rcond_min = 1e-12;  // below this, fall back to ascent
};

struct FitResult {
    ModelParams params;
    bool converged = false;
    int iterations = 0;
    double grad_norm = 0.0;   // infinity norm at the returned iterate
    double objective = 0.0;
};

// Damped Newton MLE with backtracking line search; falls back to a
// gradient-ascent step when the Newton system is ill-conditioned.
// Deterministic given init and data order.
FitResult fit_mle(const LabeledSet& data, const ModelParams& init,
                  const FitOptions& opt = {});

}  // namespace fir
