#pragma once

#include <utility>

#include "fir/model.hpp"

namespace fir {

enum class FisherSource { pool, query, analytic };

// d x d Monte-Carlo Fisher information with its delta ridge.
struct FisherMatrix {
    MatrixXd mat;
    double ridge = 0.0;
    int source_size = 0;
    FisherSource source = FisherSource::analytic;
};

inline constexpr double kDefaultDelta = 0.01;

// Conditional Fisher information of one covariate:
//   I(theta, x) = sum_y p(y|x,theta) * score * score^T,
// the label-averaged outer product (PSD, no ridge).
MatrixXd conditional_fisher(const ModelParams& p, const VectorXd& x);

// Monte-Carlo Fisher over a pool (rows of `pool` are samples):
//   (1/|X|) sum_x I(theta, x) + delta * I_d.
// Symmetric PSD with min eigenvalue >= delta.
FisherMatrix fisher_mc(const ModelParams& p, const MatrixXd& pool, double delta,
                       FisherSource source = FisherSource::pool);

// tr[iq^{-1} ip] via a Cholesky solve; no explicit inverse is formed.
double fir_trace(const FisherMatrix& iq, const FisherMatrix& ip);

// Both sides of tr[A^{-1} B] <= tr[A^{-1}] tr[B] for SPD A, B.
std::pair<double, double> trace_bound_check(const FisherMatrix& iq,
                                            const FisherMatrix& ip);

// v_theta(x, y) = grad_theta p(y|x,theta) / sqrt(p(y|x,theta))
//              = sqrt(p) * score.  sum_y v v^T = I(theta, x).
VectorXd v_vector(const ModelParams& p, const VectorXd& x, int y);

// g kernel of the surrogate set objective:
//   (1/q_size) sum_{y'} [ v(x,y)^T v(x',y') / |v(x,y)|^2 ]^2  >= 0.
double g_kernel(const ModelParams& p, const VectorXd& x, int y,
                const VectorXd& x_prime, int q_size);

// Per-(sample, class) cache of v vectors and posterior probabilities
// for one (theta, pool); row i*c + (y-1) of v_rows() holds v(x_i, y).
class ScoreKernelCache {
public:
    ScoreKernelCache(const ModelParams& p, const MatrixXd& pool);

    int pool_size() const { return n_; }
    int classes() const { return c_; }
    int dim() const { return static_cast<int>(v_.cols()); }

    const MatrixXd& v_rows() const { return v_; }
    double prob(int i, int y) const { return probs_(i, y - 1); }
    double vnorm2(int i, int y) const { return vnorm2_[i * c_ + (y - 1)]; }
    Eigen::RowVectorXd v(int i, int y) const { return v_.row(i * c_ + (y - 1)); }

    // g kernel between cached entries.
    double g(int i, int y, int j, int q_size) const;

private:
    int n_ = 0, c_ = 0;
    MatrixXd v_;        // (n*c) x d
    MatrixXd probs_;    // n x c
    VectorXd vnorm2_;   // n*c
};

}  // namespace fir
