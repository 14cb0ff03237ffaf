#include "fir/fisher.hpp"

#include <cmath>
#include <stdexcept>

namespace fir {

namespace {

// Underflow guard for 1/sqrt(p) and 1/|v|^2 scalings.
constexpr double kMinProb = 1e-290;

void check_spd_inputs(const FisherMatrix& a, const FisherMatrix& b) {
    if (a.mat.rows() != a.mat.cols() || b.mat.rows() != b.mat.cols())
        throw std::invalid_argument("FisherMatrix must be square");
    if (a.mat.rows() != b.mat.rows())
        throw std::invalid_argument("FisherMatrix dimension mismatch");
}

}  // namespace

MatrixXd conditional_fisher(const ModelParams& p, const VectorXd& x) {
    // Stack sqrt(p_y) * score(y) row-wise; the contribution is W^T W.
    const int d = p.dim();
    MatrixXd w(p.classes, d);
    const VectorXd probs = predict_proba(p, x);
    for (int y = 1; y <= p.classes; ++y)
        w.row(y - 1) = std::sqrt(probs[y - 1]) * score(p, x, y).transpose();
    return w.transpose() * w;
}

FisherMatrix fisher_mc(const ModelParams& p, const MatrixXd& pool, double delta,
                       FisherSource source) {
    validate_params(p);
    if (pool.rows() == 0) throw std::invalid_argument("fisher_mc: empty pool");
    if (pool.cols() != p.features)
        throw std::invalid_argument("fisher_mc: pool feature dim mismatch");
    if (delta < 0.0) throw std::invalid_argument("fisher_mc: delta must be >= 0");

    const int d = p.dim();
    MatrixXd acc = MatrixXd::Zero(d, d);
    for (int i = 0; i < pool.rows(); ++i)
        acc += conditional_fisher(p, pool.row(i).transpose());
    acc /= static_cast<double>(pool.rows());
    acc.diagonal().array() += delta;

    FisherMatrix out;
    out.mat = 0.5 * (acc + acc.transpose());  // exact symmetry
    out.ridge = delta;
    out.source_size = static_cast<int>(pool.rows());
    out.source = source;
    return out;
}

double fir_trace(const FisherMatrix& iq, const FisherMatrix& ip) {
    check_spd_inputs(iq, ip);
    Eigen::LLT<MatrixXd> llt(iq.mat);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error(
            "fir_trace: query Fisher matrix is not positive definite; "
            "add a delta ridge (fisher_mc with delta > 0)");
    const double t = llt.solve(ip.mat).trace();
    if (!std::isfinite(t)) throw std::runtime_error("fir_trace: non-finite result");
    return t;
}

std::pair<double, double> trace_bound_check(const FisherMatrix& iq,
                                            const FisherMatrix& ip) {
    check_spd_inputs(iq, ip);
    Eigen::LLT<MatrixXd> llt(iq.mat);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("trace_bound_check: first argument is not SPD");
    const int d = static_cast<int>(iq.mat.rows());
    const double lhs = llt.solve(ip.mat).trace();
    const double rhs = llt.solve(MatrixXd::Identity(d, d)).trace() * ip.mat.trace();
    return {lhs, rhs};
}

VectorXd v_vector(const ModelParams& p, const VectorXd& x, int y) {
    const VectorXd probs = predict_proba(p, x);
    const double py = probs[y - 1];
    if (py < kMinProb)
        throw std::runtime_error("v_vector: p(y|x,theta) underflows (saturated posterior)");
    return std::sqrt(py) * score(p, x, y);
}

double g_kernel(const ModelParams& p, const VectorXd& x, int y,
                const VectorXd& x_prime, int q_size) {
    if (q_size < 1) throw std::invalid_argument("g_kernel: q_size must be >= 1");
    const VectorXd v = v_vector(p, x, y);
    const double n2 = v.squaredNorm();
    if (n2 < kMinProb)
        throw std::runtime_error("g_kernel: zero v vector at (x, y)");
    double acc = 0.0;
    for (int yp = 1; yp <= p.classes; ++yp) {
        const double r = v.dot(v_vector(p, x_prime, yp)) / n2;
        acc += r * r;
    }
    return acc / static_cast<double>(q_size);
}

ScoreKernelCache::ScoreKernelCache(const ModelParams& p, const MatrixXd& pool) {
    validate_params(p);
    if (pool.cols() != p.features)
        throw std::invalid_argument("ScoreKernelCache: pool feature dim mismatch");
    n_ = static_cast<int>(pool.rows());
    c_ = p.classes;
    const int d = p.dim();
    v_.resize(n_ * c_, d);
    probs_.resize(n_, c_);
    vnorm2_.resize(n_ * c_);
    for (int i = 0; i < n_; ++i) {
        const VectorXd xi = pool.row(i).transpose();
        const VectorXd probs = predict_proba(p, xi);
        probs_.row(i) = probs.transpose();
        for (int y = 1; y <= c_; ++y) {
            if (probs[y - 1] < kMinProb)
                throw std::runtime_error("ScoreKernelCache: saturated posterior in pool");
            const int r = i * c_ + (y - 1);
            v_.row(r) = (std::sqrt(probs[y - 1]) * score(p, xi, y)).transpose();
            vnorm2_[r] = v_.row(r).squaredNorm();
        }
    }
}

double ScoreKernelCache::g(int i, int y, int j, int q_size) const {
    const int r = i * c_ + (y - 1);
    const double n2 = vnorm2_[r];
    if (n2 < kMinProb) throw std::runtime_error("ScoreKernelCache::g: zero v vector");
    double acc = 0.0;
    for (int yp = 0; yp < c_; ++yp) {
        const double t = v_.row(r).dot(v_.row(j * c_ + yp)) / n2;
        acc += t * t;
    }
    return acc / static_cast<double>(q_size);
}

}  // namespace fir
