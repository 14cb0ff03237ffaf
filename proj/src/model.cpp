#include "fir/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fir {

ModelParams ModelParams::zeros(int classes, int features) {
    ModelParams p;
    p.classes = classes;
    p.features = features;
    p.theta = VectorXd::Zero((classes - 1) * (features + 1));
    validate_params(p);
    return p;
}

void LabeledSet::append(const VectorXd& xi, int yi) {
    if (x.rows() == 0 && x.cols() == 0) x.resize(0, xi.size());
    if (xi.size() != x.cols())
        throw std::invalid_argument("LabeledSet::append: feature dim mismatch");
    x.conservativeResize(x.rows() + 1, Eigen::NoChange);
    x.row(x.rows() - 1) = xi.transpose();
    y.conservativeResize(y.size() + 1);
    y[y.size() - 1] = yi;
}

void validate_params(const ModelParams& p) {
    if (p.classes < 2) throw std::invalid_argument("ModelParams: classes must be >= 2");
    if (p.features < 0) throw std::invalid_argument("ModelParams: features must be >= 0");
    if (p.theta.size() != p.dim())
        throw std::invalid_argument("ModelParams: theta has size " +
                                    std::to_string(p.theta.size()) + ", expected " +
                                    std::to_string(p.dim()));
    if (!p.theta.allFinite())
        throw std::invalid_argument("ModelParams: theta has non-finite entries");
}

void validate_sample(const ModelParams& p, const VectorXd& x) {
    if (x.size() != p.features)
        throw std::invalid_argument("sample has " + std::to_string(x.size()) +
                                    " features, model expects " +
                                    std::to_string(p.features));
    if (!x.allFinite())
        throw std::invalid_argument("sample has non-finite entries");
}

void validate_pair(const ModelParams& p, const VectorXd& x, int y) {
    validate_sample(p, x);
    if (y < 1 || y > p.classes)
        throw std::invalid_argument("label " + std::to_string(y) +
                                    " outside 1.." + std::to_string(p.classes));
}

VectorXd augment(const VectorXd& x) {
    VectorXd xa(x.size() + 1);
    xa.head(x.size()) = x;
    xa[x.size()] = 1.0;
    return xa;
}

VectorXd logits(const ModelParams& p, const VectorXd& x) {
    validate_sample(p, x);
    const int b = p.features + 1;
    const VectorXd xa = augment(x);
    VectorXd z(p.classes);
    for (int j = 0; j < p.classes - 1; ++j)
        z[j] = p.theta.segment(j * b, b).dot(xa);
    z[p.classes - 1] = 0.0;
    return z;
}

VectorXd predict_proba(const ModelParams& p, const VectorXd& x) {
    validate_params(p);
    VectorXd z = logits(p, x);
    const double zmax = z.maxCoeff();
    VectorXd e = (z.array() - zmax).exp();
    return e / e.sum();
}

double log_likelihood(const ModelParams& p, const VectorXd& x, int y) {
    validate_pair(p, x, y);
    const VectorXd z = logits(p, x);
    const double zmax = z.maxCoeff();
    const double lse = zmax + std::log((z.array() - zmax).exp().sum());
    const double ll = z[y - 1] - lse;
    if (!std::isfinite(ll)) throw std::runtime_error("log_likelihood: non-finite value");
    return ll;
}

double log_likelihood(const ModelParams& p, const LabeledSet& data) {
    if (data.y.size() != data.x.rows())
        throw std::invalid_argument("LabeledSet: label/sample count mismatch");
    double total = 0.0;
    for (int i = 0; i < data.size(); ++i)
        total += log_likelihood(p, data.x.row(i).transpose(), data.y[i]);
    return total;
}

VectorXd score(const ModelParams& p, const VectorXd& x, int y) {
    validate_pair(p, x, y);
    const int b = p.features + 1;
    const VectorXd xa = augment(x);
    const VectorXd probs = predict_proba(p, x);
    VectorXd g(p.dim());
    for (int j = 0; j < p.classes - 1; ++j) {
        const double indicator = (y == j + 1) ? 1.0 : 0.0;
        g.segment(j * b, b) = (indicator - probs[j]) * xa;
    }
    return g;
}

MatrixXd hessian(const ModelParams& p, const VectorXd& x) {
    validate_sample(p, x);
    const int b = p.features + 1;
    const int k = p.classes - 1;
    const VectorXd xa = augment(x);
    const MatrixXd outer = xa * xa.transpose();
    const VectorXd probs = predict_proba(p, x);
    MatrixXd h(p.dim(), p.dim());
    for (int j = 0; j < k; ++j)
        for (int l = 0; l < k; ++l) {
            const double w = (j == l ? probs[j] : 0.0) - probs[j] * probs[l];
            h.block(j * b, l * b, b, b) = -w * outer;
        }
    return h;
}

int predict(const ModelParams& p, const VectorXd& x) {
    const VectorXd probs = predict_proba(p, x);
    int best = 0;
    for (int j = 1; j < p.classes; ++j)
        if (probs[j] > probs[best]) best = j;
    return best + 1;
}

namespace {

// Batched fit internals: everything is computed from the n x (m+1)
// augmented design matrix so the solver cost is a handful of GEMMs per
// Newton iteration instead of per-sample loops.
struct FitWork {
    MatrixXd xa;      // n x (m+1)
    VectorXi y;
    int classes;

    MatrixXd probs(const VectorXd& theta) const {
        const int n = static_cast<int>(xa.rows());
        const int b = static_cast<int>(xa.cols());
        const int k = classes - 1;
        MatrixXd z(n, classes);
        z.leftCols(k) = xa * Eigen::Map<const MatrixXd>(theta.data(), b, k);
        z.col(k).setZero();
        const VectorXd zmax = z.rowwise().maxCoeff();
        z.colwise() -= zmax;
        MatrixXd e = z.array().exp().matrix();
        const VectorXd sums = e.rowwise().sum();
        e.array().colwise() /= sums.array();
        return e;
    }

    double objective(const VectorXd& theta, double ridge) const {
        const int n = static_cast<int>(xa.rows());
        const int b = static_cast<int>(xa.cols());
        const int k = classes - 1;
        MatrixXd z(n, classes);
        z.leftCols(k) = xa * Eigen::Map<const MatrixXd>(theta.data(), b, k);
        z.col(k).setZero();
        const VectorXd zmax = z.rowwise().maxCoeff();
        double ll = 0.0;
        for (int i = 0; i < n; ++i) {
            const double lse =
                zmax[i] + std::log((z.row(i).array() - zmax[i]).exp().sum());
            ll += z(i, y[i] - 1) - lse;
        }
        return ll - ridge * theta.squaredNorm();
    }

    VectorXd gradient(const VectorXd& theta, double ridge) const {
        const int n = static_cast<int>(xa.rows());
        const int b = static_cast<int>(xa.cols());
        const int k = classes - 1;
        MatrixXd resid = -probs(theta).leftCols(k);
        for (int i = 0; i < n; ++i)
            if (y[i] <= k) resid(i, y[i] - 1) += 1.0;
        const MatrixXd g = xa.transpose() * resid;  // b x k
        VectorXd out = Eigen::Map<const VectorXd>(g.data(), b * k);
        out -= 2.0 * ridge * theta;
        return out;
    }

    MatrixXd hessian(const VectorXd& theta, double ridge) const {
        const int b = static_cast<int>(xa.cols());
        const int k = classes - 1;
        const MatrixXd p = probs(theta);
        MatrixXd h(b * k, b * k);
        for (int j = 0; j < k; ++j)
            for (int l = j; l < k; ++l) {
                VectorXd w;
                if (j == l)
                    w = (p.col(j).array() * (1.0 - p.col(j).array())).matrix();
                else
                    w = (-p.col(j).array() * p.col(l).array()).matrix();
                const MatrixXd block =
                    -(xa.array().colwise() * w.array()).matrix().transpose() * xa;
                h.block(j * b, l * b, b, b) = block;
                if (l != j) h.block(l * b, j * b, b, b) = block.transpose();
            }
        h.diagonal().array() -= 2.0 * ridge;
        return h;
    }
};

}  // namespace

FitResult fit_mle(const LabeledSet& data, const ModelParams& init, const FitOptions& opt) {
    validate_params(init);
    if (data.size() < 1) throw std::invalid_argument("fit_mle: empty training set");
    if (data.x.cols() != init.features)
        throw std::invalid_argument("fit_mle: feature dim mismatch");
    if (opt.grad_tol <= 0.0 || opt.max_iter < 1)
        throw std::invalid_argument("fit_mle: grad_tol must be > 0 and max_iter >= 1");

    FitWork work;
    work.xa.resize(data.size(), init.features + 1);
    work.xa.leftCols(init.features) = data.x;
    work.xa.col(init.features).setOnes();
    work.y = data.y;
    work.classes = init.classes;

    VectorXd theta = init.theta;
    double obj = work.objective(theta, opt.ridge);
    VectorXd grad = work.gradient(theta, opt.ridge);

    FitResult res;
    res.iterations = 0;
    for (int it = 0; it < opt.max_iter; ++it) {
        if (grad.lpNorm<Eigen::Infinity>() <= opt.grad_tol) break;

        // Newton direction on the concave objective: solve (-H) dir = grad.
        MatrixXd neg_h = -work.hessian(theta, opt.ridge);
        Eigen::LDLT<MatrixXd> ldlt(neg_h);
        VectorXd dir;
        bool use_newton = ldlt.info() == Eigen::Success && ldlt.isPositive() &&
                          ldlt.rcond() > opt.newton_rcond_min;
        if (use_newton) {
            dir = ldlt.solve(grad);
            if (!dir.allFinite() || grad.dot(dir) <= 0.0) use_newton = false;
        }
        if (!use_newton) dir = grad;

        const double slope = grad.dot(dir);
        double step = 1.0;
        double trial_obj = 0.0;
        VectorXd trial;
        bool improved = false;
        for (int bt = 0; bt < 60; ++bt) {
            trial = theta + step * dir;
            trial_obj = work.objective(trial, opt.ridge);
            if (std::isnan(trial_obj))
                throw std::runtime_error("fit_mle: NaN objective in line search");
            if (trial_obj >= obj + 1e-4 * step * slope) {
                improved = true;
                break;
            }
            step *= 0.5;
        }
        ++res.iterations;
        if (!improved) break;  // stalled; report best iterate below
        theta = trial;
        obj = trial_obj;
        grad = work.gradient(theta, opt.ridge);
    }

    res.params = init;
    res.params.theta = theta;
    res.grad_norm = grad.lpNorm<Eigen::Infinity>();
    res.converged = res.grad_norm <= opt.grad_tol;
    res.objective = obj;
    return res;
}

}  // namespace fir
