#include "fir/synthetic.hpp"

#include <stdexcept>

namespace fir {

void MixtureSpec::validate() const {
    if (weights.size() == 0) throw std::invalid_argument("MixtureSpec: no components");
    if (means.rows() != weights.size() || stds.rows() != weights.size())
        throw std::invalid_argument("MixtureSpec: component count mismatch");
    if (means.cols() != stds.cols())
        throw std::invalid_argument("MixtureSpec: mean/std dim mismatch");
    if (std::abs(weights.sum() - 1.0) > 1e-10)
        throw std::invalid_argument("MixtureSpec: weights must sum to 1");
    if (stds.minCoeff() <= 0.0)
        throw std::invalid_argument("MixtureSpec: degenerate component (std <= 0)");
}

VectorXd MixtureSpec::draw(Rng& rng) const {
    const int comp = rng.sample_pmf(weights);
    const int m = static_cast<int>(means.cols());
    VectorXd x(m);
    for (int j = 0; j < m; ++j)
        x[j] = means(comp, j) + stds(comp, j) * rng.normal();
    return x;
}

LabelOracle::LabelOracle(ModelParams theta0, std::uint64_t seed)
    : theta0_(std::move(theta0)), rng_(seed) {
    validate_params(theta0_);
}

int LabelOracle::label(const VectorXd& x) {
    const VectorXd probs = predict_proba(theta0_, x);
    return 1 + rng_.sample_pmf(probs);
}

SyntheticData gen_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
    if (spec.classes < 2 || spec.features < 1)
        throw std::invalid_argument("SyntheticSpec: need classes >= 2, features >= 1");
    if (spec.pool_size < 1 || spec.heldout_size < 0)
        throw std::invalid_argument("SyntheticSpec: bad split sizes");

    MixtureSpec mix = spec.mixture;
    if (mix.weights.size() == 0) {
        mix.weights = VectorXd::Ones(1);
        mix.means = MatrixXd::Zero(1, spec.features);
        mix.stds = MatrixXd::Ones(1, spec.features);
    }
    mix.validate();
    if (mix.means.cols() != spec.features)
        throw std::invalid_argument("SyntheticSpec: mixture feature dim mismatch");

    SyntheticData out;
    out.theta0.classes = spec.classes;
    out.theta0.features = spec.features;
    const int d = (spec.classes - 1) * (spec.features + 1);

    Rng rng = Rng::stream(seed, 0);
    if (spec.theta0.size() == 0) {
        out.theta0.theta = spec.theta0_scale * rng.normal_vector(d);
    } else {
        if (spec.theta0.size() != d)
            throw std::invalid_argument("SyntheticSpec: theta0 has wrong length");
        out.theta0.theta = spec.theta0;
    }
    validate_params(out.theta0);

    Rng pool_rng = Rng::stream(seed, 1);
    out.pool.resize(spec.pool_size, spec.features);
    for (int i = 0; i < spec.pool_size; ++i)
        out.pool.row(i) = mix.draw(pool_rng).transpose();

    Rng held_rng = Rng::stream(seed, 2);
    LabelOracle held_oracle(out.theta0, Rng::stream(seed, 3).next_u64());
    out.heldout.x.resize(spec.heldout_size, spec.features);
    out.heldout.y.resize(spec.heldout_size);
    for (int i = 0; i < spec.heldout_size; ++i) {
        const VectorXd x = mix.draw(held_rng);
        out.heldout.x.row(i) = x.transpose();
        out.heldout.y[i] = held_oracle.label(x);
    }
    return out;
}

}  // namespace fir
