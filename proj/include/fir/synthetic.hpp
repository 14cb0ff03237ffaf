#pragma once

#include <cstdint>

#include "fir/model.hpp"
#include "fir/rng.hpp"

namespace fir {

// Diagonal-Gaussian mixture over feature space; one row per component.
struct MixtureSpec {
    VectorXd weights;   // component weights, sum to 1
    MatrixXd means;     // k x m
    MatrixXd stds;      // k x m, strictly positive

    void validate() const;
    VectorXd draw(Rng& rng) const;
};

// Labeling oracle: draws y ~ p(y|x, theta0). Model-faithful by
// construction, so there is no mis-specification in the simulations.
class LabelOracle {
public:
    LabelOracle(ModelParams theta0, std::uint64_t seed);

    int label(const VectorXd& x);
    const ModelParams& theta0() const { return theta0_; }

private:
    ModelParams theta0_;
    Rng rng_;
};

struct SyntheticSpec {
    int classes = 2;
    int features = 2;
    VectorXd theta0;          // explicit; empty = draw N(0, theta0_scale^2)
    double theta0_scale = 2.0;
    MixtureSpec mixture;      // empty = standard normal over features
    int pool_size = 500;
    int heldout_size = 500;
};

struct SyntheticData {
    MatrixXd pool;        // unlabeled covariates
    LabeledSet heldout;   // labeled with oracle draws, disjoint from pool
    ModelParams theta0;
};

// Samples covariates from the mixture and labels the held-out split
// from p(y|x, theta0); held-out draws are fresh, hence disjoint from
// the pool almost surely (asserted downstream).
SyntheticData gen_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace fir
