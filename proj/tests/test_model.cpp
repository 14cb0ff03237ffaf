#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fir/model.hpp"
#include "fir/rng.hpp"
#include "oracles.hpp"

using namespace fir;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd scalar(double x) {
    VectorXd v(1);
    v << x;
    return v;
}

LabeledSet make_set(std::initializer_list<std::pair<double, int>> pairs) {
    LabeledSet data;
    data.x.resize(0, 1);
    for (const auto& [x, y] : pairs) data.append(scalar(x), y);
    return data;
}

}  // namespace

TEST_CASE("log-likelihood at theta=0 is -n log c") {
    for (int c : {2, 3, 5}) {
        ModelParams p = ModelParams::zeros(c, 2);
        LabeledSet data;
        data.x.resize(0, 2);
        Rng rng(3);
        for (int i = 0; i < 7; ++i)
            data.append(rng.normal_vector(2), 1 + rng.uniform_int(c));
        CHECK(log_likelihood(p, data) ==
              doctest::Approx(-7.0 * std::log(double(c))).epsilon(1e-12));
    }
}

TEST_CASE("log-likelihood of empty data is zero") {
    ModelParams p = ModelParams::zeros(2, 1);
    LabeledSet data;
    data.x.resize(0, 1);
    CHECK(log_likelihood(p, data) == 0.0);
}

TEST_CASE("binary logit=x at x=1: log sigma(1)") {
    ModelParams p;
    p.classes = 2;
    p.features = 1;
    p.theta = Eigen::Vector2d(1.0, 0.0);
    CHECK(log_likelihood(p, scalar(1.0), 1) ==
          doctest::Approx(-0.3132616875182228).epsilon(1e-9));
}

TEST_CASE("log-likelihood is never positive") {
    Rng rng(11);
    for (int t = 0; t < 50; ++t) {
        ModelParams p = oracle::random_model(2 + t % 3, 2, rng, 2.0);
        const VectorXd x = rng.normal_vector(2);
        CHECK(log_likelihood(p, x, 1 + t % p.classes) <= 0.0);
    }
}

TEST_CASE("dimension mismatch raises") {
    ModelParams p = ModelParams::zeros(2, 2);
    CHECK_THROWS_AS(log_likelihood(p, scalar(1.0), 1), std::invalid_argument);
    CHECK_THROWS_AS(score(p, scalar(1.0), 1), std::invalid_argument);
    CHECK_THROWS_AS(predict_proba(p, scalar(1.0)), std::invalid_argument);
    VectorXd bad(2);
    bad << 1.0, std::nan("");
    CHECK_THROWS_AS(predict_proba(p, bad), std::invalid_argument);
}

TEST_CASE("predict_proba: uniform at theta=0, stable under saturation") {
    ModelParams p = ModelParams::zeros(4, 3);
    const VectorXd probs = predict_proba(p, VectorXd::Zero(3));
    for (int j = 0; j < 4; ++j) CHECK(probs[j] == doctest::Approx(0.25).epsilon(1e-14));

    ModelParams hot;
    hot.classes = 2;
    hot.features = 1;
    hot.theta = Eigen::Vector2d(50.0, 0.0);
    const VectorXd ph = predict_proba(hot, scalar(1.0));
    CHECK(ph.allFinite());
    CHECK(ph[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ph[1] < 1e-20);
    CHECK(ph.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("predict_proba: three-class softmax(1,0,0)") {
    ModelParams p;
    p.classes = 3;
    p.features = 1;
    p.theta.resize(4);
    p.theta << 1.0, 0.0, 0.0, 0.0;  // logits (x, 0, ref 0) -> (1,0,0) at x=1
    const VectorXd probs = predict_proba(p, scalar(1.0));
    CHECK(probs[0] == doctest::Approx(0.5761168847658291).epsilon(1e-9));
    CHECK(probs[1] == doctest::Approx(0.21194155761708547).epsilon(1e-9));
    CHECK(probs[2] == doctest::Approx(0.21194155761708547).epsilon(1e-9));
}

TEST_CASE("probabilities sum to one") {
    Rng rng(5);
    for (int t = 0; t < 100; ++t) {
        ModelParams p = oracle::random_model(2 + t % 4, 3, rng, 3.0);
        const VectorXd probs = predict_proba(p, rng.normal_vector(3));
        CHECK(std::abs(probs.sum() - 1.0) < 1e-12);
        CHECK(probs.minCoeff() >= 0.0);
    }
}

TEST_CASE("score: zero mean under the model") {
    Rng rng(7);
    for (int t = 0; t < 50; ++t) {
        ModelParams p = oracle::random_model(2 + t % 3, 2, rng, 2.0);
        const VectorXd x = rng.normal_vector(2);
        const VectorXd probs = predict_proba(p, x);
        VectorXd mean = VectorXd::Zero(p.dim());
        for (int y = 1; y <= p.classes; ++y) mean += probs[y - 1] * score(p, x, y);
        CHECK(mean.lpNorm<Eigen::Infinity>() < 1e-12);
    }
}

TEST_CASE("score matches finite differences of the log-likelihood") {
    Rng rng(13);
    for (int t = 0; t < 100; ++t) {
        ModelParams p = oracle::random_model(2 + t % 3, 1 + t % 3, rng);
        const VectorXd x = rng.normal_vector(p.features);
        const int y = 1 + rng.uniform_int(p.classes);
        const VectorXd got = score(p, x, y);
        const VectorXd fd = oracle::fd_score(p, x, y);
        CHECK((got - fd).norm() <= 1e-6 * std::max(1.0, fd.norm()));
    }
}

TEST_CASE("score analytic value at theta=0") {
    ModelParams p = ModelParams::zeros(2, 1);
    const VectorXd g = score(p, scalar(1.0), 1);
    CHECK(g[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(g[1] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("hessian: symmetric, y-free, matches finite differences") {
    Rng rng(17);
    for (int t = 0; t < 100; ++t) {
        ModelParams p = oracle::random_model(2 + t % 3, 1 + t % 2, rng);
        const VectorXd x = rng.normal_vector(p.features);
        const MatrixXd h = hessian(p, x);
        CHECK((h - h.transpose()).norm() == 0.0);
        // same finite-difference result no matter which label seeds it
        const MatrixXd fd1 = oracle::fd_hessian(p, x, 1);
        const MatrixXd fd2 = oracle::fd_hessian(p, x, p.classes);
        CHECK((h - fd1).norm() <= 1e-5 * std::max(1.0, fd1.norm()));
        CHECK((fd1 - fd2).norm() <= 1e-7 * std::max(1.0, fd1.norm()));
    }
}

TEST_CASE("hessian analytic value at theta=0, binary") {
    ModelParams p = ModelParams::zeros(2, 1);
    const MatrixXd h = hessian(p, scalar(1.0));
    MatrixXd want(2, 2);
    want << -0.25, -0.25, -0.25, -0.25;
    CHECK((h - want).norm() < 1e-15);
}

TEST_CASE("hessian is negative semi-definite") {
    Rng rng(19);
    for (int t = 0; t < 100; ++t) {
        ModelParams p = oracle::random_model(2 + t % 4, 2, rng, 2.0);
        const MatrixXd h = hessian(p, rng.normal_vector(2));
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(h);
        CHECK(es.eigenvalues().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("fit_mle: symmetric two-point data has the zero solution") {
    const LabeledSet data = make_set({{0.0, 1}, {0.0, 2}});
    ModelParams init = ModelParams::zeros(2, 1);
    init.theta << 0.7, -0.3;
    const FitResult fit = fit_mle(data, init);
    CHECK(fit.converged);
    CHECK(fit.params.theta.lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("fit_mle: separable data stays finite and converges") {
    const LabeledSet data = make_set({{-2.0, 2}, {-1.0, 2}, {1.0, 1}, {2.0, 1}});
    const FitResult fit = fit_mle(data, ModelParams::zeros(2, 1));
    CHECK(fit.converged);
    CHECK(fit.params.theta.allFinite());
    CHECK(fit.grad_norm <= FitOptions{}.grad_tol);
}

TEST_CASE("fit_mle agrees with the first-order ascent oracle") {
    // 200 points from a fixed theta0 (seed 7)
    Rng rng(7);
    ModelParams truth;
    truth.classes = 3;
    truth.features = 2;
    truth.theta.resize(6);
    truth.theta << 1.0, -0.5, 0.3, -0.8, 0.6, -0.2;
    LabeledSet data;
    data.x.resize(0, 2);
    for (int i = 0; i < 200; ++i) {
        const VectorXd x = rng.normal_vector(2);
        const VectorXd probs = predict_proba(truth, x);
        data.append(x, 1 + rng.sample_pmf(probs));
    }
    const FitOptions opt;
    const FitResult fit = fit_mle(data, ModelParams::zeros(3, 2), opt);
    CHECK(fit.converged);
    const ModelParams ora = oracle::ascent_mle(data, ModelParams::zeros(3, 2), opt.ridge);
    CHECK((fit.params.theta - ora.theta).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("fit_mle is deterministic and flags exhausted iterations") {
    const LabeledSet data = make_set({{-1.0, 2}, {0.5, 1}, {2.0, 1}, {-0.3, 2}});
    FitOptions opt;
    const FitResult a = fit_mle(data, ModelParams::zeros(2, 1), opt);
    const FitResult b = fit_mle(data, ModelParams::zeros(2, 1), opt);
    CHECK(a.params.theta == b.params.theta);

    opt.max_iter = 1;
    opt.grad_tol = 1e-14;
    const FitResult c = fit_mle(data, ModelParams::zeros(2, 1), opt);
    CHECK_FALSE(c.converged);
    CHECK(c.params.theta.allFinite());

    LabeledSet empty;
    empty.x.resize(0, 1);
    CHECK_THROWS_AS(fit_mle(empty, ModelParams::zeros(2, 1)), std::invalid_argument);
}

TEST_CASE("fit_mle stationarity contract on random instances") {
    Rng rng(23);
    for (int t = 0; t < 10; ++t) {
        ModelParams truth = oracle::random_model(2 + t % 2, 2, rng);
        LabeledSet data;
        data.x.resize(0, 2);
        for (int i = 0; i < 50; ++i) {
            const VectorXd x = rng.normal_vector(2);
            data.append(x, 1 + rng.sample_pmf(predict_proba(truth, x)));
        }
        const FitOptions opt;
        const FitResult fit = fit_mle(data, ModelParams::zeros(truth.classes, 2), opt);
        if (fit.converged) {
            VectorXd g = VectorXd::Zero(truth.dim());
            for (int i = 0; i < data.size(); ++i)
                g += score(fit.params, data.x.row(i).transpose(), data.y[i]);
            g -= 2.0 * opt.ridge * fit.params.theta;
            CHECK(g.lpNorm<Eigen::Infinity>() <= opt.grad_tol * (1.0 + 1e-9));
        }
    }
}

TEST_CASE("predict: tie-break and argmax consistency") {
    ModelParams p = ModelParams::zeros(3, 1);
    CHECK(predict(p, scalar(0.4)) == 1);  // uniform -> smallest index

    ModelParams hot;
    hot.classes = 2;
    hot.features = 1;
    hot.theta = Eigen::Vector2d(-40.0, 0.0);  // saturates toward class 2 at x=1
    CHECK(predict(hot, scalar(1.0)) == 2);

    Rng rng(29);
    for (int t = 0; t < 50; ++t) {
        ModelParams q = oracle::random_model(2 + t % 3, 2, rng, 2.0);
        const VectorXd x = rng.normal_vector(2);
        const VectorXd probs = predict_proba(q, x);
        int arg = 0;
        for (int j = 1; j < q.classes; ++j)
            if (probs[j] > probs[arg]) arg = j;
        CHECK(predict(q, x) == arg + 1);
    }
}

TEST_CASE("model handles the bias-only case (no features)") {
    ModelParams p = ModelParams::zeros(2, 0);
    LabeledSet data;
    data.x.resize(0, 0);
    VectorXd none(0);
    data.append(none, 1);
    data.append(none, 1);
    data.append(none, 2);
    const FitResult fit = fit_mle(data, p);
    CHECK(fit.converged);
    // bias solves logit = log(2) for the 2:1 split
    CHECK(predict_proba(fit.params, none)[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
}
