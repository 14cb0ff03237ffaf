#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fir/theory.hpp"
#include "oracles.hpp"

using namespace fir;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// The 4-point-PMF binary spec used throughout (c=2, m=1, theta0=(1,0)).
SimSpec four_point_spec(std::uint64_t seed, std::vector<int> sizes, int reps) {
    SimSpec spec;
    spec.theta0.classes = 2;
    spec.theta0.features = 1;
    spec.theta0.theta = Eigen::Vector2d(1.0, 0.0);
    spec.train_q.support.resize(4, 1);
    spec.train_q.support << -2.0, -1.0, 1.0, 2.0;
    spec.train_q.weights = VectorXd::Constant(4, 0.25);
    spec.test_p.support = spec.train_q.support;
    spec.test_p.weights.resize(4);
    spec.test_p.weights << 0.1, 0.2, 0.3, 0.4;
    spec.sizes = std::move(sizes);
    spec.reps = reps;
    spec.seed = seed;
    return spec;
}

}  // namespace

TEST_CASE("exact PMF Fisher equals fisher_mc on matching support") {
    const SimSpec spec = four_point_spec(1, {100}, 10);
    const MatrixXd exact = exact_pmf_fisher(spec.theta0, spec.train_q);
    // uniform weights = plain Monte-Carlo average over the support
    const FisherMatrix mc = fisher_mc(spec.theta0, spec.train_q.support, 0.0);
    CHECK((exact - mc.mat).norm() < 1e-10);
}

TEST_CASE("SimSpec validation") {
    SimSpec bad = four_point_spec(1, {100, 100}, 10);
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = four_point_spec(1, {100}, 10);
    bad.train_q.weights[0] = 0.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("mle normality: covariance approaches the inverse Fisher") {
    const SimSpec spec = four_point_spec(11, {200, 5000}, 400);
    const ValidationReport rep = validate_mle_normality(spec);
    CHECK(rep.row("cov_rel_frob_n5000").pass);
    CHECK(rep.row("cov_rel_frob_n5000").estimate < 0.15);
    CHECK(rep.row("mean_norm_n5000").pass);
    CHECK(rep.row("error_shrinks_with_n").pass);
    CHECK(rep.nonconverged_fraction <= 0.01);
    CHECK_FALSE(rep.instability_flag);
}

TEST_CASE("llr case 1: probe variance matches the quadratic form") {
    const SimSpec spec = four_point_spec(13, {500, 4000}, 400);
    VectorXd probe(1);
    probe << 2.0;
    const ValidationReport rep = validate_llr_case1(spec, probe, 2);
    CHECK(rep.row("llr_var_n4000").pass);
    CHECK(rep.row("llr_mean_n4000").pass);

    // target doubles when the score outer product doubles: linearity of
    // the quadratic form under (x, y) with twice the score is implicit;
    // we verify the target equals grad^T Iq^{-1} grad computed here
    const MatrixXd iq = exact_pmf_fisher(spec.theta0, spec.train_q);
    const VectorXd g = score(spec.theta0, probe, 2);
    const double want = g.dot(iq.llt().solve(g));
    CHECK(rep.row("llr_var_n4000").target == doctest::Approx(want).epsilon(1e-12));
    CHECK(2.0 * want ==
          doctest::Approx(2.0 * rep.row("llr_var_n4000").target).epsilon(1e-12));
}

TEST_CASE("llr case 1 rejects zero-score probes") {
    const SimSpec spec = four_point_spec(13, {500}, 50);
    // no softmax pair has an exactly zero score, so forge one via the
    // precondition check: a saturated probe drives the score under the
    // tolerance used by the validator
    ModelParams hot = spec.theta0;
    SimSpec hspec = spec;
    hspec.theta0.theta = Eigen::Vector2d(400.0, 0.0);
    VectorXd probe(1);
    probe << 2.0;
    CHECK_THROWS_AS(validate_llr_case1(hspec, probe, 1), std::invalid_argument);
    (void)hot;
}

TEST_CASE("llr case 1: skewness shrinks with n (normality trend)") {
    const SimSpec spec = four_point_spec(17, {200, 8000}, 600);
    VectorXd probe(1);
    probe << 2.0;
    const ValidationReport rep = validate_llr_case1(spec, probe, 2);
    CHECK(rep.row("skewness_shrinks_with_n").estimate <
          rep.row("skewness_shrinks_with_n").target);
}

TEST_CASE("chisq variance formula: exact targets") {
    // d=1, Sigma=I, H=I: Var[(1/2) chi^2_1] = 1/2 exactly
    const MatrixXd one = MatrixXd::Identity(1, 1);
    const ValidationReport r1 = validate_llr_case2_chisq(1, one, one, 400000, 5);
    CHECK(r1.row("quadform_var").target == doctest::Approx(0.5));
    CHECK(r1.row("quadform_var").pass);
    CHECK(r1.row("quadform_mean").target == doctest::Approx(0.5));
    CHECK(r1.row("quadform_mean").pass);

    // Sigma=I, H=diag(1,2): target (1/2)(1+4) = 2.5
    MatrixXd h = MatrixXd::Zero(2, 2);
    h(0, 0) = 1.0;
    h(1, 1) = 2.0;
    const ValidationReport r2 =
        validate_llr_case2_chisq(2, MatrixXd::Identity(2, 2), h, 400000, 7);
    CHECK(r2.row("quadform_var").target == doctest::Approx(2.5));
    CHECK(r2.row("quadform_var").pass);
}

TEST_CASE("chisq variance formula: random SPD pair, d=4, seed 5") {
    Rng rng(5);
    const MatrixXd sigma = oracle::random_spd(4, rng);
    MatrixXd h = oracle::random_spd(4, rng);
    h -= 0.5 * MatrixXd::Identity(4, 4);  // symmetric, indefinite is fine
    const ValidationReport rep = validate_llr_case2_chisq(4, sigma, h, 1000000, 5);
    CHECK(rep.row("quadform_var").pass);
    const double est = rep.row("quadform_var").estimate;
    const double target = rep.row("quadform_var").target;
    CHECK(std::abs(est - target) < 0.05 * target);
}

TEST_CASE("fir bound: q = p gives RHS = d and a tight bound") {
    SimSpec spec = four_point_spec(19, {400, 2000}, 300);
    spec.test_p = spec.train_q;  // q = p
    const ValidationReport rep = validate_fir_bound(spec);
    CHECK(rep.row("bound").target == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(rep.row("bound").pass);
    CHECK(rep.row("bound").estimate <= 2.0 * 1.1);
    CHECK(rep.row("zero_score_mass").estimate == 0.0);
    CHECK(rep.row("equality").pass);
}

TEST_CASE("fir bound: shifting q away from informative mass raises the ratio") {
    SimSpec near = four_point_spec(23, {400}, 100);
    SimSpec far = four_point_spec(23, {400}, 100);
    // concentrate q on the flat region (|x| = 2 saturates the posterior)
    far.train_q.weights << 0.45, 0.05, 0.05, 0.45;
    near.train_q.weights << 0.05, 0.45, 0.45, 0.05;
    const MatrixXd ip = exact_pmf_fisher(near.theta0, near.test_p);
    const double rhs_near =
        exact_pmf_fisher(near.theta0, near.train_q).llt().solve(ip).trace();
    const double rhs_far =
        exact_pmf_fisher(far.theta0, far.train_q).llt().solve(ip).trace();
    CHECK(rhs_far > rhs_near);
}

TEST_CASE("fir bound: saturated probes form a detected zero-score region") {
    SimSpec spec = four_point_spec(29, {400, 1500}, 250);
    // a huge covariate saturates the posterior; its unlikely-class score
    // underflows to the zero-score region with mass p(x) * p(y|x)
    spec.test_p.support.resize(3, 1);
    spec.test_p.support << -1.0, 1.0, 60.0;
    spec.test_p.weights.resize(3);
    spec.test_p.weights << 0.25, 0.25, 0.5;
    const ValidationReport rep = validate_fir_bound(spec);
    CHECK(rep.row("zero_score_mass").estimate > 0.0);
    // the slack term certifies strictness: LHS's achievable supremum is
    // RHS minus a positive quantity
    CHECK(rep.row("zero_score_slack").estimate >= 0.0);
    CHECK(rep.row("bound").pass);
    CHECK(rep.row("bound").estimate < rep.row("bound").target);
}

TEST_CASE("replacement diagnostic: frequency and the beta factor") {
    CHECK((10.0 + 1.0) / (10.0 - 1.0) == doctest::Approx(11.0 / 9.0).epsilon(1e-15));

    SimSpec spec = four_point_spec(31, {100}, 60);
    const ValidationReport rep = diagnose_replacement(spec, {100, 400, 1600}, 10.0);
    const double f1 = rep.row("holds_freq_n100").estimate;
    const double f2 = rep.row("holds_freq_n400").estimate;
    const double f3 = rep.row("holds_freq_n1600").estimate;
    CHECK(f3 >= f1);  // non-decreasing trend on the standard spec
    CHECK(f2 >= 0.0);
    CHECK(f3 <= 1.0);
    CHECK_THROWS_AS(diagnose_replacement(spec, {100}, 5.0), std::invalid_argument);
}

TEST_CASE("replacement diagnostic: theta-hat = theta0 holds trivially") {
    const SimSpec spec = four_point_spec(31, {100}, 10);
    const MatrixXd iq = exact_pmf_fisher(spec.theta0, spec.train_q);
    const MatrixXd ip = exact_pmf_fisher(spec.theta0, spec.test_p);
    const double fir = iq.llt().solve(ip).trace();
    CHECK(fir <= (11.0 / 9.0) * fir);
}

TEST_CASE("training llr: d=1 model reports mean near 1/2") {
    // bias-only binary model: d = 1, so the stated 1/2 chi^2_1 limit and
    // the d/2 Wilks alternative coincide
    SimSpec spec;
    spec.theta0.classes = 2;
    spec.theta0.features = 0;
    spec.theta0.theta = VectorXd::Constant(1, 0.3);
    spec.train_q.support = MatrixXd(1, 0);
    spec.train_q.weights = VectorXd::Ones(1);
    spec.test_p = spec.train_q;
    spec.sizes = {4000};
    spec.reps = 800;
    spec.seed = 37;
    const ValidationReport rep = validate_training_llr(spec);
    const CheckRow& mean = rep.row("mean_vs_half_n4000");
    CHECK(mean.target == doctest::Approx(rep.row("mean_vs_wilks_n4000").target));
    CHECK(std::abs(mean.estimate - 0.5) < 0.1 * 0.5);
    CHECK(rep.row("ratio_positive").pass);
    // variance reported with an MC standard error
    CHECK(rep.row("var_vs_half_n4000").mc_se > 0.0);
}

TEST_CASE("training llr on d=2: mean tracks Wilks rather than 1/2") {
    const SimSpec spec = four_point_spec(41, {3000}, 400);
    const ValidationReport rep = validate_training_llr(spec);
    const double mean = rep.row("mean_vs_half_n3000").estimate;
    // d = 2: Wilks says mean d/2 = 1; the stated display says 1/2. The
    // report carries both targets; the simulation discriminates.
    CHECK(std::abs(mean - 1.0) < std::abs(mean - 0.5));
}

TEST_CASE("validators are deterministic and se shrinks like sqrt(2)") {
    const SimSpec a = four_point_spec(43, {400}, 150);
    const ValidationReport r1 = validate_mle_normality(a);
    const ValidationReport r2 = validate_mle_normality(a);
    CHECK(r1.row("cov_rel_frob_n400").estimate ==
          r2.row("cov_rel_frob_n400").estimate);

    SimSpec b = a;
    b.reps = 300;
    const ValidationReport r3 = validate_mle_normality(b);
    const double ratio = r1.row("mean_norm_n400").mc_se / r3.row("mean_norm_n400").mc_se;
    CHECK(ratio == doctest::Approx(std::sqrt(2.0)).epsilon(0.2));
}
