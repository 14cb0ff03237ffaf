#include "fir/theory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fir/rng.hpp"

namespace fir {

void DiscretePmf::validate() const {
    if (support.rows() == 0) throw std::invalid_argument("DiscretePmf: no atoms");
    if (weights.size() != support.rows())
        throw std::invalid_argument("DiscretePmf: weight/atom count mismatch");
    if (weights.minCoeff() < 0.0)
        throw std::invalid_argument("DiscretePmf: negative weight");
    if (std::abs(weights.sum() - 1.0) > 1e-10)
        throw std::invalid_argument("DiscretePmf: weights must sum to 1");
}

void SimSpec::validate() const {
    validate_params(theta0);
    train_q.validate();
    test_p.validate();
    if (train_q.support.cols() != theta0.features ||
        test_p.support.cols() != theta0.features)
        throw std::invalid_argument("SimSpec: marginal feature dim mismatch");
    if (sizes.empty()) throw std::invalid_argument("SimSpec: no training sizes");
    for (std::size_t i = 1; i < sizes.size(); ++i)
        if (sizes[i] <= sizes[i - 1])
            throw std::invalid_argument("SimSpec: sizes must increase");
    if (reps < 2) throw std::invalid_argument("SimSpec: reps must be >= 2");
}

bool ValidationReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const CheckRow& r) { return r.pass || r.diagnostic; });
}

const CheckRow& ValidationReport::row(const std::string& name) const {
    for (const CheckRow& r : checks)
        if (r.name == name) return r;
    throw std::out_of_range("ValidationReport: no check named " + name);
}

MatrixXd exact_pmf_fisher(const ModelParams& theta, const DiscretePmf& pmf) {
    pmf.validate();
    MatrixXd acc = MatrixXd::Zero(theta.dim(), theta.dim());
    for (int i = 0; i < pmf.atoms(); ++i)
        acc += pmf.weights[i] * conditional_fisher(theta, pmf.support.row(i).transpose());
    return acc;
}

namespace {

// One training draw from q(x) p(y|x,theta0); the per-atom label
// distributions are computed once.
struct TrainingSampler {
    const SimSpec& spec;
    std::vector<VectorXd> atom_probs;

    explicit TrainingSampler(const SimSpec& s) : spec(s) {
        atom_probs.reserve(s.train_q.atoms());
        for (int a = 0; a < s.train_q.atoms(); ++a)
            atom_probs.push_back(
                predict_proba(s.theta0, s.train_q.support.row(a).transpose()));
    }

    LabeledSet draw(int n, Rng& rng) const {
        LabeledSet data;
        data.x.resize(n, spec.theta0.features);
        data.y.resize(n);
        for (int i = 0; i < n; ++i) {
            const int a = rng.sample_pmf(spec.train_q.weights);
            data.x.row(i) = spec.train_q.support.row(a);
            data.y[i] = 1 + rng.sample_pmf(atom_probs[a]);
        }
        return data;
    }
};

struct FitSweep {
    std::vector<ModelParams> fits;  // converged replicates only
    int attempted = 0;
    int dropped = 0;
};

FitSweep replicate_fits(const SimSpec& spec, int n, std::uint64_t level_salt) {
    FitSweep sweep;
    sweep.attempted = spec.reps;
    const TrainingSampler sampler(spec);
    const ModelParams init = ModelParams::zeros(spec.theta0.classes, spec.theta0.features);
    for (int r = 0; r < spec.reps; ++r) {
        Rng rng = Rng::stream(spec.seed + level_salt,
                              static_cast<std::uint64_t>(r));
        const LabeledSet data = sampler.draw(n, rng);
        const FitResult fit = fit_mle(data, init, spec.fit);
        if (fit.converged)
            sweep.fits.push_back(fit.params);
        else
            ++sweep.dropped;
    }
    return sweep;
}

void note_stability(ValidationReport& rep, const FitSweep& sweep) {
    const double frac =
        sweep.attempted > 0 ? static_cast<double>(sweep.dropped) / sweep.attempted : 0.0;
    rep.nonconverged_fraction = std::max(rep.nonconverged_fraction, frac);
    if (frac > 0.01) rep.instability_flag = true;
}

double sample_variance(const std::vector<double>& xs, double* mean_out = nullptr) {
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double v : xs) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : xs) ss += (v - mean) * (v - mean);
    if (mean_out) *mean_out = mean;
    return ss / (n - 1.0);
}

double skewness(const std::vector<double>& xs) {
    double mean = 0.0;
    const double var = sample_variance(xs, &mean);
    double m3 = 0.0;
    for (double v : xs) m3 += std::pow(v - mean, 3);
    m3 /= static_cast<double>(xs.size());
    return m3 / std::pow(var, 1.5);
}

}  // namespace

ValidationReport validate_mle_normality(const SimSpec& spec, double frob_tol) {
    spec.validate();
    ValidationReport rep;
    rep.validator = "mle_normality";

    const MatrixXd iq = exact_pmf_fisher(spec.theta0, spec.train_q);
    const MatrixXd target = iq.inverse();
    const int d = spec.theta0.dim();

    double prev_err = -1.0;
    for (std::size_t level = 0; level < spec.sizes.size(); ++level) {
        const int n = spec.sizes[level];
        const FitSweep sweep = replicate_fits(spec, n, level);
        note_stability(rep, sweep);
        const int r = static_cast<int>(sweep.fits.size());

        MatrixXd z(r, d);
        for (int i = 0; i < r; ++i)
            z.row(i) = std::sqrt(static_cast<double>(n)) *
                       (sweep.fits[i].theta - spec.theta0.theta).transpose();
        const Eigen::RowVectorXd mean = z.colwise().mean();
        const MatrixXd centered = z.rowwise() - mean;
        const MatrixXd cov = centered.transpose() * centered / (r - 1.0);

        const double err = (cov - target).norm() / target.norm();
        const bool last = level + 1 == spec.sizes.size();

        CheckRow row;
        row.name = "cov_rel_frob_n" + std::to_string(n);
        row.estimate = err;
        row.target = 0.0;
        row.tolerance = frob_tol;
        // rough sampling error of the covariance estimate itself
        row.mc_se = std::sqrt(2.0 / r);
        row.pass = err < frob_tol;
        row.diagnostic = !last;
        rep.checks.push_back(row);

        CheckRow mrow;
        mrow.name = "mean_norm_n" + std::to_string(n);
        mrow.estimate = mean.norm();
        mrow.target = 0.0;
        // se of the mean norm: sqrt(tr(cov)/r); zero-mean claim at 3 se
        mrow.mc_se = std::sqrt(cov.trace() / r);
        mrow.tolerance = 3.0 * mrow.mc_se;
        mrow.pass = mrow.estimate < mrow.tolerance;
        mrow.diagnostic = !last;
        rep.checks.push_back(mrow);

        if (last && prev_err >= 0.0) {
            CheckRow trend;
            trend.name = "error_shrinks_with_n";
            trend.estimate = err;
            trend.target = prev_err;
            trend.tolerance = 0.0;
            trend.pass = err < prev_err;
            rep.checks.push_back(trend);
        }
        prev_err = err;
    }
    return rep;
}

ValidationReport validate_llr_case1(const SimSpec& spec, const VectorXd& x, int y,
                                    double var_tol) {
    spec.validate();
    const VectorXd grad = score(spec.theta0, x, y);
    if (grad.norm() < 1e-12)
        throw std::invalid_argument("validate_llr_case1: probe pair has zero score");

    ValidationReport rep;
    rep.validator = "llr_case1";

    const MatrixXd iq = exact_pmf_fisher(spec.theta0, spec.train_q);
    Eigen::LLT<MatrixXd> llt(iq);
    const double target_var = grad.dot(llt.solve(grad));
    const double hess_trace = (llt.solve(hessian(spec.theta0, x))).trace();
    const double ll0 = log_likelihood(spec.theta0, x, y);

    double prev_skew = -1.0;
    for (std::size_t level = 0; level < spec.sizes.size(); ++level) {
        const int n = spec.sizes[level];
        const FitSweep sweep = replicate_fits(spec, n, level);
        note_stability(rep, sweep);

        std::vector<double> stats;
        stats.reserve(sweep.fits.size());
        for (const ModelParams& fit : sweep.fits)
            stats.push_back(std::sqrt(static_cast<double>(n)) *
                            (log_likelihood(fit, x, y) - ll0));

        double mean = 0.0;
        const double var = sample_variance(stats, &mean);
        const double r = static_cast<double>(stats.size());
        const bool last = level + 1 == spec.sizes.size();

        CheckRow vrow;
        vrow.name = "llr_var_n" + std::to_string(n);
        vrow.estimate = var;
        vrow.target = target_var;
        vrow.tolerance = var_tol;
        vrow.mc_se = var * std::sqrt(2.0 / (r - 1.0));
        vrow.pass = std::abs(var - target_var) < var_tol * target_var;
        vrow.diagnostic = !last;
        rep.checks.push_back(vrow);

        CheckRow mrow;
        mrow.name = "llr_mean_n" + std::to_string(n);
        mrow.estimate = mean;
        mrow.target = 0.0;
        mrow.mc_se = std::sqrt(var / r);
        // allow the known O(1/sqrt(n)) second-order drift (1/2) tr[H Iq^{-1}] / sqrt(n)
        mrow.tolerance =
            3.0 * mrow.mc_se + std::abs(hess_trace) / (2.0 * std::sqrt(double(n)));
        mrow.pass = std::abs(mean) < mrow.tolerance;
        mrow.diagnostic = !last;
        rep.checks.push_back(mrow);

        const double skew = std::abs(skewness(stats));
        if (last && prev_skew >= 0.0) {
            CheckRow srow;
            srow.name = "skewness_shrinks_with_n";
            srow.estimate = skew;
            srow.target = prev_skew;
            srow.pass = skew < prev_skew;
            srow.diagnostic = true;  // moment trend, noisy by nature
            rep.checks.push_back(srow);
        }
        prev_skew = skew;
    }
    return rep;
}

ValidationReport validate_llr_case2_chisq(int dims, const MatrixXd& sigma,
                                          const MatrixXd& h, long samples,
                                          std::uint64_t seed, double var_tol) {
    if (sigma.rows() != dims || sigma.cols() != dims || h.rows() != dims ||
        h.cols() != dims)
        throw std::invalid_argument("validate_llr_case2_chisq: dimension mismatch");
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(sigma);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
        throw std::invalid_argument("validate_llr_case2_chisq: sigma must be SPD");

    const MatrixXd root = es.operatorSqrt();
    const MatrixXd gamma = root * h * root;
    const double target_var = 0.5 * gamma.squaredNorm();
    const double target_mean = 0.5 * gamma.trace();

    Rng rng(seed);
    double mean = 0.0, m2 = 0.0;
    for (long i = 0; i < samples; ++i) {
        const VectorXd z = root * rng.normal_vector(dims);
        const double s = 0.5 * z.dot(h * z);
        const double delta = s - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (s - mean);
    }
    const double var = m2 / static_cast<double>(samples - 1);

    ValidationReport rep;
    rep.validator = "llr_case2_chisq";

    CheckRow vrow;
    vrow.name = "quadform_var";
    vrow.estimate = var;
    vrow.target = target_var;
    vrow.tolerance = var_tol;
    vrow.mc_se = var * std::sqrt(2.0 / static_cast<double>(samples));
    vrow.pass = std::abs(var - target_var) < var_tol * target_var;
    rep.checks.push_back(vrow);

    CheckRow mrow;
    mrow.name = "quadform_mean";
    mrow.estimate = mean;
    mrow.target = target_mean;
    mrow.mc_se = std::sqrt(var / static_cast<double>(samples));
    mrow.tolerance = 5.0 * mrow.mc_se;
    mrow.pass = std::abs(mean - target_mean) < mrow.tolerance;
    rep.checks.push_back(mrow);
    return rep;
}

ValidationReport validate_fir_bound(const SimSpec& spec, double bound_headroom,
                                    double equality_tol, double zero_score_tol) {
    spec.validate();
    ValidationReport rep;
    rep.validator = "fir_bound";

    const MatrixXd iq = exact_pmf_fisher(spec.theta0, spec.train_q);
    const MatrixXd ip = exact_pmf_fisher(spec.theta0, spec.test_p);
    Eigen::LLT<MatrixXd> llt(iq);
    const double rhs = llt.solve(ip).trace();

    // Enumerate the finite test joint: weights p(x) p(y|x,theta0).
    struct Pair {
        VectorXd x;
        int y;
        double w;
        double ll0;
        bool zero_score;
        double quadform;
    };
    std::vector<Pair> pairs;
    double r0_mass = 0.0, slack = 0.0;
    for (int a = 0; a < spec.test_p.atoms(); ++a) {
        const VectorXd x = spec.test_p.support.row(a).transpose();
        const VectorXd probs = predict_proba(spec.theta0, x);
        for (int y = 1; y <= spec.theta0.classes; ++y) {
            Pair pr;
            pr.x = x;
            pr.y = y;
            pr.w = spec.test_p.weights[a] * probs[y - 1];
            pr.ll0 = log_likelihood(spec.theta0, x, y);
            const VectorXd g = score(spec.theta0, x, y);
            pr.zero_score = g.norm() < zero_score_tol;
            pr.quadform = g.dot(llt.solve(g));
            if (pr.zero_score) {
                r0_mass += pr.w;
                slack += pr.w * pr.quadform;
            }
            pairs.push_back(std::move(pr));
        }
    }

    double lhs_last = 0.0;
    for (std::size_t level = 0; level < spec.sizes.size(); ++level) {
        const int n = spec.sizes[level];
        const FitSweep sweep = replicate_fits(spec, n, level);
        note_stability(rep, sweep);

        double lhs = 0.0;
        for (const Pair& pr : pairs) {
            if (pr.zero_score) continue;  // limit statistic is 0 on R0
            std::vector<double> stats;
            stats.reserve(sweep.fits.size());
            for (const ModelParams& fit : sweep.fits)
                stats.push_back(std::sqrt(static_cast<double>(n)) *
                                (log_likelihood(fit, pr.x, pr.y) - pr.ll0));
            lhs += pr.w * sample_variance(stats);
        }
        lhs_last = lhs;

        CheckRow row;
        row.name = "lhs_n" + std::to_string(n);
        row.estimate = lhs;
        row.target = rhs;
        row.tolerance = bound_headroom;
        row.mc_se = lhs * std::sqrt(2.0 / (sweep.fits.size() - 1.0));
        row.pass = lhs <= rhs * (1.0 + bound_headroom);
        row.diagnostic = level + 1 != spec.sizes.size();
        rep.checks.push_back(row);
    }

    CheckRow bound;
    bound.name = "bound";
    bound.estimate = lhs_last;
    bound.target = rhs;
    bound.tolerance = bound_headroom;
    bound.pass = lhs_last <= rhs * (1.0 + bound_headroom);
    rep.checks.push_back(bound);

    CheckRow mass;
    mass.name = "zero_score_mass";
    mass.estimate = r0_mass;
    mass.diagnostic = true;
    rep.checks.push_back(mass);

    CheckRow slack_row;
    slack_row.name = "zero_score_slack";
    slack_row.estimate = slack;
    slack_row.diagnostic = true;
    rep.checks.push_back(slack_row);

    if (r0_mass == 0.0) {
        CheckRow eq;
        eq.name = "equality";
        eq.estimate = std::abs(lhs_last - rhs) / rhs;
        eq.target = 0.0;
        eq.tolerance = equality_tol;
        eq.pass = eq.estimate < equality_tol;
        rep.checks.push_back(eq);
    }
    return rep;
}

ValidationReport diagnose_replacement(const SimSpec& spec,
                                      const std::vector<int>& n_primes, double beta) {
    spec.validate();
    if (beta < 10.0)
        throw std::invalid_argument("diagnose_replacement: beta must be >= 10");

    ValidationReport rep;
    rep.validator = "replacement";

    const MatrixXd iq0 = exact_pmf_fisher(spec.theta0, spec.train_q);
    const MatrixXd ip0 = exact_pmf_fisher(spec.theta0, spec.test_p);
    const double lhs = Eigen::LLT<MatrixXd>(iq0).solve(ip0).trace();
    const double factor = (beta + 1.0) / (beta - 1.0);

    for (std::size_t level = 0; level < n_primes.size(); ++level) {
        const int np = n_primes[level];
        const FitSweep sweep = replicate_fits(spec, np, 1000 + level);
        note_stability(rep, sweep);

        int holds = 0;
        for (const ModelParams& fit : sweep.fits) {
            const MatrixXd iqh = exact_pmf_fisher(fit, spec.train_q);
            const MatrixXd iph = exact_pmf_fisher(fit, spec.test_p);
            const double rhs = factor * Eigen::LLT<MatrixXd>(iqh).solve(iph).trace();
            if (lhs <= rhs) ++holds;
        }
        CheckRow row;
        row.name = "holds_freq_n" + std::to_string(np);
        row.estimate = static_cast<double>(holds) / sweep.fits.size();
        row.target = 1.0;
        row.diagnostic = true;
        row.pass = true;
        rep.checks.push_back(row);
    }
    return rep;
}

ValidationReport validate_training_llr(const SimSpec& spec) {
    spec.validate();
    ValidationReport rep;
    rep.validator = "training_llr";
    const int d = spec.theta0.dim();

    const TrainingSampler sampler(spec);
    for (std::size_t level = 0; level < spec.sizes.size(); ++level) {
        const int n = spec.sizes[level];
        const ModelParams init =
            ModelParams::zeros(spec.theta0.classes, spec.theta0.features);
        std::vector<double> stats;
        int dropped = 0;
        for (int r = 0; r < spec.reps; ++r) {
            Rng rng = Rng::stream(spec.seed + level, static_cast<std::uint64_t>(r));
            const LabeledSet data = sampler.draw(n, rng);
            const FitResult fit = fit_mle(data, init, spec.fit);
            if (!fit.converged) {
                ++dropped;
                continue;
            }
            stats.push_back(log_likelihood(fit.params, data) -
                            log_likelihood(spec.theta0, data));
        }
        FitSweep dummy;
        dummy.attempted = spec.reps;
        dummy.dropped = dropped;
        note_stability(rep, dummy);

        double mean = 0.0;
        const double var = sample_variance(stats, &mean);
        const double r = static_cast<double>(stats.size());
        const bool last = level + 1 == spec.sizes.size();
        const std::string sfx = "_n" + std::to_string(n);

        CheckRow mrow;
        mrow.name = "mean_vs_half" + sfx;
        mrow.estimate = mean;
        mrow.target = 0.5;  // (1/2) chi^2_1 mean, as stated
        mrow.mc_se = std::sqrt(var / r);
        mrow.diagnostic = true;
        mrow.pass = true;
        rep.checks.push_back(mrow);

        CheckRow wrow;
        wrow.name = "mean_vs_wilks" + sfx;
        wrow.estimate = mean;
        wrow.target = d / 2.0;  // (1/2) chi^2_d alternative
        wrow.mc_se = std::sqrt(var / r);
        wrow.diagnostic = true;
        wrow.pass = true;
        rep.checks.push_back(wrow);

        CheckRow vrow;
        vrow.name = "var_vs_half" + sfx;
        vrow.estimate = var;
        vrow.target = 0.5;
        vrow.mc_se = var * std::sqrt(2.0 / (r - 1.0));
        vrow.diagnostic = true;
        vrow.pass = true;
        rep.checks.push_back(vrow);

        CheckRow vwrow;
        vwrow.name = "var_vs_wilks" + sfx;
        vwrow.estimate = var;
        vwrow.target = d / 2.0;
        vwrow.mc_se = var * std::sqrt(2.0 / (r - 1.0));
        vwrow.diagnostic = true;
        vwrow.pass = true;
        rep.checks.push_back(vwrow);

        if (last) {
            CheckRow prow;
            prow.name = "ratio_positive";
            prow.estimate =
                static_cast<double>(std::count_if(stats.begin(), stats.end(),
                                                  [](double v) { return v > 0.0; })) /
                r;
            prow.target = 1.0;
            prow.pass = prow.estimate == 1.0;
            rep.checks.push_back(prow);
        }
    }
    return rep;
}

}  // namespace fir
