#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gaze2afc/error.hpp"
#include "gaze2afc/inference.hpp"
#include "gaze2afc/rng.hpp"

namespace gaze2afc::evidence {

namespace detail {

inline double logsumexp(const Eigen::VectorXd& v) {
    const double m = v.maxCoeff();
    if (!std::isfinite(m)) return m; // all -inf
    return m + std::log((v.array() - m).exp().sum());
}

inline double logaddexp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

/// Moment-matched multivariate normal used as the bridge proposal.
struct MvnProposal {
    Eigen::VectorXd mean;
    Eigen::MatrixXd chol_l;
    double log_norm = 0.0; // log of the density's normalizing constant

    static MvnProposal fit(const Eigen::MatrixXd& draws) {
        if (draws.rows() < 4) throw Error("too few draws to fit a proposal");
        MvnProposal p;
        p.mean = draws.colwise().mean();
        const Eigen::MatrixXd centered = draws.rowwise() - p.mean.transpose();
        Eigen::MatrixXd cov = centered.transpose() * centered / double(draws.rows() - 1);
        Eigen::LLT<Eigen::MatrixXd> llt(cov);
        if (llt.info() != Eigen::Success) {
            cov.diagonal().array() += 1e-10; // degenerate sample covariance
            llt.compute(cov);
            if (llt.info() != Eigen::Success) throw ProposalMismatch("posterior covariance is singular");
        }
        p.chol_l = llt.matrixL();
        double log_det_half = 0.0;
        for (Eigen::Index i = 0; i < p.chol_l.rows(); ++i) log_det_half += std::log(p.chol_l(i, i));
        p.log_norm = -0.5 * double(p.chol_l.rows()) * std::log(2.0 * M_PI) - log_det_half;
        return p;
    }

    double logpdf(const Eigen::VectorXd& x) const {
        const Eigen::VectorXd z = chol_l.triangularView<Eigen::Lower>().solve(x - mean);
        return log_norm - 0.5 * z.squaredNorm();
    }

    Eigen::VectorXd sample(Rng& rng) const {
        Eigen::VectorXd z(mean.size());
        for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
        return mean + chol_l * z;
    }
};

inline double median_of(Eigen::VectorXd v) {
    std::vector<double> w(v.data(), v.data() + v.size());
    const std::size_t n = w.size();
    std::nth_element(w.begin(), w.begin() + n / 2, w.end());
    double hi = w[n / 2];
    if (n % 2 == 1) return hi;
    std::nth_element(w.begin(), w.begin() + n / 2 - 1, w.end());
    return (w[n / 2 - 1] + hi) / 2.0;
}

/// Fraction of effective samples among normalized importance weights
/// exp(lw); near zero means the two densities barely overlap.
inline double ess_fraction(const Eigen::VectorXd& lw) {
    const double m = lw.maxCoeff();
    if (!std::isfinite(m)) return 0.0;
    const Eigen::ArrayXd w = (lw.array() - m).exp();
    const double s1 = w.sum(), s2 = (w * w).sum();
    return s1 * s1 / (double(lw.size()) * s2);
}

} // namespace detail

struct BridgeConfig {
    std::uint64_t seed = 99;
    int max_iterations = 1000;
    double tol = 1e-10;        // fixed-point tolerance on log evidence
    double overlap_floor = 1e-3;

    void validate() const {
        if (max_iterations < 1 || !(tol > 0.0)) throw InvalidConfig("bad bridge iteration settings");
    }
};

struct EvidenceEstimate {
    double log_evidence = 0.0;
    double mc_se = 0.0; // log-scale Monte Carlo error proxy
    int iterations = 0;
    double overlap_ess_frac = 0.0;
    std::size_t n_posterior = 0;
    std::size_t n_proposal = 0;
};

/// Marginal likelihood via bridge sampling with the optimal bridge
/// function. The proposal is a moment-matched normal fitted on the first
/// half of the posterior draws; the second half enters the bridge estimate,
/// so fitting and estimation never share draws. The fixed point is iterated
/// in log space from an importance-sampling start. The target's log density
/// must include all of its normalizing structure: with no data the joint is
/// the prior alone and the returned evidence is 1.
template <class Target>
EvidenceEstimate bridge_evidence(const Eigen::MatrixXd& draws, const Target& target,
                                 const BridgeConfig& cfg = {}) {
    cfg.validate();
    if (draws.rows() < 8) throw Error("bridge_evidence: too few posterior draws");

    const Eigen::Index half = draws.rows() / 2;
    const Eigen::MatrixXd fit_half = draws.topRows(half);
    const Eigen::MatrixXd est_half = draws.bottomRows(draws.rows() - half);
    const detail::MvnProposal prop = detail::MvnProposal::fit(fit_half);

    const Eigen::Index n1 = est_half.rows(); // posterior draws in the estimate
    const Eigen::Index n2 = n1;              // proposal draws
    Rng rng(cfg.seed);

    Eigen::VectorXd l1(n1), l2(n2);
    for (Eigen::Index jj = 0; jj < n1; ++jj) {
        const Eigen::VectorXd q = est_half.row(jj).transpose();
        l1(jj) = target.log_density(q) - prop.logpdf(q);
    }
    for (Eigen::Index i = 0; i < n2; ++i) {
        const Eigen::VectorXd q = prop.sample(rng);
        l2(i) = target.log_density(q) - prop.logpdf(q);
    }

    EvidenceEstimate est;
    est.n_posterior = static_cast<std::size_t>(n1);
    est.n_proposal = static_cast<std::size_t>(n2);
    est.overlap_ess_frac = std::min(detail::ess_fraction(l2), detail::ess_fraction(-l1));
    // The fraction alone cannot fall below the floor for small n (it is at
    // least 1/n), so a collapse to a handful of effective samples is
    // rejected as well.
    if (est.overlap_ess_frac < cfg.overlap_floor ||
        est.overlap_ess_frac * double(std::min(n1, n2)) < 10.0)
        throw ProposalMismatch("importance-weight effective sample fraction " +
                               std::to_string(est.overlap_ess_frac) + " below floor");

    const double lstar = detail::median_of(l1);
    const double log_s1 = std::log(double(n1) / double(n1 + n2));
    const double log_s2 = std::log(double(n2) / double(n1 + n2));

    // r = m / exp(lstar); start from the plain importance-sampling estimate
    double lr = detail::logsumexp(l2) - std::log(double(n2)) - lstar;
    bool converged = false;
    int it = 0;
    for (; it < cfg.max_iterations; ++it) {
        Eigen::VectorXd num(n2), den(n1);
        for (Eigen::Index i = 0; i < n2; ++i) {
            const double a = l2(i) - lstar;
            num(i) = a - detail::logaddexp(log_s1 + a + lr, log_s2);
        }
        for (Eigen::Index jj = 0; jj < n1; ++jj) {
            const double a = l1(jj) - lstar;
            den(jj) = -detail::logaddexp(log_s1 + a + lr, log_s2);
        }
        const double lr_new = (detail::logsumexp(num) - std::log(double(n2))) -
                              (detail::logsumexp(den) - std::log(double(n1)));
        const double delta = std::abs(lr_new - lr);
        lr = lr_new;
        if (delta < cfg.tol) {
            converged = true;
            ++it;
            break;
        }
    }
    est.iterations = it;
    if (!converged) throw BridgeNotConverged("no fixed point after " +
                                             std::to_string(cfg.max_iterations) + " iterations");
    est.log_evidence = lr + lstar;

    // relative-MSE proxy, treating draws as independent
    Eigen::VectorXd f1(n1), f2(n2);
    for (Eigen::Index jj = 0; jj < n1; ++jj)
        f1(jj) = std::exp(-detail::logaddexp(log_s1 + (l1(jj) - lstar) + lr, log_s2));
    for (Eigen::Index i = 0; i < n2; ++i) {
        const double a = l2(i) - lstar;
        f2(i) = std::exp(a - detail::logaddexp(log_s1 + a + lr, log_s2));
    }
    const auto rel_var = [](const Eigen::VectorXd& f) {
        const double mu = f.mean();
        const double var = (f.array() - mu).square().sum() / double(f.size() - 1);
        return var / (mu * mu);
    };
    est.mc_se = std::sqrt(rel_var(f2) / double(n2) + rel_var(f1) / double(n1));
    return est;
}

/// Fits the model and estimates its evidence in one go.
inline EvidenceEstimate model_evidence(const inference::LogisticModel& model,
                                       const inference::SamplerConfig& scfg = {},
                                       const BridgeConfig& bcfg = {}) {
    const inference::PosteriorSamples post = inference::sample_posterior(model, scfg);
    return bridge_evidence(post.draws, inference::LogisticTarget(model), bcfg);
}

// ---------------------------------------------------------------------------
// leave-one-feature-out importance
// ---------------------------------------------------------------------------

struct FeatureImportance {
    std::string feature;
    double log_odds = 0.0;   // log evidence(full) - log evidence(reduced)
    double log10_odds = 0.0; // same, base 10
    double log_ev_reduced = 0.0;
    bool ok = false;
    std::string error;
};

struct ImportanceReport {
    EvidenceEstimate full;
    std::vector<FeatureImportance> features;
};

/// Importance of each feature as the evidence odds between the full model
/// and the model with that feature removed. Positive log odds mean the
/// feature earns its place. Each reduced fit runs with its own derived
/// seed; a failure in one comparison is recorded and does not abort the
/// rest.
inline ImportanceReport loo_importance(const inference::LogisticModel& model,
                                       const inference::SamplerConfig& scfg = {},
                                       const BridgeConfig& bcfg = {}) {
    model.validate();
    if (model.j() < 1) throw Error("loo_importance: model has no features");

    ImportanceReport rep;
    rep.full = model_evidence(model, scfg, bcfg);

    for (Eigen::Index jj = 0; jj < model.j(); ++jj) {
        FeatureImportance fi;
        fi.feature = model.feature_names.empty() ? "feature_" + std::to_string(jj + 1)
                                                 : model.feature_names[static_cast<std::size_t>(jj)];
        try {
            inference::SamplerConfig s = scfg;
            s.seed = gaze2afc::detail::mix64(scfg.seed + static_cast<std::uint64_t>(jj) + 1);
            BridgeConfig b = bcfg;
            b.seed = gaze2afc::detail::mix64(bcfg.seed + static_cast<std::uint64_t>(jj) + 1);
            const EvidenceEstimate red = model_evidence(model.without_feature(jj), s, b);
            fi.log_ev_reduced = red.log_evidence;
            fi.log_odds = rep.full.log_evidence - red.log_evidence;
            fi.log10_odds = fi.log_odds / std::log(10.0);
            fi.ok = true;
        } catch (const Error& e) {
            fi.error = e.what();
        }
        rep.features.push_back(std::move(fi));
    }
    return rep;
}

} // namespace gaze2afc::evidence
