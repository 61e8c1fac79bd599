#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "gaze2afc/error.hpp"
#include "gaze2afc/inference.hpp"

namespace gaze2afc::cascade {

/// How strongly the posterior supports a negative distortion effect on
/// gaze-choice congruence. p_cascade is the posterior mass on beta < 0:
/// values near 1 mean congruence drops as the distortion grows.
struct CascadeResult {
    std::string participant;
    std::size_t n_trials = 0;
    double p_cascade = 0.0;
    double alpha_mean = 0.0, alpha_sd = 0.0;
    double beta_mean = 0.0, beta_sd = 0.0;
};

struct CascadeConfig {
    inference::SamplerConfig sampler;
    /// Posterior-mass bands for the qualitative call.
    double effect_threshold = 0.90;
    double absent_threshold = 0.15;

    void validate() const {
        sampler.validate();
        if (!(absent_threshold >= 0.0 && absent_threshold < effect_threshold && effect_threshold <= 1.0))
            throw InvalidConfig("cascade thresholds must satisfy 0 <= absent < effect <= 1");
    }
};

enum class CascadeCall { EffectPresent, EffectAbsent, Inconclusive };

inline const char* cascade_call_name(CascadeCall c) {
    switch (c) {
        case CascadeCall::EffectPresent: return "effect";
        case CascadeCall::EffectAbsent: return "absent";
        default: return "inconclusive";
    }
}

inline CascadeCall classify(double p_cascade, const CascadeConfig& cfg = {}) {
    if (p_cascade > cfg.effect_threshold) return CascadeCall::EffectPresent;
    if (p_cascade < cfg.absent_threshold) return CascadeCall::EffectAbsent;
    return CascadeCall::Inconclusive;
}

/// Single-feature logistic regression of congruence on the standardized
/// distortion strength. Standardization is internal (population variance);
/// a constant distortion column cannot be tested.
inline CascadeResult cascade_test(const Eigen::VectorXi& congruent, const Eigen::VectorXd& mse,
                                  const CascadeConfig& cfg = {}) {
    cfg.validate();
    if (congruent.size() == 0) throw Error("cascade_test: no trials");
    if (congruent.size() != mse.size()) throw Error("cascade_test: length mismatch");
    if (!mse.allFinite()) throw NonFiniteInput("mse contains non-finite values");

    const double mean = mse.mean();
    const double sd = std::sqrt((mse.array() - mean).square().sum() / double(mse.size()));
    if (sd <= 1e-12 * std::max(1.0, std::abs(mean)))
        throw ZeroVariance("distortion strength is constant");

    inference::LogisticModel model;
    model.x = congruent;
    model.y = ((mse.array() - mean) / sd).matrix();
    model.feature_names = {"mse"};

    const inference::PosteriorSamples post = inference::sample_posterior(model, cfg.sampler);

    CascadeResult res;
    res.n_trials = static_cast<std::size_t>(congruent.size());
    Eigen::Index below = 0;
    for (Eigen::Index s = 0; s < post.rows(); ++s)
        if (post.draws(s, 1) < 0.0) ++below;
    res.p_cascade = double(below) / double(post.rows());
    res.alpha_mean = post.mean(0);
    res.alpha_sd = post.sd(0);
    res.beta_mean = post.mean(1);
    res.beta_sd = post.sd(1);
    return res;
}

} // namespace gaze2afc::cascade
