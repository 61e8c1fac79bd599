#include <cmath>

#include <gtest/gtest.h>

#include "gaze2afc/cascade.hpp"
#include "gaze2afc/rng.hpp"

using namespace gaze2afc;
using cascade::CascadeCall;
using cascade::CascadeConfig;

namespace {

/// Congruence outcomes from a logistic law on standardized distortion.
void simulate(int n, double alpha, double beta, std::uint64_t seed, Eigen::VectorXi& congruent,
              Eigen::VectorXd& mse) {
    Rng rng(seed);
    congruent.resize(n);
    mse.resize(n);
    for (int i = 0; i < n; ++i) mse(i) = rng.uniform(0.05, 1.0);
    const double mean = mse.mean();
    const double sd = std::sqrt((mse.array() - mean).square().sum() / double(n));
    for (int i = 0; i < n; ++i) {
        const double eta = alpha + beta * (mse(i) - mean) / sd;
        congruent(i) = rng.bernoulli(inference::sigmoid(eta)) ? 1 : 0;
    }
}

CascadeConfig quick_config(std::uint64_t seed) {
    CascadeConfig cfg;
    cfg.sampler.chains = 2;
    cfg.sampler.draws = 800;
    cfg.sampler.warmup = 500;
    cfg.sampler.seed = seed;
    cfg.sampler.min_ess = 100.0;
    return cfg;
}

} // namespace

TEST(CascadeTest, NegativeEffectYieldsHighPosteriorMass) {
    Eigen::VectorXi congruent;
    Eigen::VectorXd mse;
    simulate(640, 1.0, -1.0, 21, congruent, mse);
    const auto res = cascade::cascade_test(congruent, mse, quick_config(5));
    EXPECT_EQ(res.n_trials, 640u);
    EXPECT_GE(res.p_cascade, 0.95);
    EXPECT_LT(res.beta_mean, 0.0);
    EXPECT_GT(res.beta_sd, 0.0);
    EXPECT_EQ(cascade::classify(res.p_cascade), CascadeCall::EffectPresent);
}

TEST(CascadeTest, PositiveEffectYieldsLowPosteriorMass) {
    Eigen::VectorXi congruent;
    Eigen::VectorXd mse;
    simulate(640, 1.0, 1.0, 22, congruent, mse);
    const auto res = cascade::cascade_test(congruent, mse, quick_config(6));
    EXPECT_LE(res.p_cascade, 0.05);
    EXPECT_GT(res.beta_mean, 0.0);
    EXPECT_EQ(cascade::classify(res.p_cascade), CascadeCall::EffectAbsent);
}

TEST(CascadeTest, NullEffectLandsInTheMiddle) {
    Eigen::VectorXi congruent;
    Eigen::VectorXd mse;
    simulate(640, 0.8, 0.0, 23, congruent, mse);
    const auto res = cascade::cascade_test(congruent, mse, quick_config(7));
    EXPECT_GT(res.p_cascade, 0.05);
    EXPECT_LT(res.p_cascade, 0.95);
}

TEST(CascadeTest, Rejections) {
    const CascadeConfig cfg = quick_config(1);
    Eigen::VectorXi c(4);
    c << 1, 0, 1, 1;
    Eigen::VectorXd flat = Eigen::VectorXd::Constant(4, 0.5);
    EXPECT_THROW(cascade::cascade_test(c, flat, cfg), ZeroVariance);

    Eigen::VectorXd wrong(3);
    wrong << 0.1, 0.2, 0.3;
    EXPECT_THROW(cascade::cascade_test(c, wrong, cfg), Error);

    Eigen::VectorXd nan(4);
    nan << 0.1, 0.2, std::numeric_limits<double>::quiet_NaN(), 0.4;
    EXPECT_THROW(cascade::cascade_test(c, nan, cfg), NonFiniteInput);

    EXPECT_THROW(cascade::cascade_test(Eigen::VectorXi(), Eigen::VectorXd(), cfg), Error);
}

TEST(CascadeClassify, BandsAreStrictAtDefaults) {
    const CascadeConfig cfg; // effect above 0.90, absent below 0.15
    EXPECT_EQ(cascade::classify(0.9758, cfg), CascadeCall::EffectPresent);
    EXPECT_EQ(cascade::classify(0.9210, cfg), CascadeCall::EffectPresent);
    EXPECT_EQ(cascade::classify(0.1249, cfg), CascadeCall::EffectAbsent);
    EXPECT_EQ(cascade::classify(0.0878, cfg), CascadeCall::EffectAbsent);
    EXPECT_EQ(cascade::classify(0.5, cfg), CascadeCall::Inconclusive);
    EXPECT_EQ(cascade::classify(0.6216, cfg), CascadeCall::Inconclusive);
    // boundary values are inconclusive, the comparisons are strict
    EXPECT_EQ(cascade::classify(0.90, cfg), CascadeCall::Inconclusive);
    EXPECT_EQ(cascade::classify(0.15, cfg), CascadeCall::Inconclusive);
    EXPECT_EQ(cascade::classify(1.0, cfg), CascadeCall::EffectPresent);
    EXPECT_EQ(cascade::classify(0.0, cfg), CascadeCall::EffectAbsent);
}

TEST(CascadeClassify, NamesAndConfigValidation) {
    EXPECT_STREQ(cascade::cascade_call_name(CascadeCall::EffectPresent), "effect");
    EXPECT_STREQ(cascade::cascade_call_name(CascadeCall::EffectAbsent), "absent");
    EXPECT_STREQ(cascade::cascade_call_name(CascadeCall::Inconclusive), "inconclusive");

    CascadeConfig bad;
    bad.absent_threshold = 0.95;
    EXPECT_THROW(bad.validate(), InvalidConfig);
    bad = {};
    bad.effect_threshold = 1.5;
    EXPECT_THROW(bad.validate(), InvalidConfig);
    EXPECT_NO_THROW(CascadeConfig{}.validate());
}
