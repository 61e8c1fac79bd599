#include <cmath>

#include <gtest/gtest.h>

#include "gaze2afc/information.hpp"
#include "gaze2afc/rng.hpp"

using namespace gaze2afc;

namespace {

Eigen::VectorXi from_counts(int n00, int n01, int n10, int n11, bool first) {
    Eigen::VectorXi v(n00 + n01 + n10 + n11);
    Eigen::Index k = 0;
    for (int i = 0; i < n00; ++i) v(k++) = 0;
    for (int i = 0; i < n01; ++i) v(k++) = first ? 0 : 1;
    for (int i = 0; i < n10; ++i) v(k++) = first ? 1 : 0;
    for (int i = 0; i < n11; ++i) v(k++) = 1;
    return v;
}

} // namespace

TEST(BinaryEntropy, KnownValuesAndRange) {
    EXPECT_DOUBLE_EQ(information::binary_entropy(0.5), 1.0);
    EXPECT_DOUBLE_EQ(information::binary_entropy(0.0), 0.0);
    EXPECT_DOUBLE_EQ(information::binary_entropy(1.0), 0.0);
    EXPECT_NEAR(information::binary_entropy(0.25), 0.8112781244591328, 1e-15);
    EXPECT_DOUBLE_EQ(information::binary_entropy(0.3), information::binary_entropy(0.7));
    EXPECT_THROW(information::binary_entropy(-0.1), OutOfRange);
    EXPECT_THROW(information::binary_entropy(1.1), OutOfRange);
}

TEST(MiContingency, FrozenTableValue) {
    // table [[40,10],[10,40]]
    const auto a = from_counts(40, 10, 10, 40, true);
    const auto b = from_counts(40, 10, 10, 40, false);
    const auto est = information::mi_contingency(a, b);
    EXPECT_NEAR(est.value_bits, 0.2780719051126377, 1e-14);
    EXPECT_EQ(est.n, 100u);
    EXPECT_FALSE(est.clamped);
}

TEST(MiContingency, BoundsSymmetryAndEdges) {
    // identical variables carry their full entropy
    Eigen::VectorXi x(8);
    x << 0, 1, 0, 1, 1, 0, 1, 0;
    EXPECT_NEAR(information::mi_contingency(x, x).value_bits, 1.0, 1e-12);

    // complement is equally informative
    Eigen::VectorXi y = Eigen::VectorXi::Ones(8) - x;
    EXPECT_NEAR(information::mi_contingency(x, y).value_bits, 1.0, 1e-12);

    // symmetry in the arguments
    Eigen::VectorXi z(8);
    z << 0, 0, 1, 1, 0, 1, 1, 1;
    EXPECT_DOUBLE_EQ(information::mi_contingency(x, z).value_bits,
                     information::mi_contingency(z, x).value_bits);

    // exact empirical independence gives exactly zero
    const auto a = from_counts(25, 25, 25, 25, true);
    const auto b = from_counts(25, 25, 25, 25, false);
    EXPECT_DOUBLE_EQ(information::mi_contingency(a, b).value_bits, 0.0);

    // a constant variable carries nothing
    Eigen::VectorXi ones = Eigen::VectorXi::Ones(8);
    EXPECT_DOUBLE_EQ(information::mi_contingency(x, ones).value_bits, 0.0);
}

TEST(MiContingency, IndependenceSimulation) {
    Rng rng(606);
    const int n = 10000;
    Eigen::VectorXi a(n), b(n);
    for (int i = 0; i < n; ++i) {
        a(i) = rng.bernoulli(0.5) ? 1 : 0;
        b(i) = rng.bernoulli(0.4) ? 1 : 0;
    }
    const auto est = information::mi_contingency(a, b);
    EXPECT_GE(est.value_bits, 0.0);
    EXPECT_LT(est.value_bits, 0.02);
}

TEST(MiContingency, Rejections) {
    Eigen::VectorXi a(2), b(3);
    a << 0, 1;
    b << 0, 1, 0;
    EXPECT_THROW(information::mi_contingency(a, b), Error);
    EXPECT_THROW(information::mi_contingency(Eigen::VectorXi(), Eigen::VectorXi()), Error);
    Eigen::VectorXi bad(2);
    bad << 0, 2;
    EXPECT_THROW(information::mi_contingency(a, bad), Error);
}

namespace {

/// Degenerate posterior holding a single known parameter vector, so model
/// information values can be computed by hand.
inference::PosteriorSamples point_posterior(const Eigen::VectorXd& params) {
    inference::PosteriorSamples post;
    post.n_chains = 1;
    post.n_draws = 1;
    post.draws.resize(1, params.size());
    post.draws.row(0) = params.transpose();
    for (Eigen::Index i = 0; i < params.size(); ++i) post.param_names.push_back("p");
    return post;
}

} // namespace

TEST(MiModel, HandComputedOnPointPosterior) {
    // alpha = 0, beta = 2, feature -1 or +1: theta is sigma(-2) or sigma(2)
    Eigen::VectorXd params(2);
    params << 0.0, 2.0;
    const auto post = point_posterior(params);
    Eigen::MatrixXd rows(2, 1);
    rows << -1.0, 1.0;

    const double s2 = inference::sigmoid(2.0);
    const double expected = information::binary_entropy(0.5) // mean theta is exactly 1/2
                            - information::binary_entropy(s2); // both rows share this entropy
    const auto est = information::mi_model(post, rows, information::MiMethod::ModelPosteriorMean);
    EXPECT_NEAR(est.value_bits, expected, 1e-12);
    EXPECT_EQ(est.n, 2u);

    // with one draw the draw-averaged estimate coincides
    const auto est2 = information::mi_model(post, rows, information::MiMethod::ModelDrawAveraged);
    EXPECT_NEAR(est2.value_bits, expected, 1e-12);
}

TEST(MiModel, ZeroWhenFeatureIsIgnored) {
    Eigen::VectorXd params(2);
    params << 0.7, 0.0; // beta zero: same prediction for every trial
    const auto post = point_posterior(params);
    Eigen::MatrixXd rows(4, 1);
    rows << -1.0, 1.0, -0.5, 2.0;
    const auto est = information::mi_model(post, rows);
    EXPECT_NEAR(est.value_bits, 0.0, 1e-12);
}

TEST(MiModel, DrawAveragedSeparatesFromPosteriorMean) {
    // two draws with opposite strong betas: the mean prediction is flat
    // (no information), while each draw alone is informative
    inference::PosteriorSamples post;
    post.n_chains = 1;
    post.n_draws = 2;
    post.draws.resize(2, 2);
    post.draws << 0.0, 3.0, 0.0, -3.0;
    post.param_names = {"alpha", "beta"};
    Eigen::MatrixXd rows(2, 1);
    rows << -1.0, 1.0;

    const auto mean_based = information::mi_model(post, rows, information::MiMethod::ModelPosteriorMean);
    EXPECT_NEAR(mean_based.value_bits, 0.0, 1e-12);

    const double per_draw = information::binary_entropy(0.5) -
                            information::binary_entropy(inference::sigmoid(3.0));
    const auto averaged = information::mi_model(post, rows, information::MiMethod::ModelDrawAveraged);
    EXPECT_NEAR(averaged.value_bits, per_draw, 1e-12);
}

TEST(MiModel, AgreesWithContingencyOnBinaryFeature) {
    // deterministic-ish relation between a sign feature and the outcome
    Rng rng(99);
    const int n = 400;
    Eigen::MatrixXd rows(n, 1);
    Eigen::VectorXi x(n);
    for (int i = 0; i < n; ++i) {
        rows(i, 0) = rng.bernoulli(0.5) ? 1.0 : -1.0;
        const double theta = inference::sigmoid(1.8 * rows(i, 0));
        x(i) = rng.bernoulli(theta) ? 1 : 0;
    }
    inference::LogisticModel m;
    m.x = x;
    m.y = rows;
    m.feature_names = {"side"};
    inference::SamplerConfig cfg;
    cfg.chains = 4;
    cfg.draws = 800;
    cfg.warmup = 500;
    cfg.seed = 77;
    const auto post = inference::sample_posterior(m, cfg);

    Eigen::VectorXi f01(n);
    for (int i = 0; i < n; ++i) f01(i) = rows(i, 0) > 0 ? 1 : 0;
    const double direct = information::mi_contingency(x, f01).value_bits;
    const double modeled = information::mi_model(post, rows).value_bits;
    EXPECT_NEAR(modeled, direct, 0.03);
}

TEST(MiModel, Rejections) {
    Eigen::VectorXd params(2);
    params << 0.0, 1.0;
    const auto post = point_posterior(params);
    Eigen::MatrixXd none(0, 1);
    EXPECT_THROW(information::mi_model(post, none), Error);
    Eigen::MatrixXd wide(2, 3);
    wide.setZero();
    EXPECT_THROW(information::mi_model(post, wide), Error);
}

TEST(MiMethodName, Labels) {
    EXPECT_STREQ(information::mi_method_name(information::MiMethod::Contingency), "contingency");
    EXPECT_STREQ(information::mi_method_name(information::MiMethod::ModelPosteriorMean),
                 "model_posterior_mean");
    EXPECT_STREQ(information::mi_method_name(information::MiMethod::ModelDrawAveraged),
                 "model_draw_averaged");
}
