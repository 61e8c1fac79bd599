#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "gaze2afc/error.hpp"
#include "gaze2afc/inference.hpp"

namespace gaze2afc::information {

/// Binary entropy in bits; H(0) = H(1) = 0.
inline double binary_entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw OutOfRange("probability outside [0,1]");
    double h = 0.0;
    if (p > 0.0) h -= p * std::log2(p);
    if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
    return h;
}

enum class MiMethod { Contingency, ModelPosteriorMean, ModelDrawAveraged };

inline const char* mi_method_name(MiMethod m) {
    switch (m) {
        case MiMethod::Contingency: return "contingency";
        case MiMethod::ModelPosteriorMean: return "model_posterior_mean";
        default: return "model_draw_averaged";
    }
}

struct MiEstimate {
    double value_bits = 0.0;
    MiMethod method = MiMethod::Contingency;
    std::size_t n = 0;
    bool clamped = false; // a small negative estimate was raised to zero
};

/// Plug-in mutual information of two binary variables from their 2x2
/// contingency table. Always in [0, 1] bits; exactly 0 for independent
/// empirical distributions.
inline MiEstimate mi_contingency(const Eigen::VectorXi& a, const Eigen::VectorXi& b) {
    if (a.size() != b.size() || a.size() == 0) throw Error("mi_contingency: bad input length");
    double c[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if ((a(i) != 0 && a(i) != 1) || (b(i) != 0 && b(i) != 1))
            throw Error("mi_contingency: values must be 0 or 1");
        c[a(i)][b(i)] += 1.0;
    }
    const double n = double(a.size());
    const double pa[2] = {(c[0][0] + c[0][1]) / n, (c[1][0] + c[1][1]) / n};
    const double pb[2] = {(c[0][0] + c[1][0]) / n, (c[0][1] + c[1][1]) / n};
    double mi = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k) {
            const double p = c[i][k] / n;
            if (p > 0.0) mi += p * std::log2(p / (pa[i] * pb[k]));
        }
    MiEstimate est;
    est.method = MiMethod::Contingency;
    est.n = static_cast<std::size_t>(a.size());
    if (mi < 0.0) { // tiny negatives from rounding only
        est.clamped = true;
        mi = 0.0;
    }
    est.value_bits = mi;
    return est;
}

/// Model-based mutual information between the outcome and the feature set:
/// the entropy of the mean predicted probability minus the mean entropy of
/// the per-trial predictions. Zero when the model predicts the same
/// probability for every trial. With `ModelDrawAveraged` the same quantity
/// is computed per posterior draw and averaged, propagating posterior
/// uncertainty instead of using the posterior-mean prediction.
inline MiEstimate mi_model(const inference::PosteriorSamples& post, const Eigen::MatrixXd& rows,
                           MiMethod method = MiMethod::ModelPosteriorMean) {
    if (rows.rows() == 0) throw Error("mi_model: no trials");
    if (rows.cols() + 1 != post.dim()) throw Error("mi_model: feature width mismatch");

    MiEstimate est;
    est.method = method;
    est.n = static_cast<std::size_t>(rows.rows());

    double mi = 0.0;
    if (method == MiMethod::ModelPosteriorMean) {
        double p_bar = 0.0, h_bar = 0.0;
        for (Eigen::Index i = 0; i < rows.rows(); ++i) {
            const double p = inference::predictive_prob(post, rows.row(i).transpose());
            p_bar += p;
            h_bar += binary_entropy(p);
        }
        p_bar /= double(rows.rows());
        h_bar /= double(rows.rows());
        mi = binary_entropy(p_bar) - h_bar;
    } else {
        // theta per draw and trial; average the per-draw information
        const Eigen::Index S = post.rows();
        Eigen::VectorXd p_bar = Eigen::VectorXd::Zero(S);
        Eigen::VectorXd h_bar = Eigen::VectorXd::Zero(S);
        for (Eigen::Index i = 0; i < rows.rows(); ++i) {
            const Eigen::VectorXd theta = inference::predictive_prob_draws(post, rows.row(i).transpose());
            for (Eigen::Index s = 0; s < S; ++s) {
                p_bar(s) += theta(s);
                h_bar(s) += binary_entropy(std::min(1.0 - 1e-12, std::max(1e-12, theta(s))));
            }
        }
        for (Eigen::Index s = 0; s < S; ++s)
            mi += binary_entropy(p_bar(s) / double(rows.rows())) - h_bar(s) / double(rows.rows());
        mi /= double(S);
    }

    if (mi < 0.0) {
        est.clamped = true;
        mi = 0.0;
    }
    est.value_bits = mi;
    return est;
}

/// Per-participant information summary reported by the pipeline.
struct MiReportRow {
    std::string participant;
    std::size_t n_trials = 0;
    double mi_gaze_decision = 0.0;
    double mi_gaze_task = 0.0;
    double mi_gaze_correct = 0.0;
    double mi_decision_task = 0.0;
    double mean_correct = 0.0;
};

} // namespace gaze2afc::information
