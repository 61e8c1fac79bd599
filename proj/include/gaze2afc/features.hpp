#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gaze2afc/error.hpp"
#include "gaze2afc/types.hpp"

namespace gaze2afc::features {

// ---------------------------------------------------------------------------
// per-trial features
// ---------------------------------------------------------------------------

struct FeatureConfig {
    double frame_rate_hz = 24.0;
};

/// Computes the six per-trial gaze features from a trial's segmentation.
///
/// duration_left/right  summed segment durations per side, in seconds
/// n_saccades           transitions between consecutive segments
/// first_side/last_side sign of the first/last segment's side
/// upper_lower_ratio    time above the gazed avatar's pelvis over time below
///
/// The ratio uses segment samples with a pelvis reference; a sample on the
/// pelvis line counts as below. A zero denominator is flagged `ratio_capped`
/// and the ratio is +infinity until the cohort-level cap replaces it; no
/// pelvis reference anywhere flags `ratio_missing`.
inline TrialFeatures extract_features(const TrialSegmentation& seg, const FeatureConfig& cfg = {}) {
    if (seg.segments.empty())
        throw NoSegments("trial " + std::to_string(seg.trial_id) + " has no gaze segments");
    (void)cfg;

    TrialFeatures f;
    f.trial_id = seg.trial_id;
    double above = 0.0, below = 0.0;
    bool any_pelvis = false;
    for (const GazeSegment& g : seg.segments) {
        (g.side == Side::Left ? f.duration_left_s : f.duration_right_s) += g.duration_s;
        for (const SegmentPoint& p : g.points) {
            if (!p.pelvis_y_deg) continue;
            any_pelvis = true;
            // y grows downward, so above the pelvis means smaller y
            (p.y_deg < *p.pelvis_y_deg ? above : below) += 1.0;
        }
    }
    f.n_saccades = static_cast<int>(seg.segments.size()) - 1;
    f.first_side = side_sign(seg.segments.front().side);
    f.last_side = side_sign(seg.segments.back().side);

    if (!any_pelvis) {
        f.ratio_missing = true;
        f.upper_lower_ratio = std::numeric_limits<double>::quiet_NaN();
    } else if (below == 0.0) {
        f.ratio_capped = true;
        f.upper_lower_ratio = std::numeric_limits<double>::infinity();
    } else {
        f.upper_lower_ratio = above / below;
    }
    return f;
}

/// Congruence of gaze and choice: 1 when the last-gazed avatar is the
/// chosen one. `decision` uses the same 0=Left / 1=Right coding as the
/// regression outcome.
inline int congruence(int last_side, int decision) {
    return (last_side > 0) == (decision == 1) ? 1 : 0;
}

// ---------------------------------------------------------------------------
// cohort-level feature matrix
// ---------------------------------------------------------------------------

/// Regression inputs for one participant. Rows follow trial order after
/// exclusions. The ratio column already holds log(ratio) after capping.
struct FeatureMatrix {
    Eigen::MatrixXd y;                       // n_trials x 6
    std::vector<std::string> names;          // column names
    std::vector<int> trial_ids;              // per kept row
    Eigen::VectorXi decision;                // 1 = chose Right
    Eigen::VectorXi task;                    // 1 = natural avatar on the Right
    Eigen::VectorXi correct;                 // 1 = chose the natural avatar
    Eigen::VectorXi congruent;               // last gaze matches the choice
    Eigen::VectorXd mse;                     // distortion of the modified avatar
    std::vector<int> excluded_trials;        // dropped for having no segments
    std::vector<std::string> warnings;
    double ratio_cap = 0.0;                  // value substituted for inf ratios
};

inline std::vector<std::string> feature_names() {
    return {"duration_left", "duration_right", "n_saccades",
            "first_side",    "last_side",      "upper_lower_ratio"};
}

namespace detail {

inline double percentile(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = q * double(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double w = pos - double(lo);
    return v[lo] * (1.0 - w) + v[hi] * w;
}

} // namespace detail

/// Assembles the regression matrix from per-trial segmentations. Trials
/// without segments are excluded and recorded. Infinite ratios are replaced
/// by the 99th percentile of the finite ones (zero ratios by its inverse,
/// keeping the log transform symmetric), then the ratio is logged.
inline FeatureMatrix build_feature_matrix(const std::vector<TrialRecord>& trials,
                                          const std::vector<TrialSegmentation>& segs,
                                          const FeatureConfig& cfg = {}) {
    if (trials.size() != segs.size()) throw Error("trials and segmentations differ in length");

    std::vector<TrialFeatures> kept;
    std::vector<const TrialRecord*> kept_trials;
    FeatureMatrix m;
    for (std::size_t i = 0; i < trials.size(); ++i) {
        try {
            kept.push_back(extract_features(segs[i], cfg));
            kept_trials.push_back(&trials[i]);
        } catch (const NoSegments&) {
            m.excluded_trials.push_back(trials[i].trial_id);
        }
    }
    if (kept.empty()) throw NoSegments("every trial was excluded");

    std::vector<double> finite_ratios;
    for (const TrialFeatures& f : kept)
        if (!f.ratio_missing && !f.ratio_capped && f.upper_lower_ratio > 0.0)
            finite_ratios.push_back(f.upper_lower_ratio);
    m.ratio_cap = finite_ratios.empty() ? 1.0
                                        : std::max(1.0, detail::percentile(finite_ratios, 0.99));

    const std::size_t n = kept.size();
    m.names = feature_names();
    m.y.resize(static_cast<Eigen::Index>(n), 6);
    m.trial_ids.resize(n);
    m.decision.resize(static_cast<Eigen::Index>(n));
    m.task.resize(static_cast<Eigen::Index>(n));
    m.correct.resize(static_cast<Eigen::Index>(n));
    m.congruent.resize(static_cast<Eigen::Index>(n));
    m.mse.resize(static_cast<Eigen::Index>(n));

    int n_ratio_subst = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const TrialFeatures& f = kept[i];
        const TrialRecord& tr = *kept_trials[i];
        double ratio = f.upper_lower_ratio;
        if (f.ratio_missing) {
            ratio = 1.0; // neutral: log ratio 0
            ++n_ratio_subst;
        } else if (std::isinf(ratio)) {
            ratio = m.ratio_cap;
        } else if (ratio == 0.0) {
            ratio = 1.0 / m.ratio_cap;
        }
        const Eigen::Index r = static_cast<Eigen::Index>(i);
        m.y(r, 0) = f.duration_left_s;
        m.y(r, 1) = f.duration_right_s;
        m.y(r, 2) = double(f.n_saccades);
        m.y(r, 3) = double(f.first_side);
        m.y(r, 4) = double(f.last_side);
        m.y(r, 5) = std::log(ratio);
        m.trial_ids[i] = f.trial_id;
        m.decision(r) = tr.response_side == Side::Right ? 1 : 0;
        m.task(r) = tr.natural_side == Side::Right ? 1 : 0;
        m.correct(r) = tr.correct() ? 1 : 0;
        m.congruent(r) = congruence(f.last_side, m.decision(r));
        m.mse(r) = tr.mse;
    }
    if (n_ratio_subst > 0)
        m.warnings.push_back(std::to_string(n_ratio_subst) +
                             " trial(s) had no pelvis reference; ratio set to 1");
    return m;
}

// ---------------------------------------------------------------------------
// standardization
// ---------------------------------------------------------------------------

/// How each column was scaled; needed to apply the same transform to new
/// data and to express fitted coefficients in original units.
struct ScalingRecord {
    std::vector<std::string> names;
    std::vector<double> mean;
    std::vector<double> sd;                // 1.0 for binary and dropped columns
    std::vector<bool> is_binary;           // left unscaled
    std::vector<bool> dropped;             // constant columns, removed
    std::vector<std::string> warnings;
    std::vector<int> kept;                 // output column -> input column

    std::vector<std::string> kept_names() const {
        std::vector<std::string> out;
        for (int k : kept) out.push_back(names[static_cast<std::size_t>(k)]);
        return out;
    }
};

/// Marks the two side columns as binary when column names are the defaults.
inline std::vector<bool> default_binary_mask(const std::vector<std::string>& names) {
    std::vector<bool> mask(names.size(), false);
    for (std::size_t j = 0; j < names.size(); ++j)
        mask[j] = names[j] == "first_side" || names[j] == "last_side";
    return mask;
}

/// Centers and scales continuous columns to unit population variance
/// (denominator N, so a two-point column {1,3} maps to {-1,+1}). Binary
/// sign columns pass through. Constant columns raise a ZeroVariance
/// warning and are dropped from the output.
inline std::pair<Eigen::MatrixXd, ScalingRecord> standardize(const Eigen::MatrixXd& y,
                                                             const std::vector<std::string>& names,
                                                             const std::vector<bool>& is_binary) {
    if (static_cast<std::size_t>(y.cols()) != names.size() || names.size() != is_binary.size())
        throw Error("standardize: shape mismatch");
    if (!y.allFinite()) throw NonFiniteInput("feature matrix contains non-finite values");

    ScalingRecord rec;
    rec.names = names;
    rec.is_binary = is_binary;
    rec.mean.assign(names.size(), 0.0);
    rec.sd.assign(names.size(), 1.0);
    rec.dropped.assign(names.size(), false);

    const double n = double(y.rows());
    std::vector<Eigen::Index> kept_cols;
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
        const std::size_t js = static_cast<std::size_t>(j);
        if (is_binary[js]) {
            kept_cols.push_back(j);
            continue;
        }
        const double mean = y.col(j).mean();
        const double var = (y.col(j).array() - mean).square().sum() / n;
        const double sd = std::sqrt(var);
        const double scale_ref = std::max(1.0, std::abs(mean));
        if (sd <= 1e-12 * scale_ref) {
            rec.dropped[js] = true;
            rec.warnings.push_back("feature '" + names[js] + "' has zero variance and was dropped");
            continue;
        }
        rec.mean[js] = mean;
        rec.sd[js] = sd;
        kept_cols.push_back(j);
    }

    Eigen::MatrixXd out(y.rows(), static_cast<Eigen::Index>(kept_cols.size()));
    for (std::size_t k = 0; k < kept_cols.size(); ++k) {
        const Eigen::Index j = kept_cols[k];
        const std::size_t js = static_cast<std::size_t>(j);
        rec.kept.push_back(static_cast<int>(j));
        if (is_binary[js])
            out.col(static_cast<Eigen::Index>(k)) = y.col(j);
        else
            out.col(static_cast<Eigen::Index>(k)) = (y.col(j).array() - rec.mean[js]) / rec.sd[js];
    }
    return {out, rec};
}

/// Applies a previously fitted scaling to new rows (same input layout).
inline Eigen::MatrixXd apply_scaling(const Eigen::MatrixXd& y, const ScalingRecord& rec) {
    Eigen::MatrixXd out(y.rows(), static_cast<Eigen::Index>(rec.kept.size()));
    for (std::size_t k = 0; k < rec.kept.size(); ++k) {
        const Eigen::Index j = rec.kept[k];
        const std::size_t js = static_cast<std::size_t>(j);
        if (rec.is_binary[js])
            out.col(static_cast<Eigen::Index>(k)) = y.col(j);
        else
            out.col(static_cast<Eigen::Index>(k)) = (y.col(j).array() - rec.mean[js]) / rec.sd[js];
    }
    return out;
}

/// Expresses a fit on standardized features in original units. `params` is
/// (intercept, coefficients over kept columns); the return has the same
/// layout. The linear predictor is identical on both scales.
inline Eigen::VectorXd unstandardize_params(const Eigen::VectorXd& params, const ScalingRecord& rec) {
    if (static_cast<std::size_t>(params.size()) != rec.kept.size() + 1)
        throw Error("unstandardize_params: size mismatch");
    Eigen::VectorXd out = params;
    for (std::size_t k = 0; k < rec.kept.size(); ++k) {
        const std::size_t js = static_cast<std::size_t>(rec.kept[k]);
        const double b = params(static_cast<Eigen::Index>(k) + 1);
        out(static_cast<Eigen::Index>(k) + 1) = b / rec.sd[js];
        out(0) -= b * rec.mean[js] / rec.sd[js];
    }
    return out;
}

} // namespace gaze2afc::features
