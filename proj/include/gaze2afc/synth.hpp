#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gaze2afc/error.hpp"
#include "gaze2afc/features.hpp"
#include "gaze2afc/inference.hpp"
#include "gaze2afc/ingest.hpp"
#include "gaze2afc/rng.hpp"
#include "gaze2afc/types.hpp"

namespace gaze2afc::synth {

// ---------------------------------------------------------------------------
// configuration
// ---------------------------------------------------------------------------

/// Generator settings. The defaults produce a session whose aligned,
/// segmented, and featurized form is known exactly, so the pipeline can be
/// checked against ground truth end to end.
struct SynthConfig {
    std::string participant_id = "synth00";
    std::uint64_t seed = 1;

    int n_trials = 643;
    int n_blocks = 4;
    double fixation_s = 0.75;
    double trial_s = 3.5;
    double gaze_rate_hz = 60.0;
    double frame_rate_hz = 24.0;

    double avatar_separation_deg = 16.0;
    double avatar_sway_speed_deg_s = 3.0; // peak horizontal speed of the avatars

    /// Within-segment drift speed, drawn uniformly per segment. The gaze
    /// stream holds each frame's position until the next frame, so the
    /// frame-to-frame speed the pipeline measures equals the drawn value.
    double drift_speed_min_deg_s = 6.0;
    double drift_speed_max_deg_s = 8.0;

    int saccades_min = 0;
    int saccades_max = 5;

    /// Per-block constant error added to all gaze of the block, in pixels.
    /// Empty means no error anywhere. Otherwise one entry per block.
    std::vector<std::pair<double, double>> block_offsets_px;
    double fixation_jitter_px = 1.0;

    /// Fraction of body keypoints whose likelihood falls below any sane
    /// cutoff, simulating occluded or misdetected joints.
    double occlusion_rate = 0.0;

    double mse_min = 0.2;
    double mse_max = 2.0;

    /// Decision model: P(choose Right) = sigmoid(alpha + beta . z) where z
    /// holds the six true features, continuous ones standardized over the
    /// session. `cascade_strength` subtracts strength * standardized mse
    /// from the last-side coefficient, so gaze-choice congruence decays
    /// with distortion when positive.
    double true_alpha = 0.0;
    std::vector<double> true_beta = {0.0, 0.0, 0.0, 0.0, 2.2, 0.0};
    double cascade_strength = 0.0;

    CameraGeometry geometry;

    void validate() const;

    // derived frame-lattice quantities
    int fixation_frames() const { return static_cast<int>(std::lround(fixation_s * frame_rate_hz)); }
    int trial_frames() const { return static_cast<int>(std::lround(trial_s * frame_rate_hz)); }
    int frames_per_trial() const { return fixation_frames() + trial_frames(); }
    double drift_box_deg() const { return avatar_separation_deg * 5.0 / 32.0; }
};

inline void SynthConfig::validate() const {
    if (n_trials < 1) throw InvalidConfig("n_trials must be positive");
    if (n_blocks < 1 || n_blocks > n_trials) throw InvalidConfig("n_blocks out of range");
    if (std::abs(gaze_rate_hz - 2.5 * frame_rate_hz) > 1e-9)
        throw InvalidConfig("gaze rate must be 2.5x the frame rate");
    if (std::abs(fixation_s * frame_rate_hz - fixation_frames()) > 1e-9 ||
        std::abs(trial_s * frame_rate_hz - trial_frames()) > 1e-9)
        throw InvalidConfig("fixation and trial lengths must be whole frame counts");
    if (fixation_frames() < 4) throw InvalidConfig("fixation too short for a clean return to the cross");
    if (frames_per_trial() % 2 != 0 || fixation_frames() % 2 != 0)
        throw InvalidConfig("frame counts must be even to keep trial onsets on even frames");
    if (!(drift_speed_min_deg_s > 0.0 && drift_speed_min_deg_s <= drift_speed_max_deg_s))
        throw InvalidConfig("bad drift speed range");
    if (drift_speed_max_deg_s >= 50.0)
        throw InvalidConfig("drift speeds too close to the saccade threshold");
    if (saccades_min < 0 || saccades_min > saccades_max) throw InvalidConfig("bad saccade count range");
    const int slots = (trial_frames() - 8) / 2 + 1;
    if (saccades_max > slots / 3) throw InvalidConfig("saccades_max does not fit the trial length");
    if ((avatar_separation_deg - 2.0 * drift_box_deg()) * frame_rate_hz < 200.0)
        throw InvalidConfig("avatars too close for unambiguous saccades");
    if (!block_offsets_px.empty() && static_cast<int>(block_offsets_px.size()) != n_blocks)
        throw InvalidConfig("block_offsets_px must have one entry per block");
    if (!(mse_min >= 0.0 && mse_min <= mse_max)) throw InvalidConfig("bad mse range");
    if (!(occlusion_rate >= 0.0 && occlusion_rate < 1.0)) throw InvalidConfig("occlusion_rate outside [0,1)");
    if (true_beta.size() != 6) throw InvalidConfig("true_beta must have six entries");
    if (fixation_jitter_px < 0.0) throw InvalidConfig("negative fixation jitter");
}

// ---------------------------------------------------------------------------
// ground truth
// ---------------------------------------------------------------------------

struct TruthSegment {
    int start_frame = 0;
    int end_frame = 0; // inclusive, window-clipped
    Side side = Side::Left;
};

struct TruthTrial {
    int trial_id = 0;
    int block = 0;
    double onset_s = 0.0, offset_s = 0.0;
    double mse = 0.0;
    Side natural_side = Side::Left;
    int decision = 0; // 1 = chose Right
    double theta = 0.5;
    int congruent = 0;
    std::vector<TruthSegment> segments;
    std::vector<int> jump_frames; // first frame after each in-trial saccade

    // features as the ideal pipeline measures them
    double duration_left_s = 0.0, duration_right_s = 0.0;
    int n_saccades = 0;
    int first_side = 0, last_side = 0;
    long frames_above = 0, frames_below = 0; // gaze above/below the pelvis line
};

struct TruthBlock {
    int block = 0;
    double dx_px = 0.0, dy_px = 0.0;
    bool above_gate = false; // calibration is expected to correct this block
};

struct GroundTruth {
    std::string participant_id;
    std::vector<TruthBlock> blocks;
    std::vector<TruthTrial> trials;
};

struct SynthSession {
    Session session; // as the pipeline would load it from the emitted CSVs
    GroundTruth truth;
};

// ---------------------------------------------------------------------------
// generator
// ---------------------------------------------------------------------------

namespace detail {

/// Snap to the precision the CSVs carry, so a write-parse round trip is
/// lossless and ground truth can be computed on the exact stored values.
inline double q3(double v) { return std::round(v * 1000.0) / 1000.0; }
inline double q6(double v) { return std::round(v * 1e6) / 1e6; }

struct Walk {
    double x_deg, y_deg; // offset from the avatar anchor
    double heading;
    double step_deg; // per control frame

    void advance(Rng& rng, double box) {
        heading += rng.uniform(-0.5, 0.5);
        double dx = step_deg * std::cos(heading);
        double dy = step_deg * std::sin(heading);
        if (std::abs(x_deg + dx) > box) dx = -dx;
        if (std::abs(y_deg + dy) > box) dy = -dy;
        x_deg += dx;
        y_deg += dy;
        heading = std::atan2(dy, dx);
    }
};

/// Skeleton offsets from the pelvis, in degrees; y grows downward.
inline const std::vector<std::pair<std::string, std::pair<double, double>>>& body_offsets() {
    static const std::vector<std::pair<std::string, std::pair<double, double>>> kOffsets = {
        {"head", {0.0, -2.8}},      {"neck", {0.0, -2.2}},       {"manubrium", {0.0, -1.8}},
        {"shoulder_l", {-0.6, -1.7}}, {"shoulder_r", {0.6, -1.7}}, {"elbow_l", {-0.8, -0.9}},
        {"elbow_r", {0.8, -0.9}},   {"torso", {0.0, -1.0}},      {"hand_l", {-0.9, 0.1}},
        {"hand_r", {0.9, 0.1}},     {"pelvis", {0.0, 0.0}},      {"knee_l", {-0.35, 1.3}},
        {"knee_r", {0.35, 1.3}},    {"foot_l", {-0.4, 2.6}},     {"foot_r", {0.4, 2.6}}};
    return kOffsets;
}

} // namespace detail

/// Builds one synthetic session plus its exact ground truth.
///
/// All scene motion lives on the video frame lattice; each gaze sample
/// holds the nearest frame's position, with a 1 ms clock offset so no gaze
/// sample ever ties between two frames. Holding rather than interpolating
/// keeps the frame-to-frame speed the pipeline measures equal to the drawn
/// drift speed. Within a trial, gaze drifts inside a box around one avatar
/// and jumps to the other only at chosen even frame indices, so the
/// aligned-speed trace exceeds the saccade threshold on exactly one
/// interval per jump. Trial onsets land on even frames, and the return to
/// the cross happens one frame after the inclusive window end, so neither
/// leaks into the window. All emitted coordinates are quantized to the CSV
/// precision before ground truth is derived from them.
inline SynthSession gen_session(const SynthConfig& cfg) {
    cfg.validate();
    const CameraGeometry& geom = cfg.geometry;
    Rng rng_trial = Rng(cfg.seed).derive(1);
    Rng rng_walk = Rng(cfg.seed).derive(2);
    Rng rng_jitter = Rng(cfg.seed).derive(3);
    Rng rng_decision = Rng(cfg.seed).derive(4);
    Rng rng_occl = Rng(cfg.seed).derive(5);

    const int fpt = cfg.frames_per_trial();
    const int fix = cfg.fixation_frames();
    const int n = cfg.n_trials;
    const int total_frames = fpt * n + 8; // short cross tail after the last trial
    const double fr = cfg.frame_rate_hz;
    const double box = cfg.drift_box_deg();

    const auto anchor_x = [&](Side s) { return side_sign(s) * cfg.avatar_separation_deg / 2.0; };
    const auto deg_to_px_x = [&](double d) { return geom.center_x_px() + d / geom.deg_per_px_x(); };
    const auto deg_to_px_y = [&](double d) { return geom.center_y_px() + d / geom.deg_per_px_y(); };

    // --- trial plans ---
    struct Plan {
        Side start_side = Side::Left;
        std::vector<int> jumps; // global frames, even, strictly inside the window
        double mse = 0.0;
        Side natural = Side::Left;
        int block = 0;
        double sway_phase[2] = {0.0, 0.0};
    };
    std::vector<Plan> plans(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Plan& p = plans[static_cast<std::size_t>(i)];
        p.block = 1 + (i * cfg.n_blocks) / n;
        p.start_side = rng_trial.bernoulli(0.5) ? Side::Right : Side::Left;
        p.natural = rng_trial.bernoulli(0.5) ? Side::Right : Side::Left;
        p.mse = rng_trial.uniform(cfg.mse_min, cfg.mse_max);
        p.sway_phase[0] = rng_trial.uniform(0.0, 2.0 * M_PI);
        p.sway_phase[1] = rng_trial.uniform(0.0, 2.0 * M_PI);
        const int k = static_cast<int>(rng_trial.uniform_int(cfg.saccades_min, cfg.saccades_max));
        const int ws = i * fpt + fix;
        const int we = ws + cfg.trial_frames();
        // even frames in [ws+4, we-4], successive jumps at least 6 apart
        for (int attempt = 0;; ++attempt) {
            if (attempt > 2000) throw Error("could not place saccades; window too crowded");
            std::vector<int> jumps;
            for (int jj = 0; jj < k; ++jj)
                jumps.push_back(ws + 4 + 2 * static_cast<int>(rng_trial.uniform_int(
                                                0, (we - 4 - (ws + 4)) / 2)));
            std::sort(jumps.begin(), jumps.end());
            bool ok = true;
            for (std::size_t jj = 1; jj < jumps.size(); ++jj)
                if (jumps[jj] - jumps[jj - 1] < 6) ok = false;
            if (ok) {
                p.jumps = std::move(jumps);
                break;
            }
        }
    }

    // --- control points on the frame lattice, in pixels ---
    std::vector<double> px(static_cast<std::size_t>(total_frames) + 1);
    std::vector<double> py(static_cast<std::size_t>(total_frames) + 1);
    std::vector<std::size_t> owner(static_cast<std::size_t>(total_frames) + 1, 0);

    const auto offset_of = [&](int block) -> std::pair<double, double> {
        if (cfg.block_offsets_px.empty()) return {0.0, 0.0};
        return cfg.block_offsets_px[static_cast<std::size_t>(block - 1)];
    };

    {
        detail::Walk walk{0.0, 0.0, 0.0, 0.0};
        // Frame f sits on an avatar while inside [ws, we] of its own trial.
        // The window end we coincides with the next trial's first fixation
        // frame, so that one frame extends the previous trial's walk; the
        // return to the cross then falls on the interval (we, we+1), which
        // no trial window contains.
        const auto avatar_trial_of = [&](int f) -> int {
            const int c = std::min(n - 1, f / fpt);
            if (f >= c * fpt + fix && f <= c * fpt + fix + cfg.trial_frames()) return c;
            if (c > 0 && f <= (c - 1) * fpt + fix + cfg.trial_frames()) return c - 1;
            return -1;
        };
        for (int f = 0; f <= total_frames; ++f) {
            const int trial = std::min(n - 1, f / fpt);
            owner[static_cast<std::size_t>(f)] = static_cast<std::size_t>(trial);
            const int at = avatar_trial_of(f);
            double gx, gy;
            if (at >= 0) {
                const Plan& p = plans[static_cast<std::size_t>(at)];
                const int ws = at * fpt + fix;
                int seg = 0;
                for (int m : p.jumps)
                    if (f >= m) ++seg;
                const Side side = seg % 2 == 0 ? p.start_side : opposite(p.start_side);
                const bool fresh = f == ws || (seg > 0 && f == p.jumps[static_cast<std::size_t>(seg - 1)]);
                if (fresh) {
                    walk.x_deg = rng_walk.uniform(-0.8 * box, 0.8 * box);
                    walk.y_deg = rng_walk.uniform(-0.8 * box, 0.8 * box);
                    walk.heading = rng_walk.uniform(0.0, 2.0 * M_PI);
                    walk.step_deg =
                        rng_walk.uniform(cfg.drift_speed_min_deg_s, cfg.drift_speed_max_deg_s) / fr;
                } else {
                    walk.advance(rng_walk, box);
                }
                gx = deg_to_px_x(anchor_x(side) + walk.x_deg);
                gy = deg_to_px_y(walk.y_deg);
            } else {
                gx = geom.center_x_px() + rng_jitter.normal(0.0, cfg.fixation_jitter_px);
                gy = geom.center_y_px() + rng_jitter.normal(0.0, cfg.fixation_jitter_px);
            }
            // the offset follows the sample's block in time, which is the
            // owning trial's block, not the avatar trial's
            const auto [ox, oy] = offset_of(plans[owner[static_cast<std::size_t>(f)]].block);
            px[static_cast<std::size_t>(f)] = detail::q3(gx + ox);
            py[static_cast<std::size_t>(f)] = detail::q3(gy + oy);
        }
    }

    // --- gaze stream at the gaze rate, holding the nearest frame ---
    SynthSession out;
    Session& ses = out.session;
    ses.participant_id = cfg.participant_id;
    ses.frame_rate_hz = fr;
    const double clock_shift_s = 0.001;
    const long n_samples = static_cast<long>(std::floor(
        (double(total_frames) / fr - clock_shift_s) * cfg.gaze_rate_hz));
    for (long jj = 0; jj <= n_samples; ++jj) {
        const double t = double(jj) / cfg.gaze_rate_hz + clock_shift_s;
        const int f0 = std::min(total_frames, static_cast<int>(std::lround(t * fr)));
        GazeSample g;
        g.t = detail::q6(t);
        g.x_px = px[static_cast<std::size_t>(f0)];
        g.y_px = py[static_cast<std::size_t>(f0)];
        g.valid = true;
        ses.gaze.push_back(g);
    }

    // --- keypoint frames ---
    const double sway_amp = cfg.avatar_sway_speed_deg_s / (2.0 * M_PI * 0.25); // 0.25 Hz sway
    for (int f = 0; f <= total_frames; ++f) {
        KeypointFrame kf;
        kf.frame = f;
        kf.t = f / fr;
        const Plan& p = plans[owner[static_cast<std::size_t>(f)]];
        kf.points["corner_tl"] = {40.0, 40.0, 1.0};
        kf.points["corner_tr"] = {geom.width_px - 40.0, 40.0, 1.0};
        kf.points["corner_bl"] = {40.0, geom.height_px - 40.0, 1.0};
        kf.points["corner_br"] = {geom.width_px - 40.0, geom.height_px - 40.0, 1.0};
        for (const Side side : {Side::Left, Side::Right}) {
            const int si = side == Side::Left ? 0 : 1;
            const double cx = anchor_x(side) +
                              sway_amp * std::sin(2.0 * M_PI * 0.25 * kf.t + p.sway_phase[si]);
            for (const auto& [part, off] : detail::body_offsets()) {
                Keypoint kp;
                kp.x_px = detail::q3(deg_to_px_x(cx + off.first));
                kp.y_px = detail::q3(deg_to_px_y(off.second));
                kp.likelihood = 1.0;
                if (cfg.occlusion_rate > 0.0 && rng_occl.uniform() < cfg.occlusion_rate)
                    kp.likelihood = detail::q3(rng_occl.uniform(0.2, 0.85));
                kf.points[avatar_prefix(side) + part] = kp;
            }
        }
        ses.frames.push_back(std::move(kf));
    }

    // Return the session as a fresh load would see it: occluded points are
    // below the confidence cutoff and get dropped, and every frame carries
    // its nearest-gaze index.
    ses.frames = ingest::filter_keypoints(std::move(ses.frames), ses.p_cutoff);
    ses.aligned = ingest::align_streams(ses.gaze, ses.frames);

    // --- aligned values and ground-truth features ---
    // sample index nearest to frame f under the 1 ms shift: even frames hit
    // 2.5f, odd frames fall back to the earlier sample at 2.5f - 0.5
    const auto aligned_px = [&](int f) -> std::pair<double, double> {
        const long jj = (5L * f) / 2; // floor works for both parities
        return {ses.gaze[static_cast<std::size_t>(jj)].x_px, ses.gaze[static_cast<std::size_t>(jj)].y_px};
    };

    GroundTruth& truth = out.truth;
    truth.participant_id = cfg.participant_id;

    for (int b = 1; b <= cfg.n_blocks; ++b) {
        TruthBlock tb;
        tb.block = b;
        const auto [ox, oy] = offset_of(b);
        tb.dx_px = ox;
        tb.dy_px = oy;
        tb.above_gate =
            std::hypot(ox * geom.deg_per_px_x(), oy * geom.deg_per_px_y()) > 0.5;
        truth.blocks.push_back(tb);
    }

    // features first, decisions after standardization
    std::vector<TruthTrial> trials(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const Plan& p = plans[static_cast<std::size_t>(i)];
        TruthTrial& tt = trials[static_cast<std::size_t>(i)];
        tt.trial_id = i + 1;
        tt.block = p.block;
        tt.onset_s = (i * fpt + fix) / fr;
        tt.offset_s = (i * fpt + fpt) / fr;
        tt.mse = p.mse;
        tt.natural_side = p.natural;
        tt.jump_frames = p.jumps;
        tt.n_saccades = static_cast<int>(p.jumps.size());

        const int ws = i * fpt + fix;
        const int we = ws + cfg.trial_frames();
        std::vector<int> bounds = {ws};
        for (int m : p.jumps) bounds.push_back(m);
        bounds.push_back(we + 1);
        for (std::size_t sgi = 0; sgi + 1 < bounds.size(); ++sgi) {
            TruthSegment ts;
            ts.start_frame = bounds[sgi];
            ts.end_frame = bounds[sgi + 1] - 1;
            ts.side = sgi % 2 == 0 ? p.start_side : opposite(p.start_side);
            (ts.side == Side::Left ? tt.duration_left_s : tt.duration_right_s) +=
                double(ts.end_frame - ts.start_frame) / fr;
            for (int f = ts.start_frame; f <= ts.end_frame; ++f) {
                auto [ax, ay] = aligned_px(f);
                // the offset applied to this frame follows its block in time
                const auto [ox, oy] = offset_of(plans[owner[static_cast<std::size_t>(f)]].block);
                if (std::hypot(ox * geom.deg_per_px_x(), oy * geom.deg_per_px_y()) > 0.5)
                    ay -= oy; // the pipeline sees calibrated values
                const double y_deg = (ay - geom.center_y_px()) * geom.deg_per_px_y();
                const double pelvis_y_deg = 0.0; // pelvis sits on the vertical center
                (y_deg < pelvis_y_deg ? tt.frames_above : tt.frames_below) += 1;
            }
            tt.segments.push_back(ts);
        }
        tt.first_side = side_sign(tt.segments.front().side);
        tt.last_side = side_sign(tt.segments.back().side);
    }

    // standardized features drive the decisions
    Eigen::MatrixXd z(n, 6);
    for (int i = 0; i < n; ++i) {
        const TruthTrial& tt = trials[static_cast<std::size_t>(i)];
        const double ratio_num = double(tt.frames_above);
        const double ratio_den = double(tt.frames_below);
        double log_ratio = 0.0; // neutral when degenerate; the cap is a cohort quantity
        if (ratio_num > 0.0 && ratio_den > 0.0) log_ratio = std::log(ratio_num / ratio_den);
        z(i, 0) = tt.duration_left_s;
        z(i, 1) = tt.duration_right_s;
        z(i, 2) = double(tt.n_saccades);
        z(i, 3) = double(tt.first_side);
        z(i, 4) = double(tt.last_side);
        z(i, 5) = log_ratio;
    }
    Eigen::VectorXd mse_v(n);
    for (int i = 0; i < n; ++i) mse_v(i) = trials[static_cast<std::size_t>(i)].mse;
    const double mse_mean = mse_v.mean();
    const double mse_sd = std::sqrt((mse_v.array() - mse_mean).square().sum() / double(n));
    for (Eigen::Index c = 0; c < 6; ++c) {
        if (c == 3 || c == 4) continue; // binary side columns stay as they are
        const double mean = z.col(c).mean();
        const double sd = std::sqrt((z.col(c).array() - mean).square().sum() / double(n));
        if (sd > 1e-12)
            z.col(c) = (z.col(c).array() - mean) / sd;
        else
            z.col(c).setZero();
    }

    for (int i = 0; i < n; ++i) {
        TruthTrial& tt = trials[static_cast<std::size_t>(i)];
        double eta = cfg.true_alpha;
        for (int c = 0; c < 6; ++c) eta += cfg.true_beta[static_cast<std::size_t>(c)] * z(i, c);
        if (cfg.cascade_strength != 0.0 && mse_sd > 1e-12)
            eta -= cfg.cascade_strength * ((tt.mse - mse_mean) / mse_sd) * double(tt.last_side);
        tt.theta = inference::sigmoid(eta);
        tt.decision = rng_decision.bernoulli(tt.theta) ? 1 : 0;
        tt.congruent = features::congruence(tt.last_side, tt.decision);

        TrialRecord tr;
        tr.trial_id = tt.trial_id;
        tr.block = tt.block;
        tr.natural_side = tt.natural_side;
        tr.response_side = tt.decision == 1 ? Side::Right : Side::Left;
        tr.mse = tt.mse;
        tr.onset_s = tt.onset_s;
        tr.offset_s = tt.offset_s;
        ses.trials.push_back(tr);
    }
    truth.trials = std::move(trials);
    return out;
}

// ---------------------------------------------------------------------------
// plain logistic benchmark data
// ---------------------------------------------------------------------------

struct LogisticTruth {
    inference::LogisticModel model;
    double alpha = 0.0;
    Eigen::VectorXd beta;
    Eigen::VectorXd theta;
};

/// Bernoulli outcomes from a known logistic model with standard normal
/// features; used to check parameter recovery and information estimates.
inline LogisticTruth gen_logistic_data(int n, double alpha, const Eigen::VectorXd& beta,
                                       std::uint64_t seed) {
    if (n < 1) throw InvalidConfig("need at least one observation");
    Rng rng(seed);
    LogisticTruth t;
    t.alpha = alpha;
    t.beta = beta;
    t.model.y.resize(n, beta.size());
    t.model.x.resize(n);
    t.theta.resize(n);
    for (int i = 0; i < n; ++i) {
        double eta = alpha;
        for (Eigen::Index jj = 0; jj < beta.size(); ++jj) {
            t.model.y(i, jj) = rng.normal();
            eta += beta(jj) * t.model.y(i, jj);
        }
        t.theta(i) = inference::sigmoid(eta);
        t.model.x(i) = rng.bernoulli(t.theta(i)) ? 1 : 0;
    }
    for (Eigen::Index jj = 0; jj < beta.size(); ++jj)
        t.model.feature_names.push_back("y" + std::to_string(jj + 1));
    return t;
}

} // namespace gaze2afc::synth
