#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gaze2afc/error.hpp"
#include "gaze2afc/types.hpp"

namespace gaze2afc::kinematics {

// ---------------------------------------------------------------------------
// angular coordinates
// ---------------------------------------------------------------------------

struct AngularPoint {
    double x_deg = 0.0;
    double y_deg = 0.0;
};

/// Linear, centered pixel-to-degree map. (0,0) deg is the screen center;
/// x grows rightward, y grows downward, matching the pixel axes.
inline AngularPoint px_to_deg(double x_px, double y_px, const CameraGeometry& geom = {}) {
    return {(x_px - geom.center_x_px()) * geom.deg_per_px_x(),
            (y_px - geom.center_y_px()) * geom.deg_per_px_y()};
}

inline double angular_distance(const AngularPoint& a, const AngularPoint& b) {
    return std::hypot(a.x_deg - b.x_deg, a.y_deg - b.y_deg);
}

// ---------------------------------------------------------------------------
// post-hoc calibration
// ---------------------------------------------------------------------------

struct CalibrationConfig {
    double cross_x_px = 640.0;
    double cross_y_px = 480.0;
    /// Pre-onset window treated as fixation on the cross.
    double fixation_s = 0.75;
    /// Offsets at or below this magnitude sit inside the tracker's own
    /// accuracy; correcting them would only add noise.
    double apply_gate_deg = 0.5;
};

struct CalibrationResult {
    Session session;
    std::vector<CalibrationOffset> offsets;
    std::vector<std::string> warnings;
};

namespace detail {

inline double median(std::vector<double> v) {
    const std::size_t n = v.size();
    std::nth_element(v.begin(), v.begin() + n / 2, v.end());
    const double hi = v[n / 2];
    if (n % 2 == 1) return hi;
    std::nth_element(v.begin(), v.begin() + n / 2 - 1, v.end());
    return (v[n / 2 - 1] + hi) / 2.0;
}

} // namespace detail

/// Estimates one constant offset per block from the fixation windows that
/// precede each trial onset, and subtracts it from all gaze of that block
/// when it exceeds the gate. Blocks without fixation samples are skipped
/// with a warning. Speeds are unchanged: the shift is constant per block
/// and block boundaries never fall inside a trial.
inline CalibrationResult post_calibrate(const Session& in, const CalibrationConfig& cfg = {}) {
    CalibrationResult res;
    res.session = in;

    // block -> trial onsets/offsets, in trial order
    std::map<int, std::vector<const TrialRecord*>> by_block;
    for (const TrialRecord& tr : in.trials) by_block[tr.block].push_back(&tr);

    const CameraGeometry geom; // offsets are reported in degrees for the gate
    struct BlockSpan {
        int block;
        double begin, end;
        double dx = 0.0, dy = 0.0;
        bool applied = false;
    };
    std::vector<BlockSpan> spans;

    const auto first_at_or_after = [&in](double t) {
        return std::lower_bound(in.gaze.begin(), in.gaze.end(), t,
                                [](const GazeSample& g, double tt) { return g.t < tt; });
    };

    for (const auto& [block, trials] : by_block) {
        std::vector<double> xs, ys;
        for (const TrialRecord* tr : trials) {
            const double w0 = tr->onset_s - cfg.fixation_s;
            const double w1 = tr->onset_s;
            for (auto it = first_at_or_after(w0); it != in.gaze.end() && it->t < w1; ++it) {
                if (it->valid) {
                    xs.push_back(it->x_px);
                    ys.push_back(it->y_px);
                }
            }
        }

        CalibrationOffset off;
        off.block = block;
        off.n_samples = xs.size();
        BlockSpan span;
        span.block = block;
        span.begin = trials.front()->onset_s - cfg.fixation_s;
        span.end = trials.back()->offset_s;
        if (xs.empty()) {
            res.warnings.push_back("block " + std::to_string(block) +
                                   ": no fixation samples, calibration skipped");
        } else {
            off.has_isi_data = true;
            off.dx_px = detail::median(xs) - cfg.cross_x_px;
            off.dy_px = detail::median(ys) - cfg.cross_y_px;
            off.magnitude_deg = std::hypot(off.dx_px * geom.deg_per_px_x(), off.dy_px * geom.deg_per_px_y());
            off.applied = off.magnitude_deg > cfg.apply_gate_deg;
            span.dx = off.dx_px;
            span.dy = off.dy_px;
            span.applied = off.applied;
        }
        spans.push_back(span);
        res.offsets.push_back(off);
    }

    if (spans.empty()) return res;

    // Every sample belongs to the span containing it, or the nearest one.
    for (GazeSample& g : res.session.gaze) {
        const BlockSpan* best = &spans.front();
        double best_d = std::numeric_limits<double>::infinity();
        for (const BlockSpan& s : spans) {
            double d = 0.0;
            if (g.t < s.begin)
                d = s.begin - g.t;
            else if (g.t > s.end)
                d = g.t - s.end;
            if (d < best_d) {
                best_d = d;
                best = &s;
            }
        }
        if (best->applied) {
            g.x_px -= best->dx;
            g.y_px -= best->dy;
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// per-trial trajectory at the frame rate
// ---------------------------------------------------------------------------

/// Gaze at one video frame; missing when no aligned, valid sample exists.
struct TrajectoryPoint {
    int frame = 0;
    double t = 0.0;
    std::optional<AngularPoint> gaze;
};

/// Frames whose timestamp falls inside [onset, offset], with the aligned
/// gaze sample converted to degrees. Invalid or unmatched gaze is missing.
inline std::vector<TrajectoryPoint> trial_trajectory(const Session& s, const TrialRecord& trial,
                                                     const CameraGeometry& geom = {}) {
    std::vector<TrajectoryPoint> traj;
    for (std::size_t i = 0; i < s.frames.size(); ++i) {
        const double t = s.frames[i].t;
        if (t < trial.onset_s || t > trial.offset_s) continue;
        TrajectoryPoint p;
        p.frame = s.frames[i].frame;
        p.t = t;
        if (i < s.aligned.size() && s.aligned[i]) {
            const GazeSample& g = s.gaze[*s.aligned[i]];
            if (g.valid) p.gaze = px_to_deg(g.x_px, g.y_px, geom);
        }
        traj.push_back(p);
    }
    if (traj.empty()) throw EmptyTrialWindow("trial " + std::to_string(trial.trial_id) +
                                             ": no frames in window");
    return traj;
}

// ---------------------------------------------------------------------------
// angular speed
// ---------------------------------------------------------------------------

/// Speed of interval k (between frames k and k+1) in deg/s. Missing when
/// either endpoint lacks gaze or the frames are not consecutive.
inline std::vector<std::optional<double>> gaze_speed(const std::vector<TrajectoryPoint>& traj,
                                                     double frame_rate_hz = 24.0) {
    if (traj.size() < 2) throw TooFewSamples("need at least two frames for a speed");
    std::vector<std::optional<double>> speeds(traj.size() - 1);
    for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
        if (!traj[k].gaze || !traj[k + 1].gaze) continue;
        if (traj[k + 1].frame != traj[k].frame + 1) continue;
        speeds[k] = angular_distance(*traj[k].gaze, *traj[k + 1].gaze) * frame_rate_hz;
    }
    return speeds;
}

// ---------------------------------------------------------------------------
// saccade detection
// ---------------------------------------------------------------------------

/// Maximal runs of intervals with speed strictly above the threshold.
/// Missing intervals never join a run.
inline std::vector<SaccadeEvent> detect_saccades(const std::vector<std::optional<double>>& speeds,
                                                 double threshold_deg_s = 100.0) {
    std::vector<SaccadeEvent> events;
    std::size_t k = 0;
    while (k < speeds.size()) {
        if (!speeds[k] || !(*speeds[k] > threshold_deg_s)) {
            ++k;
            continue;
        }
        SaccadeEvent ev;
        ev.first_interval = static_cast<int>(k);
        ev.peak_speed_deg_s = *speeds[k];
        while (k + 1 < speeds.size() && speeds[k + 1] && *speeds[k + 1] > threshold_deg_s) {
            ++k;
            ev.peak_speed_deg_s = std::max(ev.peak_speed_deg_s, *speeds[k]);
        }
        ev.last_interval = static_cast<int>(k);
        events.push_back(ev);
        ++k;
    }
    return events;
}

// ---------------------------------------------------------------------------
// segmentation
// ---------------------------------------------------------------------------

struct SegmentationConfig {
    double saccade_threshold_deg_s = 100.0;
    double frame_rate_hz = 24.0;
    CameraGeometry geometry;
};

namespace detail {

/// Mean position of the detected body keypoints of one avatar, in degrees.
inline std::optional<AngularPoint> avatar_centroid(const KeypointFrame& f, Side side,
                                                   const CameraGeometry& geom) {
    const std::string prefix = avatar_prefix(side);
    double sx = 0.0, sy = 0.0;
    int n = 0;
    for (const auto& [label, kp] : f.points) {
        if (label.rfind(prefix, 0) != 0) continue;
        sx += kp.x_px;
        sy += kp.y_px;
        ++n;
    }
    if (n == 0) return std::nullopt;
    return px_to_deg(sx / n, sy / n, geom);
}

inline const KeypointFrame* frame_at(const Session& s, int frame) {
    if (s.frames.empty()) return nullptr;
    const long idx = static_cast<long>(frame) - s.frames.front().frame;
    if (idx < 0 || idx >= static_cast<long>(s.frames.size())) return nullptr;
    return &s.frames[static_cast<std::size_t>(idx)];
}

/// Pelvis height of one avatar across the trial window, linearly
/// interpolated over missing frames. Empty when never detected.
inline std::map<int, double> pelvis_track(const Session& s, Side side,
                                          const std::vector<TrajectoryPoint>& traj) {
    const std::string label = avatar_prefix(side) + "pelvis";
    std::vector<std::pair<int, double>> known;
    for (const TrajectoryPoint& p : traj) {
        const KeypointFrame* f = frame_at(s, p.frame);
        if (!f) continue;
        const auto it = f->points.find(label);
        if (it != f->points.end()) known.emplace_back(p.frame, it->second.y_px);
    }
    std::map<int, double> track;
    if (known.empty()) return track;
    for (const TrajectoryPoint& p : traj) {
        auto hi = std::lower_bound(known.begin(), known.end(), std::make_pair(p.frame, -1e300));
        double y;
        if (hi == known.begin())
            y = known.front().second;
        else if (hi == known.end())
            y = known.back().second;
        else if (hi->first == p.frame)
            y = hi->second;
        else {
            const auto lo = hi - 1;
            const double w = double(p.frame - lo->first) / double(hi->first - lo->first);
            y = lo->second + w * (hi->second - lo->second);
        }
        track[p.frame] = y;
    }
    return track;
}

} // namespace detail

/// Splits a trial window into gaze segments separated by saccades (and by
/// runs of missing gaze). Segments, saccade spans, and missing-gaze spans
/// partition the window. Each segment is attributed to the avatar whose
/// keypoint centroid is horizontally nearest to the segment's median gaze;
/// without keypoint evidence the screen midline decides. Ties go Left.
inline TrialSegmentation segment_trajectory(const Session& s, const TrialRecord& trial,
                                            const SegmentationConfig& cfg = {}) {
    const std::vector<TrajectoryPoint> traj = trial_trajectory(s, trial, cfg.geometry);
    TrialSegmentation out;
    out.trial_id = trial.trial_id;
    out.n_frames = static_cast<int>(traj.size());
    for (const TrajectoryPoint& p : traj)
        if (!p.gaze) ++out.n_missing_frames;

    std::vector<std::optional<double>> speeds;
    if (traj.size() >= 2) speeds = gaze_speed(traj, cfg.frame_rate_hz);
    const std::vector<SaccadeEvent> local = detect_saccades(speeds, cfg.saccade_threshold_deg_s);

    std::vector<bool> in_saccade(speeds.size(), false);
    for (const SaccadeEvent& ev : local)
        for (int k = ev.first_interval; k <= ev.last_interval; ++k) in_saccade[static_cast<std::size_t>(k)] = true;

    // Saccade spans reported in global frame indices.
    for (const SaccadeEvent& ev : local) {
        SaccadeEvent g = ev;
        g.first_interval = traj[static_cast<std::size_t>(ev.first_interval)].frame;
        g.last_interval = traj[static_cast<std::size_t>(ev.last_interval)].frame;
        out.saccades.push_back(g);
    }

    // Maximal runs of present-gaze frames not crossed by a saccade interval.
    std::size_t i = 0;
    while (i < traj.size()) {
        if (!traj[i].gaze) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < traj.size() && traj[j + 1].gaze && !in_saccade[j]) ++j;
        GazeSegment seg;
        seg.start_frame = traj[i].frame;
        seg.end_frame = traj[j].frame;
        seg.duration_s = double(seg.end_frame - seg.start_frame) / cfg.frame_rate_hz;
        for (std::size_t k = i; k <= j; ++k) {
            SegmentPoint p;
            p.frame = traj[k].frame;
            p.t = traj[k].t;
            p.x_deg = traj[k].gaze->x_deg;
            p.y_deg = traj[k].gaze->y_deg;
            seg.points.push_back(p);
        }

        // side attribution
        std::vector<double> xs;
        xs.reserve(seg.points.size());
        for (const SegmentPoint& p : seg.points) xs.push_back(p.x_deg);
        const double med_x = detail::median(xs);
        double cl_sum = 0.0, cr_sum = 0.0;
        int cl_n = 0, cr_n = 0;
        for (const SegmentPoint& p : seg.points) {
            const KeypointFrame* f = detail::frame_at(s, p.frame);
            if (!f) continue;
            if (const auto c = detail::avatar_centroid(*f, Side::Left, cfg.geometry)) {
                cl_sum += c->x_deg;
                ++cl_n;
            }
            if (const auto c = detail::avatar_centroid(*f, Side::Right, cfg.geometry)) {
                cr_sum += c->x_deg;
                ++cr_n;
            }
        }
        if (cl_n > 0 && cr_n > 0) {
            const double dl = std::abs(med_x - cl_sum / cl_n);
            const double dr = std::abs(med_x - cr_sum / cr_n);
            seg.side = dr < dl ? Side::Right : Side::Left;
        } else {
            seg.side = med_x > 0.0 ? Side::Right : Side::Left;
        }

        out.segments.push_back(std::move(seg));
        i = j + 1;
    }

    // Pelvis reference of the gazed avatar, attached after sides are known.
    std::map<int, double> pelvis_by_side[2] = {detail::pelvis_track(s, Side::Left, traj),
                                               detail::pelvis_track(s, Side::Right, traj)};
    for (GazeSegment& seg : out.segments) {
        const auto& track = pelvis_by_side[seg.side == Side::Left ? 0 : 1];
        if (track.empty()) continue;
        for (SegmentPoint& p : seg.points) {
            const auto it = track.find(p.frame);
            if (it != track.end())
                p.pelvis_y_deg = px_to_deg(0.0, it->second, cfg.geometry).y_deg;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// within-segment speed distribution
// ---------------------------------------------------------------------------

/// Speeds of the intervals that lie inside gaze segments, pooled over all
/// trials. Saccade intervals and intervals touching missing gaze never
/// contribute.
inline std::vector<double> within_segment_speeds(const Session& s, const SegmentationConfig& cfg = {}) {
    std::vector<double> speeds;
    for (const TrialRecord& trial : s.trials) {
        TrialSegmentation seg;
        try {
            seg = segment_trajectory(s, trial, cfg);
        } catch (const EmptyTrialWindow&) {
            continue;
        }
        for (const GazeSegment& g : seg.segments) {
            for (std::size_t k = 0; k + 1 < g.points.size(); ++k) {
                if (g.points[k + 1].frame != g.points[k].frame + 1) continue;
                const AngularPoint a{g.points[k].x_deg, g.points[k].y_deg};
                const AngularPoint b{g.points[k + 1].x_deg, g.points[k + 1].y_deg};
                speeds.push_back(angular_distance(a, b) * cfg.frame_rate_hz);
            }
        }
    }
    return speeds;
}

struct SpeedHistogram {
    std::vector<double> bin_edges; // size bins+1
    std::vector<double> density;   // size bins, integrates to 1
    std::vector<double> kde_x;
    std::vector<double> kde_y;
    double bandwidth = 0.0;
    std::size_t n = 0;

    double mode_speed() const {
        double best_x = 0.0, best_y = -1.0;
        for (std::size_t i = 0; i < kde_x.size(); ++i)
            if (kde_y[i] > best_y) {
                best_y = kde_y[i];
                best_x = kde_x[i];
            }
        return best_x;
    }
};

/// Density histogram plus a Gaussian kernel density estimate. A zero
/// bandwidth requests Silverman's rule.
inline SpeedHistogram speed_histogram(const std::vector<double>& speeds, double bin_width_deg_s = 1.0,
                                      double bandwidth = 0.0, int kde_points = 256) {
    if (speeds.empty()) throw TooFewSamples("no within-segment speeds");
    SpeedHistogram h;
    h.n = speeds.size();
    const double max_v = *std::max_element(speeds.begin(), speeds.end());
    const std::size_t bins = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((max_v + 1e-12) / bin_width_deg_s)));
    h.bin_edges.resize(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b) h.bin_edges[b] = b * bin_width_deg_s;
    h.density.assign(bins, 0.0);
    for (double v : speeds) {
        std::size_t b = static_cast<std::size_t>(v / bin_width_deg_s);
        if (b >= bins) b = bins - 1;
        h.density[b] += 1.0;
    }
    const double norm = 1.0 / (double(h.n) * bin_width_deg_s);
    for (double& d : h.density) d *= norm;

    double mean = 0.0;
    for (double v : speeds) mean += v;
    mean /= double(h.n);
    double var = 0.0;
    for (double v : speeds) var += (v - mean) * (v - mean);
    var /= double(h.n);
    const double sd = std::sqrt(var);
    h.bandwidth = bandwidth > 0.0 ? bandwidth
                                  : std::max(1e-6, std::pow(4.0 / (3.0 * double(h.n)), 0.2) * sd);

    h.kde_x.resize(static_cast<std::size_t>(kde_points));
    h.kde_y.resize(static_cast<std::size_t>(kde_points));
    const double x1 = max_v + 3.0 * h.bandwidth;
    const double inv = 1.0 / (double(h.n) * h.bandwidth * std::sqrt(2.0 * M_PI));
    for (int i = 0; i < kde_points; ++i) {
        const double x = x1 * double(i) / double(kde_points - 1);
        double y = 0.0;
        for (double v : speeds) {
            const double z = (x - v) / h.bandwidth;
            y += std::exp(-0.5 * z * z);
        }
        h.kde_x[static_cast<std::size_t>(i)] = x;
        h.kde_y[static_cast<std::size_t>(i)] = y * inv;
    }
    return h;
}

} // namespace gaze2afc::kinematics
