#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gaze2afc/csv.hpp"
#include "gaze2afc/error.hpp"
#include "gaze2afc/types.hpp"

namespace gaze2afc::ingest {

// ---------------------------------------------------------------------------
// gaze stream
// ---------------------------------------------------------------------------

struct GazeCsvFormat {
    std::string timestamp_col = "timestamp_s";
    std::string x_col = "x_px";
    std::string y_col = "y_px";
    std::string valid_col = "valid";
    /// Added to every timestamp; compensates a constant offset between the
    /// eye-tracker clock and the video clock. Zero assumes a shared clock.
    double clock_offset_s = 0.0;
};

/// Parses the raw eye-tracker CSV. Timestamps must be strictly increasing.
/// Off-screen coordinates are kept unclamped but flagged.
inline std::vector<GazeSample> parse_gaze(const std::string& path, const CameraGeometry& geom = {},
                                          const GazeCsvFormat& fmt = {}) {
    const CsvTable t = read_csv(path);
    const int ct = t.require_column(fmt.timestamp_col);
    const int cx = t.require_column(fmt.x_col);
    const int cy = t.require_column(fmt.y_col);
    const int cv = t.require_column(fmt.valid_col);

    std::vector<GazeSample> out;
    out.reserve(t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        GazeSample s;
        s.t = parse_double_field(t, r, ct) + fmt.clock_offset_s;
        s.x_px = parse_double_field(t, r, cx);
        s.y_px = parse_double_field(t, r, cy);
        const long v = parse_int_field(t, r, cv);
        if (v != 0 && v != 1) throw MalformedRow(path, t.line_numbers[r], "valid flag must be 0 or 1");
        s.valid = v == 1;
        if (!std::isfinite(s.t) || !std::isfinite(s.x_px) || !std::isfinite(s.y_px))
            throw MalformedRow(path, t.line_numbers[r], "non-finite value");
        s.off_screen = s.valid && (s.x_px < 0.0 || s.x_px >= geom.width_px || s.y_px < 0.0 ||
                                   s.y_px >= geom.height_px);
        if (!out.empty() && s.t <= out.back().t)
            throw NonMonotonicTimestamp(detail::located(path, t.line_numbers[r],
                                                        "timestamp does not increase"));
        out.push_back(s);
    }
    return out;
}

// ---------------------------------------------------------------------------
// keypoint stream
// ---------------------------------------------------------------------------

/// Parses the long-format pose CSV (frame,label,x_px,y_px,likelihood) into
/// densely indexed frames. Absent labels stay missing. Frame timestamps are
/// derived from the index at the video frame rate.
inline std::vector<KeypointFrame> parse_keypoints(const std::string& path,
                                                  const std::vector<std::string>& label_set = default_label_set(),
                                                  double frame_rate_hz = 24.0) {
    const CsvTable t = read_csv(path);
    const int cf = t.require_column("frame");
    const int cl = t.require_column("label");
    const int cx = t.require_column("x_px");
    const int cy = t.require_column("y_px");
    const int cp = t.require_column("likelihood");

    const std::set<std::string> labels(label_set.begin(), label_set.end());

    long min_frame = 0, max_frame = -1;
    struct Row {
        long frame;
        std::string label;
        Keypoint kp;
        std::size_t line;
    };
    std::vector<Row> rows;
    rows.reserve(t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        Row row;
        row.frame = parse_int_field(t, r, cf);
        row.label = t.rows[r][static_cast<std::size_t>(cl)];
        row.kp.x_px = parse_double_field(t, r, cx);
        row.kp.y_px = parse_double_field(t, r, cy);
        row.kp.likelihood = parse_double_field(t, r, cp);
        row.line = t.line_numbers[r];
        if (row.frame < 0) throw MalformedRow(path, row.line, "negative frame index");
        if (!labels.count(row.label))
            throw UnknownLabel(detail::located(path, row.line, "unknown label '" + row.label + "'"));
        if (!(row.kp.likelihood >= 0.0 && row.kp.likelihood <= 1.0))
            throw MalformedRow(path, row.line, "likelihood outside [0,1]");
        if (rows.empty()) {
            min_frame = max_frame = row.frame;
        } else {
            min_frame = std::min(min_frame, row.frame);
            max_frame = std::max(max_frame, row.frame);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw Error(path + ": no keypoint rows");

    std::vector<KeypointFrame> frames(static_cast<std::size_t>(max_frame - min_frame + 1));
    for (std::size_t i = 0; i < frames.size(); ++i) {
        frames[i].frame = static_cast<int>(min_frame + static_cast<long>(i));
        frames[i].t = frames[i].frame / frame_rate_hz;
    }
    for (const Row& row : rows) {
        KeypointFrame& f = frames[static_cast<std::size_t>(row.frame - min_frame)];
        if (f.points.count(row.label))
            throw DuplicateLabelInFrame(detail::located(path, row.line,
                                                        "label '" + row.label + "' repeated in frame " +
                                                            std::to_string(row.frame)));
        f.points[row.label] = row.kp;
    }
    return frames;
}

/// Drops keypoints whose detector likelihood is at or below the cutoff.
/// Idempotent: a second pass with the same cutoff removes nothing.
inline std::vector<KeypointFrame> filter_keypoints(std::vector<KeypointFrame> frames, double p_cutoff = 0.9) {
    for (KeypointFrame& f : frames) {
        for (auto it = f.points.begin(); it != f.points.end();) {
            if (it->second.likelihood <= p_cutoff)
                it = f.points.erase(it);
            else
                ++it;
        }
    }
    return frames;
}

// ---------------------------------------------------------------------------
// trial metadata
// ---------------------------------------------------------------------------

struct TrialCsvFormat {
    /// Expected presentation length; rows outside the tolerance are rejected.
    /// Set to zero to accept any positive duration.
    double expected_duration_s = 3.5;
    double duration_tol_s = 0.1;
};

inline std::vector<TrialRecord> parse_trials(const std::string& path, const TrialCsvFormat& fmt = {}) {
    const CsvTable t = read_csv(path);
    const int cid = t.require_column("trial_id");
    const int cb = t.require_column("block");
    const int cn = t.require_column("natural_side");
    const int cr = t.require_column("response_side");
    const int cm = t.require_column("mse");
    const int con = t.require_column("onset_s");
    const int coff = t.require_column("offset_s");

    std::vector<TrialRecord> out;
    std::set<int> seen_ids;
    out.reserve(t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const std::size_t line = t.line_numbers[r];
        TrialRecord tr;
        tr.trial_id = static_cast<int>(parse_int_field(t, r, cid));
        tr.block = static_cast<int>(parse_int_field(t, r, cb));
        const auto ns = parse_side(t.rows[r][static_cast<std::size_t>(cn)]);
        const auto rs = parse_side(t.rows[r][static_cast<std::size_t>(cr)]);
        if (!ns || !rs) throw MalformedRow(path, line, "side must be Left or Right");
        tr.natural_side = *ns;
        tr.response_side = *rs;
        tr.mse = parse_double_field(t, r, cm);
        tr.onset_s = parse_double_field(t, r, con);
        tr.offset_s = parse_double_field(t, r, coff);
        if (!(tr.mse >= 0.0)) throw MalformedRow(path, line, "mse must be non-negative");
        if (!(tr.offset_s > tr.onset_s)) throw MalformedRow(path, line, "offset must follow onset");
        if (fmt.expected_duration_s > 0.0 &&
            std::abs((tr.offset_s - tr.onset_s) - fmt.expected_duration_s) > fmt.duration_tol_s)
            throw MalformedRow(path, line, "presentation duration off nominal");
        if (!seen_ids.insert(tr.trial_id).second)
            throw MalformedRow(path, line, "duplicate trial_id " + std::to_string(tr.trial_id));
        if (!out.empty()) {
            if (tr.onset_s <= out.back().onset_s) throw MalformedRow(path, line, "trials out of order");
            if (tr.onset_s < out.back().offset_s) throw MalformedRow(path, line, "trials overlap");
        }
        out.push_back(tr);
    }
    return out;
}

// ---------------------------------------------------------------------------
// temporal alignment
// ---------------------------------------------------------------------------

/// Nearest-timestamp match from each video frame into the gaze stream,
/// undersampling the faster stream. Ties pick the earlier sample. Frames
/// farther than `max_gap_s` from any gaze sample stay unmatched.
inline std::vector<std::optional<std::size_t>> align_streams(const std::vector<GazeSample>& gaze,
                                                             const std::vector<KeypointFrame>& frames,
                                                             double max_gap_s = 1.0 / 24.0) {
    if (gaze.empty() || frames.empty()) throw NoTemporalOverlap("a stream is empty");
    if (gaze.back().t < frames.front().t || frames.back().t < gaze.front().t)
        throw NoTemporalOverlap("gaze and keypoint spans are disjoint");

    std::vector<std::optional<std::size_t>> aligned(frames.size());
    std::size_t lo = 0;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const double ft = frames[i].t;
        while (lo + 1 < gaze.size() && gaze[lo + 1].t <= ft) ++lo;
        std::size_t best = lo;
        if (lo + 1 < gaze.size()) {
            const double d_lo = std::abs(gaze[lo].t - ft);
            const double d_hi = std::abs(gaze[lo + 1].t - ft);
            if (d_hi < d_lo) best = lo + 1; // tie keeps the earlier sample
        }
        if (std::abs(gaze[best].t - ft) <= max_gap_s) aligned[i] = best;
    }
    return aligned;
}

// ---------------------------------------------------------------------------
// session assembly
// ---------------------------------------------------------------------------

struct IngestOptions {
    double p_cutoff = 0.9;
    double frame_rate_hz = 24.0;
    double max_align_gap_s = 1.0 / 24.0;
    CameraGeometry geometry;
    GazeCsvFormat gaze_format;
    TrialCsvFormat trial_format;
    std::vector<std::string> label_set = default_label_set();
};

inline Session load_session(const std::string& gaze_path, const std::string& keypoints_path,
                            const std::string& trials_path, const std::string& participant_id,
                            const IngestOptions& opt = {}) {
    Session s;
    s.participant_id = participant_id;
    s.frame_rate_hz = opt.frame_rate_hz;
    s.p_cutoff = opt.p_cutoff;
    s.gaze = parse_gaze(gaze_path, opt.geometry, opt.gaze_format);
    s.frames = filter_keypoints(parse_keypoints(keypoints_path, opt.label_set, opt.frame_rate_hz),
                                opt.p_cutoff);
    s.trials = parse_trials(trials_path, opt.trial_format);
    s.aligned = align_streams(s.gaze, s.frames, opt.max_align_gap_s);
    return s;
}

} // namespace gaze2afc::ingest
