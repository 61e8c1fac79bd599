#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gaze2afc/error.hpp"

namespace gaze2afc {

// ---------------------------------------------------------------------------
// display geometry
// ---------------------------------------------------------------------------

/// Screen pixel grid and its angular extent at the viewing distance.
/// The pixel-to-degree map is linear and centered; small-angle error over
/// this field of view is below the eye tracker's accuracy.
struct CameraGeometry {
    double width_px = 1280.0;
    double height_px = 960.0;
    double fov_h_deg = 60.0;
    double fov_v_deg = 46.0;

    double center_x_px() const { return width_px / 2.0; }
    double center_y_px() const { return height_px / 2.0; }
    double deg_per_px_x() const { return fov_h_deg / width_px; }
    double deg_per_px_y() const { return fov_v_deg / height_px; }
};

// ---------------------------------------------------------------------------
// sides
// ---------------------------------------------------------------------------

enum class Side { Left, Right };

/// Sign convention used throughout: Left = -1, Right = +1.
inline int side_sign(Side s) { return s == Side::Left ? -1 : +1; }

inline Side opposite(Side s) { return s == Side::Left ? Side::Right : Side::Left; }

inline const char* side_name(Side s) { return s == Side::Left ? "Left" : "Right"; }

inline std::optional<Side> parse_side(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "left" || s == "l") return Side::Left;
    if (s == "right" || s == "r") return Side::Right;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// raw streams
// ---------------------------------------------------------------------------

/// One eye-tracker sample. Coordinates are raw screen pixels; off-screen
/// samples are kept unclamped and only flagged.
struct GazeSample {
    double t = 0.0;
    double x_px = 0.0;
    double y_px = 0.0;
    bool valid = false;
    bool off_screen = false;
};

struct Keypoint {
    double x_px = 0.0;
    double y_px = 0.0;
    double likelihood = 0.0;
};

/// All keypoints of one video frame. Labels not present in the map are
/// missing (never detected, or removed by the likelihood filter).
struct KeypointFrame {
    int frame = 0;
    double t = 0.0;
    std::map<std::string, Keypoint> points;
};

struct TrialRecord {
    int trial_id = 0;
    int block = 0;
    Side natural_side = Side::Left;   // which avatar plays the unmodified motion
    Side response_side = Side::Left;  // which avatar the participant chose
    double mse = 0.0;                 // distortion strength of the modified avatar
    double onset_s = 0.0;
    double offset_s = 0.0;

    bool correct() const { return natural_side == response_side; }
};

/// One participant's aligned recording session.
/// `aligned[i]` is the gaze index nearest in time to frame i, when one
/// exists within the alignment gap. Immutable once built; transforms
/// return fresh copies.
struct Session {
    std::string participant_id;
    std::vector<GazeSample> gaze;
    std::vector<KeypointFrame> frames;
    std::vector<TrialRecord> trials;
    std::vector<std::optional<std::size_t>> aligned;
    double frame_rate_hz = 24.0;
    double p_cutoff = 0.9;
};

// ---------------------------------------------------------------------------
// keypoint label set
// ---------------------------------------------------------------------------

/// Four checkerboard corners plus fifteen body parts per avatar, 34 total.
inline std::vector<std::string> default_label_set() {
    std::vector<std::string> labels = {"corner_tl", "corner_tr", "corner_bl", "corner_br"};
    static const char* body[] = {"foot_l",     "foot_r",  "knee_l", "knee_r",     "pelvis",
                                 "hand_l",     "hand_r",  "elbow_l", "elbow_r",   "shoulder_l",
                                 "shoulder_r", "torso",   "neck",    "manubrium", "head"};
    for (const char* prefix : {"left_", "right_"})
        for (const char* part : body) labels.push_back(std::string(prefix) + part);
    return labels;
}

inline std::string avatar_prefix(Side s) { return s == Side::Left ? "left_" : "right_"; }

// ---------------------------------------------------------------------------
// derived per-trial structures
// ---------------------------------------------------------------------------

/// One sample of a gaze segment, in degrees. `pelvis_y_deg` is the vertical
/// pelvis position of the gazed avatar at that frame (interpolated across
/// missing frames), when any pelvis data exists in the trial window.
struct SegmentPoint {
    int frame = 0;
    double t = 0.0;
    double x_deg = 0.0;
    double y_deg = 0.0;
    std::optional<double> pelvis_y_deg;
};

/// A maximal run of frames between saccades during which gaze rests on one
/// avatar. Frame indices are global (match the keypoint stream).
struct GazeSegment {
    int start_frame = 0;
    int end_frame = 0; // inclusive
    Side side = Side::Left;
    double duration_s = 0.0;
    std::vector<SegmentPoint> points;
};

/// A saccade: a maximal run of inter-frame intervals whose angular speed
/// exceeds the threshold. Interval k sits between frames k and k+1.
struct SaccadeEvent {
    int first_interval = 0;
    int last_interval = 0; // inclusive
    double peak_speed_deg_s = 0.0;

    int start_frame() const { return first_interval; }
    int end_frame() const { return last_interval + 1; }
};

/// Segmentation of one trial window plus the evidence it was built from.
struct TrialSegmentation {
    int trial_id = 0;
    std::vector<GazeSegment> segments;
    std::vector<SaccadeEvent> saccades;
    int n_frames = 0;          // frames in the trial window
    int n_missing_frames = 0;  // frames without usable gaze
};

/// Per-block constant gaze offset estimated from fixation periods.
struct CalibrationOffset {
    int block = 0;
    double dx_px = 0.0;
    double dy_px = 0.0;
    double magnitude_deg = 0.0;
    bool has_isi_data = false;
    bool applied = false;
    std::size_t n_samples = 0;
};

/// The six per-trial gaze features, in raw (pre-transform) units.
struct TrialFeatures {
    int trial_id = 0;
    double duration_left_s = 0.0;
    double duration_right_s = 0.0;
    int n_saccades = 0;
    int first_side = 0; // -1 left, +1 right
    int last_side = 0;
    double upper_lower_ratio = 0.0; // time above pelvis / time below
    bool ratio_capped = false;      // denominator was zero
    bool ratio_missing = false;     // no pelvis reference at all
};

} // namespace gaze2afc
