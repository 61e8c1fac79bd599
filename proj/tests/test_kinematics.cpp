#include <cmath>
#include <optional>
#include <vector>

#include <gtest/gtest.h>

#include "gaze2afc/kinematics.hpp"
#include "gaze2afc/rng.hpp"

using namespace gaze2afc;
using kinematics::AngularPoint;

namespace {

/// Dense 24 Hz session: one gaze sample per frame, identity alignment,
/// one trial spanning every frame. y stays on the horizontal midline.
Session session_from_xs(const std::vector<double>& xs_px, const std::vector<bool>& valid = {},
                        bool with_avatars = false) {
    Session s;
    s.participant_id = "test";
    const int n = static_cast<int>(xs_px.size());
    for (int i = 0; i < n; ++i) {
        GazeSample g;
        g.t = i / 24.0;
        g.x_px = xs_px[static_cast<std::size_t>(i)];
        g.y_px = 480.0;
        g.valid = valid.empty() ? true : valid[static_cast<std::size_t>(i)];
        s.gaze.push_back(g);
        KeypointFrame f;
        f.frame = i;
        f.t = i / 24.0;
        if (with_avatars) {
            f.points["left_pelvis"] = {400.0, 480.0, 0.99};
            f.points["left_head"] = {400.0, 300.0, 0.99};
            f.points["right_pelvis"] = {880.0, 480.0, 0.99};
            f.points["right_head"] = {880.0, 300.0, 0.99};
        }
        s.frames.push_back(f);
        s.aligned.push_back(static_cast<std::size_t>(i));
    }
    TrialRecord tr;
    tr.trial_id = 1;
    tr.block = 0;
    tr.onset_s = 0.0;
    tr.offset_s = (n - 1) / 24.0;
    s.trials.push_back(tr);
    return s;
}

constexpr double kDegPerPxX = 60.0 / 1280.0;

} // namespace

TEST(PxToDeg, CenteredLinearMap) {
    const CameraGeometry geom;
    const auto c = kinematics::px_to_deg(640.0, 480.0, geom);
    EXPECT_DOUBLE_EQ(c.x_deg, 0.0);
    EXPECT_DOUBLE_EQ(c.y_deg, 0.0);

    // 16 degrees is 341.33 px horizontally at this geometry
    const auto p = kinematics::px_to_deg(640.0 + 16.0 * 1280.0 / 60.0, 480.0, geom);
    EXPECT_NEAR(p.x_deg, 16.0, 1e-12);

    const auto q = kinematics::px_to_deg(0.0, 0.0, geom);
    EXPECT_DOUBLE_EQ(q.x_deg, -30.0);
    EXPECT_DOUBLE_EQ(q.y_deg, -23.0);

    const auto r = kinematics::px_to_deg(640.0, 480.0 + 10.0 * 960.0 / 46.0, geom);
    EXPECT_NEAR(r.y_deg, 10.0, 1e-12);
}

TEST(PxToDeg, AngularDistance) {
    EXPECT_DOUBLE_EQ(kinematics::angular_distance({0, 0}, {3, 4}), 5.0);
    EXPECT_DOUBLE_EQ(kinematics::angular_distance({1, 1}, {1, 1}), 0.0);
}

TEST(Calibration, RecoversInjectedOffsetPerBlock) {
    Session s;
    s.participant_id = "test";
    // two blocks, one trial each; offsets injected per block
    const double dx0 = 15.0, dy0 = -6.0; // 0.76 deg, above the gate
    const double dx1 = -20.0, dy1 = 0.0; // 0.94 deg
    TrialRecord t1{1, 0, Side::Left, Side::Left, 0.1, 1.0, 4.5};
    TrialRecord t2{2, 1, Side::Left, Side::Left, 0.1, 10.0, 13.5};
    s.trials = {t1, t2};

    std::vector<double> clean_x, clean_y;
    for (int i = 0; i < 14 * 24; ++i) {
        const double t = i / 24.0;
        GazeSample g;
        g.t = t;
        const bool block1 = t > 6.875; // past the midpoint between the block spans
        double x, y;
        if ((t >= 0.25 && t < 1.0) || (t >= 9.25 && t < 10.0)) {
            x = 640.0; // fixation on the cross
            y = 480.0;
        } else {
            x = 700.0 + 10.0 * std::sin(i * 0.3);
            y = 450.0;
        }
        clean_x.push_back(x);
        clean_y.push_back(y);
        g.x_px = x + (block1 ? dx1 : dx0);
        g.y_px = y + (block1 ? dy1 : dy0);
        g.valid = true;
        s.gaze.push_back(g);
    }

    const auto res = kinematics::post_calibrate(s);
    ASSERT_EQ(res.offsets.size(), 2u);
    EXPECT_EQ(res.offsets[0].block, 0);
    EXPECT_NEAR(res.offsets[0].dx_px, dx0, 1e-9);
    EXPECT_NEAR(res.offsets[0].dy_px, dy0, 1e-9);
    EXPECT_TRUE(res.offsets[0].applied);
    EXPECT_NEAR(res.offsets[1].dx_px, dx1, 1e-9);
    EXPECT_TRUE(res.offsets[1].applied);
    EXPECT_TRUE(res.warnings.empty());

    // in-trial samples are restored to their clean positions
    for (std::size_t i = 0; i < s.gaze.size(); ++i) {
        const double t = s.gaze[i].t;
        const bool in_trial = (t >= 1.0 && t <= 4.5) || (t >= 10.0 && t <= 13.5);
        if (!in_trial) continue;
        EXPECT_NEAR(res.session.gaze[i].x_px, clean_x[i], 1e-9);
        EXPECT_NEAR(res.session.gaze[i].y_px, clean_y[i], 1e-9);
    }
}

TEST(Calibration, MedianShrugsOffOutliers) {
    Session s;
    TrialRecord t1{1, 0, Side::Left, Side::Left, 0.1, 1.0, 4.5};
    s.trials = {t1};
    // 7 fixation samples at the offset cross, 2 wild outliers
    const double dx = 22.0;
    for (int i = 0; i < 9; ++i) {
        GazeSample g;
        g.t = 0.30 + i * 0.05;
        g.x_px = (i < 7) ? 640.0 + dx : 100.0 + 900.0 * i;
        g.y_px = 480.0;
        g.valid = true;
        s.gaze.push_back(g);
    }
    const auto res = kinematics::post_calibrate(s);
    ASSERT_EQ(res.offsets.size(), 1u);
    EXPECT_NEAR(res.offsets[0].dx_px, dx, 1e-9);
    EXPECT_EQ(res.offsets[0].n_samples, 9u);
}

TEST(Calibration, GateKeepsSmallOffsetsUntouched) {
    Session s;
    TrialRecord t1{1, 0, Side::Left, Side::Left, 0.1, 1.0, 4.5};
    s.trials = {t1};
    for (int i = 0; i < 20; ++i) {
        GazeSample g;
        g.t = 0.30 + i * 0.2;
        g.x_px = 645.0; // 5 px is 0.23 deg, inside the gate
        g.y_px = 480.0;
        g.valid = true;
        s.gaze.push_back(g);
    }
    const auto res = kinematics::post_calibrate(s);
    ASSERT_EQ(res.offsets.size(), 1u);
    EXPECT_NEAR(res.offsets[0].dx_px, 5.0, 1e-9);
    EXPECT_FALSE(res.offsets[0].applied);
    for (std::size_t i = 0; i < s.gaze.size(); ++i)
        EXPECT_DOUBLE_EQ(res.session.gaze[i].x_px, s.gaze[i].x_px);
}

TEST(Calibration, BlockWithoutFixationDataWarns) {
    Session s;
    TrialRecord t1{1, 0, Side::Left, Side::Left, 0.1, 1.0, 4.5};
    s.trials = {t1};
    GazeSample g;
    g.t = 2.0; // inside the trial, nothing in the fixation window
    g.x_px = 700.0;
    g.y_px = 480.0;
    g.valid = true;
    s.gaze.push_back(g);
    GazeSample inv;
    inv.t = 0.5; // in the window but invalid, so it cannot vote
    inv.valid = false;
    s.gaze.push_back(inv);
    std::sort(s.gaze.begin(), s.gaze.end(), [](const auto& a, const auto& b) { return a.t < b.t; });

    const auto res = kinematics::post_calibrate(s);
    ASSERT_EQ(res.offsets.size(), 1u);
    EXPECT_FALSE(res.offsets[0].has_isi_data);
    EXPECT_FALSE(res.offsets[0].applied);
    ASSERT_EQ(res.warnings.size(), 1u);
    EXPECT_NE(res.warnings[0].find("block 0"), std::string::npos);
}

TEST(Calibration, NoTrialsIsANoOp) {
    Session s;
    GazeSample g;
    g.t = 0.0;
    g.valid = true;
    s.gaze.push_back(g);
    const auto res = kinematics::post_calibrate(s);
    EXPECT_TRUE(res.offsets.empty());
    EXPECT_DOUBLE_EQ(res.session.gaze[0].x_px, 0.0);
}

TEST(Calibration, WithinTrialSpeedsUnchanged) {
    // constant shift per block cannot alter inter-frame distances
    std::vector<double> xs;
    Rng rng(5);
    double x = 640.0;
    for (int i = 0; i < 48; ++i) {
        x += rng.uniform(-25.0, 25.0);
        xs.push_back(x + 30.0); // 30 px offset, 1.4 deg, applied
    }
    Session s = session_from_xs(xs);
    // fixation samples ahead of the trial so the offset is estimable
    std::vector<GazeSample> pre;
    for (int i = 0; i < 10; ++i) {
        GazeSample g;
        g.t = -0.6 + i * 0.05;
        g.x_px = 640.0 + 30.0;
        g.y_px = 480.0;
        g.valid = true;
        pre.push_back(g);
    }
    s.gaze.insert(s.gaze.begin(), pre.begin(), pre.end());
    for (auto& a : s.aligned)
        if (a) *a += pre.size();

    const auto before = kinematics::within_segment_speeds(s);
    const auto res = kinematics::post_calibrate(s);
    ASSERT_TRUE(res.offsets[0].applied);
    const auto after = kinematics::within_segment_speeds(res.session);
    ASSERT_EQ(before.size(), after.size());
    for (std::size_t i = 0; i < before.size(); ++i) EXPECT_NEAR(after[i], before[i], 1e-9);
}

TEST(TrialTrajectory, WindowIsInclusive) {
    Session s = session_from_xs(std::vector<double>(10, 640.0));
    TrialRecord tr;
    tr.trial_id = 7;
    tr.onset_s = 2.0 / 24.0;
    tr.offset_s = 5.0 / 24.0;
    const auto traj = kinematics::trial_trajectory(s, tr);
    ASSERT_EQ(traj.size(), 4u);
    EXPECT_EQ(traj.front().frame, 2);
    EXPECT_EQ(traj.back().frame, 5);

    TrialRecord far;
    far.onset_s = 100.0;
    far.offset_s = 101.0;
    EXPECT_THROW(kinematics::trial_trajectory(s, far), EmptyTrialWindow);
}

TEST(TrialTrajectory, InvalidOrUnmatchedGazeIsMissing) {
    Session s = session_from_xs(std::vector<double>(6, 640.0), {true, false, true, true, true, true});
    s.aligned[3] = std::nullopt;
    const auto traj = kinematics::trial_trajectory(s, s.trials[0]);
    EXPECT_TRUE(traj[0].gaze.has_value());
    EXPECT_FALSE(traj[1].gaze.has_value());
    EXPECT_FALSE(traj[3].gaze.has_value());
    EXPECT_TRUE(traj[5].gaze.has_value());
}

TEST(GazeSpeed, HandValuesAndGaps) {
    std::vector<kinematics::TrajectoryPoint> traj(4);
    for (int i = 0; i < 4; ++i) {
        traj[static_cast<std::size_t>(i)].frame = i;
        traj[static_cast<std::size_t>(i)].t = i / 24.0;
    }
    traj[0].gaze = AngularPoint{0.0, 0.0};
    traj[1].gaze = AngularPoint{1.0, 0.0}; // 1 deg in one frame: 24 deg/s
    // traj[2] missing
    traj[3].gaze = AngularPoint{2.0, 0.0};
    auto sp = kinematics::gaze_speed(traj);
    ASSERT_EQ(sp.size(), 3u);
    ASSERT_TRUE(sp[0].has_value());
    EXPECT_DOUBLE_EQ(*sp[0], 24.0);
    EXPECT_FALSE(sp[1].has_value());
    EXPECT_FALSE(sp[2].has_value());

    // non-consecutive frame numbers cannot form a speed
    traj[2].gaze = AngularPoint{1.5, 0.0};
    traj[2].frame = 5;
    sp = kinematics::gaze_speed(traj);
    EXPECT_FALSE(sp[1].has_value());
    EXPECT_FALSE(sp[2].has_value());

    EXPECT_THROW(kinematics::gaze_speed({traj[0]}), TooFewSamples);
}

TEST(DetectSaccades, ThresholdIsStrict) {
    std::vector<std::optional<double>> sp = {100.0, 100.0000001, 99.9};
    const auto ev = kinematics::detect_saccades(sp, 100.0);
    ASSERT_EQ(ev.size(), 1u);
    EXPECT_EQ(ev[0].first_interval, 1);
    EXPECT_EQ(ev[0].last_interval, 1);
}

TEST(DetectSaccades, MergesRunsAndTracksPeak) {
    std::vector<std::optional<double>> sp = {50.0, 120.0, 130.0, 50.0, 110.0};
    const auto ev = kinematics::detect_saccades(sp, 100.0);
    ASSERT_EQ(ev.size(), 2u);
    EXPECT_EQ(ev[0].first_interval, 1);
    EXPECT_EQ(ev[0].last_interval, 2);
    EXPECT_DOUBLE_EQ(ev[0].peak_speed_deg_s, 130.0);
    EXPECT_EQ(ev[1].first_interval, 4);
    EXPECT_EQ(ev[1].last_interval, 4);
    EXPECT_EQ(ev[0].start_frame(), 1);
    EXPECT_EQ(ev[0].end_frame(), 3);
}

TEST(DetectSaccades, MissingIntervalBreaksARun) {
    std::vector<std::optional<double>> sp = {120.0, std::nullopt, 130.0};
    const auto ev = kinematics::detect_saccades(sp, 100.0);
    ASSERT_EQ(ev.size(), 2u);
    EXPECT_EQ(ev[0].last_interval, 0);
    EXPECT_EQ(ev[1].first_interval, 2);
    EXPECT_TRUE(kinematics::detect_saccades({}, 100.0).empty());
}

TEST(Segmentation, SplitsAtSaccadeAndAttributesSides) {
    // five frames near the left avatar, a jump, five near the right
    std::vector<double> xs;
    for (int i = 0; i < 5; ++i) xs.push_back(395.0 + i * 2.0);
    for (int i = 0; i < 5; ++i) xs.push_back(875.0 + i * 2.0);
    Session s = session_from_xs(xs, {}, true);
    const auto seg = kinematics::segment_trajectory(s, s.trials[0]);

    EXPECT_EQ(seg.trial_id, 1);
    EXPECT_EQ(seg.n_frames, 10);
    EXPECT_EQ(seg.n_missing_frames, 0);
    ASSERT_EQ(seg.saccades.size(), 1u);
    EXPECT_EQ(seg.saccades[0].first_interval, 4); // global frame index
    ASSERT_EQ(seg.segments.size(), 2u);
    EXPECT_EQ(seg.segments[0].start_frame, 0);
    EXPECT_EQ(seg.segments[0].end_frame, 4);
    EXPECT_EQ(seg.segments[0].side, Side::Left);
    EXPECT_EQ(seg.segments[1].start_frame, 5);
    EXPECT_EQ(seg.segments[1].end_frame, 9);
    EXPECT_EQ(seg.segments[1].side, Side::Right);
    EXPECT_DOUBLE_EQ(seg.segments[0].duration_s, 4.0 / 24.0);
    ASSERT_EQ(seg.segments[0].points.size(), 5u);
    EXPECT_NEAR(seg.segments[0].points[0].x_deg, (395.0 - 640.0) * kDegPerPxX, 1e-12);
}

TEST(Segmentation, MissingGazeSplitsWithoutASaccade) {
    std::vector<double> xs(10, 500.0);
    std::vector<bool> valid(10, true);
    valid[4] = false;
    Session s = session_from_xs(xs, valid, true);
    const auto seg = kinematics::segment_trajectory(s, s.trials[0]);
    EXPECT_TRUE(seg.saccades.empty());
    EXPECT_EQ(seg.n_missing_frames, 1);
    ASSERT_EQ(seg.segments.size(), 2u);
    EXPECT_EQ(seg.segments[0].end_frame, 3);
    EXPECT_EQ(seg.segments[1].start_frame, 5);
}

TEST(Segmentation, MidlineFallbackWithoutKeypoints) {
    Session left = session_from_xs(std::vector<double>(6, 500.0));
    EXPECT_EQ(kinematics::segment_trajectory(left, left.trials[0]).segments[0].side, Side::Left);
    Session right = session_from_xs(std::vector<double>(6, 700.0));
    EXPECT_EQ(kinematics::segment_trajectory(right, right.trials[0]).segments[0].side, Side::Right);
    Session mid = session_from_xs(std::vector<double>(6, 640.0)); // on the midline
    EXPECT_EQ(kinematics::segment_trajectory(mid, mid.trials[0]).segments[0].side, Side::Left);
}

TEST(Segmentation, PelvisReferenceInterpolatesMissingFrames) {
    std::vector<double> xs(5, 420.0);
    Session s = session_from_xs(xs, {}, true);
    // pelvis detected at frames 0 and 2 only, at different heights
    for (int i = 0; i < 5; ++i) {
        s.frames[static_cast<std::size_t>(i)].points.erase("left_pelvis");
    }
    s.frames[0].points["left_pelvis"] = {400.0, 480.0, 0.99};
    s.frames[2].points["left_pelvis"] = {400.0, 576.0, 0.99};
    const auto seg = kinematics::segment_trajectory(s, s.trials[0]);
    ASSERT_EQ(seg.segments.size(), 1u);
    const auto& pts = seg.segments[0].points;
    ASSERT_TRUE(pts[0].pelvis_y_deg.has_value());
    EXPECT_NEAR(*pts[0].pelvis_y_deg, 0.0, 1e-12);
    ASSERT_TRUE(pts[1].pelvis_y_deg.has_value());
    EXPECT_NEAR(*pts[1].pelvis_y_deg, (528.0 - 480.0) * 46.0 / 960.0, 1e-12); // midpoint
    EXPECT_NEAR(*pts[2].pelvis_y_deg, (576.0 - 480.0) * 46.0 / 960.0, 1e-12);
    // past the last detection the track holds its final value
    EXPECT_NEAR(*pts[4].pelvis_y_deg, (576.0 - 480.0) * 46.0 / 960.0, 1e-12);
}

TEST(Segmentation, PartitionPropertyOnRandomWalks) {
    Rng rng(2024);
    for (int rep = 0; rep < 20; ++rep) {
        Rng r = rng.derive(static_cast<std::uint64_t>(rep));
        const int n = 120;
        std::vector<double> xs(static_cast<std::size_t>(n));
        std::vector<bool> valid(static_cast<std::size_t>(n));
        double x = 640.0;
        for (int i = 0; i < n; ++i) {
            x += r.uniform(-40.0, 40.0);
            x = std::clamp(x, 5.0, 1275.0);
            xs[static_cast<std::size_t>(i)] = x;
            valid[static_cast<std::size_t>(i)] = r.uniform() > 0.1;
        }
        Session s = session_from_xs(xs, valid);
        const auto seg = kinematics::segment_trajectory(s, s.trials[0]);
        const auto traj = kinematics::trial_trajectory(s, s.trials[0]);
        const auto speeds = kinematics::gaze_speed(traj);

        // every present frame lands in exactly one segment, in order
        std::vector<int> covered;
        int prev_end = -1;
        for (const auto& g : seg.segments) {
            ASSERT_GT(g.start_frame, prev_end);
            prev_end = g.end_frame;
            ASSERT_EQ(g.points.size(), static_cast<std::size_t>(g.end_frame - g.start_frame + 1));
            for (const auto& p : g.points) covered.push_back(p.frame);
            // inside a segment no interval exceeds the threshold
            for (int f = g.start_frame; f < g.end_frame; ++f) {
                const auto& sp = speeds[static_cast<std::size_t>(f)];
                ASSERT_TRUE(sp.has_value());
                ASSERT_LE(*sp, 100.0);
            }
        }
        std::size_t present = 0;
        for (int i = 0; i < n; ++i)
            if (valid[static_cast<std::size_t>(i)]) ++present;
        ASSERT_EQ(covered.size(), present);
        ASSERT_EQ(seg.n_missing_frames, n - static_cast<int>(present));
        for (std::size_t c = 0; c < covered.size(); ++c)
            ASSERT_TRUE(valid[static_cast<std::size_t>(covered[c])]);

        // every saccade interval really is above threshold
        for (const auto& ev : seg.saccades)
            for (int k = ev.first_interval; k <= ev.last_interval; ++k) {
                const auto& sp = speeds[static_cast<std::size_t>(k)];
                ASSERT_TRUE(sp.has_value());
                ASSERT_GT(*sp, 100.0);
            }
    }
}

TEST(WithinSegmentSpeeds, ExcludesSaccadeIntervals) {
    // steady 1 deg per frame drift with one 10 deg jump in the middle
    std::vector<double> xs;
    double x = 400.0;
    for (int i = 0; i < 10; ++i) {
        xs.push_back(x);
        x += (i == 4 ? 10.0 : 1.0) / kDegPerPxX;
    }
    Session s = session_from_xs(xs);
    const auto speeds = kinematics::within_segment_speeds(s);
    ASSERT_EQ(speeds.size(), 8u); // 9 intervals minus the saccade
    for (double v : speeds) EXPECT_NEAR(v, 24.0, 1e-9);
}

TEST(SpeedHistogram, DensityIntegratesToOne) {
    const std::vector<double> speeds = {0.5, 1.5, 2.5, 2.6};
    const auto h = kinematics::speed_histogram(speeds, 1.0);
    ASSERT_EQ(h.density.size(), 3u);
    EXPECT_DOUBLE_EQ(h.density[0], 0.25);
    EXPECT_DOUBLE_EQ(h.density[2], 0.5);
    double mass = 0.0;
    for (std::size_t b = 0; b < h.density.size(); ++b)
        mass += h.density[b] * (h.bin_edges[b + 1] - h.bin_edges[b]);
    EXPECT_NEAR(mass, 1.0, 1e-12);
    EXPECT_EQ(h.n, 4u);
}

TEST(SpeedHistogram, SilvermanAndExplicitBandwidth) {
    const std::vector<double> speeds = {1.0, 2.0, 3.0, 4.0};
    const auto h = kinematics::speed_histogram(speeds, 1.0);
    const double sd = std::sqrt(1.25);
    EXPECT_NEAR(h.bandwidth, std::pow(4.0 / 12.0, 0.2) * sd, 1e-12);
    const auto h2 = kinematics::speed_histogram(speeds, 1.0, 0.37);
    EXPECT_DOUBLE_EQ(h2.bandwidth, 0.37);
}

TEST(SpeedHistogram, ModeSitsOnTheBulk) {
    std::vector<double> speeds;
    Rng r(8);
    for (int i = 0; i < 4000; ++i) speeds.push_back(r.uniform(6.8, 7.2));
    for (int i = 0; i < 50; ++i) speeds.push_back(r.uniform(0.0, 20.0));
    const auto h = kinematics::speed_histogram(speeds, 0.5);
    EXPECT_GT(h.mode_speed(), 6.5);
    EXPECT_LT(h.mode_speed(), 7.5);
    // KDE integrates to about one over its grid
    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < h.kde_x.size(); ++i)
        mass += 0.5 * (h.kde_y[i] + h.kde_y[i + 1]) * (h.kde_x[i + 1] - h.kde_x[i]);
    EXPECT_NEAR(mass, 1.0, 0.02);
    EXPECT_THROW(kinematics::speed_histogram({}, 1.0), TooFewSamples);
}
