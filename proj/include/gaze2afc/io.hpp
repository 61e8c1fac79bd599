#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gaze2afc/cascade.hpp"
#include "gaze2afc/csv.hpp"
#include "gaze2afc/error.hpp"
#include "gaze2afc/evidence.hpp"
#include "gaze2afc/features.hpp"
#include "gaze2afc/inference.hpp"
#include "gaze2afc/information.hpp"
#include "gaze2afc/kinematics.hpp"
#include "gaze2afc/synth.hpp"
#include "gaze2afc/types.hpp"

namespace gaze2afc::io {

using nlohmann::json;

namespace detail {

inline json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(path + ": " + e.what());
    }
    return j;
}

inline void save_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << j.dump(1, '\t') << '\n';
}

inline Side side_from(const json& j) {
    const auto s = parse_side(j.get<std::string>());
    if (!s) throw Error("bad side value in JSON");
    return *s;
}

} // namespace detail

// ---------------------------------------------------------------------------
// session.json
// ---------------------------------------------------------------------------

inline void save_session(const Session& s, const std::string& path) {
    json j;
    j["participant"] = s.participant_id;
    j["frame_rate_hz"] = s.frame_rate_hz;
    j["p_cutoff"] = s.p_cutoff;
    json gaze = json::array();
    for (const GazeSample& g : s.gaze)
        gaze.push_back({g.t, g.x_px, g.y_px, g.valid ? 1 : 0, g.off_screen ? 1 : 0});
    j["gaze"] = std::move(gaze);
    json frames = json::array();
    for (const KeypointFrame& f : s.frames) {
        json points = json::object();
        for (const auto& [label, kp] : f.points) points[label] = {kp.x_px, kp.y_px, kp.likelihood};
        frames.push_back({{"frame", f.frame}, {"t", f.t}, {"points", std::move(points)}});
    }
    j["frames"] = std::move(frames);
    json trials = json::array();
    for (const TrialRecord& t : s.trials)
        trials.push_back({{"trial_id", t.trial_id},
                          {"block", t.block},
                          {"natural_side", side_name(t.natural_side)},
                          {"response_side", side_name(t.response_side)},
                          {"mse", t.mse},
                          {"onset_s", t.onset_s},
                          {"offset_s", t.offset_s}});
    j["trials"] = std::move(trials);
    json aligned = json::array();
    for (const auto& a : s.aligned) {
        if (a)
            aligned.push_back(*a);
        else
            aligned.push_back(nullptr);
    }
    j["aligned"] = std::move(aligned);
    detail::save_json(j, path);
}

inline Session load_session_json(const std::string& path) {
    const json j = detail::load_json(path);
    Session s;
    try {
        s.participant_id = j.at("participant").get<std::string>();
        s.frame_rate_hz = j.at("frame_rate_hz").get<double>();
        s.p_cutoff = j.at("p_cutoff").get<double>();
        for (const json& g : j.at("gaze")) {
            GazeSample gs;
            gs.t = g.at(0).get<double>();
            gs.x_px = g.at(1).get<double>();
            gs.y_px = g.at(2).get<double>();
            gs.valid = g.at(3).get<int>() == 1;
            gs.off_screen = g.at(4).get<int>() == 1;
            s.gaze.push_back(gs);
        }
        for (const json& f : j.at("frames")) {
            KeypointFrame kf;
            kf.frame = f.at("frame").get<int>();
            kf.t = f.at("t").get<double>();
            for (const auto& [label, v] : f.at("points").items())
                kf.points[label] = {v.at(0).get<double>(), v.at(1).get<double>(), v.at(2).get<double>()};
            s.frames.push_back(std::move(kf));
        }
        for (const json& t : j.at("trials")) {
            TrialRecord tr;
            tr.trial_id = t.at("trial_id").get<int>();
            tr.block = t.at("block").get<int>();
            tr.natural_side = detail::side_from(t.at("natural_side"));
            tr.response_side = detail::side_from(t.at("response_side"));
            tr.mse = t.at("mse").get<double>();
            tr.onset_s = t.at("onset_s").get<double>();
            tr.offset_s = t.at("offset_s").get<double>();
            s.trials.push_back(tr);
        }
        for (const json& a : j.at("aligned")) {
            if (a.is_null())
                s.aligned.push_back(std::nullopt);
            else
                s.aligned.push_back(a.get<std::size_t>());
        }
    } catch (const json::exception& e) {
        throw Error(path + ": " + e.what());
    }
    return s;
}

// ---------------------------------------------------------------------------
// segments.json
// ---------------------------------------------------------------------------

inline void save_segments(const std::string& participant, double frame_rate_hz,
                          const std::vector<TrialSegmentation>& segs,
                          const std::vector<CalibrationOffset>& offsets,
                          const std::vector<std::string>& warnings, double threshold,
                          const std::string& path) {
    json j;
    j["participant"] = participant;
    j["frame_rate_hz"] = frame_rate_hz;
    j["saccade_threshold_deg_s"] = threshold;
    json cal = json::object();
    json offs = json::array();
    for (const CalibrationOffset& o : offsets)
        offs.push_back({{"block", o.block},
                        {"dx_px", o.dx_px},
                        {"dy_px", o.dy_px},
                        {"magnitude_deg", o.magnitude_deg},
                        {"has_isi_data", o.has_isi_data},
                        {"applied", o.applied},
                        {"n_samples", o.n_samples}});
    cal["offsets"] = std::move(offs);
    cal["warnings"] = warnings;
    j["calibration"] = std::move(cal);

    json trials = json::array();
    for (const TrialSegmentation& ts : segs) {
        json t;
        t["trial_id"] = ts.trial_id;
        t["n_frames"] = ts.n_frames;
        t["n_missing_frames"] = ts.n_missing_frames;
        json sacc = json::array();
        for (const SaccadeEvent& ev : ts.saccades)
            sacc.push_back({ev.first_interval, ev.last_interval, ev.peak_speed_deg_s});
        t["saccades"] = std::move(sacc);
        json segments = json::array();
        for (const GazeSegment& g : ts.segments) {
            json seg;
            seg["start_frame"] = g.start_frame;
            seg["end_frame"] = g.end_frame;
            seg["side"] = side_name(g.side);
            seg["duration_s"] = g.duration_s;
            json pts = json::array();
            for (const SegmentPoint& p : g.points) {
                json row = {p.frame, p.t, p.x_deg, p.y_deg};
                if (p.pelvis_y_deg)
                    row.push_back(*p.pelvis_y_deg);
                else
                    row.push_back(nullptr);
                pts.push_back(std::move(row));
            }
            seg["points"] = std::move(pts);
            segments.push_back(std::move(seg));
        }
        t["segments"] = std::move(segments);
        trials.push_back(std::move(t));
    }
    j["trials"] = std::move(trials);
    detail::save_json(j, path);
}

struct SegmentsFile {
    std::string participant;
    double frame_rate_hz = 24.0;
    double threshold = 100.0;
    std::vector<TrialSegmentation> trials;
    std::vector<CalibrationOffset> offsets;
};

inline SegmentsFile load_segments(const std::string& path) {
    const json j = detail::load_json(path);
    SegmentsFile f;
    try {
        f.participant = j.at("participant").get<std::string>();
        f.frame_rate_hz = j.at("frame_rate_hz").get<double>();
        f.threshold = j.at("saccade_threshold_deg_s").get<double>();
        for (const json& o : j.at("calibration").at("offsets")) {
            CalibrationOffset co;
            co.block = o.at("block").get<int>();
            co.dx_px = o.at("dx_px").get<double>();
            co.dy_px = o.at("dy_px").get<double>();
            co.magnitude_deg = o.at("magnitude_deg").get<double>();
            co.has_isi_data = o.at("has_isi_data").get<bool>();
            co.applied = o.at("applied").get<bool>();
            co.n_samples = o.at("n_samples").get<std::size_t>();
            f.offsets.push_back(co);
        }
        for (const json& t : j.at("trials")) {
            TrialSegmentation ts;
            ts.trial_id = t.at("trial_id").get<int>();
            ts.n_frames = t.at("n_frames").get<int>();
            ts.n_missing_frames = t.at("n_missing_frames").get<int>();
            for (const json& sv : t.at("saccades")) {
                SaccadeEvent ev;
                ev.first_interval = sv.at(0).get<int>();
                ev.last_interval = sv.at(1).get<int>();
                ev.peak_speed_deg_s = sv.at(2).get<double>();
                ts.saccades.push_back(ev);
            }
            for (const json& sv : t.at("segments")) {
                GazeSegment g;
                g.start_frame = sv.at("start_frame").get<int>();
                g.end_frame = sv.at("end_frame").get<int>();
                g.side = detail::side_from(sv.at("side"));
                g.duration_s = sv.at("duration_s").get<double>();
                for (const json& pv : sv.at("points")) {
                    SegmentPoint p;
                    p.frame = pv.at(0).get<int>();
                    p.t = pv.at(1).get<double>();
                    p.x_deg = pv.at(2).get<double>();
                    p.y_deg = pv.at(3).get<double>();
                    if (!pv.at(4).is_null()) p.pelvis_y_deg = pv.at(4).get<double>();
                    g.points.push_back(p);
                }
                ts.segments.push_back(std::move(g));
            }
            f.trials.push_back(std::move(ts));
        }
    } catch (const json::exception& e) {
        throw Error(path + ": " + e.what());
    }
    return f;
}

// ---------------------------------------------------------------------------
// features.csv
// ---------------------------------------------------------------------------

inline void save_features(const std::string& participant, const features::FeatureMatrix& m,
                          const std::string& path) {
    CsvWriter w(path);
    w.row({"participant", "trial_id", "duration_left", "duration_right", "n_saccades", "first_side",
           "last_side", "log_upper_lower_ratio", "decision", "task", "correct", "congruent", "mse"});
    for (Eigen::Index i = 0; i < m.y.rows(); ++i) {
        w.row({participant, std::to_string(m.trial_ids[static_cast<std::size_t>(i)]),
               fmt_fixed(m.y(i, 0), 6), fmt_fixed(m.y(i, 1), 6),
               std::to_string(static_cast<long>(m.y(i, 2))),
               std::to_string(static_cast<long>(m.y(i, 3))),
               std::to_string(static_cast<long>(m.y(i, 4))), fmt_fixed(m.y(i, 5), 6),
               std::to_string(m.decision(i)), std::to_string(m.task(i)),
               std::to_string(m.correct(i)), std::to_string(m.congruent(i)),
               fmt_fixed(m.mse(i), 6)});
    }
}

struct FeaturesFile {
    std::string participant;
    features::FeatureMatrix matrix;
};

/// Reads a features CSV holding exactly one participant.
inline FeaturesFile read_features(const std::string& path) {
    const CsvTable t = read_csv(path);
    const int cp = t.require_column("participant");
    const int cid = t.require_column("trial_id");
    const int cols[6] = {t.require_column("duration_left"),     t.require_column("duration_right"),
                         t.require_column("n_saccades"),        t.require_column("first_side"),
                         t.require_column("last_side"),         t.require_column("log_upper_lower_ratio")};
    const int cd = t.require_column("decision");
    const int ct = t.require_column("task");
    const int cc = t.require_column("correct");
    const int cg = t.require_column("congruent");
    const int cm = t.require_column("mse");

    if (t.rows.empty()) throw Error(path + ": no feature rows");
    FeaturesFile f;
    f.participant = t.rows[0][static_cast<std::size_t>(cp)];
    const Eigen::Index n = static_cast<Eigen::Index>(t.rows.size());
    features::FeatureMatrix& m = f.matrix;
    m.names = features::feature_names();
    m.y.resize(n, 6);
    m.decision.resize(n);
    m.task.resize(n);
    m.correct.resize(n);
    m.congruent.resize(n);
    m.mse.resize(n);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        if (t.rows[r][static_cast<std::size_t>(cp)] != f.participant)
            throw Error(path + ": multiple participants in one file; split them first");
        const Eigen::Index i = static_cast<Eigen::Index>(r);
        m.trial_ids.push_back(static_cast<int>(parse_int_field(t, r, cid)));
        for (int c = 0; c < 6; ++c) m.y(i, c) = parse_double_field(t, r, cols[c]);
        m.decision(i) = static_cast<int>(parse_int_field(t, r, cd));
        m.task(i) = static_cast<int>(parse_int_field(t, r, ct));
        m.correct(i) = static_cast<int>(parse_int_field(t, r, cc));
        m.congruent(i) = static_cast<int>(parse_int_field(t, r, cg));
        m.mse(i) = parse_double_field(t, r, cm);
    }
    return f;
}

// ---------------------------------------------------------------------------
// posterior.json
// ---------------------------------------------------------------------------

inline json scaling_to_json(const features::ScalingRecord& rec) {
    json j;
    j["names"] = rec.names;
    j["mean"] = rec.mean;
    j["sd"] = rec.sd;
    j["is_binary"] = rec.is_binary;
    j["dropped"] = rec.dropped;
    j["kept"] = rec.kept;
    j["warnings"] = rec.warnings;
    return j;
}

inline features::ScalingRecord scaling_from_json(const json& j) {
    features::ScalingRecord rec;
    rec.names = j.at("names").get<std::vector<std::string>>();
    rec.mean = j.at("mean").get<std::vector<double>>();
    rec.sd = j.at("sd").get<std::vector<double>>();
    rec.is_binary = j.at("is_binary").get<std::vector<bool>>();
    rec.dropped = j.at("dropped").get<std::vector<bool>>();
    rec.kept = j.at("kept").get<std::vector<int>>();
    rec.warnings = j.at("warnings").get<std::vector<std::string>>();
    return rec;
}

inline void save_posterior(const std::string& participant, const std::string& outcome,
                           const inference::PosteriorSamples& post,
                           const features::ScalingRecord& scaling,
                           const inference::SamplerConfig& cfg, const std::string& path) {
    json j;
    j["participant"] = participant;
    j["outcome"] = outcome;
    j["scaling"] = scaling_to_json(scaling);
    j["sampler"] = {{"chains", cfg.chains},         {"draws", cfg.draws},
                    {"warmup", cfg.warmup},         {"seed", cfg.seed},
                    {"target_accept", cfg.target_accept}, {"max_treedepth", cfg.max_treedepth}};
    j["param_names"] = post.param_names;
    j["step_sizes"] = post.step_sizes;
    j["n_chains"] = post.n_chains;
    j["n_draws"] = post.n_draws;
    json diag;
    diag["rhat"] = std::vector<double>(post.diag.rhat.data(), post.diag.rhat.data() + post.diag.rhat.size());
    diag["ess"] = std::vector<double>(post.diag.ess.data(), post.diag.ess.data() + post.diag.ess.size());
    diag["divergences"] = post.diag.divergences;
    diag["divergence_rate"] = post.diag.divergence_rate;
    diag["max_treedepth_hits"] = post.diag.max_treedepth_hits;
    diag["converged"] = post.diag.converged;
    j["diagnostics"] = std::move(diag);
    json summary = json::array();
    for (Eigen::Index p = 0; p < post.dim(); ++p)
        summary.push_back({{"name", post.param_names[static_cast<std::size_t>(p)]},
                           {"mean", post.mean(p)},
                           {"sd", post.sd(p)},
                           {"q05", post.quantile(p, 0.05)},
                           {"q50", post.quantile(p, 0.50)},
                           {"q95", post.quantile(p, 0.95)}});
    j["summary"] = std::move(summary);
    json draws = json::array();
    for (Eigen::Index r = 0; r < post.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < post.dim(); ++c) row.push_back(post.draws(r, c));
        draws.push_back(std::move(row));
    }
    j["draws"] = std::move(draws);
    j["log_post"] = std::vector<double>(post.log_post.data(), post.log_post.data() + post.log_post.size());
    detail::save_json(j, path);
}

struct PosteriorFile {
    std::string participant;
    std::string outcome;
    inference::PosteriorSamples post;
    features::ScalingRecord scaling;
};

inline PosteriorFile load_posterior(const std::string& path) {
    const json j = detail::load_json(path);
    PosteriorFile f;
    try {
        f.participant = j.at("participant").get<std::string>();
        f.outcome = j.at("outcome").get<std::string>();
        f.scaling = scaling_from_json(j.at("scaling"));
        f.post.param_names = j.at("param_names").get<std::vector<std::string>>();
        f.post.step_sizes = j.at("step_sizes").get<std::vector<double>>();
        f.post.n_chains = j.at("n_chains").get<int>();
        f.post.n_draws = j.at("n_draws").get<int>();
        const json& draws = j.at("draws");
        const Eigen::Index rows = static_cast<Eigen::Index>(draws.size());
        const Eigen::Index dim = rows > 0 ? static_cast<Eigen::Index>(draws.at(0).size()) : 0;
        f.post.draws.resize(rows, dim);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < dim; ++c)
                f.post.draws(r, c) = draws.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<double>();
        const auto lp = j.at("log_post").get<std::vector<double>>();
        f.post.log_post = Eigen::Map<const Eigen::VectorXd>(lp.data(), static_cast<Eigen::Index>(lp.size()));
        const json& diag = j.at("diagnostics");
        const auto rhat = diag.at("rhat").get<std::vector<double>>();
        const auto ess = diag.at("ess").get<std::vector<double>>();
        f.post.diag.rhat = Eigen::Map<const Eigen::VectorXd>(rhat.data(), static_cast<Eigen::Index>(rhat.size()));
        f.post.diag.ess = Eigen::Map<const Eigen::VectorXd>(ess.data(), static_cast<Eigen::Index>(ess.size()));
        f.post.diag.divergences = diag.at("divergences").get<int>();
        f.post.diag.divergence_rate = diag.at("divergence_rate").get<double>();
        f.post.diag.max_treedepth_hits = diag.at("max_treedepth_hits").get<int>();
        f.post.diag.converged = diag.at("converged").get<bool>();
    } catch (const json::exception& e) {
        throw Error(path + ": " + e.what());
    }
    return f;
}

// ---------------------------------------------------------------------------
// analysis CSVs
// ---------------------------------------------------------------------------

inline void save_mi_rows(const std::vector<information::MiReportRow>& rows, const std::string& path) {
    CsvWriter w(path);
    w.row({"participant", "n_trials", "mi_gaze_decision", "mi_gaze_task", "mi_gaze_correct",
           "mi_decision_task", "mean_correct"});
    for (const auto& r : rows)
        w.row({r.participant, std::to_string(r.n_trials), fmt_fixed(r.mi_gaze_decision, 6),
               fmt_fixed(r.mi_gaze_task, 6), fmt_fixed(r.mi_gaze_correct, 6),
               fmt_fixed(r.mi_decision_task, 6), fmt_fixed(r.mean_correct, 6)});
}

struct ImportanceRow {
    std::string participant;
    evidence::ImportanceReport report;
};

inline void save_importance_rows(const std::vector<ImportanceRow>& rows, const std::string& path) {
    CsvWriter w(path);
    w.row({"participant", "feature", "log_odds", "log10_odds", "log_evidence_full",
           "log_evidence_reduced", "status"});
    for (const auto& r : rows) {
        for (const auto& fi : r.report.features) {
            std::string status = fi.ok ? "ok" : fi.error;
            for (char& c : status)
                if (c == ',' || c == '\n') c = ';';
            w.row({r.participant, fi.feature, fi.ok ? fmt_fixed(fi.log_odds, 6) : "",
                   fi.ok ? fmt_fixed(fi.log10_odds, 6) : "",
                   fmt_fixed(r.report.full.log_evidence, 6),
                   fi.ok ? fmt_fixed(fi.log_ev_reduced, 6) : "", status});
        }
    }
}

inline void save_cascade_rows(const std::vector<cascade::CascadeResult>& rows,
                              const cascade::CascadeConfig& cfg, const std::string& path) {
    CsvWriter w(path);
    w.row({"participant", "n_trials", "p_cascade", "classification", "alpha_mean", "alpha_sd",
           "beta_mse_mean", "beta_mse_sd"});
    for (const auto& r : rows)
        w.row({r.participant, std::to_string(r.n_trials), fmt_fixed(r.p_cascade, 4),
               cascade::cascade_call_name(cascade::classify(r.p_cascade, cfg)),
               fmt_fixed(r.alpha_mean, 6), fmt_fixed(r.alpha_sd, 6), fmt_fixed(r.beta_mean, 6),
               fmt_fixed(r.beta_sd, 6)});
}

inline void save_speed_histogram(const std::string& participant,
                                 const kinematics::SpeedHistogram& h, const std::string& path) {
    CsvWriter w(path);
    w.row({"participant", "kind", "x0", "x1", "value"});
    w.row({participant, "meta", fmt_fixed(h.bandwidth, 6), std::to_string(h.n),
           fmt_fixed(h.mode_speed(), 6)});
    for (std::size_t b = 0; b + 1 < h.bin_edges.size(); ++b)
        w.row({participant, "bin", fmt_fixed(h.bin_edges[b], 6), fmt_fixed(h.bin_edges[b + 1], 6),
               fmt_fixed(h.density[b], 9)});
    for (std::size_t i = 0; i < h.kde_x.size(); ++i)
        w.row({participant, "kde", fmt_fixed(h.kde_x[i], 6), fmt_fixed(h.kde_x[i], 6),
               fmt_fixed(h.kde_y[i], 9)});
}

// ---------------------------------------------------------------------------
// synthetic dataset
// ---------------------------------------------------------------------------

inline json truth_to_json(const synth::GroundTruth& t) {
    json j;
    j["participant"] = t.participant_id;
    json blocks = json::array();
    for (const synth::TruthBlock& b : t.blocks)
        blocks.push_back({{"block", b.block},
                          {"dx_px", b.dx_px},
                          {"dy_px", b.dy_px},
                          {"above_gate", b.above_gate}});
    j["blocks"] = std::move(blocks);
    json trials = json::array();
    for (const synth::TruthTrial& tt : t.trials) {
        json segs = json::array();
        for (const synth::TruthSegment& s : tt.segments)
            segs.push_back({{"start_frame", s.start_frame},
                            {"end_frame", s.end_frame},
                            {"side", side_name(s.side)}});
        trials.push_back({{"trial_id", tt.trial_id},
                          {"block", tt.block},
                          {"onset_s", tt.onset_s},
                          {"offset_s", tt.offset_s},
                          {"mse", tt.mse},
                          {"natural_side", side_name(tt.natural_side)},
                          {"decision", tt.decision},
                          {"theta", tt.theta},
                          {"congruent", tt.congruent},
                          {"segments", std::move(segs)},
                          {"jump_frames", tt.jump_frames},
                          {"duration_left_s", tt.duration_left_s},
                          {"duration_right_s", tt.duration_right_s},
                          {"n_saccades", tt.n_saccades},
                          {"first_side", tt.first_side},
                          {"last_side", tt.last_side},
                          {"frames_above", tt.frames_above},
                          {"frames_below", tt.frames_below}});
    }
    j["trials"] = std::move(trials);
    return j;
}

inline synth::GroundTruth truth_from_json(const json& j) {
    synth::GroundTruth t;
    t.participant_id = j.at("participant").get<std::string>();
    for (const json& b : j.at("blocks")) {
        synth::TruthBlock tb;
        tb.block = b.at("block").get<int>();
        tb.dx_px = b.at("dx_px").get<double>();
        tb.dy_px = b.at("dy_px").get<double>();
        tb.above_gate = b.at("above_gate").get<bool>();
        t.blocks.push_back(tb);
    }
    for (const json& tr : j.at("trials")) {
        synth::TruthTrial tt;
        tt.trial_id = tr.at("trial_id").get<int>();
        tt.block = tr.at("block").get<int>();
        tt.onset_s = tr.at("onset_s").get<double>();
        tt.offset_s = tr.at("offset_s").get<double>();
        tt.mse = tr.at("mse").get<double>();
        tt.natural_side = detail::side_from(tr.at("natural_side"));
        tt.decision = tr.at("decision").get<int>();
        tt.theta = tr.at("theta").get<double>();
        tt.congruent = tr.at("congruent").get<int>();
        for (const json& s : tr.at("segments")) {
            synth::TruthSegment ts;
            ts.start_frame = s.at("start_frame").get<int>();
            ts.end_frame = s.at("end_frame").get<int>();
            ts.side = detail::side_from(s.at("side"));
            tt.segments.push_back(ts);
        }
        tt.jump_frames = tr.at("jump_frames").get<std::vector<int>>();
        tt.duration_left_s = tr.at("duration_left_s").get<double>();
        tt.duration_right_s = tr.at("duration_right_s").get<double>();
        tt.n_saccades = tr.at("n_saccades").get<int>();
        tt.first_side = tr.at("first_side").get<int>();
        tt.last_side = tr.at("last_side").get<int>();
        tt.frames_above = tr.at("frames_above").get<long>();
        tt.frames_below = tr.at("frames_below").get<long>();
        t.trials.push_back(std::move(tt));
    }
    return t;
}

/// Writes gaze.csv, keypoints.csv, trials.csv, and truth.json into `dir`.
inline void write_synth_dataset(const synth::SynthSession& s, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const auto path = [&](const char* name) { return (std::filesystem::path(dir) / name).string(); };

    {
        CsvWriter w(path("gaze.csv"));
        w.row({"timestamp_s", "x_px", "y_px", "valid"});
        for (const GazeSample& g : s.session.gaze)
            w.row({fmt_fixed(g.t, 6), fmt_fixed(g.x_px, 3), fmt_fixed(g.y_px, 3),
                   g.valid ? "1" : "0"});
    }
    {
        CsvWriter w(path("keypoints.csv"));
        w.row({"frame", "label", "x_px", "y_px", "likelihood"});
        for (const KeypointFrame& f : s.session.frames)
            for (const auto& [label, kp] : f.points)
                w.row({std::to_string(f.frame), label, fmt_fixed(kp.x_px, 3),
                       fmt_fixed(kp.y_px, 3), fmt_fixed(kp.likelihood, 3)});
    }
    {
        CsvWriter w(path("trials.csv"));
        w.row({"trial_id", "block", "natural_side", "response_side", "mse", "onset_s", "offset_s"});
        for (const TrialRecord& t : s.session.trials)
            w.row({std::to_string(t.trial_id), std::to_string(t.block), side_name(t.natural_side),
                   side_name(t.response_side), fmt_fixed(t.mse, 6), fmt_fixed(t.onset_s, 6),
                   fmt_fixed(t.offset_s, 6)});
    }
    detail::save_json(truth_to_json(s.truth), path("truth.json"));
}

inline synth::GroundTruth load_truth(const std::string& path) {
    return truth_from_json(detail::load_json(path));
}

} // namespace gaze2afc::io
