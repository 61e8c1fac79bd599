#pragma once

// End-to-end driver: data in (synthetic or CSV), per-participant analysis
// out, aggregate tables, charts, and a manifest. Each stage failure is
// caught and recorded per participant so one bad session cannot sink a
// whole run.

#include <filesystem>
#include <string>
#include <vector>

#include "gaze2afc/cascade.hpp"
#include "gaze2afc/config.hpp"
#include "gaze2afc/evidence.hpp"
#include "gaze2afc/features.hpp"
#include "gaze2afc/inference.hpp"
#include "gaze2afc/information.hpp"
#include "gaze2afc/ingest.hpp"
#include "gaze2afc/io.hpp"
#include "gaze2afc/kinematics.hpp"
#include "gaze2afc/svg.hpp"
#include "gaze2afc/synth.hpp"

namespace gaze2afc::pipeline {

namespace detail {

inline std::vector<std::string> split_list(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t next = s.find(sep, pos);
        if (next == std::string::npos) next = s.size();
        std::string item = s.substr(pos, next - pos);
        const std::size_t b = item.find_first_not_of(" \t");
        const std::size_t e = item.find_last_not_of(" \t");
        if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
        pos = next + 1;
    }
    return out;
}

inline std::vector<double> parse_double_list(const std::string& s, const std::string& what) {
    std::vector<double> out;
    for (const std::string& item : split_list(s, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw InvalidConfig(what + ": cannot parse number '" + item + "'");
        }
    }
    return out;
}

/// "dx:dy;dx:dy;..." per block.
inline std::vector<std::pair<double, double>> parse_offsets(const std::string& s) {
    std::vector<std::pair<double, double>> out;
    for (const std::string& item : split_list(s, ';')) {
        const auto parts = parse_double_list(
            [&] {
                std::string t = item;
                for (char& c : t)
                    if (c == ':') c = ',';
                return t;
            }(),
            "block offsets");
        if (parts.size() != 2) throw InvalidConfig("block offsets: expected dx:dy, got '" + item + "'");
        out.emplace_back(parts[0], parts[1]);
    }
    return out;
}

} // namespace detail

enum class SynthOffsets { None, Auto, Explicit };

struct PipelineConfig {
    std::vector<std::string> participants = {"p01", "p02", "p03"};
    std::string data_dir;                 // empty: synthesize sessions instead
    std::uint64_t seed = 7;               // base seed for synthetic sessions
    synth::SynthConfig synth;             // template; id and seed set per participant
    SynthOffsets synth_offsets = SynthOffsets::None;

    ingest::IngestOptions ingest;
    bool apply_calibration = true;
    kinematics::CalibrationConfig calibration;
    kinematics::SegmentationConfig segmentation;
    features::FeatureConfig features;

    inference::SamplerConfig sampler;
    evidence::BridgeConfig bridge;
    information::MiMethod mi_method = information::MiMethod::ModelPosteriorMean;
    cascade::CascadeConfig cascade;

    double hist_bin_width_deg_s = 0.5;
    double hist_bandwidth = 0.0; // 0: Silverman

    std::string out_dir = "out";
    bool write_svg = true;
    bool write_sessions = false; // session.json per participant is large
    bool run_importance = true;

    static PipelineConfig from_config(const config::Config& c);
    static PipelineConfig from_file(const std::string& path) {
        return from_config(config::Config::parse_file(path));
    }

    void validate() const {
        if (participants.empty()) throw InvalidConfig("no participants configured");
        if (data_dir.empty()) synth.validate();
        sampler.validate();
        cascade.validate();
        if (hist_bin_width_deg_s <= 0.0) throw InvalidConfig("histogram bin width must be positive");
    }
};

inline PipelineConfig PipelineConfig::from_config(const config::Config& c) {
    PipelineConfig p;

    const std::string plist = c.get_string("run.participants", "");
    if (!plist.empty()) p.participants = detail::split_list(plist, ',');
    const long np = c.get_int("run.n_participants", 0);
    if (plist.empty() && np > 0) {
        p.participants.clear();
        for (long i = 1; i <= np; ++i) {
            char buf[16];
            std::snprintf(buf, sizeof buf, "p%02ld", i);
            p.participants.push_back(buf);
        }
    }
    p.data_dir = c.get_string("run.data_dir", p.data_dir);
    p.seed = static_cast<std::uint64_t>(c.get_int("run.seed", static_cast<long>(p.seed)));
    p.out_dir = c.get_string("run.out_dir", p.out_dir);
    p.write_svg = c.get_bool("run.svg", p.write_svg);
    p.write_sessions = c.get_bool("run.sessions", p.write_sessions);
    p.run_importance = c.get_bool("run.importance", p.run_importance);
    const std::string mi = c.get_string("run.mi_method", "posterior_mean");
    if (mi == "posterior_mean")
        p.mi_method = information::MiMethod::ModelPosteriorMean;
    else if (mi == "draw_averaged")
        p.mi_method = information::MiMethod::ModelDrawAveraged;
    else
        throw InvalidConfig("run.mi_method: expected posterior_mean or draw_averaged");

    p.synth.n_trials = static_cast<int>(c.get_int("synth.trials", p.synth.n_trials));
    p.synth.n_blocks = static_cast<int>(c.get_int("synth.blocks", p.synth.n_blocks));
    p.synth.drift_speed_min_deg_s = c.get_double("synth.drift_min", p.synth.drift_speed_min_deg_s);
    p.synth.drift_speed_max_deg_s = c.get_double("synth.drift_max", p.synth.drift_speed_max_deg_s);
    p.synth.saccades_min = static_cast<int>(c.get_int("synth.saccades_min", p.synth.saccades_min));
    p.synth.saccades_max = static_cast<int>(c.get_int("synth.saccades_max", p.synth.saccades_max));
    p.synth.occlusion_rate = c.get_double("synth.occlusion", p.synth.occlusion_rate);
    p.synth.mse_min = c.get_double("synth.mse_min", p.synth.mse_min);
    p.synth.mse_max = c.get_double("synth.mse_max", p.synth.mse_max);
    p.synth.fixation_jitter_px = c.get_double("synth.jitter_px", p.synth.fixation_jitter_px);
    p.synth.true_alpha = c.get_double("synth.alpha", p.synth.true_alpha);
    const std::string beta = c.get_string("synth.beta", "");
    if (!beta.empty()) p.synth.true_beta = detail::parse_double_list(beta, "synth.beta");
    p.synth.cascade_strength = c.get_double("synth.cascade_strength", p.synth.cascade_strength);
    const std::string offsets = c.get_string("synth.offsets", "none");
    if (offsets == "none") {
        p.synth_offsets = SynthOffsets::None;
    } else if (offsets == "auto") {
        p.synth_offsets = SynthOffsets::Auto;
    } else {
        p.synth_offsets = SynthOffsets::Explicit;
        p.synth.block_offsets_px = detail::parse_offsets(offsets);
    }

    p.ingest.p_cutoff = c.get_double("ingest.p_cutoff", p.ingest.p_cutoff);
    p.ingest.max_align_gap_s = c.get_double("ingest.max_align_gap_s", p.ingest.max_align_gap_s);
    p.ingest.gaze_format.clock_offset_s =
        c.get_double("ingest.gaze_clock_offset_s", p.ingest.gaze_format.clock_offset_s);
    p.ingest.trial_format.expected_duration_s =
        c.get_double("ingest.expected_trial_s", p.ingest.trial_format.expected_duration_s);
    p.ingest.trial_format.duration_tol_s =
        c.get_double("ingest.trial_tol_s", p.ingest.trial_format.duration_tol_s);

    p.apply_calibration = c.get_bool("calibration.apply", p.apply_calibration);
    p.calibration.fixation_s = c.get_double("calibration.fixation_s", p.calibration.fixation_s);
    p.calibration.apply_gate_deg = c.get_double("calibration.gate_deg", p.calibration.apply_gate_deg);
    p.calibration.cross_x_px = c.get_double("calibration.cross_x_px", p.calibration.cross_x_px);
    p.calibration.cross_y_px = c.get_double("calibration.cross_y_px", p.calibration.cross_y_px);

    p.segmentation.saccade_threshold_deg_s =
        c.get_double("segmentation.saccade_threshold_deg_s", p.segmentation.saccade_threshold_deg_s);

    p.hist_bin_width_deg_s = c.get_double("hist.bin_width", p.hist_bin_width_deg_s);
    p.hist_bandwidth = c.get_double("hist.bandwidth", p.hist_bandwidth);

    p.sampler.chains = static_cast<int>(c.get_int("sampler.chains", p.sampler.chains));
    p.sampler.draws = static_cast<int>(c.get_int("sampler.draws", p.sampler.draws));
    p.sampler.warmup = static_cast<int>(c.get_int("sampler.warmup", p.sampler.warmup));
    p.sampler.seed = static_cast<std::uint64_t>(c.get_int("sampler.seed", static_cast<long>(p.sampler.seed)));
    p.sampler.target_accept = c.get_double("sampler.target_accept", p.sampler.target_accept);
    p.sampler.max_treedepth = static_cast<int>(c.get_int("sampler.max_treedepth", p.sampler.max_treedepth));
    p.sampler.parallel_chains = c.get_bool("sampler.parallel", p.sampler.parallel_chains);
    p.sampler.check_convergence = c.get_bool("sampler.check", p.sampler.check_convergence);
    p.sampler.max_rhat = c.get_double("sampler.max_rhat", p.sampler.max_rhat);
    p.sampler.min_ess = c.get_double("sampler.min_ess", p.sampler.min_ess);
    p.sampler.max_divergence_rate =
        c.get_double("sampler.max_divergence_rate", p.sampler.max_divergence_rate);

    p.bridge.seed = static_cast<std::uint64_t>(c.get_int("bridge.seed", static_cast<long>(p.bridge.seed)));
    p.bridge.max_iterations = static_cast<int>(c.get_int("bridge.max_iterations", p.bridge.max_iterations));
    p.bridge.tol = c.get_double("bridge.tol", p.bridge.tol);
    p.bridge.overlap_floor = c.get_double("bridge.overlap_floor", p.bridge.overlap_floor);

    p.cascade.effect_threshold = c.get_double("cascade.effect_threshold", p.cascade.effect_threshold);
    p.cascade.absent_threshold = c.get_double("cascade.absent_threshold", p.cascade.absent_threshold);
    p.cascade.sampler = p.sampler;

    const auto unused = c.unused_keys();
    if (!unused.empty()) {
        std::string msg = "unknown config keys:";
        for (const auto& k : unused) msg += " " + k;
        throw InvalidConfig(msg);
    }
    return p;
}

struct ParticipantResult {
    std::string id;
    bool ok = false;
    std::string error; // "stage: message" on failure
    std::vector<std::string> warnings;
    std::size_t n_trials = 0;
    std::size_t n_excluded = 0;

    information::MiReportRow mi;
    io::ImportanceRow importance;
    bool has_importance = false;
    cascade::CascadeResult cascade_row;
    kinematics::SpeedHistogram hist;
    bool has_hist = false;
};

struct PipelineResult {
    std::vector<ParticipantResult> participants;
    std::string manifest_path;

    int n_failed() const {
        int n = 0;
        for (const auto& p : participants)
            if (!p.ok) ++n;
        return n;
    }
};

namespace detail {

inline Session make_session(const PipelineConfig& cfg, const std::string& pid, std::size_t index) {
    if (!cfg.data_dir.empty()) {
        const std::filesystem::path d = std::filesystem::path(cfg.data_dir) / pid;
        return ingest::load_session((d / "gaze.csv").string(), (d / "keypoints.csv").string(),
                                    (d / "trials.csv").string(), pid, cfg.ingest);
    }
    synth::SynthConfig sc = cfg.synth;
    sc.participant_id = pid;
    sc.seed = gaze2afc::detail::mix64(cfg.seed ^ (0x9e3779b97f4a7c15ull * (index + 1)));
    if (cfg.synth_offsets == SynthOffsets::Auto) {
        Rng rng(sc.seed);
        Rng orng = rng.derive(0xB10C);
        sc.block_offsets_px.clear();
        for (int b = 0; b < sc.n_blocks; ++b)
            sc.block_offsets_px.emplace_back(orng.uniform(-20.0, 20.0), orng.uniform(-20.0, 20.0));
    } else if (cfg.synth_offsets == SynthOffsets::None) {
        sc.block_offsets_px.clear();
    }
    return synth::gen_session(sc).session;
}

} // namespace detail

/// Full analysis of one participant. Writes per-participant files into
/// out_dir/<id>/ and returns the rows that feed the aggregate tables.
inline ParticipantResult run_participant(const PipelineConfig& cfg, const std::string& pid,
                                         std::size_t index) {
    ParticipantResult out;
    out.id = pid;
    const std::filesystem::path pdir = std::filesystem::path(cfg.out_dir) / pid;
    std::string stage = "load";
    try {
        std::filesystem::create_directories(pdir);

        Session session = detail::make_session(cfg, pid, index);
        out.n_trials = session.trials.size();
        if (cfg.write_sessions) io::save_session(session, (pdir / "session.json").string());

        stage = "calibrate";
        std::vector<CalibrationOffset> offsets;
        if (cfg.apply_calibration) {
            kinematics::CalibrationResult cal = kinematics::post_calibrate(session, cfg.calibration);
            session = std::move(cal.session);
            offsets = std::move(cal.offsets);
            for (auto& w : cal.warnings) out.warnings.push_back("calibrate: " + w);
        }

        stage = "segment";
        kinematics::SegmentationConfig segcfg = cfg.segmentation;
        segcfg.frame_rate_hz = session.frame_rate_hz;
        std::vector<TrialSegmentation> segs;
        segs.reserve(session.trials.size());
        for (const TrialRecord& t : session.trials)
            segs.push_back(kinematics::segment_trajectory(session, t, segcfg));
        io::save_segments(pid, session.frame_rate_hz, segs, offsets, out.warnings,
                          segcfg.saccade_threshold_deg_s, (pdir / "segments.json").string());

        stage = "speed";
        const std::vector<double> speeds = kinematics::within_segment_speeds(session, segcfg);
        out.hist = kinematics::speed_histogram(speeds, cfg.hist_bin_width_deg_s, cfg.hist_bandwidth);
        out.has_hist = true;
        io::save_speed_histogram(pid, out.hist, (pdir / "hist.csv").string());

        stage = "features";
        features::FeatureMatrix m = features::build_feature_matrix(session.trials, segs, cfg.features);
        out.n_excluded = m.excluded_trials.size();
        for (auto& w : m.warnings) out.warnings.push_back("features: " + w);
        io::save_features(pid, m, (pdir / "features.csv").string());

        stage = "standardize";
        auto [z, scaling] =
            features::standardize(m.y, m.names, features::default_binary_mask(m.names));
        for (auto& w : scaling.warnings) out.warnings.push_back("standardize: " + w);

        stage = "fit";
        const std::vector<std::pair<std::string, const Eigen::VectorXi*>> outcomes = {
            {"decision", &m.decision}, {"task", &m.task}, {"correct", &m.correct}};
        std::vector<inference::PosteriorSamples> posts;
        for (std::size_t k = 0; k < outcomes.size(); ++k) {
            inference::LogisticModel model;
            model.x = *outcomes[k].second;
            model.y = z;
            model.feature_names = scaling.kept_names();
            inference::SamplerConfig scfg = cfg.sampler;
            scfg.seed = gaze2afc::detail::mix64(cfg.sampler.seed + 101 + k);
            posts.push_back(inference::sample_posterior(model, scfg));
            io::save_posterior(pid, outcomes[k].first, posts.back(), scaling, scfg,
                               (pdir / ("posterior_" + outcomes[k].first + ".json")).string());
        }

        stage = "information";
        out.mi.participant = pid;
        out.mi.n_trials = static_cast<std::size_t>(z.rows());
        out.mi.mi_gaze_decision = information::mi_model(posts[0], z, cfg.mi_method).value_bits;
        out.mi.mi_gaze_task = information::mi_model(posts[1], z, cfg.mi_method).value_bits;
        out.mi.mi_gaze_correct = information::mi_model(posts[2], z, cfg.mi_method).value_bits;
        out.mi.mi_decision_task = information::mi_contingency(m.decision, m.task).value_bits;
        out.mi.mean_correct = m.correct.cast<double>().mean();

        stage = "cascade";
        cascade::CascadeConfig ccfg = cfg.cascade;
        ccfg.sampler = cfg.sampler;
        ccfg.sampler.seed = gaze2afc::detail::mix64(cfg.sampler.seed + 104);
        out.cascade_row = cascade::cascade_test(m.congruent, m.mse, ccfg);
        out.cascade_row.participant = pid;

        if (cfg.run_importance) {
            stage = "importance";
            inference::LogisticModel model;
            model.x = m.decision;
            model.y = z;
            model.feature_names = scaling.kept_names();
            out.importance.participant = pid;
            out.importance.report = evidence::loo_importance(model, cfg.sampler, cfg.bridge);
            out.has_importance = true;
        }

        out.ok = true;
    } catch (const std::exception& e) {
        out.error = stage + ": " + e.what();
    }
    return out;
}

inline PipelineResult run_all(const PipelineConfig& cfg) {
    cfg.validate();
    std::filesystem::create_directories(cfg.out_dir);
    const std::filesystem::path odir(cfg.out_dir);

    PipelineResult res;
    for (std::size_t i = 0; i < cfg.participants.size(); ++i)
        res.participants.push_back(run_participant(cfg, cfg.participants[i], i));

    // aggregate tables
    std::vector<information::MiReportRow> mi_rows;
    std::vector<io::ImportanceRow> imp_rows;
    std::vector<cascade::CascadeResult> cas_rows;
    std::vector<svg::NamedHistogram> hists;
    for (const ParticipantResult& p : res.participants) {
        if (!p.ok) continue;
        mi_rows.push_back(p.mi);
        if (p.has_importance) imp_rows.push_back(p.importance);
        cas_rows.push_back(p.cascade_row);
        if (p.has_hist) hists.push_back({p.id, p.hist});
    }
    if (!mi_rows.empty()) io::save_mi_rows(mi_rows, (odir / "mi.csv").string());
    if (!imp_rows.empty()) io::save_importance_rows(imp_rows, (odir / "importance.csv").string());
    if (!cas_rows.empty()) io::save_cascade_rows(cas_rows, cfg.cascade, (odir / "cascade.csv").string());
    {
        // one combined long-format histogram table
        CsvWriter w((odir / "hist.csv").string());
        w.row({"participant", "kind", "x0", "x1", "value"});
        for (const auto& nh : hists) {
            const auto& h = nh.hist;
            w.row({nh.participant, "meta", fmt_fixed(h.bandwidth, 6), std::to_string(h.n),
                   fmt_fixed(h.mode_speed(), 6)});
            for (std::size_t b = 0; b + 1 < h.bin_edges.size(); ++b)
                w.row({nh.participant, "bin", fmt_fixed(h.bin_edges[b], 6),
                       fmt_fixed(h.bin_edges[b + 1], 6), fmt_fixed(h.density[b], 9)});
            for (std::size_t k = 0; k < h.kde_x.size(); ++k)
                w.row({nh.participant, "kde", fmt_fixed(h.kde_x[k], 6), fmt_fixed(h.kde_x[k], 6),
                       fmt_fixed(h.kde_y[k], 9)});
        }
    }

    if (cfg.write_svg && !hists.empty()) svg::write_speed_chart(hists, (odir / "speed.svg").string());
    if (cfg.write_svg && !mi_rows.empty()) {
        std::vector<svg::BarGroup> groups;
        for (const auto& r : mi_rows)
            groups.push_back({r.participant,
                              {r.mi_gaze_decision, r.mi_gaze_task, r.mi_gaze_correct, r.mi_decision_task},
                              "correct " + fmt_fixed(r.mean_correct, 2)});
        svg::write_bar_chart("Mutual information with gaze features", "MI [bits]",
                             {"gaze:decision", "gaze:task", "gaze:correct", "decision:task"}, groups,
                             (odir / "mi.svg").string());
    }
    if (cfg.write_svg && !imp_rows.empty()) {
        std::vector<svg::BarGroup> groups;
        std::vector<std::string> series;
        for (const auto& fi : imp_rows[0].report.features) series.push_back(fi.feature);
        for (const auto& r : imp_rows) {
            svg::BarGroup g;
            g.label = r.participant;
            for (const auto& fi : r.report.features) g.values.push_back(fi.ok ? fi.log10_odds : 0.0);
            groups.push_back(std::move(g));
        }
        svg::write_bar_chart("Feature importance (leave-one-out evidence)", "log10 odds", series,
                             groups, (odir / "importance.svg").string());
    }

    // manifest
    io::json manifest;
    manifest["tool"] = "gaze2afc run-all";
    manifest["out_dir"] = cfg.out_dir;
    manifest["source"] = cfg.data_dir.empty() ? "synthetic" : cfg.data_dir;
    io::json parts = io::json::array();
    for (const ParticipantResult& p : res.participants)
        parts.push_back({{"id", p.id},
                         {"ok", p.ok},
                         {"error", p.error},
                         {"warnings", p.warnings},
                         {"n_trials", p.n_trials},
                         {"n_excluded", p.n_excluded}});
    manifest["participants"] = std::move(parts);
    manifest["settings"] = {
        {"seed", cfg.seed},
        {"mi_method", information::mi_method_name(cfg.mi_method)},
        {"apply_calibration", cfg.apply_calibration},
        {"calibration_gate_deg", cfg.calibration.apply_gate_deg},
        {"saccade_threshold_deg_s", cfg.segmentation.saccade_threshold_deg_s},
        {"hist_bin_width_deg_s", cfg.hist_bin_width_deg_s},
        {"sampler",
         {{"chains", cfg.sampler.chains},
          {"draws", cfg.sampler.draws},
          {"warmup", cfg.sampler.warmup},
          {"seed", cfg.sampler.seed},
          {"target_accept", cfg.sampler.target_accept}}},
        {"bridge", {{"seed", cfg.bridge.seed}, {"tol", cfg.bridge.tol}}},
        {"cascade",
         {{"effect_threshold", cfg.cascade.effect_threshold},
          {"absent_threshold", cfg.cascade.absent_threshold}}},
        {"importance", cfg.run_importance}};
    io::json outputs = io::json::array();
    for (const char* f : {"mi.csv", "importance.csv", "cascade.csv", "hist.csv"})
        if (std::filesystem::exists(odir / f)) outputs.push_back(f);
    for (const char* f : {"speed.svg", "mi.svg", "importance.svg"})
        if (std::filesystem::exists(odir / f)) outputs.push_back(f);
    manifest["outputs"] = std::move(outputs);
    res.manifest_path = (odir / "manifest.json").string();
    io::detail::save_json(manifest, res.manifest_path);
    return res;
}

} // namespace gaze2afc::pipeline
