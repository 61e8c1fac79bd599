// Command line front end. Every subcommand is a thin wrapper over the
// library; all heavy lifting lives in the headers so tests can reach it.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <gaze2afc/gaze2afc.hpp>

using namespace gaze2afc;

namespace {

// ---------------------------------------------------------------------------
// shared option groups
// ---------------------------------------------------------------------------

void add_sampler_options(CLI::App* cmd, inference::SamplerConfig& s) {
    cmd->add_option("--chains", s.chains, "MCMC chains");
    cmd->add_option("--draws", s.draws, "kept draws per chain");
    cmd->add_option("--warmup", s.warmup, "adaptation draws per chain");
    cmd->add_option("--seed", s.seed, "sampler seed");
    cmd->add_option("--target-accept", s.target_accept, "dual averaging target");
    cmd->add_option("--max-treedepth", s.max_treedepth, "doubling depth limit");
    cmd->add_flag("--serial", [&s](std::int64_t) { s.parallel_chains = false; },
                  "run chains sequentially");
    cmd->add_flag("--no-check", [&s](std::int64_t) { s.check_convergence = false; },
                  "skip the convergence gate");
    cmd->add_option("--min-ess", s.min_ess, "effective sample size gate");
    cmd->add_option("--max-rhat", s.max_rhat, "split R-hat gate");
}

void add_bridge_options(CLI::App* cmd, evidence::BridgeConfig& b) {
    cmd->add_option("--bridge-seed", b.seed, "proposal sampling seed");
    cmd->add_option("--bridge-tol", b.tol, "fixed point tolerance");
    cmd->add_option("--bridge-max-iter", b.max_iterations, "fixed point iteration cap");
}

struct CalibrationFlags {
    bool skip = false;
    kinematics::CalibrationConfig cfg;
};

void add_calibration_options(CLI::App* cmd, CalibrationFlags& c) {
    cmd->add_flag("--no-calibration", c.skip, "skip per-block offset correction");
    cmd->add_option("--gate-deg", c.cfg.apply_gate_deg, "offset magnitude needed to correct");
    cmd->add_option("--fixation-s", c.cfg.fixation_s, "pre-onset fixation window");
}

Session load_calibrated(const std::string& session_path, const CalibrationFlags& cal,
                        std::vector<CalibrationOffset>* offsets_out) {
    Session s = io::load_session_json(session_path);
    if (cal.skip) return s;
    kinematics::CalibrationResult res = kinematics::post_calibrate(s, cal.cfg);
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
    if (offsets_out) *offsets_out = std::move(res.offsets);
    return std::move(res.session);
}

void print_fit_summary(const inference::PosteriorSamples& post) {
    std::printf("%-28s %9s %8s %9s %9s %9s %7s %8s\n", "parameter", "mean", "sd", "q05", "q50",
                "q95", "rhat", "ess");
    for (Eigen::Index p = 0; p < post.dim(); ++p)
        std::printf("%-28s %9.4f %8.4f %9.4f %9.4f %9.4f %7.4f %8.1f\n",
                    post.param_names[static_cast<std::size_t>(p)].c_str(), post.mean(p), post.sd(p),
                    post.quantile(p, 0.05), post.quantile(p, 0.50), post.quantile(p, 0.95),
                    post.diag.rhat(p), post.diag.ess(p));
    std::printf("divergences: %d (%.2f%%)  treedepth hits: %d  converged: %s\n",
                post.diag.divergences, 100.0 * post.diag.divergence_rate,
                post.diag.max_treedepth_hits, post.diag.converged ? "yes" : "no");
}

struct OutcomePick {
    std::string name = "decision";

    const Eigen::VectorXi& column(const features::FeatureMatrix& m) const {
        if (name == "decision") return m.decision;
        if (name == "task") return m.task;
        if (name == "correct") return m.correct;
        if (name == "congruent") return m.congruent;
        throw InvalidConfig("unknown outcome '" + name + "'");
    }
};

// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

int cmd_ingest(const std::string& gaze, const std::string& keypoints, const std::string& trials,
               const std::string& participant, const std::string& out,
               const ingest::IngestOptions& opt) {
    Session s = ingest::load_session(gaze, keypoints, trials, participant, opt);
    io::save_session(s, out);
    std::size_t aligned = 0;
    for (const auto& a : s.aligned)
        if (a) ++aligned;
    std::printf("participant %s: %zu gaze samples, %zu frames (%zu aligned), %zu trials -> %s\n",
                s.participant_id.c_str(), s.gaze.size(), s.frames.size(), aligned, s.trials.size(),
                out.c_str());
    return 0;
}

int cmd_segment(const std::string& session_path, const std::string& out,
                const CalibrationFlags& cal, double threshold) {
    std::vector<CalibrationOffset> offsets;
    Session s = load_calibrated(session_path, cal, &offsets);

    kinematics::SegmentationConfig segcfg;
    segcfg.saccade_threshold_deg_s = threshold;
    segcfg.frame_rate_hz = s.frame_rate_hz;
    std::vector<TrialSegmentation> segs;
    std::size_t n_segments = 0, n_saccades = 0;
    for (const TrialRecord& t : s.trials) {
        segs.push_back(kinematics::segment_trajectory(s, t, segcfg));
        n_segments += segs.back().segments.size();
        n_saccades += segs.back().saccades.size();
    }
    io::save_segments(s.participant_id, s.frame_rate_hz, segs, offsets, {}, threshold, out);
    for (const CalibrationOffset& o : offsets)
        std::printf("block %d: offset (%.2f, %.2f) px = %.3f deg, %s\n", o.block, o.dx_px, o.dy_px,
                    o.magnitude_deg, o.applied ? "corrected" : "below gate");
    std::printf("%zu trials: %zu segments, %zu saccades -> %s\n", segs.size(), n_segments,
                n_saccades, out.c_str());
    return 0;
}

int cmd_speedhist(const std::string& session_path, const std::string& out, const std::string& svg_out,
                  const CalibrationFlags& cal, double threshold, double bin_width, double bandwidth) {
    Session s = load_calibrated(session_path, cal, nullptr);
    kinematics::SegmentationConfig segcfg;
    segcfg.saccade_threshold_deg_s = threshold;
    segcfg.frame_rate_hz = s.frame_rate_hz;
    const std::vector<double> speeds = kinematics::within_segment_speeds(s, segcfg);
    const kinematics::SpeedHistogram h = kinematics::speed_histogram(speeds, bin_width, bandwidth);
    io::save_speed_histogram(s.participant_id, h, out);
    if (!svg_out.empty()) svg::write_speed_chart({{s.participant_id, h}}, svg_out);
    std::printf("%zu within-segment speeds, mode %.2f deg/s (bandwidth %.3f) -> %s\n", h.n,
                h.mode_speed(), h.bandwidth, out.c_str());
    return 0;
}

int cmd_features(const std::string& session_path, const std::string& segments_path,
                 const std::string& out) {
    const Session s = io::load_session_json(session_path);
    const io::SegmentsFile f = io::load_segments(segments_path);
    features::FeatureMatrix m = features::build_feature_matrix(s.trials, f.trials);
    for (const auto& w : m.warnings) std::cerr << "warning: " << w << "\n";
    io::save_features(s.participant_id, m, out);
    std::printf("%ld trials kept, %zu excluded -> %s\n", static_cast<long>(m.y.rows()),
                m.excluded_trials.size(), out.c_str());
    return 0;
}

int cmd_fit(const std::string& features_path, const OutcomePick& outcome, const std::string& out,
            const inference::SamplerConfig& scfg) {
    const io::FeaturesFile f = io::read_features(features_path);
    auto [z, scaling] =
        features::standardize(f.matrix.y, f.matrix.names, features::default_binary_mask(f.matrix.names));
    for (const auto& w : scaling.warnings) std::cerr << "warning: " << w << "\n";

    inference::LogisticModel model;
    model.x = outcome.column(f.matrix);
    model.y = z;
    model.feature_names = scaling.kept_names();
    const inference::PosteriorSamples post = inference::sample_posterior(model, scfg);
    io::save_posterior(f.participant, outcome.name, post, scaling, scfg, out);
    std::printf("outcome %s, %ld trials, %d x %d draws -> %s\n", outcome.name.c_str(),
                static_cast<long>(model.n()), post.n_chains, post.n_draws, out.c_str());
    print_fit_summary(post);
    return 0;
}

int cmd_mi(const std::string& features_path, const std::string& out, const std::string& method_name,
           const inference::SamplerConfig& scfg) {
    const io::FeaturesFile f = io::read_features(features_path);
    auto [z, scaling] =
        features::standardize(f.matrix.y, f.matrix.names, features::default_binary_mask(f.matrix.names));
    const information::MiMethod method = method_name == "draw_averaged"
                                             ? information::MiMethod::ModelDrawAveraged
                                             : information::MiMethod::ModelPosteriorMean;

    information::MiReportRow row;
    row.participant = f.participant;
    row.n_trials = static_cast<std::size_t>(z.rows());
    const std::vector<std::pair<const char*, const Eigen::VectorXi*>> outcomes = {
        {"decision", &f.matrix.decision}, {"task", &f.matrix.task}, {"correct", &f.matrix.correct}};
    double* slots[3] = {&row.mi_gaze_decision, &row.mi_gaze_task, &row.mi_gaze_correct};
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
        inference::LogisticModel model;
        model.x = *outcomes[k].second;
        model.y = z;
        model.feature_names = scaling.kept_names();
        inference::SamplerConfig sk = scfg;
        sk.seed = gaze2afc::detail::mix64(scfg.seed + 101 + k);
        const inference::PosteriorSamples post = inference::sample_posterior(model, sk);
        *slots[k] = information::mi_model(post, z, method).value_bits;
    }
    row.mi_decision_task = information::mi_contingency(f.matrix.decision, f.matrix.task).value_bits;
    row.mean_correct = f.matrix.correct.cast<double>().mean();
    io::save_mi_rows({row}, out);
    std::printf("%s (%zu trials): gaze:decision %.4f, gaze:task %.4f, gaze:correct %.4f, "
                "decision:task %.4f bits, mean correct %.3f -> %s\n",
                row.participant.c_str(), row.n_trials, row.mi_gaze_decision, row.mi_gaze_task,
                row.mi_gaze_correct, row.mi_decision_task, row.mean_correct, out.c_str());
    return 0;
}

int cmd_importance(const std::string& features_path, const std::string& out,
                   const inference::SamplerConfig& scfg, const evidence::BridgeConfig& bcfg) {
    const io::FeaturesFile f = io::read_features(features_path);
    auto [z, scaling] =
        features::standardize(f.matrix.y, f.matrix.names, features::default_binary_mask(f.matrix.names));
    inference::LogisticModel model;
    model.x = f.matrix.decision;
    model.y = z;
    model.feature_names = scaling.kept_names();

    io::ImportanceRow row;
    row.participant = f.participant;
    row.report = evidence::loo_importance(model, scfg, bcfg);
    io::save_importance_rows({row}, out);
    std::printf("full model log evidence %.3f (mc se %.4f)\n", row.report.full.log_evidence,
                row.report.full.mc_se);
    for (const auto& fi : row.report.features) {
        if (fi.ok)
            std::printf("%-24s log10 odds %+8.3f\n", fi.feature.c_str(), fi.log10_odds);
        else
            std::printf("%-24s failed: %s\n", fi.feature.c_str(), fi.error.c_str());
    }
    std::printf("-> %s\n", out.c_str());
    return 0;
}

int cmd_cascade(const std::string& features_path, const std::string& out,
                cascade::CascadeConfig ccfg) {
    const io::FeaturesFile f = io::read_features(features_path);
    cascade::CascadeResult r = cascade::cascade_test(f.matrix.congruent, f.matrix.mse, ccfg);
    r.participant = f.participant;
    io::save_cascade_rows({r}, ccfg, out);
    std::printf("%s: p(effect) = %.4f -> %s (beta %.3f +- %.3f) -> %s\n", r.participant.c_str(),
                r.p_cascade, cascade::cascade_call_name(cascade::classify(r.p_cascade, ccfg)),
                r.beta_mean, r.beta_sd, out.c_str());
    return 0;
}

int cmd_synth(synth::SynthConfig cfg, const std::string& offsets_spec, const std::string& out_dir) {
    if (offsets_spec == "auto") {
        Rng orng = Rng(cfg.seed).derive(0xB10C);
        cfg.block_offsets_px.clear();
        for (int b = 0; b < cfg.n_blocks; ++b)
            cfg.block_offsets_px.emplace_back(orng.uniform(-20.0, 20.0), orng.uniform(-20.0, 20.0));
    } else if (!offsets_spec.empty() && offsets_spec != "none") {
        cfg.block_offsets_px = pipeline::detail::parse_offsets(offsets_spec);
    }
    const synth::SynthSession s = synth::gen_session(cfg);
    io::write_synth_dataset(s, out_dir);
    std::printf("%s: %zu gaze samples, %zu frames, %zu trials -> %s/{gaze,keypoints,trials}.csv, "
                "truth.json\n",
                cfg.participant_id.c_str(), s.session.gaze.size(), s.session.frames.size(),
                s.session.trials.size(), out_dir.c_str());
    return 0;
}

int cmd_run_all(pipeline::PipelineConfig cfg) {
    const pipeline::PipelineResult res = pipeline::run_all(cfg);
    for (const auto& p : res.participants) {
        if (p.ok)
            std::printf("%s: ok (%zu trials, %zu excluded, %zu warnings)\n", p.id.c_str(),
                        p.n_trials, p.n_excluded, p.warnings.size());
        else
            std::printf("%s: FAILED at %s\n", p.id.c_str(), p.error.c_str());
        for (const auto& w : p.warnings) std::printf("  warning: %s\n", w.c_str());
    }
    std::printf("manifest: %s\n", res.manifest_path.c_str());
    return res.n_failed() == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-alternative gaze analysis pipeline"};
    app.require_subcommand(1);

    std::string active = "startup";
    int rc = 0;

    // ingest
    std::string gaze_path, keypoints_path, trials_path, participant = "p00";
    std::string out_path = "session.json";
    ingest::IngestOptions ingest_opt;
    auto* ingest_cmd = app.add_subcommand("ingest", "parse and align the three input CSVs");
    ingest_cmd->add_option("--gaze", gaze_path, "gaze CSV")->required();
    ingest_cmd->add_option("--keypoints", keypoints_path, "keypoints CSV")->required();
    ingest_cmd->add_option("--trials", trials_path, "trials CSV")->required();
    ingest_cmd->add_option("--participant", participant, "participant id");
    ingest_cmd->add_option("-o,--out", out_path, "output session JSON");
    ingest_cmd->add_option("--p-cutoff", ingest_opt.p_cutoff, "keypoint likelihood cutoff");
    ingest_cmd->add_option("--max-gap-s", ingest_opt.max_align_gap_s, "alignment gap limit");
    ingest_cmd->add_option("--clock-offset-s", ingest_opt.gaze_format.clock_offset_s,
                           "added to gaze timestamps before alignment");
    ingest_cmd->add_option("--expected-trial-s", ingest_opt.trial_format.expected_duration_s,
                           "nominal trial duration (<=0 disables the check)");
    ingest_cmd->callback([&] {
        active = "ingest";
        rc = cmd_ingest(gaze_path, keypoints_path, trials_path, participant, out_path, ingest_opt);
    });

    // segment
    std::string session_path = "session.json", segments_out = "segments.json";
    CalibrationFlags seg_cal;
    double seg_threshold = 100.0;
    auto* segment_cmd = app.add_subcommand("segment", "calibrate, detect saccades, split segments");
    segment_cmd->add_option("--session", session_path, "session JSON")->required();
    segment_cmd->add_option("-o,--out", segments_out, "output segments JSON");
    segment_cmd->add_option("--saccade-threshold", seg_threshold, "speed threshold deg/s");
    add_calibration_options(segment_cmd, seg_cal);
    segment_cmd->callback([&] {
        active = "segment";
        rc = cmd_segment(session_path, segments_out, seg_cal, seg_threshold);
    });

    // speedhist
    std::string hist_session = "session.json", hist_out = "hist.csv", hist_svg;
    CalibrationFlags hist_cal;
    double hist_threshold = 100.0, hist_bin = 0.5, hist_bw = 0.0;
    auto* speed_cmd = app.add_subcommand("speedhist", "within-segment speed distribution");
    speed_cmd->add_option("--session", hist_session, "session JSON")->required();
    speed_cmd->add_option("-o,--out", hist_out, "output CSV");
    speed_cmd->add_option("--svg", hist_svg, "optional chart output");
    speed_cmd->add_option("--saccade-threshold", hist_threshold, "speed threshold deg/s");
    speed_cmd->add_option("--bin-width", hist_bin, "histogram bin width deg/s");
    speed_cmd->add_option("--bandwidth", hist_bw, "KDE bandwidth, 0 = automatic");
    add_calibration_options(speed_cmd, hist_cal);
    speed_cmd->callback([&] {
        active = "speedhist";
        rc = cmd_speedhist(hist_session, hist_out, hist_svg, hist_cal, hist_threshold, hist_bin,
                           hist_bw);
    });

    // features
    std::string feat_session = "session.json", feat_segments = "segments.json",
                feat_out = "features.csv";
    auto* features_cmd = app.add_subcommand("features", "per-trial feature table");
    features_cmd->add_option("--session", feat_session, "session JSON")->required();
    features_cmd->add_option("--segments", feat_segments, "segments JSON")->required();
    features_cmd->add_option("-o,--out", feat_out, "output CSV");
    features_cmd->callback([&] {
        active = "features";
        rc = cmd_features(feat_session, feat_segments, feat_out);
    });

    // fit
    std::string fit_features = "features.csv", fit_out = "posterior.json";
    OutcomePick fit_outcome;
    inference::SamplerConfig fit_scfg;
    auto* fit_cmd = app.add_subcommand("fit", "Bayesian logistic regression on the features");
    fit_cmd->add_option("--features", fit_features, "features CSV")->required();
    fit_cmd->add_option("--outcome", fit_outcome.name, "decision | task | correct | congruent");
    fit_cmd->add_option("-o,--out", fit_out, "output posterior JSON");
    add_sampler_options(fit_cmd, fit_scfg);
    fit_cmd->callback([&] {
        active = "fit";
        rc = cmd_fit(fit_features, fit_outcome, fit_out, fit_scfg);
    });

    // mi
    std::string mi_features = "features.csv", mi_out = "mi.csv", mi_method = "posterior_mean";
    inference::SamplerConfig mi_scfg;
    auto* mi_cmd = app.add_subcommand("mi", "mutual information summary");
    mi_cmd->add_option("--features", mi_features, "features CSV")->required();
    mi_cmd->add_option("-o,--out", mi_out, "output CSV");
    mi_cmd->add_option("--method", mi_method, "posterior_mean | draw_averaged");
    add_sampler_options(mi_cmd, mi_scfg);
    mi_cmd->callback([&] {
        active = "mi";
        rc = cmd_mi(mi_features, mi_out, mi_method, mi_scfg);
    });

    // importance
    std::string imp_features = "features.csv", imp_out = "importance.csv";
    inference::SamplerConfig imp_scfg;
    evidence::BridgeConfig imp_bcfg;
    auto* imp_cmd = app.add_subcommand("importance", "leave-one-feature-out evidence comparison");
    imp_cmd->add_option("--features", imp_features, "features CSV")->required();
    imp_cmd->add_option("-o,--out", imp_out, "output CSV");
    add_sampler_options(imp_cmd, imp_scfg);
    add_bridge_options(imp_cmd, imp_bcfg);
    imp_cmd->callback([&] {
        active = "importance";
        rc = cmd_importance(imp_features, imp_out, imp_scfg, imp_bcfg);
    });

    // cascade
    std::string cas_features = "features.csv", cas_out = "cascade.csv";
    cascade::CascadeConfig cas_cfg;
    auto* cas_cmd = app.add_subcommand("cascade", "distortion effect on gaze-choice congruence");
    cas_cmd->add_option("--features", cas_features, "features CSV")->required();
    cas_cmd->add_option("-o,--out", cas_out, "output CSV");
    cas_cmd->add_option("--effect-threshold", cas_cfg.effect_threshold, "posterior mass for 'effect'");
    cas_cmd->add_option("--absent-threshold", cas_cfg.absent_threshold, "posterior mass for 'absent'");
    add_sampler_options(cas_cmd, cas_cfg.sampler);
    cas_cmd->callback([&] {
        active = "cascade";
        rc = cmd_cascade(cas_features, cas_out, cas_cfg);
    });

    // synth
    synth::SynthConfig synth_cfg;
    std::string synth_out = "synth_data", synth_offsets = "none";
    std::vector<double> synth_beta;
    auto* synth_cmd = app.add_subcommand("synth", "generate a dataset with known ground truth");
    synth_cmd->add_option("-o,--out", synth_out, "output directory");
    synth_cmd->add_option("--participant", synth_cfg.participant_id, "participant id");
    synth_cmd->add_option("--seed", synth_cfg.seed, "generator seed");
    synth_cmd->add_option("--trials", synth_cfg.n_trials, "trial count");
    synth_cmd->add_option("--blocks", synth_cfg.n_blocks, "block count");
    synth_cmd->add_option("--occlusion", synth_cfg.occlusion_rate, "keypoint dropout rate");
    synth_cmd->add_option("--offsets", synth_offsets, "none | auto | dx:dy;dx:dy;...");
    synth_cmd->add_option("--alpha", synth_cfg.true_alpha, "decision model intercept");
    synth_cmd->add_option("--beta", synth_beta, "decision model coefficients (6 values)")
        ->expected(6);
    synth_cmd->add_option("--cascade-strength", synth_cfg.cascade_strength,
                          "congruence decay with distortion");
    synth_cmd->add_option("--mse-min", synth_cfg.mse_min, "distortion lower bound");
    synth_cmd->add_option("--mse-max", synth_cfg.mse_max, "distortion upper bound");
    synth_cmd->callback([&] {
        active = "synth";
        if (!synth_beta.empty()) synth_cfg.true_beta = synth_beta;
        rc = cmd_synth(synth_cfg, synth_offsets, synth_out);
    });

    // run-all
    std::string run_config, run_out, run_participants, run_data_dir;
    long run_seed = -1;
    bool run_no_svg = false, run_no_importance = false, run_quick = false;
    auto* run_cmd = app.add_subcommand("run-all", "whole pipeline over every participant");
    run_cmd->add_option("--config", run_config, "config file (flat TOML subset)");
    run_cmd->add_option("-o,--out", run_out, "output directory");
    run_cmd->add_option("--participants", run_participants, "comma separated ids");
    run_cmd->add_option("--data-dir", run_data_dir, "load CSVs from <dir>/<id>/ instead of synthesizing");
    run_cmd->add_option("--seed", run_seed, "base seed for synthetic sessions");
    run_cmd->add_flag("--no-svg", run_no_svg, "skip chart output");
    run_cmd->add_flag("--no-importance", run_no_importance, "skip the evidence comparisons");
    run_cmd->add_flag("--quick", run_quick,
                      "small sampler settings for smoke runs (weakens the convergence gate)");
    run_cmd->callback([&] {
        active = "run-all";
        pipeline::PipelineConfig cfg;
        if (!run_config.empty()) cfg = pipeline::PipelineConfig::from_file(run_config);
        if (!run_out.empty()) cfg.out_dir = run_out;
        if (!run_participants.empty())
            cfg.participants = pipeline::detail::split_list(run_participants, ',');
        if (!run_data_dir.empty()) cfg.data_dir = run_data_dir;
        if (run_seed >= 0) cfg.seed = static_cast<std::uint64_t>(run_seed);
        if (run_no_svg) cfg.write_svg = false;
        if (run_no_importance) cfg.run_importance = false;
        if (run_quick) {
            cfg.sampler.chains = 2;
            cfg.sampler.draws = 400;
            cfg.sampler.warmup = 400;
            cfg.sampler.min_ess = 50.0;
            cfg.sampler.max_rhat = 1.05;
            cfg.synth.n_trials = std::min(cfg.synth.n_trials, 160);
            cfg.cascade.sampler = cfg.sampler;
        }
        rc = cmd_run_all(cfg);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const Error& e) {
        std::cerr << "error [" << active << "]: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error [" << active << "]: " << e.what() << "\n";
        return 1;
    }
    return rc;
}
