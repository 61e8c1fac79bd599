#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gaze2afc/pipeline.hpp"

using namespace gaze2afc;
namespace fs = std::filesystem;

namespace {

fs::path work_dir(const std::string& name) {
    const fs::path d = fs::path(testing::TempDir()) / "gaze2afc_pipeline" / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    EXPECT_TRUE(in.good()) << p;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inference::SamplerConfig quick_sampler() {
    inference::SamplerConfig s;
    s.chains = 2;
    s.draws = 250;
    s.warmup = 250;
    s.min_ess = 50.0;
    s.max_rhat = 1.05;
    return s;
}

pipeline::PipelineConfig quick_config(const fs::path& out) {
    pipeline::PipelineConfig cfg;
    cfg.participants = {"a", "b"};
    cfg.out_dir = out.string();
    cfg.seed = 11;
    cfg.synth.n_trials = 60;
    cfg.synth.n_blocks = 2;
    cfg.synth.saccades_max = 3;
    cfg.synth_offsets = pipeline::SynthOffsets::Auto;
    cfg.sampler = quick_sampler();
    cfg.cascade.sampler = cfg.sampler;
    cfg.run_importance = false;
    return cfg;
}

} // namespace

TEST(PipelineConfigTest, ParsesEverySection) {
    const std::string text = R"(
[run]
participants = "x, y"
out_dir = "zz"
importance = false
mi_method = "draw_averaged"
seed = 99

[synth]
trials = 60
blocks = 2
offsets = "3:4;5:-6"

[sampler]
chains = 2
draws = 250

[cascade]
effect_threshold = 0.92
)";
    const auto cfg = pipeline::PipelineConfig::from_config(config::Config::parse(text, "test"));
    EXPECT_EQ(cfg.participants, (std::vector<std::string>{"x", "y"}));
    EXPECT_EQ(cfg.out_dir, "zz");
    EXPECT_FALSE(cfg.run_importance);
    EXPECT_EQ(cfg.mi_method, information::MiMethod::ModelDrawAveraged);
    EXPECT_EQ(cfg.seed, 99u);
    EXPECT_EQ(cfg.synth.n_trials, 60);
    EXPECT_EQ(cfg.synth_offsets, pipeline::SynthOffsets::Explicit);
    ASSERT_EQ(cfg.synth.block_offsets_px.size(), 2u);
    EXPECT_EQ(cfg.synth.block_offsets_px[1], (std::pair<double, double>{5.0, -6.0}));
    EXPECT_EQ(cfg.sampler.chains, 2);
    EXPECT_EQ(cfg.sampler.draws, 250);
    EXPECT_EQ(cfg.cascade.effect_threshold, 0.92);
    EXPECT_EQ(cfg.cascade.sampler.chains, 2); // sampler settings flow into the cascade fit
}

TEST(PipelineConfigTest, GeneratedParticipantIds) {
    const auto cfg =
        pipeline::PipelineConfig::from_config(config::Config::parse("[run]\nn_participants = 3\n", "t"));
    EXPECT_EQ(cfg.participants, (std::vector<std::string>{"p01", "p02", "p03"}));
}

TEST(PipelineConfigTest, RejectsBadInput) {
    const auto parse = [](const std::string& s) {
        return pipeline::PipelineConfig::from_config(config::Config::parse(s, "t"));
    };
    EXPECT_THROW(parse("[run]\nbogus = 1\n"), InvalidConfig);
    EXPECT_THROW(parse("[run]\nmi_method = \"nope\"\n"), InvalidConfig);
    EXPECT_THROW(parse("[synth]\noffsets = \"1:2:3\"\n"), InvalidConfig);
    EXPECT_THROW(parse("[synth]\nbeta = \"1,2,oops\"\n"), InvalidConfig);

    EXPECT_EQ(parse("[synth]\noffsets = \"auto\"\n").synth_offsets, pipeline::SynthOffsets::Auto);

    pipeline::PipelineConfig cfg;
    cfg.participants.clear();
    EXPECT_THROW(cfg.validate(), InvalidConfig);
    cfg = pipeline::PipelineConfig{};
    cfg.hist_bin_width_deg_s = 0.0;
    EXPECT_THROW(cfg.validate(), InvalidConfig);
}

TEST(PipelineRun, SyntheticSmokeProducesAllOutputs) {
    const auto out = work_dir("smoke");
    const auto cfg = quick_config(out);
    const auto res = pipeline::run_all(cfg);
    ASSERT_EQ(res.participants.size(), 2u);
    for (const auto& p : res.participants) EXPECT_TRUE(p.ok) << p.id << ": " << p.error;
    EXPECT_EQ(res.n_failed(), 0);

    for (const std::string pid : {"a", "b"}) {
        for (const char* f : {"segments.json", "hist.csv", "features.csv", "posterior_decision.json",
                              "posterior_task.json", "posterior_correct.json"})
            EXPECT_TRUE(fs::exists(out / pid / f)) << pid << "/" << f;
        const auto seg = io::load_segments((out / pid / "segments.json").string());
        EXPECT_EQ(seg.trials.size(), 60u);
        EXPECT_EQ(seg.offsets.size(), 2u);
        const auto feats = io::read_features((out / pid / "features.csv").string());
        EXPECT_EQ(feats.matrix.y.rows(), 60);
        const auto post = io::load_posterior((out / pid / "posterior_decision.json").string());
        EXPECT_EQ(post.outcome, "decision");
        EXPECT_GT(post.post.draws.rows(), 0);
    }

    for (const char* f : {"mi.csv", "cascade.csv", "hist.csv", "manifest.json", "speed.svg", "mi.svg"})
        EXPECT_TRUE(fs::exists(out / f)) << f;
    EXPECT_FALSE(fs::exists(out / "importance.csv")); // disabled for the smoke run

    const CsvTable mi = read_csv((out / "mi.csv").string());
    ASSERT_EQ(mi.rows.size(), 2u);
    for (std::size_t r = 0; r < mi.rows.size(); ++r)
        for (int c = 2; c <= 5; ++c) {
            const double v = parse_double_field(mi, r, c);
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }

    const io::json manifest = io::detail::load_json(res.manifest_path);
    EXPECT_EQ(manifest.at("participants").size(), 2u);
    EXPECT_TRUE(manifest.at("participants").at(0).at("ok").get<bool>());
    EXPECT_EQ(manifest.at("source").get<std::string>(), "synthetic");
}

TEST(PipelineRun, FailuresAreRecordedPerParticipant) {
    const auto data = work_dir("mixed_data");
    const auto out = work_dir("mixed_out");
    {
        synth::SynthConfig sc;
        sc.participant_id = "good";
        sc.seed = 5;
        sc.n_trials = 40;
        sc.n_blocks = 2;
        io::write_synth_dataset(synth::gen_session(sc), (data / "good").string());
    }
    auto cfg = quick_config(out);
    cfg.participants = {"good", "ghost"};
    cfg.data_dir = data.string();
    const auto res = pipeline::run_all(cfg);
    ASSERT_EQ(res.participants.size(), 2u);
    EXPECT_TRUE(res.participants[0].ok) << res.participants[0].error;
    EXPECT_FALSE(res.participants[1].ok);
    EXPECT_EQ(res.participants[1].error.rfind("load:", 0), 0u) << res.participants[1].error;
    EXPECT_EQ(res.n_failed(), 1);
    EXPECT_TRUE(fs::exists(out / "manifest.json"));
    EXPECT_TRUE(fs::exists(out / "mi.csv")); // the good participant still reports

    const io::json manifest = io::detail::load_json(res.manifest_path);
    EXPECT_FALSE(manifest.at("participants").at(1).at("ok").get<bool>());
}

TEST(PipelineRun, SameSeedSameReports) {
    const auto out1 = work_dir("det1");
    const auto out2 = work_dir("det2");
    auto cfg1 = quick_config(out1);
    cfg1.participants = {"a"};
    cfg1.synth.n_trials = 50;
    cfg1.write_svg = false;
    auto cfg2 = cfg1;
    cfg2.out_dir = out2.string();
    const auto r1 = pipeline::run_all(cfg1);
    const auto r2 = pipeline::run_all(cfg2);
    ASSERT_EQ(r1.n_failed(), 0) << r1.participants[0].error;
    ASSERT_EQ(r2.n_failed(), 0);
    for (const char* f : {"mi.csv", "cascade.csv", "hist.csv"})
        EXPECT_EQ(slurp(out1 / f), slurp(out2 / f)) << f;
    for (const char* f : {"features.csv", "hist.csv"})
        EXPECT_EQ(slurp(out1 / "a" / f), slurp(out2 / "a" / f)) << f;
}
