#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ehsc/cli.hpp"
#include "ehsc/config.hpp"

namespace ehsc {
namespace {

namespace fs = std::filesystem;

std::string error_of(std::string_view text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

TEST(Config, PresetsRoundTrip) {
    const auto names = preset_names();
    EXPECT_GE(names.size(), 9u);
    for (const auto& n : names) {
        const ExperimentConfig c = load_preset(n);
        const auto canon = to_json(c);
        EXPECT_EQ(to_json(parse_config(canon.dump())), canon) << n;
        EXPECT_EQ(to_json(parse_config(to_yaml(c))), canon) << n;
        EXPECT_EQ(config_hash(parse_config(to_yaml(c))), config_hash(c)) << n;
    }
}

TEST(Config, PresetValues) {
    const ExperimentConfig b = load_preset("fig2b");
    ASSERT_TRUE(b.region);
    EXPECT_EQ(b.region->d_bar, 0.8);
    EXPECT_EQ(b.region->sensor.geometry.bandwidth_ratio(), 1.0);
    const auto& src = std::get<GaussianIidSourceModel>(b.region->sensor.source);
    EXPECT_EQ(src.eta, 1.5);
    EXPECT_EQ(src.ts_max, 1.0);
    const auto& e = std::get<UniformEnergy>(b.region->sensor.env.energy);
    EXPECT_EQ(e.lo, 0.0);
    EXPECT_EQ(e.hi, 2.0);

    const ExperimentConfig a = load_preset("fig3a");
    EXPECT_EQ(a.region->sensor.env.q_support, (std::vector<double>{0.1, 100.0}));
    EXPECT_EQ(a.region->sensor.env.h_support, (std::vector<double>{0.1, 100.0}));

    const ExperimentConfig t = load_preset("fig4");
    ASSERT_TRUE(t.tradeoff);
    EXPECT_EQ(t.tradeoff->spec.lambda, 0.5);
    EXPECT_EQ(t.tradeoff->gamma.n, 21u);
    EXPECT_EQ(t.tradeoff->energy_worst, (std::vector<double>{0.1, 0.9}));
    EXPECT_EQ(std::get<GaussMarkovSourceModel>(t.tradeoff->spec.source).nu, 0.1);

    const ExperimentConfig s = load_preset("fig5");
    ASSERT_TRUE(s.schedule);
    EXPECT_EQ(s.schedule->sensors.size(), 2u);
    EXPECT_EQ(s.schedule->sensors[0].env.h_support, (std::vector<double>{3.5, 7.0}));
}

TEST(Config, MissingDistortionBoundNamesTheKey) {
    const std::string msg = error_of("kind: region\nregion:\n  axes: snr\n");
    EXPECT_NE(msg.find("region.d_bar"), std::string::npos) << msg;
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(Config, UnknownKeyRejectedWithLine) {
    std::string text(preset_text("sim2b"));
    const auto line = std::count(text.begin(), text.end(), '\n') + 1;
    text += "  bogus_key: 1\n";
    const std::string msg = error_of(text);
    EXPECT_NE(msg.find("bogus_key"), std::string::npos) << msg;
    EXPECT_NE(msg.find("line " + std::to_string(line)), std::string::npos) << msg;
}

TEST(Config, JsonAccepted) {
    const ExperimentConfig c = parse_config(R"({"kind": "simulate", "seed": 3, "simulate": {"policy": "do", "d_bar": 0.7, "sensor": {
        "source": {"model": "gaussian_iid"}, "geometry": {"channel_uses": 100, "source_samples": 100},
        "energy": {"distribution": "uniform", "lo": 0, "hi": 2}}}})");
    EXPECT_EQ(c.kind, ExperimentKind::Simulate);
    EXPECT_EQ(c.seed, 3u);
    EXPECT_EQ(c.simulate->d_bar, 0.7);
}

TEST(Config, MismatchedSectionRejected) {
    EXPECT_FALSE(error_of("kind: simulate\nregion:\n  d_bar: 0.8\n").empty());
    EXPECT_FALSE(error_of("kind: nonsense\n").empty());
    EXPECT_FALSE(error_of("kind: region\nregion:\n  d_bar: [1, 2]\n").empty());
}

TEST(Cli, IdenticalSeedGivesIdenticalFiles) {
    ExperimentConfig c = load_preset("sim2b");
    c.simulate->horizon = 20000;
    const fs::path base = fs::temp_directory_path() / "ehsc_cli_test";
    fs::remove_all(base);
    const auto a = cmd_simulate(c, base / "a", true);
    const auto b = cmd_simulate(c, base / "b", true);
    ASSERT_EQ(a.exit_code, kExitOk);
    const auto slurp = [](const fs::path& p) {
        std::ifstream f(p, std::ios::binary);
        std::ostringstream s;
        s << f.rdbuf();
        return s.str();
    };
    const std::string trace = slurp(base / "a" / "trace.csv");
    EXPECT_EQ(trace, slurp(base / "b" / "trace.csv"));
    EXPECT_EQ(trace.rfind("# seed=7\n# config_hash=" + config_hash(c) + "\n", 0), 0u);

    ExperimentConfig r = load_preset("fig3b");
    apply_resolution(r, 4);
    cmd_region(r, base / "r1", false);
    cmd_region(r, base / "r2", true);
    for (const auto& f : fs::directory_iterator(base / "r1")) {
        EXPECT_EQ(slurp(f.path()), slurp(base / "r2" / f.path().filename())) << f.path();
    }
    fs::remove_all(base);
}

TEST(Cli, ExitCodes) {
    const auto call = [](std::vector<std::string> args) {
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        return run_cli(static_cast<int>(argv.size()), argv.data());
    };
    EXPECT_EQ(call({"ehsc", "region", "--preset", "sim2b"}), kExitConfig);
    EXPECT_EQ(call({"ehsc", "region", "--preset", "nope"}), kExitConfig);
    EXPECT_EQ(call({"ehsc", "region", "--config", "/nonexistent/x.yaml"}), kExitConfig);
}

} // namespace
} // namespace ehsc
