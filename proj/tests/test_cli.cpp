#include <gtest/gtest.h>
#include <json.hpp>

#include <cmath>
#include <sstream>

#include "cli_fixture.hpp"
#include "scopeflow/schedule.hpp"
#include "test_util.hpp"

using namespace scopeflow;
using cli::run;
using cli::slurp;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

json run_json(const std::string& args, const fs::path& out) {
  EXPECT_EQ(run(args, out.string()), 0) << args;
  return json::parse(slurp(out));
}

}  // namespace

TEST(AnalyzeBias, WorkedExample) {
  TempDir dir;
  const auto j = run_json("analyze-bias --image 436x1024 --crop 384x768", dir.path / "s.json");
  EXPECT_EQ(j["corner_prob_exact"], "1/13621");
  EXPECT_NEAR(j["corner_prob"].get<double>(), 7.342e-5, 5e-9);
  EXPECT_EQ(j["green_region"], "332x512");
}

TEST(AnalyzeBias, FullRatioWritesAllOnesMap) {
  TempDir dir;
  ASSERT_EQ(run("analyze-bias --image 6x9 --ratio 1.0 --out " + dir.path.string()), 0);
  const auto pgm = slurp(dir.path / "prob_6x9.pgm");
  const std::string header = "P5\n9 6\n65535\n";
  ASSERT_EQ(pgm.size(), header.size() + 6 * 9 * 2);
  for (std::size_t i = header.size(); i < pgm.size(); ++i) EXPECT_EQ(static_cast<unsigned char>(pgm[i]), 0xff);
  const auto summary = json::parse(slurp(dir.path / "summary.json"));
  EXPECT_EQ(summary["crops"][0]["files"]["csv"], "prob_6x9.csv");
}

TEST(AnalyzeBias, OracleAgreesOnSmokeCase) {
  TempDir dir;
  const auto j = run_json("analyze-bias --image 32x32 --crop 20x13 --ratio 0.5 --oracle", dir.path / "s.json");
  for (const auto& c : j["crops"]) EXPECT_TRUE(c["oracle_match"].get<bool>());
}

TEST(AnalyzeBias, ExitCodes) {
  EXPECT_EQ(run("analyze-bias --image 10x10 --crop 11x4"), 2);
  EXPECT_EQ(run("analyze-bias --image tenxten --crop 1x1"), 2);
  EXPECT_EQ(run("analyze-bias --image 10x10"), 2);
  EXPECT_EQ(run("analyze-bias --crop 1x1"), 2);
  EXPECT_EQ(run("no-such-command"), 2);
  EXPECT_EQ(run("analyze-bias --image 10x10 --crop 5x5 --out /dev/null/x"), 3);
}

TEST(AnalyzeCategories, SyntheticCurveRises) {
  TempDir dir;
  ASSERT_EQ(run("analyze-categories --synthetic 90x120 --ratios 0.5,0.75,1 --out " + (dir.path / "c.csv").string()), 0);
  std::istringstream in(slurp(dir.path / "c.csv"));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "crop_ratio,fast_mass,slow_mass,ratio");
  std::vector<double> ratios;
  while (std::getline(in, line)) ratios.push_back(std::stod(line.substr(line.rfind(',') + 1)));
  ASSERT_EQ(ratios.size(), 3u);
  EXPECT_LT(ratios[0], ratios[1]);
  EXPECT_LT(ratios[1], ratios[2]);
  EXPECT_EQ(ratios[2], 1.0);
}

class Augment : public ::testing::Test {
 protected:
  void SetUp() override {
    cli::make_dataset(dir.path / "data");
    config = (dir.path / "protocol.yaml").string();
    const auto text = cli::protocol_yaml(dir.path / "data");
    write_file(config, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  }
  std::string args(const std::string& stage, const fs::path& out, int count, const std::string& extra = "") const {
    return "augment --config " + config + " --stage " + stage + " --count " + std::to_string(count) + " --out " +
           out.string() + " " + extra;
  }
  TempDir dir;
  std::string config;
};

TEST_F(Augment, IdentityStageReproducesInputs) {
  const auto out = dir.path / "out";
  ASSERT_EQ(run(args("identity", out, 2)), 0);
  const auto src = dir.path / "data";
  for (int k = 0; k < 2; ++k) {
    char prefix[16];
    std::snprintf(prefix, sizeof prefix, "%06d", k);
    const std::string p(prefix);
    char frame[32], next[32];
    std::snprintf(frame, sizeof frame, "frame_%04d", k + 1);
    std::snprintf(next, sizeof next, "frame_%04d", k + 2);
    EXPECT_EQ(read_png_file((out / (p + "_img1.png")).string()).samples,
              read_png_file((src / "images/seq" / (std::string(frame) + ".png")).string()).samples);
    EXPECT_EQ(read_png_file((out / (p + "_img2.png")).string()).samples,
              read_png_file((src / "images/seq" / (std::string(next) + ".png")).string()).samples);
    EXPECT_EQ(slurp(out / (p + "_flow.flo")), slurp(src / "flow/seq" / (std::string(frame) + ".flo")));
    EXPECT_EQ(read_png_file((out / (p + "_occ.png")).string()).samples,
              read_png_file((src / "occ/seq" / (std::string(frame) + ".png")).string()).samples);
    const auto side = json::parse(slurp(out / (p + ".json")));
    EXPECT_EQ(side["source"]["frame1"], "images/seq/" + std::string(frame) + ".png");
    EXPECT_EQ(side["crop"]["w"], 24);
  }
}

TEST_F(Augment, RerunIsByteIdentical) {
  ASSERT_EQ(run(args("random", dir.path / "a", 6, "--seed 42")), 0);
  ASSERT_EQ(run(args("random", dir.path / "b", 6, "--seed 42")), 0);
  ASSERT_EQ(run(args("random", dir.path / "c", 6, "--seed 43")), 0);
  EXPECT_TRUE(cli::same_files(dir.path / "a", dir.path / "b"));
  EXPECT_FALSE(cli::same_files(dir.path / "a", dir.path / "c"));
  ASSERT_EQ(run(args("random", dir.path / "d", 6), "", "SCOPEFLOW_SEED=42"), 0);
  EXPECT_TRUE(cli::same_files(dir.path / "a", dir.path / "d"));
}

TEST_F(Augment, SidecarParamsStayInRange) {
  const auto out = dir.path / "many";
  ASSERT_EQ(run(args("random", out, 1000, "--epoch 9 --seed 3")), 0);
  for (int k = 0; k < 1000; ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "%06d.json", k);
    const auto side = json::parse(slurp(out / name));
    const auto& p = side["params"];
    ASSERT_GE(p["zoom"].get<double>(), 0.8);
    ASSERT_LE(p["zoom"].get<double>(), 1.3 + 1e-12);
    ASSERT_LE(std::fabs(p["rotation"].get<double>()), 0.1);
    for (const auto& t : p["translate"]) ASSERT_LE(std::fabs(t.get<double>()), 10.0);
    for (const auto& g : p["color_gain"]) ASSERT_TRUE(g.get<double>() >= 0.8 && g.get<double>() <= 1.2);
    ASSERT_TRUE(p["gamma"].get<double>() >= 0.7 && p["gamma"].get<double>() <= 1.5);
    ASSERT_TRUE(p["noise_sigma"].get<double>() >= 0.0 && p["noise_sigma"].get<double>() <= 0.04);
    ASSERT_LE(std::fabs(p["relative"]["zoom"].get<double>() - 1.0), 0.05);
    const auto& c = side["crop"];
    ASSERT_TRUE(c["h"].get<int>() >= 8 && c["h"].get<int>() <= 16);
    ASSERT_TRUE(c["w"].get<int>() >= 12 && c["w"].get<int>() <= 24);
  }
}

TEST_F(Augment, BadInputsFail) {
  EXPECT_EQ(run(args("nope", dir.path / "x", 1)), 2);
  EXPECT_EQ(run(args("random", dir.path / "x", 1, "--epoch 10")), 2);
  EXPECT_EQ(run(args("random", dir.path / "x", 1, "--data " + (dir.path / "missing").string())), 3);
  // A corrupt flow file fails that sample only.
  write_file((dir.path / "data/flow/seq/frame_0002.flo").string(), Bytes{1, 2, 3, 4});
  EXPECT_EQ(run(args("random", dir.path / "y", 2)), 3);
  EXPECT_TRUE(fs::exists(dir.path / "y/000000.json"));
  EXPECT_FALSE(fs::exists(dir.path / "y/000001.json"));
}

TEST(Eval, MetricsAndErrors) {
  TempDir dir;
  FlowField gt(6, 4, 1.0f, 2.0f), pred(6, 4, 4.0f, 6.0f);
  write_flo_file((dir.path / "gt.flo").string(), gt);
  write_flo_file((dir.path / "pred.flo").string(), pred);
  write_flo_file((dir.path / "small.flo").string(), FlowField(5, 4));
  OcclusionMap po(6, 4), go(6, 4);
  for (int i = 0; i < 6; ++i) po.occluded[i] = go.occluded[i] = 1;
  po.occluded[6] = po.occluded[7] = 1;
  go.occluded[8] = go.occluded[9] = 1;
  write_png_file((dir.path / "po.png").string(), write_occlusion_png(po));
  write_png_file((dir.path / "go.png").string(), write_occlusion_png(go));
  const std::string d = dir.path.string() + "/";

  auto j = run_json("eval --pred " + d + "gt.flo --gt " + d + "gt.flo", dir.path / "a.json");
  EXPECT_EQ(j["epe"], 0.0);
  EXPECT_TRUE(j["f1"].is_null());
  j = run_json("eval --pred " + d + "pred.flo --gt " + d + "gt.flo --pred-occ " + d + "po.png --gt-occ " + d +
                   "go.png --error-map " + d + "err.pgm",
               dir.path / "b.json");
  EXPECT_EQ(j["epe"], 5.0);
  EXPECT_EQ(j["outlier_rate"], 1.0);
  EXPECT_EQ(j["f1"], 0.75);
  const auto pgm = slurp(dir.path / "err.pgm");
  EXPECT_EQ(static_cast<unsigned char>(pgm[pgm.size() - 2]), 5);  // 5 px * 256 = 0x0500
  EXPECT_EQ(run("eval --pred " + d + "small.flo --gt " + d + "gt.flo"), 2);
  EXPECT_EQ(run("eval --pred " + d + "missing.flo --gt " + d + "gt.flo"), 3);
}

TEST(Convert, FloToKittiAndBack) {
  TempDir dir;
  Rng rng(3);
  FlowField f(7, 5);
  for (std::size_t i = 0; i < f.size(); ++i) {
    f.u[i] = static_cast<float>(rng.uniform(-100, 100));
    f.v[i] = static_cast<float>(rng.uniform(-100, 100));
  }
  f.valid[3] = 0;
  const std::string d = dir.path.string() + "/";
  write_flo_file(d + "a.flo", f);
  ASSERT_EQ(run("convert --in " + d + "a.flo --out " + d + "b.png"), 0);
  ASSERT_EQ(run("convert --in " + d + "b.png --out " + d + "c.flo"), 0);
  const auto back = read_flo_file(d + "c.flo");
  for (std::size_t i = 0; i < f.size(); ++i) {
    ASSERT_EQ(back.valid[i], f.valid[i]);
    if (!f.valid[i]) continue;
    EXPECT_LE(std::fabs(back.u[i] - f.u[i]), 1.0 / 64.0);
    EXPECT_LE(std::fabs(back.v[i] - f.v[i]), 1.0 / 64.0);
  }
  write_flo_file(d + "big.flo", FlowField(2, 2, 600.0f, 0.0f));
  EXPECT_EQ(run("convert --in " + d + "big.flo --out " + d + "big.png"), 4);
  EXPECT_EQ(run("convert --in " + d + "a.flo --out " + d + "a.txt"), 3);
}

TEST(Config, ValidateAndPlan) {
  TempDir dir;
  const std::string presets = SCOPEFLOW_PRESETS;
  EXPECT_EQ(run("validate-config --config " + presets + "/kitti_refinetune.yaml"), 0);
  const std::string bad = "stages:\n  - name: a\n    dataset: {path: x}\n    epochs: -1\n";
  write_file((dir.path / "bad.yaml").string(), std::span(reinterpret_cast<const std::uint8_t*>(bad.data()), bad.size()));
  EXPECT_EQ(run("validate-config --config " + (dir.path / "bad.yaml").string()), 4);
  EXPECT_EQ(run("validate-config --config " + (dir.path / "missing.yaml").string()), 3);

  const auto canon = dir.path / "canon.yaml";
  ASSERT_EQ(run("validate-config --canonical --config " + presets + "/things.yaml", canon.string()), 0);
  EXPECT_EQ(parse_protocol(slurp(canon)), parse_protocol(slurp(presets + "/things.yaml")));

  const std::string plan = "show-plan --config " + presets + "/sintel_finetune.yaml --epoch 3 --seed 8 --expand";
  ASSERT_EQ(run(plan, (dir.path / "p1.json").string()), 0);
  ASSERT_EQ(run(plan, (dir.path / "p2.json").string()), 0);
  EXPECT_EQ(slurp(dir.path / "p1.json"), slurp(dir.path / "p2.json"));
  const auto j = json::parse(slurp(dir.path / "p1.json"));
  EXPECT_EQ(j["batches"].size(), 521u);
  EXPECT_EQ(j["batches"][0]["samples"][0]["params"]["noise_sigma"], 0.0);
  EXPECT_EQ(run("show-plan --config " + presets + "/sintel_finetune.yaml --stage other"), 2);
  EXPECT_EQ(run("show-plan --config " + presets + "/sintel_finetune.yaml --epoch 290"), 2);
}
