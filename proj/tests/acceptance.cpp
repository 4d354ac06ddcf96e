// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "cli_fixture.hpp"
#include "scopeflow/scopeflow.hpp"
#include "synthetic.hpp"
#include "temp_dir.hpp"

using namespace scopeflow;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v, const char* f = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 1. 1-D probability against enumeration, W <= 32.
Outcome prob_1d_exact() {
  const auto t0 = Clock::now();
  long cases = 0, bad = 0;
  for (int W = 1; W <= 32; ++W)
    for (int w = 1; w <= W; ++w)
      for (int x = 0; x < W; ++x, ++cases) bad += !(prob_1d(x, {W, w}) == exhaustive_oracle_1d(x, {W, w}));
  const double t = seconds_since(t0);
  return {bad == 0 && t < 1.0, std::to_string(cases) + " cases, " + std::to_string(bad) + " mismatches, " + num(t) + " s"};
}

// 2. 2-D probability against enumeration, H, W <= 16, every crop size.
Outcome prob_2d_exact() {
  const auto t0 = Clock::now();
  long cases = 0, bad = 0;
  for (int H = 1; H <= 16; ++H)
    for (int W = 1; W <= 16; ++W)
      for (int h = 1; h <= H; ++h)
        for (int w = 1; w <= W; ++w) {
          const Geometry2D g{H, W, h, w};
          for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x, ++cases) bad += !(prob_2d(x, y, g) == exhaustive_oracle_2d(x, y, g));
        }
  const double t = seconds_since(t0);
  return {bad == 0 && t < 30.0, std::to_string(cases) + " pixel cases, " + std::to_string(bad) + " mismatches, " + num(t) + " s"};
}

// 3. Worked example on a 436x1024 frame with a 384x768 crop.
Outcome worked_example() {
  const Geometry2D g{436, 1024, 384, 768};
  const Rational corner = prob_2d(0, 0, g);
  const RegionSize green = green_region(g);
  const bool ok = corner == Rational(1, 13621) && green == RegionSize{332, 512} &&
                  std::fabs(corner.to_double() - 7.342e-5) < 5e-9;
  return {ok, "corner " + corner.str() + " = " + num(corner.to_double(), "%.4e") + ", always-sampled region " +
                  std::to_string(green.h) + "x" + std::to_string(green.w)};
}

// 4. Sum of coverage probabilities equals crop area.
Outcome coverage_mass() {
  Rng rng(404);
  int bad = 0;
  for (int i = 0; i < 100; ++i) {
    const int H = static_cast<int>(rng.uniform_int(1, 300));
    const int W = static_cast<int>(rng.uniform_int(1, 300));
    const Geometry2D g{H, W, static_cast<int>(rng.uniform_int(1, H)), static_cast<int>(rng.uniform_int(1, W))};
    const auto map = probability_map(g);
    Rational sum(0);
    for (const auto& p : map.data()) sum = sum + p;
    bad += !(sum == Rational(static_cast<std::int64_t>(g.h) * g.w));
  }
  return {bad == 0, "100 random geometries, " + std::to_string(bad) + " mismatches"};
}

// 5. Monte-Carlo placement frequencies and ratio-range size draws.
Outcome monte_carlo() {
  const Geometry2D g{16, 16, 11, 13};
  const auto expected = probability_map(g);
  Rng rng(5005);
  const int n = 1'000'000;
  std::vector<long> hits(256, 0);
  for (int i = 0; i < n; ++i) {
    const auto c = place_crop(g.h, g.w, g.H, g.W, rng);
    for (int y = c.y0; y < c.y0 + c.h; ++y)
      for (int x = c.x0; x < c.x0 + c.w; ++x) ++hits[y * 16 + x];
  }
  double worst_cov = 0.0;
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) {
      const double p = expected.at(x, y).to_double();
      const double sigma = std::sqrt(n * p * (1 - p));
      const double dev = std::fabs(hits[y * 16 + x] - n * p);
      worst_cov = std::max(worst_cov, sigma > 0 ? dev / sigma : (dev > 0 ? 1e9 : 0.0));
    }

  const int lo = scaled_extent(0.95, 1024), hi = 1024, bins = hi - lo + 1;
  const int draws = 520'000;
  std::vector<long> counts(bins, 0);
  bool in_range = true;
  Rng srng(5006);
  for (int i = 0; i < draws; ++i) {
    const int w = choose_crop_size(RatioRange{0.95, 1.0}, 436, 1024, srng).second;
    if (w < lo || w > hi) {
      in_range = false;
      continue;
    }
    ++counts[w - lo];
  }
  const double p = 1.0 / bins;
  const double sigma = std::sqrt(draws * p * (1 - p));
  double worst_bin = 0.0;
  for (long c : counts) worst_bin = std::max(worst_bin, std::fabs(c - draws * p) / sigma);
  const bool ok = worst_cov <= 4.0 && in_range && lo == 973 && worst_bin <= 3.0;
  return {ok, "coverage max |z| " + num(worst_cov, "%.2f") + " (<= 4); crop widths [" + std::to_string(lo) + ", " +
                  std::to_string(hi) + "] max bin |z| " + num(worst_bin, "%.2f") + " (<= 3)"};
}

// 6. Fast pixels on a 10-px border are under-sampled until the crop is full.
Outcome category_trend() {
  const int H = 120, W = 160, band = 10;
  FlowField f(W, H);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const bool border = x < band || y < band || x >= W - band || y >= H - band;
      f.u[f.index(x, y)] = border ? 45.0f : 2.0f;
    }
  std::vector<double> ratios;
  std::string curve;
  for (int step = 10; step <= 20; ++step) {
    const double r = step / 20.0;
    ratios.push_back(category_sampling_ratio(f, Geometry2D::from_ratio(H, W, r, r)).ratio);
    curve += (curve.empty() ? "" : " ") + num(ratios.back(), "%.3f");
  }
  bool increasing = true;
  for (std::size_t i = 1; i < ratios.size(); ++i) increasing = increasing && ratios[i] > ratios[i - 1];
  const bool ok = ratios.front() < 1.0 && increasing && ratios.back() == 1.0;
  return {ok, "ratio at crop ratio 0.50..1.00: " + curve};
}

// 7. Augmented flow still links the augmented frames.
Outcome augmentation_oracle() {
  const auto sample = synthetic::warped_pair(64, 48);
  AugmentationConfig cfg;
  cfg.use_noise = false;
  cfg.geometric.relative = {true, 0.05, 0.03, 2.0};
  Rng rng(7007);
  double worst = 0.0, total = 0.0;
  std::size_t fewest = SIZE_MAX;
  for (int i = 0; i < 1000; ++i) {
    const auto params = sample_params(cfg, rng.uniform01(), rng);
    Rng noise = rng.split(static_cast<std::uint64_t>(i));
    const auto rec = synthetic::reconstruction_error(augment_sample(sample, params, noise), params);
    worst = std::max(worst, rec.mean_abs_error);
    total += rec.mean_abs_error;
    fewest = std::min(fewest, rec.pixels);
  }
  return {worst <= 0.02 && fewest > 0, "1000 draws, worst MAE " + num(worst, "%.4f") + ", mean " +
                                           num(total / 1000, "%.4f") + ", fewest compared pixels " +
                                           std::to_string(fewest)};
}

// 8. Warp and correlation kernels.
Outcome kernels() {
  Rng rng(8008);
  ImageRaster img(12, 9, 3);
  for (auto& v : img.data()) v = static_cast<float>(rng.uniform01());
  const bool identity = backward_warp(img, FlowField(12, 9)).warped == img;

  bool shift = true;
  const auto shifted = backward_warp(img, FlowField(12, 9, -3.0f, 2.0f));
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 12; ++x)
      for (int c = 0; c < 3; ++c) {
        const bool inside = x - 3 >= 0 && y + 2 < 9;
        shift = shift && shifted.warped.at(x, y, c) == (inside ? img.at(x - 3, y + 2, c) : 0.0f) &&
                shifted.out_of_bounds[y * 12 + x] == !inside;
      }

  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    FeatureMap a(5, 5, 3), b(5, 5, 3);
    for (auto& v : a.data()) v = rng.uniform(-1, 1);
    for (auto& v : b.data()) v = rng.uniform(-1, 1);
    const int d = 2;
    const auto cv = cost_volume(a, b, d);
    for (int y = 0; y < 5; ++y)
      for (int x = 0; x < 5; ++x)
        for (int dy = -d; dy <= d; ++dy)
          for (int dx = -d; dx <= d; ++dx) {
            double ref = 0.0;
            if (x + dx >= 0 && x + dx < 5 && y + dy >= 0 && y + dy < 5)
              for (int n = 0; n < 3; ++n) ref += a.at(x, y, n) * b.at(x + dx, y + dy, n);
            worst = std::max(worst, std::fabs(cv.at(x, y, dx, dy) - ref / 3.0));
          }
  }
  return {identity && shift && worst <= 1e-12, std::string("zero-flow identity ") + (identity ? "exact" : "BROKEN") +
                                                   ", integer shift " + (shift ? "exact" : "BROKEN") +
                                                   ", cost volume max diff " + num(worst, "%.2e")};
}

// 9. File format round trips.
Outcome formats() {
  Rng rng(9009);
  int flo_bad = 0;
  for (int i = 0; i < 1000; ++i) {
    FlowField f(static_cast<int>(rng.uniform_int(1, 16)), static_cast<int>(rng.uniform_int(1, 16)));
    for (std::size_t k = 0; k < f.size(); ++k) {
      f.u[k] = static_cast<float>(rng.uniform(-1000, 1000));
      f.v[k] = static_cast<float>(rng.uniform(-1000, 1000));
      f.valid[k] = !rng.bernoulli(0.1);
    }
    const auto bytes = write_flo(f);
    flo_bad += write_flo(read_flo(bytes)) != bytes;
  }
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    FlowField f(10, 8);
    for (std::size_t k = 0; k < f.size(); ++k) {
      f.u[k] = static_cast<float>(rng.uniform(-511, 511));
      f.v[k] = static_cast<float>(rng.uniform(-511, 511));
    }
    const auto back = read_kitti_png(write_kitti_png(f));
    for (std::size_t k = 0; k < f.size(); ++k)
      worst = std::max({worst, std::fabs(static_cast<double>(back.u[k]) - f.u[k]),
                        std::fabs(static_cast<double>(back.v[k]) - f.v[k])});
  }
  return {flo_bad == 0 && worst <= 1.0 / 128.0 + 1e-6,
          ".flo byte mismatches " + std::to_string(flo_bad) + "/1000, KITTI max error " + num(worst, "%.5f") +
              " px (<= 1/128)"};
}

// 10. Metric identities.
Outcome metrics() {
  Rng rng(1010);
  FlowField gt(17, 11);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    gt.u[i] = static_cast<float>(rng.uniform_int(-100, 100));
    gt.v[i] = static_cast<float>(rng.uniform_int(-100, 100));
  }
  FlowField pred = gt;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    pred.u[i] += 3.0f;
    pred.v[i] += 4.0f;
  }
  const double e = epe(pred, gt);

  OcclusionMap po(4, 4), go(4, 4);
  for (int i = 0; i < 6; ++i) po.occluded[i] = go.occluded[i] = 1;
  po.occluded[6] = po.occluded[7] = 1;
  go.occluded[8] = go.occluded[9] = 1;
  const double f1 = occlusion_f1(po, go).f1;

  int bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    FlowField p(9, 7), g(9, 7);
    for (std::size_t i = 0; i < g.size(); ++i) {
      p.u[i] = static_cast<float>(rng.uniform(-5, 5));
      p.v[i] = static_cast<float>(rng.uniform(-5, 5));
      g.u[i] = static_cast<float>(rng.uniform(-1, 1));
      g.valid[i] = i == 0 || rng.bernoulli(0.8);
    }
    long out = 0, valid = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!g.valid[i]) continue;
      ++valid;
      const double du = static_cast<double>(p.u[i]) - g.u[i], dv = static_cast<double>(p.v[i]) - g.v[i];
      out += du * du + dv * dv > 9.0;
    }
    bad += outlier_rate(p, g, 3.0) != static_cast<double>(out) / valid;
  }
  return {e == 5.0 && f1 == 0.75 && bad == 0, "epe " + num(e, "%.17g") + ", F1 " + num(f1, "%.17g") +
                                                  ", outlier-rate mismatches " + std::to_string(bad) + "/100"};
}

// 11. Every subcommand is reproducible.
Outcome cli_determinism() {
  TempDir dir;
  const fs::path data = dir.path / "data";
  cli::make_dataset(data, 4);
  const auto config = (dir.path / "protocol.yaml").string();
  const auto text = cli::protocol_yaml(data);
  write_file(config, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  FlowField a(24, 16, 1.0f, -2.0f);
  write_flo_file((dir.path / "a.flo").string(), a);
  const std::string flo = (data / "flow/seq/frame_0001.flo").string();
  const std::string occ = (data / "occ/seq/frame_0001.png").string();
  const std::string presets = SCOPEFLOW_PRESETS;

  // '@' in args stands for the per-run output location.
  struct Case {
    std::string name;
    std::string args;
    bool dir = false;      // output is a directory
    bool capture = false;  // output is stdout
  };
  const std::vector<Case> cases = {
      {"analyze-bias", "analyze-bias --image 40x56 --crop 30x41 --ratio 0.5 --ratio 0.7,0.9 --png --out @", true},
      {"analyze-categories", "analyze-categories --flow " + flo + " --synthetic 60x80 --out @", false},
      {"augment", "augment --config " + config + " --stage random --count 8 --seed 11 --out @", true},
      {"eval", "eval --pred " + (dir.path / "a.flo").string() + " --gt " + flo + " --pred-occ " + occ + " --gt-occ " +
                   occ + " --error-map @.pgm --out @",
       false},
      {"convert", "convert --in " + flo + " --out @.png", false},
      {"validate-config", "validate-config --canonical --config " + presets + "/things.yaml", false, true},
      {"show-plan", "show-plan --config " + presets + "/kitti_refinetune.yaml --stage kitti_narrow --epoch 7 --seed 11 --expand --out @", false},
  };

  std::vector<std::string> failed;
  for (const auto& c : cases) {
    std::vector<fs::path> outs;
    bool ran = true;
    for (int run = 0; run < 2; ++run) {
      const fs::path out = dir.path / (c.name + "_" + std::to_string(run));
      std::string args = c.args;
      for (auto pos = args.find('@'); pos != std::string::npos; pos = args.find('@'))
        args.replace(pos, 1, out.string());
      ran = ran && cli::run(args, c.capture ? out.string() : "") == 0;
      outs.push_back(out);
    }
    bool same = ran;
    if (same && c.dir) {
      same = cli::same_files(outs[0], outs[1]);
    } else if (same) {
      for (const std::string suffix : {"", ".pgm", ".png"}) {
        const fs::path p0 = outs[0].string() + suffix, p1 = outs[1].string() + suffix;
        if (fs::exists(p0) || fs::exists(p1))
          same = same && fs::exists(p0) && fs::exists(p1) && cli::slurp(p0) == cli::slurp(p1);
      }
    }
    if (!same) failed.push_back(c.name);
  }
  std::string detail = std::to_string(cases.size() - failed.size()) + "/" + std::to_string(cases.size()) +
                       " subcommands byte-identical on rerun";
  for (const auto& f : failed) detail += " [" + f + " differs]";
  return {failed.empty(), detail};
}

// 12. Shipped presets parse, validate and encode their configurations.
Outcome presets() {
  const std::string dir = SCOPEFLOW_PRESETS;
  const auto load = [&](const std::string& name) {
    const auto bytes = read_file(dir + "/" + name);
    return parse_protocol(std::string(bytes.begin(), bytes.end()));
  };
  std::vector<std::string> problems;
  for (const char* name : {"chairs_pretrain.yaml", "things.yaml", "kitti_finetune.yaml", "sintel_finetune.yaml",
                           "kitti_refinetune.yaml", "identity.yaml"}) {
    try {
      load(name);
    } catch (const Error& e) {
      problems.push_back(std::string(name) + ": " + e.what());
    }
  }
  if (!problems.empty()) return {false, problems.front()};

  const auto sintel = load("sintel_finetune.yaml").stages.front();
  if (!(sintel.strategy == ScopeStrategy(RatioRange{0.95, 1.0}))) problems.push_back("sintel strategy");
  if (!(regularization_flags(sintel) == RegularizationFlags{false, false})) problems.push_back("sintel flags");
  if (!(sintel.augmentation.zoom == ZoomSchedule{0.8, 1.5, 1.3})) problems.push_back("sintel zoom");
  const auto chairs = load("chairs_pretrain.yaml").stages.front();
  if (!(regularization_flags(chairs) == RegularizationFlags{true, true})) problems.push_back("chairs flags");
  if (chairs.augmentation.zoom.min != 0.8 || chairs.augmentation.zoom.max_start != 1.5) problems.push_back("chairs zoom");
  const auto things = load("things.yaml");
  if (!(things.stages.back().strategy == ScopeStrategy(MaxValid{})) || things.stages.back().resume_from != "chairs")
    problems.push_back("things stage");
  const auto kitti = load("kitti_finetune.yaml").stages.front();
  if (!(kitti.strategy == ScopeStrategy(RatioRange{0.95, 1.0}))) problems.push_back("kitti strategy");
  const auto re = load("kitti_refinetune.yaml");
  if (re.stages.size() != 2 || !(re.stages[0].strategy == ScopeStrategy(RatioRange{0.9, 1.0})) ||
      !(re.stages[1].strategy == ScopeStrategy(RatioRange{0.95, 1.0})) || re.stages[1].resume_from != re.stages[0].name)
    problems.push_back("kitti refinetune stages");

  std::string detail = "6 presets valid; accuracy figures from full training are not reproduced here";
  for (const auto& p : problems) detail += " [" + p + "]";
  return {problems.empty(), detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"AC1 1-D sampling probability is exact", prob_1d_exact},
      {"AC2 2-D sampling probability is exact", prob_2d_exact},
      {"AC3 436x1024 / 384x768 worked example", worked_example},
      {"AC4 coverage mass equals crop area", coverage_mass},
      {"AC5 Monte-Carlo placement and crop-size draws", monte_carlo},
      {"AC6 border-fast sampling ratio trend", category_trend},
      {"AC7 augmented flow reconstructs augmented frames", augmentation_oracle},
      {"AC8 warp and cost-volume kernels", kernels},
      {"AC9 flow file round trips", formats},
      {"AC10 metric identities", metrics},
      {"AC11 CLI determinism", cli_determinism},
      {"AC12 presets parse and validate", presets},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s  %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
