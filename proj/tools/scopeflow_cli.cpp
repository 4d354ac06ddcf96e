// scopeflow: crop-bias analysis, augmentation export, evaluation and protocol
// tooling.  Exit codes: 0 ok, 2 usage, 3 I/O, 4 validation.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "scopeflow/scopeflow.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace scopeflow;

namespace {

enum Exit : int { kOk = 0, kUsage = 2, kIo = 3, kValidation = 4 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io:
    case ErrorCode::BadMagic:
    case ErrorCode::Truncated:
    case ErrorCode::BadDims:
    case ErrorCode::BadBitDepth:
    case ErrorCode::BadChannelCount:
      return kIo;
    case ErrorCode::InvalidStrategy:
    case ErrorCode::OutOfBounds:
    case ErrorCode::CropTooLarge:
    case ErrorCode::DimMismatch:
    case ErrorCode::TooLarge:
    case ErrorCode::UnknownStage:
    case ErrorCode::EpochOutOfRange:
      return kUsage;
    default:
      return kValidation;
  }
}

std::pair<int, int> parse_size(const std::string& text) {
  const auto x = text.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument(text);
    std::size_t a = 0, b = 0;
    const int h = std::stoi(text.substr(0, x), &a);
    const int w = std::stoi(text.substr(x + 1), &b);
    if (a != x || b != text.size() - x - 1 || h <= 0 || w <= 0) throw std::invalid_argument(text);
    return {h, w};
  } catch (const std::logic_error&) {
    throw UsageError("expected HxW, got '" + text + "'");
  }
}

std::string size_str(int h, int w) { return std::to_string(h) + "x" + std::to_string(w); }

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& part : detail::split(text, ',')) {
    try {
      out.push_back(detail::parse_double(part));
    } catch (const Error&) {
      throw UsageError("not a number: '" + part + "'");
    }
  }
  return out;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::uint64_t fallback) {
  if (flag) return *flag;
  if (const char* env = std::getenv("SCOPEFLOW_SEED"); env && *env) {
    char* end = nullptr;
    const auto v = std::strtoull(env, &end, 10);
    if (*end != '\0') throw UsageError(std::string("SCOPEFLOW_SEED is not an integer: ") + env);
    return v;
  }
  return fallback;
}

void write_text(const fs::path& path, const std::string& text) {
  write_file(path.string(), std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
}

std::string fmt(double v) { return detail::shortest(v); }

std::string read_text(const std::string& path) {
  const auto bytes = read_file(path);
  return {bytes.begin(), bytes.end()};
}

// ---------------------------------------------------------------------------
// analyze-bias

struct BiasOptions {
  std::string image;
  std::vector<std::string> crops;
  std::vector<std::string> ratios;
  std::string out;
  bool oracle = false;
  bool png = false;
};

int analyze_bias(const BiasOptions& o) {
  const auto [H, W] = parse_size(o.image);
  std::vector<Geometry2D> geometries;
  for (const auto& c : o.crops) {
    const auto [h, w] = parse_size(c);
    geometries.push_back({H, W, h, w});
  }
  for (const auto& r : o.ratios) {
    const auto v = parse_list(r);
    if (v.size() != 1 && v.size() != 2) throw UsageError("--ratio takes r or rh,rw");
    if (!(detail::unit_ratio(v.front()) && detail::unit_ratio(v.back()))) throw UsageError("ratios must lie in (0, 1]");
    geometries.push_back(Geometry2D::from_ratio(H, W, v.front(), v.back()));
  }
  if (geometries.empty()) throw UsageError("give at least one --crop or --ratio");
  for (const auto& g : geometries) g.validate();

  const fs::path out(o.out);
  if (!o.out.empty()) ensure_dir(out);

  json crops = json::array();
  for (const auto& g : geometries) {
    const auto map = probability_map(g);
    const auto corner = map.at(0, 0);
    const auto green = green_region(g);
    const std::string name = "prob_" + size_str(g.h, g.w);
    json entry;
    entry["crop"] = size_str(g.h, g.w);
    entry["ratio"] = {static_cast<double>(g.h) / H, static_cast<double>(g.w) / W};
    entry["corner_prob"] = corner.to_double();
    entry["corner_prob_exact"] = corner.str();
    entry["center_prob"] = map.at(W / 2, H / 2).to_double();
    entry["mean_prob"] = static_cast<double>(g.h) * g.w / (static_cast<double>(H) * W);
    entry["green_region"] = size_str(green.h, green.w);

    if (o.oracle) {
      const double work = static_cast<double>(g.placements()) * H * W;
      if (work > 2e9) throw UsageError("--oracle is limited to small geometries (" + size_str(g.h, g.w) + ")");
      const bool match = probability_map_oracle(g) == map;
      entry["oracle_match"] = match;
      if (!match) throw Error(ErrorCode::ValidationError, "analytic map disagrees with enumeration for " + name);
    }

    if (!o.out.empty()) {
      std::vector<std::uint16_t> samples(map.pixel_count());
      std::string csv = "x,y,probability,exact\n";
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
          const auto& p = map.at(x, y);
          samples[static_cast<std::size_t>(y) * W + x] = static_cast<std::uint16_t>(std::lround(p.to_double() * 65535.0));
          csv += std::to_string(x) + "," + std::to_string(y) + "," + fmt(p.to_double()) + "," + p.str() + "\n";
        }
      write_file((out / (name + ".pgm")).string(), encode_pgm(W, H, 65535, samples));
      write_text(out / (name + ".csv"), csv);
      json files = {{"pgm", name + ".pgm"}, {"csv", name + ".csv"}};
      if (o.png) {
        write_png_file((out / (name + ".png")).string(), PngImage{W, H, 1, 16, samples});
        files["png"] = name + ".png";
      }
      entry["files"] = files;
    }
    crops.push_back(entry);
  }

  json summary;
  summary["image"] = size_str(H, W);
  summary["corner_prob"] = crops[0]["corner_prob"];
  summary["corner_prob_exact"] = crops[0]["corner_prob_exact"];
  summary["green_region"] = crops[0]["green_region"];
  summary["crops"] = crops;
  if (!o.out.empty()) write_json(out / "summary.json", summary);
  std::cout << summary.dump(2) << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// analyze-categories

struct CategoryOptions {
  std::vector<std::string> flows;
  std::string synthetic;
  int band = 10;
  std::string ratios = "0.5,0.6,0.7,0.8,0.9,1.0";
  double slow = kSlowMaxSpeed;
  double fast = kFastMinSpeed;
  std::string out;
};

FlowField border_fast_field(int H, int W, int band, double fast, double slow) {
  FlowField f(W, H);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const bool border = x < band || y < band || x >= W - band || y >= H - band;
      f.u[f.index(x, y)] = static_cast<float>(border ? fast + 10.0 : slow / 2.0);
    }
  return f;
}

int analyze_categories(const CategoryOptions& o) {
  std::vector<FlowField> flows;
  for (const auto& path : o.flows) flows.push_back(read_flow_file(path));
  if (!o.synthetic.empty()) {
    const auto [H, W] = parse_size(o.synthetic);
    flows.push_back(border_fast_field(H, W, o.band, o.fast, o.slow));
  }
  if (flows.empty()) throw UsageError("give --flow files or --synthetic HxW");
  if (!(o.slow <= o.fast)) throw UsageError("--slow must not exceed --fast");

  std::string csv = "crop_ratio,fast_mass,slow_mass,ratio\n";
  for (double r : parse_list(o.ratios)) {
    if (!detail::unit_ratio(r)) throw UsageError("ratios must lie in (0, 1]");
    CategoryTotals totals;
    for (const auto& f : flows)
      accumulate_categories(f, Geometry2D::from_ratio(f.height, f.width, r, r), totals, o.slow, o.fast);
    const auto c = category_ratio(totals);
    csv += fmt(r) + "," + fmt(c.fast_mass) + "," + fmt(c.slow_mass) + "," + fmt(c.ratio) + "\n";
  }
  if (o.out.empty()) {
    std::cout << csv;
  } else {
    write_text(o.out, csv);
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// augment

struct AugmentOptions {
  std::string config;
  std::string stage;
  int count = 1;
  int epoch = 0;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string data;
};

json params_json(const AugmentationParams& p) {
  json j;
  j["zoom"] = p.zoom;
  j["rotation"] = p.rotation;
  j["translate"] = {p.tx, p.ty};
  j["hflip"] = p.hflip;
  j["vflip"] = p.vflip;
  if (p.relative) {
    j["relative"] = {{"zoom", p.relative->zoom},
                     {"rotation", p.relative->rotation},
                     {"translate", {p.relative->tx, p.relative->ty}}};
  } else {
    j["relative"] = nullptr;
  }
  j["color_gain"] = p.color_gain;
  j["gamma"] = p.gamma;
  j["noise_sigma"] = p.noise_sigma;
  return j;
}

const StageConfig& pick_stage(const Protocol& p, const std::string& name) {
  return name.empty() ? p.stages.front() : p.stage(name);
}

int augment(const AugmentOptions& o) {
  const Protocol protocol = parse_protocol(read_text(o.config));
  const StageConfig& stage = pick_stage(protocol, o.stage);
  if (o.count < 0) throw UsageError("--count must be non-negative");
  if (o.epoch < 0 || o.epoch >= stage.epochs)
    throw Error(ErrorCode::EpochOutOfRange, "epoch outside the stage's " + std::to_string(stage.epochs) + " epochs");
  const std::uint64_t seed = resolve_seed(o.seed, protocol.seed);

  fs::path root = o.data.empty() ? fs::path(stage.dataset.path) : fs::path(o.data);
  if (o.data.empty() && root.is_relative()) root = fs::path(o.config).parent_path() / root;
  const auto entries = index_dataset(root, stage.dataset.layout);
  if (entries.empty()) throw Error(ErrorCode::Io, "no samples found under " + root.string());

  const fs::path out(o.out);
  ensure_dir(out);
  const double progress = stage_progress(o.epoch, stage.epochs);
  const Rng base(seed);
  int written = 0, failed = 0, worst = kOk;

  for (int k = 0; k < o.count; ++k) {
    const auto& entry = entries[static_cast<std::size_t>(k) % entries.size()];
    const Rng rng = base.split(static_cast<std::uint64_t>(k));
    try {
      const PngImage png1 = read_png_file(entry.frame1.string());
      const PngImage png2 = read_png_file(entry.frame2.string());
      Sample sample{image_from_png(png1), image_from_png(png2), read_flow_file(entry.flow.string()), std::nullopt};
      if (entry.occlusion) sample.occlusion = read_occlusion_png(read_png_file(entry.occlusion->string()));
      sample.validate();

      Rng param_rng = rng.split(0), noise_rng = rng.split(1), crop_rng = rng.split(2);
      const auto params = sample_params(stage.augmentation, progress, param_rng);
      const Sample augmented = augment_sample(sample, params, noise_rng);
      const auto [h, w] = choose_crop_size(stage.strategy, augmented.height(), augmented.width(), crop_rng);
      const CropSpec window = place_crop(h, w, augmented.height(), augmented.width(), crop_rng);
      const Sample result = apply_crop(augmented, window);

      char prefix[32];
      std::snprintf(prefix, sizeof prefix, "%06d", k);
      const std::string p(prefix);
      json outputs = {{"frame1", p + "_img1.png"}, {"frame2", p + "_img2.png"}, {"flow", p + "_flow.flo"}};
      write_png_file((out / (p + "_img1.png")).string(), png_from_image(result.frame1, png1.bit_depth));
      write_png_file((out / (p + "_img2.png")).string(), png_from_image(result.frame2, png2.bit_depth));
      write_flo_file((out / (p + "_flow.flo")).string(), result.flow);
      if (result.occlusion) {
        write_png_file((out / (p + "_occ.png")).string(), write_occlusion_png(*result.occlusion));
        outputs["occlusion"] = p + "_occ.png";
      }

      const auto rel = [&](const fs::path& path) { return path.lexically_relative(root).generic_string(); };
      json side;
      side["index"] = k;
      side["seed"] = seed;
      side["stage"] = stage.name;
      side["epoch"] = o.epoch;
      side["progress"] = progress;
      side["source"] = {{"frame1", rel(entry.frame1)}, {"frame2", rel(entry.frame2)}, {"flow", rel(entry.flow)}};
      if (entry.occlusion) side["source"]["occlusion"] = rel(*entry.occlusion);
      side["params"] = params_json(params);
      side["crop"] = {{"h", window.h}, {"w", window.w}, {"x0", window.x0}, {"y0", window.y0}};
      side["outputs"] = outputs;
      write_json(out / (p + ".json"), side);
      ++written;
    } catch (const Error& e) {
      std::cerr << "scopeflow: sample " << k << " (" << entry.frame1.string() << "): " << e.what() << "\n";
      ++failed;
      worst = std::max(worst, exit_code(e.code()));
    }
  }
  std::cout << json{{"written", written}, {"failed", failed}}.dump() << "\n";
  return failed ? worst : kOk;
}

// ---------------------------------------------------------------------------
// eval / convert

struct EvalOptions {
  std::string pred;
  std::string gt;
  std::string pred_occ;
  std::string gt_occ;
  double threshold = 3.0;
  std::string window;
  std::string error_map;
  double error_scale = 256.0;
  std::string out;
};

int eval(const EvalOptions& o) {
  if (o.pred_occ.empty() != o.gt_occ.empty()) throw UsageError("--pred-occ and --gt-occ go together");
  const FlowField pred = read_flow_file(o.pred);
  const FlowField gt = read_flow_file(o.gt);
  if (pred.width != gt.width || pred.height != gt.height)
    throw Error(ErrorCode::DimMismatch, "prediction is " + size_str(pred.height, pred.width) + ", ground truth is " +
                                            size_str(gt.height, gt.width));
  std::optional<CropSpec> window;
  if (!o.window.empty()) {
    const auto v = parse_list(o.window);
    if (v.size() != 4) throw UsageError("--window takes h,w,x0,y0");
    window = CropSpec{static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2]), static_cast<int>(v[3])};
  }

  json result;
  result["epe"] = epe(pred, gt, window);
  result["outlier_rate"] = outlier_rate(pred, gt, o.threshold, window);
  result["threshold"] = o.threshold;
  if (!o.gt_occ.empty()) {
    const auto po = read_occlusion_png(read_png_file(o.pred_occ));
    const auto go = read_occlusion_png(read_png_file(o.gt_occ));
    const auto f1 = occlusion_f1(po, go, window);
    result["f1"] = f1.f1;
    result["occlusion"] = {{"tp", f1.tp}, {"fp", f1.fp}, {"fn", f1.fn}, {"no_positives", f1.no_positives}};
  } else {
    result["f1"] = nullptr;
  }

  if (!o.error_map.empty()) {
    if (!(o.error_scale > 0)) throw UsageError("--error-scale must be positive");
    const auto err = endpoint_error_map(pred, gt);
    std::vector<std::uint16_t> samples(err.pixel_count());
    for (std::size_t i = 0; i < samples.size(); ++i)
      samples[i] = static_cast<std::uint16_t>(std::min(65535.0, std::round(err.data()[i] * o.error_scale)));
    write_file(o.error_map, encode_pgm(gt.width, gt.height, 65535, samples));
  }
  if (!o.out.empty()) write_json(o.out, result);
  std::cout << result.dump(2) << "\n";
  return kOk;
}

int convert(const std::string& in, const std::string& out) {
  const FlowField flow = read_flow_file(in);
  write_flow_file(out, flow);
  std::size_t valid = 0;
  for (auto v : flow.valid) valid += v;
  std::cout << json{{"input", in}, {"output", out}, {"size", size_str(flow.height, flow.width)}, {"valid_pixels", valid}}.dump()
            << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// validate-config / show-plan

int validate_config(const std::string& path, bool canonical) {
  const Protocol p = parse_protocol(read_text(path));
  if (canonical) {
    std::cout << serialize_protocol(p);
    return kOk;
  }
  std::cout << "valid: " << p.stages.size() << (p.stages.size() == 1 ? " stage" : " stages");
  for (const auto& s : p.stages) std::cout << " " << s.name;
  std::cout << "\n";
  return kOk;
}

struct PlanOptions {
  std::string config;
  std::string stage;
  int epoch = 0;
  std::optional<std::uint64_t> seed;
  bool expand = false;
  std::string out;
};

int show_plan(const PlanOptions& o) {
  const Protocol protocol = parse_protocol(read_text(o.config));
  const StageConfig& stage = pick_stage(protocol, o.stage);
  const std::uint64_t seed = resolve_seed(o.seed, protocol.seed);
  const BatchPlan plan = emit_batch_plan(protocol, stage.name, o.epoch, Rng(seed));

  json j;
  j["stage"] = plan.stage;
  j["epoch"] = plan.epoch;
  j["seed"] = seed;
  j["progress"] = plan.progress;
  j["zoom_max"] = plan.zoom_max;
  j["image_size"] = {plan.image_h, plan.image_w};
  j["strategy"] = format_strategy(stage.strategy);
  j["regularization"] = {{"noise", stage.augmentation.use_noise}, {"weight_decay", stage.use_weight_decay}};
  json batches = json::array();
  for (const auto& d : plan.batches) {
    json b;
    b["index"] = d.index;
    b["crop"] = {d.crop_h, d.crop_w};
    json samples = json::array();
    for (std::size_t k = 0; k < d.sample_indices.size(); ++k) {
      json s{{"sample", d.sample_indices[k]},
             {"placement_seed", d.placement_seeds[k]},
             {"augmentation_seed", d.augmentation_seeds[k]}};
      if (o.expand) s["params"] = params_json(directive_params(stage, plan.progress, d.augmentation_seeds[k]));
      samples.push_back(s);
    }
    b["samples"] = samples;
    batches.push_back(b);
  }
  j["batches"] = batches;
  const std::string text = j.dump(2) + "\n";
  if (o.out.empty()) {
    std::cout << text;
  } else {
    write_text(o.out, text);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scopeflow: crop-sampling analysis and flow-correct augmentation tooling"};
  app.require_subcommand(1);

  BiasOptions bias;
  auto* bias_cmd = app.add_subcommand("analyze-bias", "Per-pixel crop sampling probability maps");
  bias_cmd->add_option("--image", bias.image, "Image size HxW")->required();
  bias_cmd->add_option("--crop", bias.crops, "Crop size hxw (repeatable)");
  bias_cmd->add_option("--ratio", bias.ratios, "Crop ratio r or rh,rw (repeatable)");
  bias_cmd->add_option("--out", bias.out, "Directory for PGM/CSV maps and summary.json");
  bias_cmd->add_flag("--oracle", bias.oracle, "Cross-check against placement enumeration");
  bias_cmd->add_flag("--png", bias.png, "Also write 16-bit PNG maps");

  CategoryOptions cat;
  auto* cat_cmd = app.add_subcommand("analyze-categories", "Fast/slow sampling ratio versus crop ratio");
  cat_cmd->add_option("--flow", cat.flows, "Flow file (.flo or KITTI .png), repeatable");
  cat_cmd->add_option("--synthetic", cat.synthetic, "Use a synthetic HxW field with fast motion near the border");
  cat_cmd->add_option("--band", cat.band, "Border width of the synthetic field")->check(CLI::PositiveNumber);
  cat_cmd->add_option("--ratios", cat.ratios, "Comma-separated crop ratios");
  cat_cmd->add_option("--slow", cat.slow, "Slow category: speed below this");
  cat_cmd->add_option("--fast", cat.fast, "Fast category: speed above this");
  cat_cmd->add_option("--out", cat.out, "CSV output path (default stdout)");

  AugmentOptions aug;
  auto* aug_cmd = app.add_subcommand("augment", "Write augmented, cropped samples with parameter sidecars");
  aug_cmd->add_option("--config", aug.config, "Protocol YAML")->required();
  aug_cmd->add_option("--stage", aug.stage, "Stage name (default: first)");
  aug_cmd->add_option("--count", aug.count, "Number of samples");
  aug_cmd->add_option("--epoch", aug.epoch, "Epoch for the zoom schedule");
  aug_cmd->add_option("--seed", aug.seed, "Seed (falls back to SCOPEFLOW_SEED, then the protocol seed)");
  aug_cmd->add_option("--out", aug.out, "Output directory")->required();
  aug_cmd->add_option("--data", aug.data, "Dataset root overriding dataset.path");

  EvalOptions ev;
  auto* eval_cmd = app.add_subcommand("eval", "EPE, outlier rate and occlusion F1");
  eval_cmd->add_option("--pred", ev.pred, "Predicted flow")->required();
  eval_cmd->add_option("--gt", ev.gt, "Ground-truth flow")->required();
  eval_cmd->add_option("--pred-occ", ev.pred_occ, "Predicted occlusion PNG");
  eval_cmd->add_option("--gt-occ", ev.gt_occ, "Ground-truth occlusion PNG");
  eval_cmd->add_option("--threshold", ev.threshold, "Outlier threshold in pixels");
  eval_cmd->add_option("--window", ev.window, "Restrict metrics to h,w,x0,y0");
  eval_cmd->add_option("--error-map", ev.error_map, "Write per-pixel EPE as 16-bit PGM");
  eval_cmd->add_option("--error-scale", ev.error_scale, "PGM units per pixel of EPE");
  eval_cmd->add_option("--out", ev.out, "Also write the JSON here");

  std::string conv_in, conv_out;
  auto* conv_cmd = app.add_subcommand("convert", "Convert between .flo and KITTI 16-bit PNG");
  conv_cmd->add_option("--in", conv_in, "Input flow")->required();
  conv_cmd->add_option("--out", conv_out, "Output flow")->required();

  std::string cfg_path;
  bool canonical = false;
  auto* val_cmd = app.add_subcommand("validate-config", "Parse and validate a protocol YAML");
  val_cmd->add_option("--config", cfg_path, "Protocol YAML")->required();
  val_cmd->add_flag("--canonical", canonical, "Print the canonical serialization");

  PlanOptions plan;
  auto* plan_cmd = app.add_subcommand("show-plan", "Emit the batch plan of one epoch as JSON");
  plan_cmd->add_option("--config", plan.config, "Protocol YAML")->required();
  plan_cmd->add_option("--stage", plan.stage, "Stage name (default: first)");
  plan_cmd->add_option("--epoch", plan.epoch, "Epoch index");
  plan_cmd->add_option("--seed", plan.seed, "Seed (falls back to SCOPEFLOW_SEED, then the protocol seed)");
  plan_cmd->add_flag("--expand", plan.expand, "Include the augmentation parameters of every sample");
  plan_cmd->add_option("--out", plan.out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*bias_cmd) return analyze_bias(bias);
    if (*cat_cmd) return analyze_categories(cat);
    if (*aug_cmd) return augment(aug);
    if (*eval_cmd) return eval(ev);
    if (*conv_cmd) return convert(conv_in, conv_out);
    if (*val_cmd) return validate_config(cfg_path, canonical);
    if (*plan_cmd) return show_plan(plan);
  } catch (const UsageError& e) {
    std::cerr << "scopeflow: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "scopeflow: " << e.what() << "\n";
    return kValidation;
  } catch (const Error& e) {
    std::cerr << "scopeflow: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "scopeflow: " << e.what() << "\n";
    return kIo;
  }
  return kUsage;
}
