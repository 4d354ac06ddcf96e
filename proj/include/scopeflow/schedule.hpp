#pragma once

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "scopeflow/augmentation.hpp"
#include "scopeflow/dataset.hpp"
#include "scopeflow/error.hpp"
#include "scopeflow/rng.hpp"
#include "scopeflow/scoping.hpp"

namespace scopeflow {

enum class DatasetFormat { Flo, KittiPng };

inline std::string to_string(DatasetFormat f) { return f == DatasetFormat::Flo ? "flo" : "kitti_png"; }

struct DatasetSpec {
  std::string path;
  DatasetFormat format = DatasetFormat::Flo;
  std::optional<std::pair<int, int>> image_size;  // (H, W): smallest frame in the set
  std::optional<int> samples;                     // number of frame pairs
  DatasetLayout layout;

  friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

/// Learning-rate schedule name.  Carried for an external trainer; nothing
/// here interprets it numerically.
struct LrSchedule {
  std::string name = "S_short";  // S_short | S_short_half | S_ft | custom
  std::vector<int> milestones;   // custom only

  friend bool operator==(const LrSchedule&, const LrSchedule&) = default;
};

struct StageConfig {
  std::string name;
  DatasetSpec dataset;
  LrSchedule lr_schedule;
  int epochs = 1;
  int batch_size = 8;
  ScopeStrategy strategy = MaxValid{};
  AugmentationConfig augmentation;  // zoom schedule, ranges, noise flag
  bool use_weight_decay = true;
  std::optional<std::string> resume_from;

  friend bool operator==(const StageConfig&, const StageConfig&) = default;
};

struct Protocol {
  std::uint64_t seed = 0;
  std::vector<StageConfig> stages;

  std::size_t stage_index(const std::string& name) const {
    for (std::size_t i = 0; i < stages.size(); ++i)
      if (stages[i].name == name) return i;
    throw Error(ErrorCode::UnknownStage, "no stage named '" + name + "'");
  }
  const StageConfig& stage(const std::string& name) const { return stages[stage_index(name)]; }

  friend bool operator==(const Protocol&, const Protocol&) = default;
};

struct RegularizationFlags {
  bool use_noise = true;
  bool use_weight_decay = true;
  friend bool operator==(const RegularizationFlags&, const RegularizationFlags&) = default;
};

/// use_weight_decay is exported metadata for the trainer; use_noise also
/// forces sampled noise_sigma to zero.
inline RegularizationFlags regularization_flags(const StageConfig& stage) {
  return {stage.augmentation.use_noise, stage.use_weight_decay};
}

// ---------------------------------------------------------------------------
// Validation

inline void validate_stage(const StageConfig& s, const std::string& where) {
  const auto fail = [&](const std::string& field, const std::string& msg) {
    throw ConfigError(ErrorCode::ValidationError, where + "." + field, 0, msg);
  };
  if (s.name.empty()) fail("name", "stage name must not be empty");
  if (s.dataset.path.empty()) fail("dataset.path", "dataset path must not be empty");
  if (s.epochs <= 0) fail("epochs", "must be > 0");
  if (s.batch_size <= 0) fail("batch_size", "must be > 0");
  if (s.dataset.image_size && (s.dataset.image_size->first <= 0 || s.dataset.image_size->second <= 0))
    fail("dataset.image_size", "must be positive");
  if (s.dataset.samples && *s.dataset.samples <= 0) fail("dataset.samples", "must be > 0");
  static const std::set<std::string> lr_names{"S_short", "S_short_half", "S_ft", "S_long", "custom"};
  if (!lr_names.contains(s.lr_schedule.name)) fail("lr_schedule", "unknown schedule '" + s.lr_schedule.name + "'");
  if (s.lr_schedule.name == "custom" && s.lr_schedule.milestones.empty())
    fail("lr_schedule", "custom schedule needs at least one milestone");
  try {
    validate_strategy(s.strategy, s.dataset.image_size);
  } catch (const Error& e) {
    fail("crop", e.what());
  }
  try {
    s.augmentation.validate();
  } catch (const Error& e) {
    fail("augmentation", e.what());
  }
}

inline void validate_protocol(const Protocol& p) {
  if (p.stages.empty()) throw ConfigError(ErrorCode::ValidationError, "stages", 0, "protocol has no stages");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < p.stages.size(); ++i) {
    const auto& s = p.stages[i];
    const std::string where = "stages[" + std::to_string(i) + "]";
    validate_stage(s, where);
    if (s.resume_from && !seen.contains(*s.resume_from))
      throw ConfigError(ErrorCode::ValidationError, where + ".resume_from", 0,
                        "'" + *s.resume_from + "' is not an earlier stage");
    if (!seen.insert(s.name).second)
      throw ConfigError(ErrorCode::ValidationError, where + ".name", 0, "duplicate stage name '" + s.name + "'");
  }
}

// ---------------------------------------------------------------------------
// YAML

namespace detail {

inline int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

[[noreturn]] inline void schema_error(const YAML::Node& n, const std::string& field, const std::string& msg) {
  throw ConfigError(ErrorCode::SchemaError, field, line_of(n), msg);
}

inline void require_map(const YAML::Node& n, const std::string& field) {
  if (!n.IsMap()) schema_error(n, field, "expected a mapping");
}

inline void check_keys(const YAML::Node& n, const std::string& field, std::initializer_list<const char*> allowed) {
  require_map(n, field);
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      schema_error(kv.first, field.empty() ? key : field + "." + key, "unknown key '" + key + "'");
  }
}

template <class T>
T scalar(const YAML::Node& n, const std::string& field) {
  if (!n.IsScalar()) schema_error(n, field, "expected a scalar");
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    schema_error(n, field, "bad value '" + n.Scalar() + "'");
  }
}

template <class T>
void read_opt(const YAML::Node& parent, const char* key, const std::string& field, T& out) {
  if (const auto n = parent[key]) out = scalar<T>(n, field + "." + key);
}

inline std::pair<double, double> read_range(const YAML::Node& n, const std::string& field) {
  if (!n.IsSequence() || n.size() != 2) schema_error(n, field, "expected [min, max]");
  return {scalar<double>(n[0], field + "[0]"), scalar<double>(n[1], field + "[1]")};
}

inline ScopeStrategy read_crop(const YAML::Node& n, const std::string& field) {
  check_keys(n, field, {"strategy", "size", "ratios", "min", "max"});
  const auto kind = n["strategy"] ? scalar<std::string>(n["strategy"], field + ".strategy") : std::string("max");
  if (kind == "fixed") {
    const auto size = n["size"];
    if (!size || !size.IsSequence() || size.size() != 2) schema_error(n, field + ".size", "expected [h, w]");
    return FixedPartial{scalar<int>(size[0], field + ".size[0]"), scalar<int>(size[1], field + ".size[1]")};
  }
  if (kind == "max") return MaxValid{};
  if (kind == "set") {
    const auto ratios = n["ratios"];
    if (!ratios || !ratios.IsSequence()) schema_error(n, field + ".ratios", "expected a list of [r_h, r_w]");
    FixedRatioSet set;
    for (std::size_t i = 0; i < ratios.size(); ++i)
      set.ratios.push_back(read_range(ratios[i], field + ".ratios[" + std::to_string(i) + "]"));
    return set;
  }
  if (kind == "range") {
    RatioRange r;
    if (!n["min"] || !n["max"]) schema_error(n, field, "range strategy needs min and max");
    r.r_min = scalar<double>(n["min"], field + ".min");
    r.r_max = scalar<double>(n["max"], field + ".max");
    return r;
  }
  schema_error(n["strategy"], field + ".strategy", "unknown strategy '" + kind + "'");
}

inline DatasetSpec read_dataset(const YAML::Node& n, const std::string& field) {
  check_keys(n, field, {"path", "format", "image_size", "samples", "images", "flow", "occlusions", "pattern",
                        "frame_suffix", "flow_suffix", "occlusion_suffix"});
  DatasetSpec d;
  if (!n["path"]) schema_error(n, field + ".path", "missing required key");
  d.path = scalar<std::string>(n["path"], field + ".path");
  if (const auto f = n["format"]) {
    const auto s = scalar<std::string>(f, field + ".format");
    if (s == "flo") d.format = DatasetFormat::Flo;
    else if (s == "kitti_png") d.format = DatasetFormat::KittiPng;
    else schema_error(f, field + ".format", "expected flo or kitti_png");
  }
  d.layout.flow_extension = d.format == DatasetFormat::Flo ? ".flo" : ".png";
  if (const auto s = n["image_size"]) {
    if (!s.IsSequence() || s.size() != 2) schema_error(s, field + ".image_size", "expected [H, W]");
    d.image_size = std::pair{scalar<int>(s[0], field + ".image_size[0]"), scalar<int>(s[1], field + ".image_size[1]")};
  }
  if (const auto s = n["samples"]) d.samples = scalar<int>(s, field + ".samples");
  read_opt(n, "images", field, d.layout.images);
  read_opt(n, "flow", field, d.layout.flow);
  read_opt(n, "occlusions", field, d.layout.occlusions);
  read_opt(n, "pattern", field, d.layout.pattern);
  read_opt(n, "frame_suffix", field, d.layout.frame_suffix);
  read_opt(n, "flow_suffix", field, d.layout.flow_suffix);
  read_opt(n, "occlusion_suffix", field, d.layout.occlusion_suffix);
  return d;
}

inline StageConfig read_stage(const YAML::Node& n, const std::string& field) {
  check_keys(n, field, {"name", "dataset", "epochs", "batch_size", "crop", "zoom", "geometric", "photometric",
                        "noise", "weight_decay", "lr_schedule", "resume_from"});
  StageConfig s;
  if (!n["name"]) schema_error(n, field + ".name", "missing required key");
  s.name = scalar<std::string>(n["name"], field + ".name");
  if (!n["dataset"]) schema_error(n, field + ".dataset", "missing required key");
  s.dataset = read_dataset(n["dataset"], field + ".dataset");
  read_opt(n, "epochs", field, s.epochs);
  read_opt(n, "batch_size", field, s.batch_size);
  if (const auto c = n["crop"]) s.strategy = read_crop(c, field + ".crop");

  auto& aug = s.augmentation;
  if (const auto z = n["zoom"]) {
    check_keys(z, field + ".zoom", {"min", "max_start", "max_end"});
    read_opt(z, "min", field + ".zoom", aug.zoom.min);
    read_opt(z, "max_start", field + ".zoom", aug.zoom.max_start);
    read_opt(z, "max_end", field + ".zoom", aug.zoom.max_end);
  }
  if (const auto g = n["geometric"]) {
    const std::string gf = field + ".geometric";
    check_keys(g, gf, {"rotation", "translate", "hflip", "vflip", "relative"});
    read_opt(g, "rotation", gf, aug.geometric.rotation);
    read_opt(g, "translate", gf, aug.geometric.translate);
    read_opt(g, "hflip", gf, aug.geometric.hflip);
    read_opt(g, "vflip", gf, aug.geometric.vflip);
    if (const auto r = g["relative"]) {
      check_keys(r, gf + ".relative", {"enabled", "zoom", "rotation", "translate"});
      auto& rel = aug.geometric.relative;
      rel.enabled = true;
      read_opt(r, "enabled", gf + ".relative", rel.enabled);
      read_opt(r, "zoom", gf + ".relative", rel.zoom);
      read_opt(r, "rotation", gf + ".relative", rel.rotation);
      read_opt(r, "translate", gf + ".relative", rel.translate);
    }
  }
  if (const auto p = n["photometric"]) {
    const std::string pf = field + ".photometric";
    check_keys(p, pf, {"gain", "gamma", "noise_sigma"});
    auto& ph = aug.photometric;
    if (p["gain"]) std::tie(ph.gain_min, ph.gain_max) = read_range(p["gain"], pf + ".gain");
    if (p["gamma"]) std::tie(ph.gamma_min, ph.gamma_max) = read_range(p["gamma"], pf + ".gamma");
    if (p["noise_sigma"]) std::tie(ph.noise_min, ph.noise_max) = read_range(p["noise_sigma"], pf + ".noise_sigma");
  }
  read_opt(n, "noise", field, aug.use_noise);
  read_opt(n, "weight_decay", field, s.use_weight_decay);
  if (const auto lr = n["lr_schedule"]) {
    if (lr.IsScalar()) {
      s.lr_schedule.name = scalar<std::string>(lr, field + ".lr_schedule");
    } else {
      check_keys(lr, field + ".lr_schedule", {"custom"});
      const auto m = lr["custom"];
      if (!m.IsSequence()) schema_error(m, field + ".lr_schedule.custom", "expected a list of epochs");
      s.lr_schedule.name = "custom";
      for (std::size_t i = 0; i < m.size(); ++i)
        s.lr_schedule.milestones.push_back(scalar<int>(m[i], field + ".lr_schedule.custom[" + std::to_string(i) + "]"));
    }
  }
  if (const auto r = n["resume_from"]) s.resume_from = scalar<std::string>(r, field + ".resume_from");
  return s;
}

}  // namespace detail

/// Parses and validates a protocol document.  Schema violations (unknown
/// keys, wrong types, malformed YAML) raise SchemaError; semantic violations
/// raise ValidationError.  Both carry field path and line where available.
inline Protocol parse_protocol(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(ErrorCode::SchemaError, "", e.mark.line + 1, e.msg);
  }
  if (!root || root.IsNull()) throw ConfigError(ErrorCode::ValidationError, "stages", 0, "empty document");
  detail::check_keys(root, "", {"seed", "stages"});
  Protocol p;
  if (const auto s = root["seed"]) p.seed = detail::scalar<std::uint64_t>(s, "seed");
  const auto stages = root["stages"];
  if (!stages) throw ConfigError(ErrorCode::ValidationError, "stages", detail::line_of(root), "missing stage list");
  if (!stages.IsSequence()) detail::schema_error(stages, "stages", "expected a list of stages");
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const std::string field = "stages[" + std::to_string(i) + "]";
    p.stages.push_back(detail::read_stage(stages[i], field));
    try {
      detail::require_map(stages[i], field);
      validate_stage(p.stages.back(), field);
    } catch (const ConfigError& e) {
      throw ConfigError(e.code(), e.field(), detail::line_of(stages[i]), e.what());
    }
  }
  validate_protocol(p);
  return p;
}

/// Canonical YAML: every field written explicitly, fixed key order.
inline std::string serialize_protocol(const Protocol& p) {
  using detail::shortest;
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "seed" << YAML::Value << p.seed;
  out << YAML::Key << "stages" << YAML::Value << YAML::BeginSeq;
  for (const auto& s : p.stages) {
    const auto& aug = s.augmentation;
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << s.name;

    out << YAML::Key << "dataset" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "path" << YAML::Value << YAML::DoubleQuoted << s.dataset.path;
    out << YAML::Key << "format" << YAML::Value << to_string(s.dataset.format);
    if (s.dataset.image_size)
      out << YAML::Key << "image_size" << YAML::Value << YAML::Flow << YAML::BeginSeq << s.dataset.image_size->first
          << s.dataset.image_size->second << YAML::EndSeq;
    if (s.dataset.samples) out << YAML::Key << "samples" << YAML::Value << *s.dataset.samples;
    out << YAML::Key << "images" << YAML::Value << YAML::DoubleQuoted << s.dataset.layout.images;
    out << YAML::Key << "flow" << YAML::Value << YAML::DoubleQuoted << s.dataset.layout.flow;
    out << YAML::Key << "occlusions" << YAML::Value << YAML::DoubleQuoted << s.dataset.layout.occlusions;
    out << YAML::Key << "pattern" << YAML::Value << YAML::DoubleQuoted << s.dataset.layout.pattern;
    out << YAML::Key << "frame_suffix" << YAML::Value << YAML::DoubleQuoted << s.dataset.layout.frame_suffix;
    out << YAML::Key << "flow_suffix" << YAML::Value << YAML::DoubleQuoted << s.dataset.layout.flow_suffix;
    out << YAML::Key << "occlusion_suffix" << YAML::Value << YAML::DoubleQuoted
        << s.dataset.layout.occlusion_suffix;
    out << YAML::EndMap;

    out << YAML::Key << "epochs" << YAML::Value << s.epochs;
    out << YAML::Key << "batch_size" << YAML::Value << s.batch_size;

    out << YAML::Key << "crop" << YAML::Value << YAML::BeginMap;
    std::visit(
        [&](const auto& c) {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, FixedPartial>) {
            out << YAML::Key << "strategy" << YAML::Value << "fixed";
            out << YAML::Key << "size" << YAML::Value << YAML::Flow << YAML::BeginSeq << c.h << c.w << YAML::EndSeq;
          } else if constexpr (std::is_same_v<T, MaxValid>) {
            out << YAML::Key << "strategy" << YAML::Value << "max";
          } else if constexpr (std::is_same_v<T, FixedRatioSet>) {
            out << YAML::Key << "strategy" << YAML::Value << "set";
            out << YAML::Key << "ratios" << YAML::Value << YAML::BeginSeq;
            for (const auto& [rh, rw] : c.ratios)
              out << YAML::Flow << YAML::BeginSeq << shortest(rh) << shortest(rw) << YAML::EndSeq;
            out << YAML::EndSeq;
          } else {
            out << YAML::Key << "strategy" << YAML::Value << "range";
            out << YAML::Key << "min" << YAML::Value << shortest(c.r_min);
            out << YAML::Key << "max" << YAML::Value << shortest(c.r_max);
          }
        },
        s.strategy);
    out << YAML::EndMap;

    out << YAML::Key << "zoom" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "min" << YAML::Value << shortest(aug.zoom.min);
    out << YAML::Key << "max_start" << YAML::Value << shortest(aug.zoom.max_start);
    out << YAML::Key << "max_end" << YAML::Value << shortest(aug.zoom.max_end);
    out << YAML::EndMap;

    const auto& g = aug.geometric;
    out << YAML::Key << "geometric" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "rotation" << YAML::Value << shortest(g.rotation);
    out << YAML::Key << "translate" << YAML::Value << shortest(g.translate);
    out << YAML::Key << "hflip" << YAML::Value << g.hflip;
    out << YAML::Key << "vflip" << YAML::Value << g.vflip;
    out << YAML::Key << "relative" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "enabled" << YAML::Value << g.relative.enabled;
    out << YAML::Key << "zoom" << YAML::Value << shortest(g.relative.zoom);
    out << YAML::Key << "rotation" << YAML::Value << shortest(g.relative.rotation);
    out << YAML::Key << "translate" << YAML::Value << shortest(g.relative.translate);
    out << YAML::EndMap << YAML::EndMap;

    const auto& ph = aug.photometric;
    const auto range = [&](const char* key, double lo, double hi) {
      out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq << shortest(lo) << shortest(hi)
          << YAML::EndSeq;
    };
    out << YAML::Key << "photometric" << YAML::Value << YAML::BeginMap;
    range("gain", ph.gain_min, ph.gain_max);
    range("gamma", ph.gamma_min, ph.gamma_max);
    range("noise_sigma", ph.noise_min, ph.noise_max);
    out << YAML::EndMap;

    out << YAML::Key << "noise" << YAML::Value << aug.use_noise;
    out << YAML::Key << "weight_decay" << YAML::Value << s.use_weight_decay;
    if (s.lr_schedule.name == "custom") {
      out << YAML::Key << "lr_schedule" << YAML::Value << YAML::BeginMap << YAML::Key << "custom" << YAML::Value
          << YAML::Flow << s.lr_schedule.milestones << YAML::EndMap;
    } else {
      out << YAML::Key << "lr_schedule" << YAML::Value << s.lr_schedule.name;
    }
    if (s.resume_from) out << YAML::Key << "resume_from" << YAML::Value << YAML::DoubleQuoted << *s.resume_from;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

// ---------------------------------------------------------------------------
// Batch plans

/// Instructions for one mini-batch: the shared crop size plus per-sample
/// dataset index and seeds for placement and augmentation draws.
struct BatchDirective {
  int index = 0;
  int crop_h = 0;
  int crop_w = 0;
  std::vector<int> sample_indices;
  std::vector<std::uint64_t> placement_seeds;
  std::vector<std::uint64_t> augmentation_seeds;

  friend bool operator==(const BatchDirective&, const BatchDirective&) = default;
};

struct BatchPlan {
  std::string stage;
  int epoch = 0;
  double progress = 0.0;  // fed to the zoom schedule
  double zoom_max = 0.0;
  int image_h = 0;
  int image_w = 0;
  std::vector<BatchDirective> batches;

  friend bool operator==(const BatchPlan&, const BatchPlan&) = default;
};

/// Schedule progress of an epoch: 0 at the first epoch, 1 at the last.
inline double stage_progress(int epoch, int epochs) {
  return epochs > 1 ? static_cast<double>(epoch) / static_cast<double>(epochs - 1) : 0.0;
}

/// Reproducible plan for one epoch of a stage.  The stream for a batch is
/// rng.split(stage index).split(epoch).split(batch); the epoch's sample order
/// is a Fisher-Yates permutation drawn from rng.split(stage).split(epoch).
inline BatchPlan emit_batch_plan(const Protocol& p, const std::string& stage_name, int epoch, const Rng& rng) {
  const std::size_t si = p.stage_index(stage_name);
  const StageConfig& s = p.stages[si];
  if (epoch < 0 || epoch >= s.epochs)
    throw Error(ErrorCode::EpochOutOfRange,
                "epoch " + std::to_string(epoch) + " outside [0, " + std::to_string(s.epochs) + ")");
  if (!s.dataset.image_size || !s.dataset.samples)
    throw ConfigError(ErrorCode::ValidationError, "stages[" + std::to_string(si) + "].dataset", 0,
                      "batch plans need dataset.image_size and dataset.samples");

  const auto [H, W] = *s.dataset.image_size;
  const int n = *s.dataset.samples;
  BatchPlan plan{s.name, epoch, stage_progress(epoch, s.epochs), 0.0, H, W, {}};
  plan.zoom_max = s.augmentation.zoom.max_at(plan.progress);

  Rng epoch_rng = rng.split(si).split(static_cast<std::uint64_t>(epoch));
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int i = n - 1; i > 0; --i) std::swap(order[i], order[epoch_rng.uniform_int(0, i)]);

  const int batches = (n + s.batch_size - 1) / s.batch_size;
  for (int b = 0; b < batches; ++b) {
    Rng batch_rng = epoch_rng.split(static_cast<std::uint64_t>(b));
    BatchDirective d;
    d.index = b;
    std::tie(d.crop_h, d.crop_w) = choose_crop_size(s.strategy, H, W, batch_rng);
    for (int k = b * s.batch_size; k < std::min(n, (b + 1) * s.batch_size); ++k) {
      d.sample_indices.push_back(order[k]);
      d.placement_seeds.push_back(batch_rng.next_u64());
      d.augmentation_seeds.push_back(batch_rng.next_u64());
    }
    plan.batches.push_back(std::move(d));
  }
  return plan;
}

/// Augmentation parameters a directive seed stands for.
inline AugmentationParams directive_params(const StageConfig& stage, double progress, std::uint64_t seed) {
  Rng rng(seed);
  return sample_params(stage.augmentation, progress, rng);
}

}  // namespace scopeflow
