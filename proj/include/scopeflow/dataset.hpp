#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "scopeflow/error.hpp"

namespace scopeflow {

/// Directory layout of a flow dataset, relative to its root.  Frames live
/// under `images`, ground truth under `flow` with the same relative path,
/// occlusion masks (optional) under `occlusions`.  Ground-truth stems equal the
/// first frame's stem with `frame_suffix` replaced by `flow_suffix` (or
/// `occlusion_suffix`), e.g. 00001_img1 -> 00001_flow.
struct DatasetLayout {
  std::string images = "images";
  std::string flow = "flow";
  std::string occlusions;  // empty: no occlusion labels
  std::string pattern = "frame_*.png";
  std::string flow_extension = ".flo";
  std::string frame_suffix;
  std::string flow_suffix;
  std::string occlusion_suffix;

  friend bool operator==(const DatasetLayout&, const DatasetLayout&) = default;
};

struct SampleEntry {
  std::filesystem::path frame1;
  std::filesystem::path frame2;
  std::filesystem::path flow;
  std::optional<std::filesystem::path> occlusion;
};

namespace detail {

inline std::regex glob_to_regex(const std::string& glob) {
  std::string re;
  for (char c : glob) {
    switch (c) {
      case '*': re += ".*"; break;
      case '?': re += '.'; break;
      case '.': case '(': case ')': case '[': case ']': case '{': case '}':
      case '+': case '^': case '$': case '|': case '\\':
        re += '\\';
        re += c;
        break;
      default: re += c;
    }
  }
  return std::regex(re);
}

}  // namespace detail

/// Name of the next frame: the last run of digits in the stem is incremented
/// keeping its zero padding (frame_0007 -> frame_0008, 000000_10 -> 000000_11).
inline std::optional<std::string> successor_frame_name(const std::string& filename) {
  const auto dot = filename.rfind('.');
  const std::string stem = dot == std::string::npos ? filename : filename.substr(0, dot);
  const std::string ext = dot == std::string::npos ? "" : filename.substr(dot);
  std::size_t end = stem.size();
  while (end > 0 && !std::isdigit(static_cast<unsigned char>(stem[end - 1]))) --end;
  if (end == 0) return std::nullopt;
  std::size_t begin = end;
  while (begin > 0 && std::isdigit(static_cast<unsigned char>(stem[begin - 1]))) --begin;
  const std::string digits = stem.substr(begin, end - begin);
  std::string next = std::to_string(std::stoull(digits) + 1);
  if (next.size() < digits.size()) next.insert(0, digits.size() - next.size(), '0');
  return stem.substr(0, begin) + next + stem.substr(end) + ext;
}

/// Scans `root` and pairs consecutive frames with their ground truth.  Frames
/// without a successor or without a flow file are skipped.  Entries are sorted
/// by first-frame path.
inline std::vector<SampleEntry> index_dataset(const std::filesystem::path& root, const DatasetLayout& layout) {
  namespace fs = std::filesystem;
  const fs::path image_root = root / layout.images;
  if (!fs::is_directory(image_root))
    throw Error(ErrorCode::Io, "dataset image directory not found: " + image_root.string());

  const std::regex pattern = detail::glob_to_regex(layout.pattern);
  std::vector<SampleEntry> entries;
  for (const auto& item : fs::recursive_directory_iterator(image_root)) {
    if (!item.is_regular_file()) continue;
    const std::string name = item.path().filename().string();
    if (!std::regex_match(name, pattern)) continue;
    const auto next = successor_frame_name(name);
    if (!next) continue;
    const fs::path frame2 = item.path().parent_path() / *next;
    if (!fs::exists(frame2)) continue;

    const fs::path rel_dir = fs::relative(item.path().parent_path(), image_root);
    std::string stem = item.path().stem().string();
    if (!layout.frame_suffix.empty()) {
      if (!stem.ends_with(layout.frame_suffix)) continue;
      stem.resize(stem.size() - layout.frame_suffix.size());
    }
    fs::path flow = root / layout.flow / rel_dir / (stem + layout.flow_suffix + layout.flow_extension);
    if (!fs::exists(flow)) continue;

    SampleEntry entry{item.path(), frame2, flow.lexically_normal(), std::nullopt};
    if (!layout.occlusions.empty()) {
      fs::path occ = root / layout.occlusions / rel_dir / (stem + layout.occlusion_suffix + ".png");
      if (fs::exists(occ)) entry.occlusion = occ.lexically_normal();
    }
    entries.push_back(std::move(entry));
  }
  std::sort(entries.begin(), entries.end(),
            [](const SampleEntry& a, const SampleEntry& b) { return a.frame1 < b.frame1; });
  return entries;
}

}  // namespace scopeflow
