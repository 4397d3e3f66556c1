#include "vot/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "vot/errors.hpp"
#include "vot/image_io.hpp"
#include "vot/tum.hpp"

namespace vot::data {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path + "'");
}

namespace {

json spec_json(const DatasetSpec& s) {
  return {{"motion", to_string(s.motion)},
          {"sequences", s.sequences},
          {"views", s.views},
          {"stride", s.stride},
          {"height", s.height},
          {"width", s.width},
          {"trajectory_length", s.trajectory_length},
          {"intrinsics", s.intrinsics},
          {"seed", s.seed}};
}

template <typename Err>
void reject_unknown(const json& j, std::initializer_list<const char*> keys,
                    const std::string& where) {
  if (!j.is_object()) throw Err(where + " must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) throw Err("unknown key '" + k + "' in " + where);
  }
}

template <typename Err>
DatasetSpec spec_from(const json& j) {
  reject_unknown<Err>(j,
                      {"motion", "sequences", "views", "stride", "height", "width",
                       "trajectory_length", "intrinsics", "seed"},
                      "dataset spec");
  DatasetSpec s;
  try {
    if (j.contains("motion")) s.motion = motion_kind_from_string(j["motion"].get<std::string>());
    if (j.contains("sequences")) s.sequences = j["sequences"].get<std::size_t>();
    if (j.contains("views")) s.views = j["views"].get<std::size_t>();
    if (j.contains("stride")) s.stride = j["stride"].get<std::size_t>();
    if (j.contains("height")) s.height = j["height"].get<std::size_t>();
    if (j.contains("width")) s.width = j["width"].get<std::size_t>();
    if (j.contains("trajectory_length")) {
      s.trajectory_length = j["trajectory_length"].get<std::size_t>();
    }
    if (j.contains("intrinsics")) s.intrinsics = j["intrinsics"].get<std::string>();
    if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw Err(std::string("dataset spec: ") + e.what());
  } catch (const InvalidArgumentError& e) {
    throw Err(std::string("dataset spec: ") + e.what());
  }
  intrinsics_profile(s.intrinsics, 1, 1);
  return s;
}

json intrinsics_json(const Intrinsics& k) {
  return {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}};
}

}  // namespace

std::string dataset_spec_to_json(const DatasetSpec& spec) {
  return spec_json(spec).dump(2) + "\n";
}

DatasetSpec dataset_spec_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("dataset spec is not valid JSON: ") + e.what());
  }
  try {
    return spec_from<ConfigError>(j);
  } catch (const InvalidArgumentError& e) {
    throw ConfigError(e.what());
  }
}

std::string manifest_to_json(const Dataset& dataset) {
  json seqs = json::array();
  for (const auto& info : dataset.info) {
    seqs.push_back({{"id", info.id},
                    {"world_seed", info.world_seed},
                    {"trajectory_seed", info.trajectory_seed},
                    {"start", info.start},
                    {"motion", to_string(info.motion)},
                    {"intrinsics", intrinsics_json(info.intrinsics)}});
  }
  json j = {{"format", "vot-dataset-1"},
            {"spec", spec_json(dataset.spec)},
            {"sequences", seqs}};
  return j.dump(2) + "\n";
}

Dataset manifest_from_json(const std::string& text) {
  Dataset d;
  try {
    const json j = json::parse(text);
    reject_unknown<ParseError>(j, {"format", "spec", "sequences"}, "manifest");
    if (j.value("format", "") != "vot-dataset-1") {
      throw ParseError("manifest: unsupported format '" + j.value("format", "") + "'");
    }
    d.spec = spec_from<ParseError>(j.at("spec"));
    for (const auto& s : j.at("sequences")) {
      reject_unknown<ParseError>(
          s, {"id", "world_seed", "trajectory_seed", "start", "motion", "intrinsics"},
          "manifest sequence");
      SequenceInfo info;
      info.id = s.at("id").get<std::string>();
      info.world_seed = s.at("world_seed").get<std::uint64_t>();
      info.trajectory_seed = s.at("trajectory_seed").get<std::uint64_t>();
      info.start = s.at("start").get<std::size_t>();
      info.motion = motion_kind_from_string(s.at("motion").get<std::string>());
      const auto& k = s.at("intrinsics");
      reject_unknown<ParseError>(k, {"fx", "fy", "cx", "cy"}, "intrinsics");
      info.intrinsics = {k.at("fx").get<double>(), k.at("fy").get<double>(),
                         k.at("cx").get<double>(), k.at("cy").get<double>()};
      d.info.push_back(info);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("manifest: ") + e.what());
  } catch (const InvalidArgumentError& e) {
    throw ParseError(std::string("manifest: ") + e.what());
  }
  return d;
}

void write_dataset(const Dataset& dataset, const std::string& dir) {
  if (dataset.samples.size() != dataset.info.size()) {
    throw InvalidArgumentError("write_dataset: samples and info differ in length");
  }
  fs::create_directories(dir);
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    const auto& s = dataset.samples[i];
    const fs::path seq_dir = fs::path(dir) / dataset.info[i].id;
    fs::create_directories(seq_dir / "frames");
    for (std::size_t k = 0; k < s.frames.size(); ++k) {
      write_pnm(s.frames[k],
                (seq_dir / "frames" / (timestamp_stem(s.timestamps[k]) + ".pgm")).string());
    }
    // Ground truth is stored relative to the first frame, matching the
    // identity start of predicted trajectories.
    geometry::Trajectory gt{{}, s.timestamps};
    const geometry::Pose origin = s.abs_poses_gt.front().inverse();
    for (const auto& p : s.abs_poses_gt) gt.poses.push_back(origin * p);
    write_tum_trajectory(gt, (seq_dir / "gt.txt").string());
  }
  write_text_file((fs::path(dir) / "manifest.json").string(), manifest_to_json(dataset));
}

namespace {

SequenceSample load_sequence_dir(const fs::path& seq_dir, const DatasetSpec& spec,
                                 const SequenceInfo& info) {
  const auto images =
      load_image_sequence((seq_dir / "frames").string(), spec.height, spec.width);
  const auto gt = load_tum_trajectory((seq_dir / "gt.txt").string());
  if (images.frames.size() != gt.size()) {
    throw InvalidArgumentError(seq_dir.string() + ": " +
                               std::to_string(images.frames.size()) + " frames but " +
                               std::to_string(gt.size()) + " ground-truth poses");
  }
  SequenceSample s;
  s.frames = images.frames;
  s.abs_poses_gt = gt.poses;
  s.timestamps = gt.timestamps;
  s.rel_poses_gt = geometry::relative_poses(gt.poses);
  s.intrinsics = info.intrinsics;
  return s;
}

}  // namespace

Dataset load_dataset(const std::string& dir) {
  Dataset d = manifest_from_json(read_text_file((fs::path(dir) / "manifest.json").string()));
  for (const auto& info : d.info) {
    d.samples.push_back(load_sequence_dir(fs::path(dir) / info.id, d.spec, info));
  }
  return d;
}

SequenceSample load_sequence(const std::string& dir, const std::string& id) {
  const Dataset d =
      manifest_from_json(read_text_file((fs::path(dir) / "manifest.json").string()));
  for (const auto& info : d.info) {
    if (info.id == id) return load_sequence_dir(fs::path(dir) / id, d.spec, info);
  }
  throw InvalidArgumentError("sequence '" + id + "' not in manifest of '" + dir + "'");
}

}  // namespace vot::data
