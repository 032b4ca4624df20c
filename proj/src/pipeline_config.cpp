// Copyright 2026 The RoadEraser Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>
#include <type_traits>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "roaderaser/pipeline.hpp"

namespace roaderaser {

namespace {

constexpr std::pair<Variant, const char*> kVariantNames[] = {
    {Variant::kFull, "full"},
    {Variant::kNoInpainting, "no_inpainting"},
    {Variant::kNoDiscrepancy, "no_discrepancy"},
    {Variant::kSegmentationAlone, "segmentation_alone"},
    {Variant::kNoNoiseAug, "no_noise_aug"},
    {Variant::kNoBlur, "no_blur"},
};

// Scalar text for a field value; strings are flagged for quoting.
struct Scalar {
  std::string text;
  bool quoted = false;
};

Scalar to_scalar(bool v) { return {v ? "true" : "false"}; }
Scalar to_scalar(int v) { return {std::to_string(v)}; }
Scalar to_scalar(std::uint64_t v) { return {std::to_string(v)}; }
Scalar to_scalar(double v) {
  std::string s = fmt::format("{}", v);
  // Keep a decimal marker so the value reads back as a float.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return {s};
}
Scalar to_scalar(const std::string& v) { return {v, true}; }
Scalar to_scalar(Variant v) { return {to_string(v)}; }
Scalar to_scalar(RoiSource v) { return {to_string(v)}; }
Scalar to_scalar(const std::vector<Variant>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + to_string(v[i]);
  return {s, true};
}

template <typename T>
T convert(const YAML::Node& node, const std::string& key, const char* what) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(fmt::format("config key '{}': expected {}", key, what));
  }
}

void from_node(const YAML::Node& n, const std::string& key, bool& v) {
  v = convert<bool>(n, key, "true or false");
}
void from_node(const YAML::Node& n, const std::string& key, int& v) {
  v = convert<int>(n, key, "an integer");
}
void from_node(const YAML::Node& n, const std::string& key, std::uint64_t& v) {
  v = convert<std::uint64_t>(n, key, "a non-negative integer");
}
void from_node(const YAML::Node& n, const std::string& key, double& v) {
  v = convert<double>(n, key, "a number");
}
void from_node(const YAML::Node& n, const std::string& key, std::string& v) {
  v = n.IsNull() ? std::string() : convert<std::string>(n, key, "a string");
}
void from_node(const YAML::Node& n, const std::string& key, Variant& v) {
  try {
    v = variant_from_string(convert<std::string>(n, key, "a variant name"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("config key '{}': {}", key, e.what()));
  }
}
void from_node(const YAML::Node& n, const std::string& key, RoiSource& v) {
  try {
    v = roi_source_from_string(convert<std::string>(n, key, "an roi source"));
  } catch (const std::exception& e) {
    throw ConfigError(fmt::format("config key '{}': {}", key, e.what()));
  }
}
void from_node(const YAML::Node& n, const std::string& key, std::vector<Variant>& v) {
  v.clear();
  std::vector<std::string> names;
  if (n.IsSequence()) {
    for (const auto& item : n) names.push_back(convert<std::string>(item, key, "variant names"));
  } else {
    std::stringstream ss(convert<std::string>(n, key, "a comma-separated variant list"));
    for (std::string item; std::getline(ss, item, ',');) {
      item.erase(0, item.find_first_not_of(" \t"));
      item.erase(item.find_last_not_of(" \t") + 1);
      if (!item.empty()) names.push_back(item);
    }
  }
  for (const auto& name : names) {
    try {
      v.push_back(variant_from_string(name));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(fmt::format("config key '{}': {}", key, e.what()));
    }
  }
}

struct Field {
  std::string key;
  std::function<Scalar(const PipelineConfig&)> get;
  std::function<void(PipelineConfig&, const YAML::Node&)> set;
};

template <typename Access>
Field field(std::string key, Access access) {
  return {key, [access](const PipelineConfig& c) { return to_scalar(access(c)); },
          [access, key](PipelineConfig& c, const YAML::Node& n) { from_node(n, key, access(c)); }};
}

#define RE_FIELD(key, member) field(key, [](auto& c) -> auto& { return c.member; })

const std::vector<Field>& fields() {
  static const std::vector<Field> all = {
      RE_FIELD("version", version),
      RE_FIELD("seed", seed),
      RE_FIELD("jobs", jobs),
      RE_FIELD("variant", variant),
      RE_FIELD("roi_source", roi_source),
      RE_FIELD("output_dir", output_dir),
      RE_FIELD("checkpoint", checkpoint),
      RE_FIELD("data.source", data_source),
      RE_FIELD("data.kind", data_kind),
      RE_FIELD("data.source_dir", source_dir),
      RE_FIELD("data.toy_frames", toy_frames),
      RE_FIELD("data.toy_width", toy_width),
      RE_FIELD("data.toy_height", toy_height),
      RE_FIELD("data.toy_cutout_frames", toy_cutout_frames),
      RE_FIELD("data.dir", data_dir),
      RE_FIELD("data.validation_dir", validation_dir),
      RE_FIELD("data.validation_fraction", validation_fraction),
      RE_FIELD("data.eval_dir", eval_dir),
      RE_FIELD("inpaint.method", inpainter),
      RE_FIELD("inpaint.command", inpainter_command),
      RE_FIELD("inpaint.patch_side", patch_side),
      RE_FIELD("inpaint.overlap", overlap),
      RE_FIELD("inpaint.max_iterations", diffusion.max_iterations),
      RE_FIELD("inpaint.tolerance", diffusion.tolerance),
      RE_FIELD("inpaint.multiscale_init", diffusion.multiscale_init),
      RE_FIELD("paste.min_count", paste.min_count),
      RE_FIELD("paste.max_count", paste.max_count),
      RE_FIELD("paste.max_attempts", paste.max_attempts),
      RE_FIELD("paste.mirror_probability", paste.mirror_probability),
      RE_FIELD("cutout.min_extent", cutout_filter.min_extent),
      RE_FIELD("cutout.max_extent", cutout_filter.max_extent),
      RE_FIELD("cutout.min_area", cutout_filter.min_area),
      RE_FIELD("cutout.max_area", cutout_filter.max_area),
      RE_FIELD("model.preset", model_preset),
      RE_FIELD("model.pretrained_backbone", pretrained_backbone),
      RE_FIELD("model.backbone_weights", backbone_weights),
      RE_FIELD("train.epochs", train.epochs),
      RE_FIELD("train.learning_rate", train.learning_rate),
      RE_FIELD("train.plateau_patience", train.plateau_patience),
      RE_FIELD("train.plateau_factor", train.plateau_factor),
      RE_FIELD("train.pos_weight", train.pos_weight),
      RE_FIELD("train.crop_width", train.crop.width),
      RE_FIELD("train.crop_height", train.crop.height),
      RE_FIELD("train.batch_size", train.batch_size),
      RE_FIELD("augment.blur", train.augment.blur),
      RE_FIELD("augment.blur_sigma", train.augment.blur_sigma),
      RE_FIELD("augment.noise", train.augment.noise),
      RE_FIELD("augment.fine_amplitude", train.augment.fine.amplitude),
      RE_FIELD("augment.fine_cell", train.augment.fine.cell_size),
      RE_FIELD("augment.coarse_amplitude", train.augment.coarse.amplitude),
      RE_FIELD("augment.coarse_cell", train.augment.coarse.cell_size),
      RE_FIELD("infer.save_inpainted", save_inpainted),
      RE_FIELD("ablate.variants", ablate_variants),
      RE_FIELD("ablate.train_missing", ablate_train_missing),
  };
  return all;
}

#undef RE_FIELD

// Nested maps are accepted and read as dotted keys.
void flatten(const YAML::Node& node, const std::string& prefix,
             std::vector<std::pair<std::string, YAML::Node>>& out) {
  for (const auto& kv : node) {
    const std::string key =
        prefix.empty() ? kv.first.as<std::string>() : prefix + "." + kv.first.as<std::string>();
    if (kv.second.IsMap()) {
      flatten(kv.second, key, out);
    } else {
      out.emplace_back(key, kv.second);
    }
  }
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

std::string to_string(Variant v) {
  for (const auto& [value, name] : kVariantNames) {
    if (value == v) return name;
  }
  throw std::invalid_argument("unknown variant");
}

Variant variant_from_string(const std::string& s) {
  for (const auto& [value, name] : kVariantNames) {
    if (s == name) return value;
  }
  throw std::invalid_argument(fmt::format(
      "unknown variant '{}' (expected full, no_inpainting, no_discrepancy, "
      "segmentation_alone, no_noise_aug or no_blur)",
      s));
}

bool variant_needs_model(Variant v) {
  return v != Variant::kNoDiscrepancy && v != Variant::kSegmentationAlone;
}

void PipelineConfig::validate() const {
  const auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (version != kVersion) {
    fail(fmt::format("unsupported config version {} (expected {})", version, kVersion));
  }
  if (jobs < 1) fail("jobs must be at least 1");
  if (output_dir.empty()) fail("output_dir must not be empty");
  if (data_source != "toy" && data_source != "directory") {
    fail(fmt::format("data.source must be toy or directory, got '{}'", data_source));
  }
  if (data_kind != "training" && data_kind != "benchmark") {
    fail(fmt::format("data.kind must be training or benchmark, got '{}'", data_kind));
  }
  if (data_source == "directory" && source_dir.empty()) {
    fail("data.source_dir is required when data.source is directory");
  }
  if (toy_frames < 1 || toy_width < 8 || toy_height < 8 || toy_cutout_frames < 0) {
    fail("toy dataset needs at least 1 frame of at least 8x8 pixels");
  }
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    fail("data.validation_fraction must lie in [0, 1)");
  }
  if (inpainter != "baseline" && inpainter != "external") {
    fail(fmt::format("inpaint.method must be baseline or external, got '{}'", inpainter));
  }
  if (inpainter == "external" && inpainter_command.empty()) {
    fail("inpaint.command is required for the external inpainter");
  }
  if (patch_side < 3) fail("inpaint.patch_side must be at least 3");
  if (!(overlap >= 0.0 && overlap < 1.0)) fail("inpaint.overlap must lie in [0, 1)");
  if (diffusion.max_iterations < 1 || !(diffusion.tolerance > 0.0)) {
    fail("inpaint.max_iterations and inpaint.tolerance must be positive");
  }
  if (paste.min_count < 0 || paste.max_count < paste.min_count || paste.max_attempts < 1 ||
      paste.mirror_probability < 0.0 || paste.mirror_probability > 1.0) {
    fail("paste settings out of range");
  }
  if (cutout_filter.min_extent > cutout_filter.max_extent ||
      cutout_filter.min_area > cutout_filter.max_area) {
    fail("cutout bounds are inverted");
  }
  if (model_preset != "small" && model_preset != "medium" && model_preset != "vgg16") {
    fail(fmt::format("model.preset must be small, medium or vgg16, got '{}'", model_preset));
  }
  if (pretrained_backbone && backbone_weights.empty()) {
    fail("model.pretrained_backbone requires model.backbone_weights");
  }
  if (ablate_variants.empty()) fail("ablate.variants must name at least one variant");
  try {
    model_config().validate();
    train_config(variant).validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

ModelConfig PipelineConfig::model_config() const {
  ModelConfig m = model_preset == "small"    ? ModelConfig::small()
                  : model_preset == "medium" ? ModelConfig::medium()
                                             : ModelConfig::vgg16();
  m.pretrained_backbone = pretrained_backbone;
  m.backbone_weights = backbone_weights;
  return m;
}

TrainConfig PipelineConfig::train_config(Variant v) const {
  TrainConfig t = train;
  t.seed = seed;
  t.jobs = jobs;
  if (v == Variant::kNoNoiseAug) t.augment.noise = false;
  if (v == Variant::kNoBlur) t.augment.blur = false;
  if (v == Variant::kNoInpainting) t.two_copies = true;
  return t;
}

std::filesystem::path PipelineConfig::checkpoint_for(Variant v) const {
  if (!checkpoint.empty() && v == variant) return checkpoint;
  return train_dir(*this, v) / "best.ckpt";
}

std::string PipelineConfig::to_yaml() const {
  YAML::Emitter out;
  out << YAML::BeginMap;
  for (const auto& f : fields()) {
    const Scalar s = f.get(*this);
    out << YAML::Key << f.key << YAML::Value;
    if (s.quoted) out << YAML::DoubleQuoted;
    out << s.text;
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

PipelineConfig PipelineConfig::from_yaml(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("config is not valid YAML: {}", e.what()));
  }
  PipelineConfig cfg;
  if (root.IsNull()) return cfg;
  if (!root.IsMap()) throw ConfigError("config must be a key: value mapping");
  std::vector<std::pair<std::string, YAML::Node>> entries;
  flatten(root, "", entries);
  for (const auto& [key, node] : entries) {
    const auto& all = fields();
    const auto it = std::find_if(all.begin(), all.end(), [&](const Field& f) { return f.key == key; });
    if (it == all.end()) throw ConfigError(fmt::format("unknown config key '{}'", key));
    if (!node.IsScalar() && !node.IsNull() && !node.IsSequence()) {
      throw ConfigError(fmt::format("config key '{}' must hold a single value", key));
    }
    it->set(cfg, node);
  }
  return cfg;
}

void PipelineConfig::set(const std::string& key, const std::string& value) {
  const auto& all = fields();
  const auto it = std::find_if(all.begin(), all.end(), [&](const Field& f) { return f.key == key; });
  if (it == all.end()) throw ConfigError(fmt::format("unknown config key '{}'", key));
  YAML::Node node;
  try {
    node = YAML::Load(value);
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("config key '{}': {}", key, e.what()));
  }
  it->set(*this, node);
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return from_yaml(ss.str());
}

void PipelineConfig::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << to_yaml();
  if (!out) throw std::runtime_error(fmt::format("cannot write config '{}'", path.string()));
}

std::string PipelineConfig::hash() const {
  // Locations and worker count do not change results.
  PipelineConfig c = *this;
  c.jobs = 1;
  c.output_dir.clear();
  c.checkpoint.clear();
  c.source_dir.clear();
  c.data_dir.clear();
  c.validation_dir.clear();
  c.eval_dir.clear();
  return fmt::format("{:016x}", fnv1a(c.to_yaml()));
}

std::string code_version() { return ROADERASER_VERSION; }

}  // namespace roaderaser
