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

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "roaderaser/image_io.hpp"
#include "roaderaser/pipeline.hpp"

namespace roaderaser {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("roaderaser_pipeline_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Relative path -> contents for every file below `root`.
std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return files;
}

// Keeps the PNG header, drops the pixel data.
void corrupt_png(const fs::path& p) {
  const std::string head = slurp(p).substr(0, 50);
  std::ofstream(p, std::ios::binary | std::ios::trunc) << head;
}

PipelineConfig tiny_pipeline(const fs::path& root) {
  PipelineConfig c;
  c.seed = 11;
  c.output_dir = (root / "out").string();
  c.data_dir = (root / "train").string();
  c.eval_dir = (root / "test").string();
  c.toy_frames = 6;
  c.toy_width = 64;
  c.toy_height = 32;
  c.toy_cutout_frames = 6;
  c.cutout_filter = {3, 40, 4, 600};
  c.patch_side = 32;
  c.overlap = 0.5;
  c.diffusion.max_iterations = 200;
  c.model_preset = "small";
  c.validation_fraction = 0.0;
  c.train.epochs = 1;
  c.train.crop = {64, 32};
  c.train.batch_size = 2;
  c.train.learning_rate = 1e-3;
  return c;
}

PipelineConfig benchmark_of(PipelineConfig c) {
  c.data_kind = "benchmark";
  c.data_dir = c.eval_dir;
  c.toy_frames = 3;
  return c;
}

class CountingInpainter final : public Inpainter {
 public:
  RgbImage inpaint(const RgbImage& context, const Mask&) const override {
    ++calls;
    return context;
  }
  mutable std::atomic<int> calls{0};
};

TEST(Variant, NamesRoundTrip) {
  for (Variant v : {Variant::kFull, Variant::kNoInpainting, Variant::kNoDiscrepancy,
                    Variant::kSegmentationAlone, Variant::kNoNoiseAug, Variant::kNoBlur}) {
    EXPECT_EQ(variant_from_string(to_string(v)), v);
  }
  EXPECT_THROW(variant_from_string("fast"), std::invalid_argument);
  EXPECT_FALSE(variant_needs_model(Variant::kNoDiscrepancy));
  EXPECT_FALSE(variant_needs_model(Variant::kSegmentationAlone));
  EXPECT_TRUE(variant_needs_model(Variant::kNoInpainting));
}

TEST(PipelineConfig, DefaultsRoundTrip) {
  const PipelineConfig c;
  EXPECT_EQ(PipelineConfig::from_yaml(c.to_yaml()), c);
  EXPECT_NO_THROW(c.validate());
}

TEST(PipelineConfig, EditedValuesRoundTripThroughFile) {
  PipelineConfig c;
  c.seed = 0xFFFFFFFFFFFFFFF1ull;
  c.jobs = 3;
  c.variant = Variant::kNoBlur;
  c.roi_source = RoiSource::kPredicted;
  c.output_dir = "out dir: with \"quotes\"";
  c.inpainter = "external";
  c.inpainter_command = "tool --in {image} --mask {mask} --out {output}";
  c.overlap = 0.1;
  c.diffusion.tolerance = 1.0 / 3.0;
  c.train.learning_rate = 1e-7;
  c.train.pos_weight = 20.0;
  c.train.augment.coarse.amplitude = 0.30000000000000004;
  c.validation_fraction = 0.25;
  c.ablate_variants = {Variant::kNoDiscrepancy, Variant::kFull};
  c.save_inpainted = true;
  const fs::path dir = scratch_dir("config");
  c.save(dir / "c.yaml");
  EXPECT_EQ(PipelineConfig::load(dir / "c.yaml"), c);
}

TEST(PipelineConfig, NestedAndDottedKeysAgree) {
  const PipelineConfig a = PipelineConfig::from_yaml("train:\n  epochs: 3\ninpaint:\n  overlap: 0.5\n");
  const PipelineConfig b = PipelineConfig::from_yaml("train.epochs: 3\ninpaint.overlap: 0.5\n");
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.train.epochs, 3);
  EXPECT_DOUBLE_EQ(a.overlap, 0.5);
}

TEST(PipelineConfig, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(PipelineConfig::from_yaml("train.epoch: 3\n"), ConfigError);
  EXPECT_THROW(PipelineConfig::from_yaml("jobs: many\n"), ConfigError);
  EXPECT_THROW(PipelineConfig::from_yaml("variant: fastest\n"), ConfigError);
  EXPECT_THROW(PipelineConfig::from_yaml("- a\n- b\n"), ConfigError);
  EXPECT_THROW(PipelineConfig::from_yaml("seed: [1, 2\n"), ConfigError);
  EXPECT_THROW(PipelineConfig::load("/nonexistent/config.yaml"), ConfigError);
  PipelineConfig c;
  EXPECT_THROW(c.set("no.such.key", "1"), ConfigError);
  c.set("train.epochs", "4");
  EXPECT_EQ(c.train.epochs, 4);
}

TEST(PipelineConfig, ValidationNamesTheProblem) {
  const auto message = [](PipelineConfig c) {
    try {
      c.validate();
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  PipelineConfig c;
  c.version = 2;
  EXPECT_NE(message(c).find("version"), std::string::npos);
  c = {};
  c.inpainter = "external";
  EXPECT_NE(message(c).find("inpaint.command"), std::string::npos);
  c = {};
  c.pretrained_backbone = true;
  EXPECT_NE(message(c).find("backbone_weights"), std::string::npos);
  c = {};
  c.data_source = "directory";
  EXPECT_NE(message(c).find("source_dir"), std::string::npos);
  c = {};
  c.train.crop = {0, 10};
  EXPECT_FALSE(message(c).empty());
  c = {};
  c.model_preset = "resnet";
  EXPECT_NE(message(c).find("model.preset"), std::string::npos);
}

TEST(PipelineConfig, HashIgnoresLocationsAndWorkers) {
  PipelineConfig a, b;
  b.jobs = 8;
  b.output_dir = "elsewhere";
  b.data_dir = "other";
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 16u);
  b.seed = 1;
  EXPECT_NE(a.hash(), b.hash());
}

TEST(PipelineConfig, VariantSwitches) {
  PipelineConfig c;
  c.seed = 5;
  c.jobs = 2;
  EXPECT_FALSE(c.train_config(Variant::kNoNoiseAug).augment.noise);
  EXPECT_TRUE(c.train_config(Variant::kNoNoiseAug).augment.blur);
  EXPECT_FALSE(c.train_config(Variant::kNoBlur).augment.blur);
  EXPECT_TRUE(c.train_config(Variant::kNoInpainting).two_copies);
  const TrainConfig full = c.train_config(Variant::kFull);
  EXPECT_FALSE(full.two_copies);
  EXPECT_EQ(full.seed, 5u);
  EXPECT_EQ(full.jobs, 2);
  EXPECT_EQ(c.checkpoint_for(Variant::kFull), train_dir(c, Variant::kFull) / "best.ckpt");
  c.checkpoint = "/models/x.ckpt";
  EXPECT_EQ(c.checkpoint_for(Variant::kFull), fs::path("/models/x.ckpt"));
  EXPECT_NE(c.checkpoint_for(Variant::kNoBlur), fs::path("/models/x.ckpt"));
}

TEST(PipelineConfig, ModelPresets) {
  PipelineConfig c;
  EXPECT_EQ(c.model_config().backbone, ModelConfig::vgg16().backbone);
  c.model_preset = "medium";
  EXPECT_NO_THROW(c.validate());
  const ModelConfig m = c.model_config();
  EXPECT_NO_THROW(m.validate());
  EXPECT_EQ(m.backbone[0].size(), 2u);
  EXPECT_EQ(m.levels(), ModelConfig::small().levels());
  EXPECT_GT(DiscrepancyModel(m, 0).parameter_count(),
            DiscrepancyModel(ModelConfig::small(), 0).parameter_count());
}

TEST(RgbL1, KnownValuesAndMasking) {
  RgbImage a = make_rgb(3, 1, 0.5f), b = make_rgb(3, 1, 0.5f);
  Mask roi = make_mask(3, 1, 1);
  const Heatmap same = rgb_l1_score(a, a, roi);
  for (float v : same.data()) EXPECT_EQ(v, 0.0f);
  b.at(1, 0, 0) = 0.8f;
  b.at(1, 0, 2) = 0.2f;
  b.at(2, 0, 1) = 1.0f;
  roi.at(2, 0) = 0;
  const Heatmap h = rgb_l1_score(a, b, roi);
  EXPECT_FLOAT_EQ(h.at(0, 0), 0.0f);
  EXPECT_FLOAT_EQ(h.at(1, 0), 0.2f);
  EXPECT_EQ(h.at(2, 0), 0.0f);
}

TEST(ScoreFrame, NoDiscrepancyOnIdenticalStreamsIsZero) {
  PipelineConfig cfg;
  cfg.patch_side = 32;
  // Diffusion reconstructs a constant road exactly.
  InferInputs in{make_rgb(40, 30, 102.0f / 255.0f), make_mask(40, 30, 1), std::nullopt, {}};
  const DiffusionInpainter diffusion;
  const InferOutputs out = score_frame(cfg, Variant::kNoDiscrepancy, in, diffusion, nullptr);
  for (float v : out.heatmap.data()) EXPECT_NEAR(v, 0.0f, 1e-6f);
  ASSERT_TRUE(out.inpainted.same_shape(in.image));
}

TEST(ScoreFrame, EmptyRoiGivesZeroHeatmapWithoutInpainting) {
  PipelineConfig cfg;
  InferInputs in{make_rgb(40, 30, 0.4f), make_mask(40, 30, 0), std::nullopt, {}};
  CountingInpainter counter;
  for (Variant v : {Variant::kNoDiscrepancy, Variant::kFull}) {
    const InferOutputs out = score_frame(cfg, v, in, counter, nullptr);
    ASSERT_TRUE(out.heatmap.same_shape(in.image));
    for (float x : out.heatmap.data()) EXPECT_EQ(x, 0.0f);
  }
  EXPECT_EQ(counter.calls, 0);
}

TEST(ScoreFrame, VariantRequirements) {
  PipelineConfig cfg;
  InferInputs in{make_rgb(16, 16, 0.4f), make_mask(16, 16, 1), std::nullopt, {}};
  CountingInpainter counter;
  EXPECT_THROW(score_frame(cfg, Variant::kSegmentationAlone, in, counter, nullptr),
               std::invalid_argument);
  EXPECT_THROW(score_frame(cfg, Variant::kFull, in, counter, nullptr), std::invalid_argument);
  DiscrepancyModel model(ModelConfig::small(), 1);
  const InferOutputs out = score_frame(cfg, Variant::kNoInpainting, in, counter, &model);
  EXPECT_EQ(counter.calls, 0);
  EXPECT_TRUE(out.inpainted.empty());
  for (float v : out.heatmap.data()) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
}

TEST(Quantize, MatchesStoredImage) {
  RgbImage img = make_rgb(5, 4);
  for (std::size_t i = 0; i < img.data().size(); ++i) img.data()[i] = (i % 97) / 96.0f;
  const fs::path p = scratch_dir("quantize") / "q.png";
  io::write_rgb(p, img);
  EXPECT_EQ(io::read_rgb(p), quantize_u8(img));
}

TEST(ListFrames, ReportsMissingAndMismatchedFiles) {
  const fs::path dir = scratch_dir("frames");
  for (const char* sub : {"images", "labels", "roi"}) fs::create_directories(dir / sub);
  for (const char* id : {"b", "a", "c"}) {
    io::write_rgb(dir / "images" / (std::string(id) + ".png"), make_rgb(8, 6));
    io::write_mask(dir / "labels" / (std::string(id) + ".png"), make_mask(8, 6));
  }
  io::write_mask(dir / "roi" / "a.png", make_mask(8, 6));
  const auto frames = list_frames(dir, {"labels"});
  ASSERT_EQ(frames.size(), 3u);
  EXPECT_EQ(frames[0].id, "a");
  EXPECT_EQ(frames[2].id, "c");
  EXPECT_FALSE(frames[0].roi.empty());
  EXPECT_TRUE(frames[1].roi.empty());
  try {
    list_frames(dir, {"labels", "roi"});
    FAIL() << "missing roi files not reported";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("b.png"), std::string::npos);
    EXPECT_NE(msg.find("c.png"), std::string::npos);
    EXPECT_EQ(msg.find("a.png"), std::string::npos);
  }
  io::write_mask(dir / "labels" / "b.png", make_mask(7, 6));
  EXPECT_THROW(list_frames(dir, {"labels"}), ConfigError);
  EXPECT_THROW(list_frames(dir / "nothing"), ConfigError);
}

TEST(GenerateData, ToySetIsCompleteAndReproducible) {
  const fs::path root = scratch_dir("generate");
  PipelineConfig a = tiny_pipeline(root);
  a.toy_frames = 8;
  a.data_dir = (root / "a").string();
  const CommandResult r = cmd_generate_data(a);
  EXPECT_EQ(r.frames, 8u);
  EXPECT_TRUE(r.failed_frames.empty());
  const auto frames = list_frames(a.data_dir, {"labels", "roi", "inpainted"});
  EXPECT_EQ(frames.size(), 8u);
  const auto manifest = nlohmann::json::parse(slurp(root / "a" / "manifest.json"));
  EXPECT_EQ(manifest["frames"].size(), 8u);
  EXPECT_EQ(manifest["config_hash"], a.hash());

  EXPECT_THROW(cmd_generate_data(a), ConfigError);
  EXPECT_NO_THROW(cmd_generate_data(a, {.force = true}));

  PipelineConfig b = a;
  b.data_dir = (root / "b").string();
  b.jobs = 2;
  cmd_generate_data(b);
  auto sa = snapshot(root / "a"), sb = snapshot(root / "b");
  sa.erase("config.yaml");
  sb.erase("config.yaml");
  EXPECT_EQ(sa, sb);

  for (const auto& f : frames) {
    const Mask labels = io::read_mask(f.labels), roi = io::read_mask(f.roi);
    for (std::size_t i = 0; i < labels.data().size(); ++i) {
      EXPECT_EQ(labels.data()[i] == kIgnoreLabel, roi.data()[i] == 0);
    }
  }
}

TEST(GenerateData, DirectorySourceListsMissingLabelFiles) {
  const fs::path root = scratch_dir("directory_source");
  fs::create_directories(root / "src" / "images");
  fs::create_directories(root / "src" / "semantic");
  for (const char* id : {"x1", "x2"}) {
    io::write_rgb(root / "src" / "images" / (std::string(id) + ".png"), make_rgb(32, 32));
  }
  io::write_label_map(root / "src" / "semantic" / "x1.png", LabelMap(32, 32, 1));
  std::ofstream(root / "src" / "vocab.json") << toy_vocabulary().dump();
  PipelineConfig c = tiny_pipeline(root);
  c.data_source = "directory";
  c.source_dir = (root / "src").string();
  try {
    cmd_generate_data(c);
    FAIL() << "missing semantic map not reported";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("x2.png"), std::string::npos);
  }
}

TEST(Infer, ExternalCopyAdapterRoundTripsFragments) {
  const fs::path root = scratch_dir("external");
  PipelineConfig c = tiny_pipeline(root);
  cmd_generate_data(benchmark_of(c));
  c.variant = Variant::kNoDiscrepancy;
  c.inpainter = "external";
  c.inpainter_command = "cp {image} {output}";
  c.train.augment.blur = false;
  const CommandResult r = cmd_infer(c);
  ASSERT_EQ(r.frames, 3u);
  // The adapter sees the fragment with its hole blanked, so copying it back
  // yields black inside the ROI: the score there is the mean RGB value.
  for (const auto& rec : list_frames(c.eval_dir, {"roi"})) {
    const RgbImage img = io::read_rgb(rec.image);
    const Mask roi = io::read_mask(rec.roi);
    const Heatmap h = io::read_heatmap(infer_dir(c, c.variant) / "heatmaps" / (rec.id + ".png"));
    for (int y = 0; y < h.height(); ++y) {
      for (int x = 0; x < h.width(); ++x) {
        const float mean = (img.at(x, y, 0) + img.at(x, y, 1) + img.at(x, y, 2)) / 3.0f;
        ASSERT_NEAR(h.at(x, y), roi.at(x, y) ? mean : 0.0f, 1.0f / 65535.0f) << rec.id;
      }
    }
    const auto side = nlohmann::json::parse(
        slurp(infer_dir(c, c.variant) / "heatmaps" / (rec.id + ".json")));
    EXPECT_EQ(side["frame"], rec.id);
    EXPECT_EQ(side["roi_source"], "ground_truth");
  }
  EXPECT_FALSE(fs::exists(infer_dir(c, c.variant) / ".inpaint_tmp"));
}

TEST(Infer, NeverReadsLabelsAndReportsFrameFailures) {
  const fs::path root = scratch_dir("infer_failures");
  PipelineConfig c = tiny_pipeline(root);
  cmd_generate_data(benchmark_of(c));
  fs::remove_all(root / "test" / "labels");
  corrupt_png(root / "test" / "images" / "00001.png");
  c.variant = Variant::kNoDiscrepancy;
  const CommandResult r = cmd_infer(c);
  EXPECT_EQ(r.frames, 2u);
  ASSERT_EQ(r.failed_frames, std::vector<std::string>{"00001"});
  EXPECT_EQ(list_png_ids(infer_dir(c, c.variant) / "heatmaps"),
            (std::vector<std::string>{"00000", "00002"}));
}

TEST(Infer, MissingCheckpointIsAConfigError) {
  const fs::path root = scratch_dir("no_checkpoint");
  PipelineConfig c = tiny_pipeline(root);
  cmd_generate_data(benchmark_of(c));
  EXPECT_THROW(cmd_infer(c), ConfigError);
}

TEST(Infer, PredictedRoiAndSegmentationAlone) {
  const fs::path root = scratch_dir("predicted");
  PipelineConfig c = tiny_pipeline(root);
  cmd_generate_data(benchmark_of(c));
  c.variant = Variant::kSegmentationAlone;
  c.roi_source = RoiSource::kPredicted;
  EXPECT_EQ(cmd_infer(c).frames, 3u);
  EXPECT_EQ(list_png_ids(infer_dir(c, c.variant) / "roi").size(), 3u);
  const CommandResult e = cmd_evaluate(c);
  EXPECT_EQ(e.frames, 3u);
  EXPECT_TRUE(fs::exists(eval_dir(c, c.variant) / "metrics.json"));
}

TEST(Evaluate, UnmatchedFramesAreListed) {
  const fs::path root = scratch_dir("unmatched");
  PipelineConfig c = tiny_pipeline(root);
  cmd_generate_data(benchmark_of(c));
  c.variant = Variant::kNoDiscrepancy;
  cmd_infer(c);
  fs::remove(infer_dir(c, c.variant) / "heatmaps" / "00002.png");
  io::write_heatmap(infer_dir(c, c.variant) / "heatmaps" / "zz.png", make_heatmap(64, 32));
  try {
    cmd_evaluate(c);
    FAIL() << "unmatched ids not reported";
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("00002"), std::string::npos);
    EXPECT_NE(msg.find("zz"), std::string::npos);
  }
}

TEST(Evaluate, SingleFramePoolEqualsFrameReport) {
  const fs::path root = scratch_dir("single_frame");
  PipelineConfig c = tiny_pipeline(root);
  PipelineConfig bench = benchmark_of(c);
  bench.toy_frames = 1;
  cmd_generate_data(bench);
  c.variant = Variant::kNoDiscrepancy;
  cmd_infer(c);
  cmd_evaluate(c);
  const auto m = nlohmann::json::parse(slurp(eval_dir(c, c.variant) / "metrics.json"));
  ASSERT_EQ(m["frames"].size(), 1u);
  EXPECT_EQ(m["frames"][0]["ap"], m["pooled"]["ap"]);
  EXPECT_EQ(m["frames"][0]["fpr95"], m["pooled"]["fpr95"]);
  const std::string csv = slurp(eval_dir(c, c.variant) / "metrics.csv");
  cmd_evaluate(c);
  EXPECT_EQ(slurp(eval_dir(c, c.variant) / "metrics.csv"), csv);
}

TEST(Ablate, SingleVariantGivesOneRow) {
  const fs::path root = scratch_dir("ablate");
  PipelineConfig c = tiny_pipeline(root);
  cmd_generate_data(benchmark_of(c));
  c.ablate_variants = {Variant::kNoDiscrepancy};
  cmd_ablate(c);
  const std::string csv = slurp(root / "out" / "ablation" / "ablation.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
  EXPECT_EQ(csv.rfind("variant,ap,fpr95,tpr95_reachable\nno_discrepancy,", 0), 0u);
  EXPECT_NE(slurp(root / "out" / "ablation" / "ablation.txt").find("81.9"), std::string::npos);
  c.ablate_variants = {Variant::kFull};
  EXPECT_THROW(cmd_ablate(c), ConfigError);
}

TEST(Pipeline, TrainInferAreReproducible) {
  const fs::path root = scratch_dir("reproducible");
  PipelineConfig base = tiny_pipeline(root);
  cmd_generate_data(base);
  cmd_generate_data(benchmark_of(base));
  std::vector<std::map<std::string, std::string>> runs;
  for (int run = 0; run < 2; ++run) {
    PipelineConfig c = base;
    c.output_dir = (root / ("out" + std::to_string(run))).string();
    c.jobs = run + 1;
    const CommandResult t = cmd_train(c);
    EXPECT_TRUE(fs::exists(t.output / "best.ckpt"));
    EXPECT_TRUE(fs::exists(t.output / "history.csv"));
    EXPECT_THROW(cmd_train(c), ConfigError);
    cmd_infer(c);
    auto files = snapshot(c.output_dir);
    files.erase("train/full/config.yaml");
    runs.push_back(std::move(files));
  }
  EXPECT_EQ(runs[0], runs[1]);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch_dir("cli");
  const std::string cli = ROADERASER_CLI;
  const auto run = [&](const std::string& args) {
    const int status = std::system((cli + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  EXPECT_EQ(run("print-config"), 0);
  std::ofstream(dir / "bad.yaml") << "train.epoch: 3\n";
  EXPECT_EQ(run("print-config --config " + (dir / "bad.yaml").string()), 2);
  EXPECT_EQ(run("train --variant fastest"), 2);
  EXPECT_EQ(run("print-config --set jobs=0"), 2);
  EXPECT_EQ(run("frobnicate"), 2);

  PipelineConfig c = tiny_pipeline(dir);
  benchmark_of(c).save(dir / "bench.yaml");
  EXPECT_EQ(run("generate-data --config " + (dir / "bench.yaml").string()), 0);
  EXPECT_EQ(run("generate-data --config " + (dir / "bench.yaml").string()), 2);
  EXPECT_EQ(run("generate-data --force --config " + (dir / "bench.yaml").string()), 0);
  corrupt_png(dir / "test" / "images" / "00000.png");
  EXPECT_EQ(run("infer --variant no_discrepancy --config " + (dir / "bench.yaml").string()), 1);
}

}  // namespace
}  // namespace roaderaser
