#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "support.hpp"
#include "travkit/errors.hpp"
#include "travkit/image_io.hpp"
#include "travkit/pipeline.hpp"
#include "travkit/synthetic.hpp"

namespace travkit {
namespace {

namespace fs = std::filesystem;

AnnotationJob fixture_job(const fs::path& seq, const fs::path& out, std::size_t jobs = 1) {
  AnnotationJob job;
  job.frames_dir = seq / "frames";
  job.trajectory = load_tum_trajectory(seq / "trajectory.txt");
  job.camera = load_camera(seq / "camera.json");
  job.policy = load_policy(seq / "policy.json");
  const fs::path fixtures = seq / "fixtures";
  job.prompt_segmenter = [fixtures] { return std::make_unique<FixturePromptSegmenter>(fixtures); };
  job.semantic_segmenter = [fixtures] { return std::make_unique<FixtureSemanticSegmenter>(fixtures); };
  job.out_dir = out;
  job.jobs = jobs;
  return job;
}

std::vector<std::string> label_bytes(const fs::path& out, std::size_t frames) {
  std::vector<std::string> bytes;
  for (std::size_t i = 0; i < frames; ++i) bytes.push_back(testing::read_file(out / "labels" / (frame_stem(i) + ".png")));
  return bytes;
}

class Pipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    seq_ = new testing::TempDir("travkit-seq");
    synthetic::write_sequence(seq_->path());
  }
  static void TearDownTestSuite() {
    delete seq_;
    seq_ = nullptr;
  }
  static testing::TempDir* seq_;
};
testing::TempDir* Pipeline::seq_ = nullptr;

TEST_F(Pipeline, PromptsAreInImageFootsteps) {
  const AnnotationJob job = fixture_job(seq_->path(), "unused");
  for (std::size_t i = 0; i < job.trajectory.size(); ++i) {
    const auto prompts = compute_prompts(job.trajectory, job.camera, job.settings, i);
    ASSERT_TRUE(prompts.has_value()) << i;
    EXPECT_LE(prompts->prompts.points.size(), job.settings.prompts);
    for (const auto& p : prompts->prompts.points) {
      EXPECT_TRUE(job.camera.in_image(p.x(), p.y()));
      EXPECT_NE(std::find(prompts->footsteps.points.begin(), prompts->footsteps.points.end(), p),
                prompts->footsteps.points.end());
    }
  }
}

TEST_F(Pipeline, RunIsDeterministicAcrossReruns) {
  testing::TempDir a, b, c;
  const JobResult ra = run_job(fixture_job(seq_->path(), a.path(), 1));
  const JobResult rb = run_job(fixture_job(seq_->path(), b.path(), 1));
  const JobResult rc = run_job(fixture_job(seq_->path(), c.path(), 3));
  EXPECT_EQ(ra.tuples, 10u);
  EXPECT_EQ(ra.skipped, 0u);
  EXPECT_EQ(testing::read_file(a / "manifest.json"), testing::read_file(b / "manifest.json"));
  EXPECT_EQ(testing::read_file(a / "manifest.json"), testing::read_file(c / "manifest.json"));
  EXPECT_EQ(label_bytes(a.path(), 10), label_bytes(b.path(), 10));
  EXPECT_EQ(label_bytes(a.path(), 10), label_bytes(c.path(), 10));
  EXPECT_EQ(ra.manifest["splits"]["train"].size(), 9u);
  EXPECT_EQ(ra.manifest["splits"]["val"].size(), 1u);
  EXPECT_EQ(ra.tuples + ra.skipped, ra.manifest["frames"].get<std::size_t>());
}

TEST_F(Pipeline, LabelsMatchGroundTruth) {
  testing::TempDir out;
  run_job(fixture_job(seq_->path(), out.path()));
  for (std::size_t i = 0; i < 10; ++i) {
    const auto label = read_label_png(out / "labels" / (frame_stem(i) + ".png"), LabelCodec{});
    const BinaryMask gt = read_mask_png(seq_->path() / "gt" / (frame_stem(i) + ".png"));
    ASSERT_EQ(label.width(), gt.width());
    std::size_t differ = 0;
    for (int v = 0; v < gt.height(); ++v)
      for (int u = 0; u < gt.width(); ++u) differ += (label.at(u, v) >= 0.5f) != (gt.at(u, v) != 0);
    EXPECT_LT(differ, gt.size() / 100) << "frame " << i;
  }
}

TEST_F(Pipeline, SplitPartitionsTuples) {
  testing::TempDir out;
  AnnotationJob job = fixture_job(seq_->path(), out.path());
  job.settings.val_ratio = 0.3;
  const JobResult r = run_job(job);
  std::set<std::size_t> seen;
  for (const char* split : {"train", "val"})
    for (const auto& t : r.manifest["splits"][split]) EXPECT_TRUE(seen.insert(t["frame"].get<std::size_t>()).second);
  EXPECT_EQ(seen.size(), 10u);
  EXPECT_EQ(r.manifest["splits"]["val"].size(), 3u);
}

TEST_F(Pipeline, SubprocessAdaptersMatchFixtureMode) {
  if (std::string(TRAVKIT_PYTHON).empty()) GTEST_SKIP() << "python3 not found";
  testing::TempDir a, b;
  run_job(fixture_job(seq_->path(), a.path()));
  AnnotationJob job = fixture_job(seq_->path(), b.path(), 2);
  const std::string script = (fs::path(TRAVKIT_TEST_DATA_DIR) / "fake_adapter.py").string();
  const std::string fixtures = (seq_->path() / "fixtures").string();
  job.prompt_segmenter = [=] {
    return std::make_unique<SubprocessPromptSegmenter>(std::vector<std::string>{TRAVKIT_PYTHON, script, "prompt", fixtures});
  };
  job.semantic_segmenter = [=] {
    return std::make_unique<SubprocessSemanticSegmenter>(
        std::vector<std::string>{TRAVKIT_PYTHON, script, "semantic", fixtures});
  };
  run_job(job);
  EXPECT_EQ(label_bytes(a.path(), 10), label_bytes(b.path(), 10));
}

TEST_F(Pipeline, FootstepsBehindCameraSkipFrames) {
  // Identity rotations point the optical axis up, so every footstep is behind the camera.
  std::vector<Pose> poses;
  for (int i = 0; i < 4; ++i) {
    Pose p;
    p.timestamp = 0.5 * i;
    p.position = {1.4 * 0.5 * i, 0, 1.36};
    poses.push_back(p);
  }
  testing::TempDir out;
  AnnotationJob job = fixture_job(seq_->path(), out.path());
  job.trajectory = Trajectory(poses);
  FixturePromptSegmenter prompt(seq_->path() / "fixtures");
  FixtureSemanticSegmenter semantic(seq_->path() / "fixtures");
  const FrameOutcome o = annotate_frame(job, 0, prompt, semantic);
  EXPECT_FALSE(o.tuple.has_value());
  EXPECT_FALSE(o.skip_reason.empty());
  EXPECT_THROW(run_job(job), EmptyDataset);
  EXPECT_TRUE(fs::exists(out / "manifest.json"));
}

TEST_F(Pipeline, MissingFrameIsAnInputError) {
  testing::TempDir seq;
  synthetic::SequenceOptions opts;
  opts.frames = 3;
  synthetic::write_sequence(seq.path(), opts);
  fs::remove(seq / "frames/000001.png");
  testing::TempDir out;
  EXPECT_THROW(run_job(fixture_job(seq.path(), out.path())), InputError);
}

TEST_F(Pipeline, MaskSizeMismatchIsAProtocolError) {
  testing::TempDir seq;
  synthetic::SequenceOptions opts;
  opts.frames = 2;
  synthetic::write_sequence(seq.path(), opts);
  write_mask_png(seq / "fixtures/000000/masks/0.png", BinaryMask(10, 10, 1));
  testing::TempDir out;
  EXPECT_THROW(run_job(fixture_job(seq.path(), out.path())), ProtocolError);
}

TEST(LabelFromProposals, NoSurvivorMeansNoLabel) {
  FramePrompts prompts;
  prompts.footsteps.points = {{5.5, 5.5}};
  prompts.prompts = prompts.footsteps;
  MaskProposalSet proposals;
  BinaryMask tiny(20, 20, 0);
  tiny.at(5, 5) = 1;
  proposals.add(tiny);
  SemanticMap sem;
  sem.classes = Raster<std::uint8_t>(20, 20, 0);
  sem.vocabulary = {{0, "sidewalk"}};
  AnnotationSettings settings;
  EXPECT_FALSE(label_from_proposals(proposals, prompts, sem, settings, urban_policy()).has_value());

  BinaryMask big(20, 20, 0);
  for (int v = 10; v < 20; ++v)
    for (int u = 0; u < 20; ++u) big.at(u, v) = 1;
  proposals.add(big, 0.5);
  prompts.footsteps.points = {{3.5, 15.5}, {12.0, 18.0}};
  prompts.prompts = prompts.footsteps;
  const auto label = label_from_proposals(proposals, prompts, sem, settings, urban_policy());
  ASSERT_TRUE(label.has_value());
  EXPECT_EQ(label->selected_mask, 1u);
  EXPECT_TRUE(label->sufficient);
  EXPECT_FLOAT_EQ(label->label.at(0, 19), 1.0f);
  EXPECT_FLOAT_EQ(label->label.at(0, 0), 0.0f);
}

TEST(PointLabels, DiscAreaAtRadius30) {
  PixelPoints p;
  p.points = {{320.5, 240.5}};
  const auto r = point_label_baseline(p, 30.0, 640, 480);
  std::size_t count = 0;
  for (float v : r.pixels()) count += v > 0;
  EXPECT_GE(count, 2773u);
  EXPECT_LE(count, 2885u);
  // Per-pixel distance check.
  for (int v = 0; v < 480; v += 7)
    for (int u = 0; u < 640; u += 7) {
      const double d = std::hypot(u - 320, v - 240);
      if (d < 29.5) {
        EXPECT_EQ(r.at(u, v), 1.0f);
      }
      if (d > 30.5) {
        EXPECT_EQ(r.at(u, v), 0.0f);
      }
    }
}

TEST(PointLabels, RadiusZeroAndEmpty) {
  PixelPoints p;
  p.points = {{1.2, 1.7}, {5.9, 3.1}, {8.0, 8.0}};
  const auto r = point_label_baseline(p, 0.0, 10, 10);
  std::size_t count = 0;
  for (float v : r.pixels()) count += v > 0;
  EXPECT_EQ(count, 3u);
  EXPECT_EQ(r.at(5, 3), 1.0f);
  const auto none = point_label_baseline(PixelPoints{}, 30.0, 10, 10);
  for (float v : none.pixels()) EXPECT_EQ(v, 0.0f);
  EXPECT_THROW(point_label_baseline(p, -1.0, 10, 10), InvalidParameter);
}

TEST(SeededShuffle, IsAPermutationAndDeterministic) {
  std::vector<std::size_t> a(50), b;
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = i;
  b = a;
  seeded_shuffle(a, 42);
  seeded_shuffle(b, 42);
  EXPECT_EQ(a, b);
  std::vector<std::size_t> sorted = a;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) EXPECT_EQ(sorted[i], i);
}

}  // namespace
}  // namespace travkit
