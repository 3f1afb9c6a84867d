#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "strokelab/cli.hpp"
#include "strokelab/dataset.hpp"
#include "strokelab/error.hpp"
#include "strokelab/io.hpp"
#include "strokelab/metrics.hpp"
#include "strokelab/raster.hpp"

using namespace strokelab;
namespace fs = std::filesystem;

namespace {

// Fresh scratch directory per call, removed by the destructor.
struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("strokelab_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("PNM round trip") {
  TempDir tmp;
  Rng rng(1);
  for (int channels : {1, 3}) {
    Image img(7, 5, channels);
    for (auto& v : img.data) v = std::round(rng.uniform() * 255) / 255;
    const auto path = tmp / (channels == 1 ? "a.pgm" : "a.ppm");
    io::write_pnm(path, img);
    const Image back = io::read_pnm(path);
    REQUIRE(back.same_shape(img));
    for (std::size_t i = 0; i < img.data.size(); ++i) CHECK(back.data[i] == doctest::Approx(img.data[i]));
  }

  SUBCASE("header comments are skipped") {
    std::ofstream f(tmp / "c.pgm", std::ios::binary);
    f << "P5\n# made by hand\n2 1\n255\n";
    f.put(static_cast<char>(0));
    f.put(static_cast<char>(255));
    f.close();
    const Image img = io::read_pnm(tmp / "c.pgm");
    CHECK(img.data == std::vector<double>{0.0, 1.0});
  }
  SUBCASE("malformed files are IO errors") {
    io::write_text(tmp / "bad.pgm", "P9 nonsense");
    try {
      io::read_pnm(tmp / "bad.pgm");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Io);
    }
    CHECK_THROWS_AS(io::read_pnm(tmp / "missing.pgm"), Error);
  }
}

TEST_CASE("checkpoint round trip") {
  TempDir tmp;
  io::Checkpoint c{{{"kind", "test"}, {"n", 3}}, {1.5, -2.25, 1e-300}};
  io::save_checkpoint(tmp / "m.bin", c);
  const auto back = io::load_checkpoint(tmp / "m.bin");
  CHECK(back.header == c.header);
  CHECK(back.params == c.params);

  io::write_text(tmp / "short.bin", "abc");
  CHECK_THROWS_AS(io::load_checkpoint(tmp / "short.bin"), Error);
}

TEST_CASE("stroke and manifest files") {
  TempDir tmp;
  Rng rng(2);
  std::vector<BezierStroke> strokes;
  for (int i = 0; i < 3; ++i) strokes.push_back(generate_random_stroke(rng, ParamRanges::reference()));
  io::write_strokes(tmp / "s.json", strokes);
  CHECK(io::read_strokes(tmp / "s.json") == strokes);

  io::RunManifest m;
  m.command = "gen-data";
  m.config = {{"count", "4"}};
  m.seed = 12345678901234ull;
  m.inputs = {"in"};
  m.outputs = {"a", "b"};
  io::write_manifest(tmp.path, m);
  const auto r = io::read_manifest(tmp / "manifest.json");
  CHECK(r.command == m.command);
  CHECK(r.config == m.config);
  CHECK(r.seed == m.seed);
  CHECK(r.version == std::string(io::kArtifactVersion));
  CHECK(r.outputs == m.outputs);

  CHECK(std::stod(io::format_double(0.1)) == 0.1);
  CHECK(std::stod(io::format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("metrics CSV") {
  TempDir tmp;
  io::write_metrics_csv(tmp / "m.csv", {{"a.pgm", 1, 0.25, 0.5}, {"b.pgm", 2, 0.5, -1.0}});
  const std::string text = slurp(tmp / "m.csv");
  CHECK(text.find("image_id,region_count,area_ratio,mse_if_paired") == 0);
  CHECK(text.find("b.pgm,2,0.5,\n") != std::string::npos);
}

TEST_CASE("synthetic stroke data") {
  SUBCASE("each image is one closed region") {
    for (const auto& s : generate_stroke_dataset(20, 32, 7))
      CHECK(connected_regions(s.image).region_count == 1);
  }
  SUBCASE("reproducible per seed") {
    const auto a = generate_stroke_dataset(5, 16, 3, 1);
    const auto b = generate_stroke_dataset(5, 16, 3, 1);
    for (int i = 0; i < 5; ++i) {
      CHECK(a[i].stroke == b[i].stroke);
      CHECK(a[i].image.data == b[i].image.data);
    }
  }
  SUBCASE("augmented strokes still describe their images") {
    AugmentOptions aug{true, true, true};
    for (const auto& s : generate_stroke_dataset(12, 24, 5, 3, aug)) {
      const Canvas again = rasterize_stroke(s.stroke, 24, 24).canvas;
      double worst = 0;
      for (std::size_t i = 0; i < again.data.size(); ++i)
        worst = std::max(worst, std::abs(again.data[i] - s.image.data[i]));
      CHECK(worst < 1e-9);
    }
  }
  SUBCASE("training tensors") {
    const auto samples = generate_stroke_dataset(2, 8, 1);
    const auto t = to_training_images(samples, true);
    CHECK(t[0].pixels.size() == 64);
    CHECK(t[0].cond_features.size() == kStrokeDims);
    for (double v : t[0].pixels) CHECK((v >= -1.0 && v <= 1.0));
    const Canvas back = tensor_to_canvas(t[0].pixels, 8);
    const Image lum = to_luminance(samples[0].image);
    for (std::size_t i = 0; i < 64; ++i) CHECK(back.data[i] == doctest::Approx(lum.data[i]));
  }
}

TEST_CASE("command line") {
  TempDir tmp;

  SUBCASE("argument errors map to the configuration exit code") {
    CHECK(run_cli({"gen-data", "--out", tmp / "x"}) == 2);  // missing --seed
    CHECK(run_cli({"no-such-command"}) == 2);
    CHECK(run_cli({"train-predictor", "--seed", "1", "--lambda-m", "1,2", "--out", tmp / "y"}) == 2);
    CHECK(run_cli({"metrics", "--images", tmp / "nowhere", "--out", tmp / "z"}) == 3);
  }

  SUBCASE("gen-data, metrics and rerun") {
    REQUIRE(run_cli({"gen-data", "--count", "4", "--canvas-size", "24", "--rotate", "--flip-h",
                     "--seed", "9", "--out", tmp / "data"}) == 0);
    int images = 0;
    for (const auto& e : fs::directory_iterator(tmp.path / "data"))
      images += e.path().extension() == ".ppm";
    CHECK(images == 4);
    CHECK(io::read_strokes(tmp / "data/strokes.json").size() == 4);
    const auto m = io::read_manifest(tmp / "data/manifest.json");
    CHECK(m.command == "gen-data");
    CHECK(m.seed == 9);
    CHECK(m.config.at("rotate") == true);
    CHECK(m.config.at("flip-v") == false);

    REQUIRE(run_cli({"metrics", "--images", tmp / "data", "--out", tmp / "met"}) == 0);
    std::ifstream csv(tmp / "met/metrics.csv");
    std::string line;
    std::getline(csv, line);
    int rows = 0;
    while (std::getline(csv, line)) {
      ++rows;
      std::stringstream ss(line);
      std::string id, regions;
      std::getline(ss, id, ',');
      std::getline(ss, regions, ',');
      CHECK(regions == "1");
    }
    CHECK(rows == 4);

    REQUIRE(run_cli({"rerun", "--manifest", tmp / "data/manifest.json", "--out", tmp / "again"}) == 0);
    for (const auto& name : m.outputs)
      CHECK_MESSAGE(slurp(tmp.path / "data" / name) == slurp(tmp.path / "again" / name), name);
  }

  SUBCASE("verify-math passes and reports every identity") {
    REQUIRE(run_cli({"verify-math", "--steps", "200", "--seed", "1", "--out",
                     tmp / "v"}) == 0);
    std::ifstream csv(tmp / "v/verify.csv");
    std::string line;
    std::getline(csv, line);
    CHECK(line == "identity,max_error,tolerance,status");
    int rows = 0;
    while (std::getline(csv, line)) {
      ++rows;
      CHECK(line.substr(line.rfind(',') + 1) == "pass");
    }
    CHECK(rows >= 10);
  }

  SUBCASE("diffusion training and sampling") {
    REQUIRE(run_cli({"gen-data", "--count", "6", "--canvas-size", "8", "--gray", "--seed", "2",
                     "--out", tmp / "d"}) == 0);
    REQUIRE(run_cli({"train-diffusion", "--data", tmp / "d", "--steps", "8", "--epochs", "2",
                     "--hidden", "16", "--prior-pairs", "2", "--batch-size", "4", "--seed", "3",
                     "--out", tmp / "m"}) == 0);
    CHECK(fs::exists(tmp / "m/model.bin"));
    CHECK(fs::exists(tmp / "m/loss.csv"));
    for (const char* dir : {"s1", "s2"})
      REQUIRE(run_cli({"sample", "--model", tmp / "m/model.bin", "--count", "2", "--seed", "4",
                       "--out", tmp / dir}) == 0);
    CHECK(slurp(tmp / "s1/sample_0000.pgm") == slurp(tmp / "s2/sample_0000.pgm"));
    CHECK(slurp(tmp / "s1/sample_0001.pgm") == slurp(tmp / "s2/sample_0001.pgm"));
    CHECK(run_cli({"sample", "--model", tmp / "m/model.bin", "--prior-mode", "cosine", "--seed", "4",
                   "--out", tmp / "s3"}) == 2);
  }

  SUBCASE("predictor training and painting") {
    REQUIRE(run_cli({"train-predictor", "--scenes", "8", "--heldout", "4", "--epochs", "1",
                     "--seed", "5", "--out", tmp / "p"}) == 0);
    REQUIRE(run_cli({"gen-data", "--count", "1", "--canvas-size", "32", "--seed", "6", "--out",
                     tmp / "t"}) == 0);
    REQUIRE(run_cli({"paint", "--model", tmp / "p/predictor.bin", "--target",
                     tmp / "t/stroke_0000.ppm", "--layers", "1", "--seed", "7", "--out",
                     tmp / "paint"}) == 0);
    CHECK(fs::exists(tmp / "paint/final.ppm"));
    CHECK(fs::exists(tmp / "paint/layer_0000.ppm"));
    CHECK(fs::exists(tmp / "paint/painting.json"));
    CHECK(io::read_manifest(tmp / "paint/manifest.json").command == "paint");
  }

  SUBCASE("fit-stroke") {
    REQUIRE(run_cli({"gen-data", "--count", "1", "--canvas-size", "32", "--seed", "8", "--out",
                     tmp / "t"}) == 0);
    REQUIRE(run_cli({"fit-stroke", "--target", tmp / "t/stroke_0000.ppm", "--iterations", "30",
                     "--seed", "1", "--out", tmp / "f"}) == 0);
    CHECK(io::read_strokes(tmp / "f/stroke.json").size() == 1);
    CHECK(io::read_json(tmp / "f/fit.json").contains("loss"));
  }
}
