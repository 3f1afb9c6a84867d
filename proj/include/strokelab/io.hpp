#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "strokelab/bezier.hpp"
#include "strokelab/image.hpp"

namespace strokelab::io {

namespace fs = std::filesystem;

inline constexpr const char* kArtifactVersion = "0.1.0";

/// Binary PNM: P5 for one channel, P6 for three; 8-bit, maxval 255.
void write_pnm(const fs::path& path, const Image& img);
Image read_pnm(const fs::path& path);

void write_json(const fs::path& path, const nlohmann::json& j);
nlohmann::json read_json(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

/// JSON array of 13-element arrays.
void write_strokes(const fs::path& path, const std::vector<BezierStroke>& strokes);
std::vector<BezierStroke> read_strokes(const fs::path& path);

/// u64 little-endian header length, UTF-8 JSON header, then the parameters
/// as little-endian 64-bit floats.
struct Checkpoint {
  nlohmann::json header;
  std::vector<double> params;
};
void save_checkpoint(const fs::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const fs::path& path);

void write_loss_csv(const fs::path& path, const std::vector<double>& epoch_loss);

struct MetricsRow {
  std::string image_id;
  int region_count = 0;
  double area_ratio = 0.0;
  double mse = -1.0;  // negative when unpaired (written as an empty cell)
};
void write_metrics_csv(const fs::path& path, const std::vector<MetricsRow>& rows);

/// Everything needed to rerun a command.
struct RunManifest {
  std::string command;
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::string version = kArtifactVersion;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

void write_manifest(const fs::path& dir, const RunManifest& m);
RunManifest read_manifest(const fs::path& path);

/// Shortest round-trippable decimal form.
std::string format_double(double v);

}  // namespace strokelab::io
