#include "strokelab/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "strokelab/error.hpp"

namespace strokelab::io {

namespace {

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) fail(ErrorKind::Io, "cannot create directory " + path.parent_path().string());
  }
  std::ofstream f(path, mode | std::ios::trunc);
  if (!f) fail(ErrorKind::Io, "cannot open for writing: " + path.string());
  return f;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream f(path, mode);
  if (!f) fail(ErrorKind::Io, "cannot open for reading: " + path.string());
  return f;
}

int next_header_int(std::istream& in, const fs::path& path) {
  for (;;) {
    int c = in.peek();
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  int v = 0;
  if (!(in >> v)) fail(ErrorKind::Io, "malformed PNM header in " + path.string());
  return v;
}

static_assert(std::endian::native == std::endian::little,
              "checkpoint encoding assumes a little-endian host");

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void write_pnm(const fs::path& path, const Image& img) {
  auto f = open_out(path, std::ios::binary);
  f << (img.channels == 1 ? "P5" : "P6") << "\n" << img.width << " " << img.height << "\n255\n";
  std::vector<unsigned char> bytes(img.data.size());
  for (std::size_t i = 0; i < bytes.size(); ++i)
    bytes[i] = static_cast<unsigned char>(std::lround(std::clamp(img.data[i], 0.0, 1.0) * 255.0));
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) fail(ErrorKind::Io, "write failed: " + path.string());
}

Image read_pnm(const fs::path& path) {
  auto f = open_in(path, std::ios::binary);
  std::string magic(2, '\0');
  f.read(magic.data(), 2);
  require(f && (magic == "P5" || magic == "P6"), ErrorKind::Io,
          "unsupported PNM magic in " + path.string());
  const int channels = magic == "P5" ? 1 : 3;
  const int w = next_header_int(f, path), h = next_header_int(f, path);
  const int maxval = next_header_int(f, path);
  require(w > 0 && h > 0 && maxval == 255, ErrorKind::Io, "unsupported PNM geometry in " + path.string());
  f.get();
  Image img(w, h, channels);
  std::vector<unsigned char> bytes(img.data.size());
  f.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<std::size_t>(f.gcount()) == bytes.size(), ErrorKind::Io,
          "truncated PNM data in " + path.string());
  for (std::size_t i = 0; i < bytes.size(); ++i) img.data[i] = bytes[i] / 255.0;
  return img;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  auto f = open_out(path);
  f << j.dump(2) << "\n";
  if (!f) fail(ErrorKind::Io, "write failed: " + path.string());
}

nlohmann::json read_json(const fs::path& path) {
  auto f = open_in(path);
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Io, "invalid JSON in " + path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  auto f = open_out(path);
  f << text;
  if (!f) fail(ErrorKind::Io, "write failed: " + path.string());
}

void write_strokes(const fs::path& path, const std::vector<BezierStroke>& strokes) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& s : strokes) j.push_back(s.to_array());
  write_json(path, j);
}

std::vector<BezierStroke> read_strokes(const fs::path& path) {
  const auto j = read_json(path);
  require(j.is_array(), ErrorKind::Io, "stroke file must hold an array: " + path.string());
  std::vector<BezierStroke> out;
  for (const auto& row : j) {
    require(row.is_array() && row.size() == kStrokeDims, ErrorKind::Io,
            "stroke entries must have 13 values: " + path.string());
    const auto v = row.get<std::vector<double>>();
    out.push_back(BezierStroke::from_array(v));
  }
  return out;
}

void save_checkpoint(const fs::path& path, const Checkpoint& ckpt) {
  auto f = open_out(path, std::ios::binary);
  const std::string header = ckpt.header.dump();
  const std::uint64_t len = header.size();
  f.write(reinterpret_cast<const char*>(&len), sizeof len);
  f.write(header.data(), static_cast<std::streamsize>(header.size()));
  f.write(reinterpret_cast<const char*>(ckpt.params.data()),
          static_cast<std::streamsize>(ckpt.params.size() * sizeof(double)));
  if (!f) fail(ErrorKind::Io, "write failed: " + path.string());
}

Checkpoint load_checkpoint(const fs::path& path) {
  auto f = open_in(path, std::ios::binary);
  std::uint64_t len = 0;
  f.read(reinterpret_cast<char*>(&len), sizeof len);
  require(f && len < (1u << 24), ErrorKind::Io, "bad checkpoint header in " + path.string());
  std::string header(len, '\0');
  f.read(header.data(), static_cast<std::streamsize>(len));
  require(static_cast<std::uint64_t>(f.gcount()) == len, ErrorKind::Io,
          "truncated checkpoint header in " + path.string());
  Checkpoint c;
  try {
    c.header = nlohmann::json::parse(header);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Io, "invalid checkpoint header in " + path.string());
  }
  std::vector<char> rest((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  require(rest.size() % sizeof(double) == 0, ErrorKind::Io,
          "checkpoint payload is not a whole number of doubles: " + path.string());
  c.params.resize(rest.size() / sizeof(double));
  std::memcpy(c.params.data(), rest.data(), rest.size());
  return c;
}

void write_loss_csv(const fs::path& path, const std::vector<double>& epoch_loss) {
  std::ostringstream s;
  s << "epoch,mean_loss\n";
  for (std::size_t e = 0; e < epoch_loss.size(); ++e) s << e << "," << format_double(epoch_loss[e]) << "\n";
  write_text(path, s.str());
}

void write_metrics_csv(const fs::path& path, const std::vector<MetricsRow>& rows) {
  std::ostringstream s;
  s << "image_id,region_count,area_ratio,mse_if_paired\n";
  for (const auto& r : rows) {
    s << r.image_id << "," << r.region_count << "," << format_double(r.area_ratio) << ",";
    if (r.mse >= 0.0) s << format_double(r.mse);
    s << "\n";
  }
  write_text(path, s.str());
}

nlohmann::json RunManifest::to_json() const {
  return {{"command", command}, {"config", config},   {"seed", seed},
          {"version", version}, {"inputs", inputs}, {"outputs", outputs}};
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
  RunManifest m;
  try {
    m.command = j.at("command").get<std::string>();
    m.config = j.at("config");
    m.seed = j.at("seed").get<std::uint64_t>();
    m.version = j.value("version", std::string(kArtifactVersion));
    m.inputs = j.value("inputs", std::vector<std::string>{});
    m.outputs = j.value("outputs", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Io, std::string("malformed run manifest: ") + e.what());
  }
  return m;
}

void write_manifest(const fs::path& dir, const RunManifest& m) {
  write_json(dir / "manifest.json", m.to_json());
}

RunManifest read_manifest(const fs::path& path) { return RunManifest::from_json(read_json(path)); }

}  // namespace strokelab::io
