#include "strokelab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "strokelab/error.hpp"

namespace strokelab {

namespace {

int find_root(std::vector<int>& parent, int x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

void unite(std::vector<int>& parent, int a, int b) {
  a = find_root(parent, a);
  b = find_root(parent, b);
  if (a == b) return;
  if (a < b) std::swap(a, b);
  parent[a] = b;
}

}  // namespace

std::vector<int> label_components(std::span<const std::uint8_t> mask, int width, int height,
                                  int* count) {
  require(mask.size() == static_cast<std::size_t>(width) * height, ErrorKind::Contract,
          "mask size does not match dimensions");
  std::vector<int> labels(mask.size(), 0);
  std::vector<int> parent{0};
  auto lab = [&](int x, int y) -> int {
    if (x < 0 || y < 0 || x >= width) return 0;
    return labels[static_cast<std::size_t>(y) * width + x];
  };

  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * width + x;
      if (!mask[i]) continue;
      // Already-visited 8-neighbours: W, NW, N, NE.
      const int nbrs[4] = {lab(x - 1, y), lab(x - 1, y - 1), lab(x, y - 1), lab(x + 1, y - 1)};
      int best = 0;
      for (int n : nbrs)
        if (n && (!best || n < best)) best = n;
      if (!best) {
        best = static_cast<int>(parent.size());
        parent.push_back(best);
      } else {
        for (int n : nbrs)
          if (n) unite(parent, best, n);
      }
      labels[i] = best;
    }
  }

  std::vector<int> remap(parent.size(), 0);
  int next = 0;
  for (auto& l : labels) {
    if (!l) continue;
    const int r = find_root(parent, l);
    if (!remap[r]) remap[r] = ++next;
    l = remap[r];
  }
  if (count) *count = next;
  return labels;
}

double border_median(const Image& lum) {
  require(lum.channels == 1, ErrorKind::Contract, "border median needs a single channel");
  std::vector<double> v;
  for (int x = 0; x < lum.width; ++x) {
    v.push_back(lum.at(x, 0));
    if (lum.height > 1) v.push_back(lum.at(x, lum.height - 1));
  }
  for (int y = 1; y + 1 < lum.height; ++y) {
    v.push_back(lum.at(0, y));
    if (lum.width > 1) v.push_back(lum.at(lum.width - 1, y));
  }
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<std::uint8_t> foreground_mask(const Image& img, double threshold) {
  require(threshold > 0.0 && threshold < 1.0, ErrorKind::Contract,
          "foreground threshold must lie in (0, 1)");
  const Image lum = to_luminance(img);
  const double bg = border_median(lum);
  std::vector<std::uint8_t> mask(lum.pixel_count());
  for (std::size_t i = 0; i < mask.size(); ++i)
    mask[i] = std::abs(lum.data[i] - bg) > threshold ? 1 : 0;
  return mask;
}

CrdResult connected_regions(const Image& img, double threshold) {
  const auto mask = foreground_mask(img, threshold);
  CrdResult r;
  label_components(mask, img.width, img.height, &r.region_count);
  const auto fg = std::count(mask.begin(), mask.end(), std::uint8_t{1});
  r.area_ratio = static_cast<double>(fg) / static_cast<double>(mask.size());
  return r;
}

double mse_serial(const Image& a, const Image& b) {
  require(a.same_shape(b), ErrorKind::Contract, "mse: images differ in shape");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.data.size());
}

double mse_omp(const Image& a, const Image& b) {
  require(a.same_shape(b), ErrorKind::Contract, "mse: images differ in shape");
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(a.data.size());
  double acc = 0.0;
#pragma omp parallel for reduction(+ : acc) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double d = a.data[i] - b.data[i];
    acc += d * d;
  }
  return acc / static_cast<double>(n);
}

double alpha_iou(const Image& a, const Image& b, double threshold) {
  require(a.same_shape(b), ErrorKind::Contract, "alpha_iou: maps differ in shape");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const bool ia = a.data[i] >= threshold, ib = b.data[i] >= threshold;
    inter += ia && ib;
    uni += ia || ib;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace strokelab
