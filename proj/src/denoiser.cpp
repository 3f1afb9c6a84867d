#include "strokelab/denoiser.hpp"

#include <algorithm>
#include <cmath>

#include "strokelab/error.hpp"

namespace strokelab {

nlohmann::json DenoiserArch::to_json() const {
  return {{"kind", "mlp_denoiser"}, {"data_dim", data_dim}, {"time_embed", time_embed},
          {"cond_dim", cond_dim},   {"hidden", hidden},     {"activation", activation}};
}

DenoiserArch DenoiserArch::from_json(const nlohmann::json& j) {
  DenoiserArch a;
  try {
    a.data_dim = j.at("data_dim").get<int>();
    a.time_embed = j.at("time_embed").get<int>();
    a.cond_dim = j.at("cond_dim").get<int>();
    a.hidden = j.at("hidden").get<std::vector<int>>();
    a.activation = j.at("activation").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Io, std::string("bad denoiser architecture header: ") + e.what());
  }
  require(a.activation == "silu", ErrorKind::Config, "only silu activation is supported");
  require(a.data_dim > 0 && a.time_embed >= 0 && a.time_embed % 2 == 0 && a.cond_dim >= 0,
          ErrorKind::Config, "invalid denoiser dimensions");
  return a;
}

std::vector<double> timestep_embedding(int t, int dims) {
  std::vector<double> e(dims);
  const int half = dims / 2;
  for (int k = 0; k < half; ++k) {
    const double freq = std::exp(-std::log(1000.0) * k / std::max(half, 1));
    e[k] = std::sin(t * freq);
    e[half + k] = std::cos(t * freq);
  }
  return e;
}

Denoiser::Denoiser(DenoiserArch arch, Rng& rng) : arch_(std::move(arch)) {
  build_layers();
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const bool last = i + 1 == layers_.size();
    layers_[i].init(params_, rng, last ? 0.1 : 1.4);
  }
}

Denoiser::Denoiser(DenoiserArch arch, std::vector<double> params) : arch_(std::move(arch)) {
  build_layers();
  require(params.size() == params_.size(), ErrorKind::Io,
          "parameter count does not match architecture");
  params_ = std::move(params);
}

void Denoiser::build_layers() {
  layers_.clear();
  int in = arch_.input_dim();
  std::size_t offset = 0;
  auto add = [&](int out) {
    nn::Dense d{in, out, offset};
    offset += d.param_count();
    layers_.push_back(d);
    in = out;
  };
  for (int h : arch_.hidden) add(h);
  add(arch_.data_dim);
  params_.assign(offset, 0.0);
}

void Denoiser::assemble_input(TensorView x, int t, TensorView cond, std::span<double> in) const {
  require(static_cast<int>(x.size()) == arch_.data_dim, ErrorKind::Contract,
          "denoiser input size mismatch");
  require(static_cast<int>(cond.size()) == arch_.cond_dim, ErrorKind::Contract,
          "denoiser condition size mismatch");
  std::copy(x.begin(), x.end(), in.begin());
  const auto emb = timestep_embedding(t, arch_.time_embed);
  std::copy(emb.begin(), emb.end(), in.begin() + arch_.data_dim);
  std::copy(cond.begin(), cond.end(), in.begin() + arch_.data_dim + arch_.time_embed);
}

Tensor Denoiser::forward(TensorView x, int t, TensorView cond) const {
  std::vector<double> cur(arch_.input_dim());
  assemble_input(x, t, cond, cur);
  std::vector<double> next;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    next.assign(layers_[i].out, 0.0);
    layers_[i].forward(params_, cur, next);
    if (i + 1 < layers_.size())
      for (auto& v : next) v = nn::silu(v);
    cur.swap(next);
  }
  return cur;
}

double Denoiser::example_loss_gradient(const DenoiserExample& ex, std::span<double> grad,
                                       std::span<double> cond_grad) const {
  require(ex.target.size() == ex.x.size(), ErrorKind::Contract, "target size mismatch");
  const std::size_t L = layers_.size();
  // acts[i] is the input to layer i; pre[i] its pre-activation output.
  std::vector<std::vector<double>> acts(L + 1), pre(L);
  acts[0].resize(arch_.input_dim());
  assemble_input(ex.x, ex.t, ex.cond, acts[0]);
  for (std::size_t i = 0; i < L; ++i) {
    pre[i].assign(layers_[i].out, 0.0);
    layers_[i].forward(params_, acts[i], pre[i]);
    acts[i + 1] = pre[i];
    if (i + 1 < L)
      for (auto& v : acts[i + 1]) v = nn::silu(v);
  }

  const auto& out = acts[L];
  const double n = static_cast<double>(out.size());
  double loss = 0.0;
  std::vector<double> delta(out.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double r = out[k] - ex.target[k];
    loss += r * r;
    delta[k] = 2.0 * r / n;
  }
  loss /= n;

  for (std::size_t i = L; i-- > 0;) {
    const bool need_dx = i > 0 || !cond_grad.empty();
    std::vector<double> dx(need_dx ? layers_[i].in : 0);
    layers_[i].backward(params_, acts[i], delta, grad, dx);
    if (i == 0) {
      if (!cond_grad.empty()) {
        const std::size_t off = arch_.data_dim + arch_.time_embed;
        for (int c = 0; c < arch_.cond_dim; ++c) cond_grad[c] = dx[off + c];
      }
      break;
    }
    for (std::size_t k = 0; k < dx.size(); ++k) dx[k] *= nn::silu_grad(pre[i - 1][k]);
    delta.swap(dx);
  }
  return loss;
}

double batch_loss_gradient_serial(const Denoiser& model, std::span<const DenoiserExample> batch,
                                  std::span<double> grad) {
  require(!batch.empty(), ErrorKind::Contract, "empty batch");
  std::fill(grad.begin(), grad.end(), 0.0);
  double loss = 0.0;
  for (const auto& ex : batch) loss += model.example_loss_gradient(ex, grad);
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (auto& g : grad) g *= inv;
  return loss * inv;
}

double batch_loss_gradient_omp(const Denoiser& model, std::span<const DenoiserExample> batch,
                               std::span<double> grad) {
  require(!batch.empty(), ErrorKind::Contract, "empty batch");
  constexpr std::size_t kChunks = 8;
  const std::size_t n = batch.size();
  const std::size_t chunks = std::min(kChunks, n);
  const std::size_t P = grad.size();
  std::vector<double> partial(chunks * P, 0.0);
  std::vector<double> losses(chunks, 0.0);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) {
    const std::size_t lo = c * n / chunks, hi = (c + 1) * n / chunks;
    std::span<double> g(partial.data() + c * P, P);
    double l = 0.0;
    for (std::size_t i = lo; i < hi; ++i) l += model.example_loss_gradient(batch[i], g);
    losses[c] = l;
  }

  std::fill(grad.begin(), grad.end(), 0.0);
  double loss = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    loss += losses[c];
    const double* g = partial.data() + c * P;
    for (std::size_t k = 0; k < P; ++k) grad[k] += g[k];
  }
  const double inv = 1.0 / static_cast<double>(n);
  for (auto& g : grad) g *= inv;
  return loss * inv;
}

}  // namespace strokelab
