#include "strokelab/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "strokelab/dataset.hpp"
#include "strokelab/diffusion.hpp"
#include "strokelab/error.hpp"
#include "strokelab/fit.hpp"
#include "strokelab/io.hpp"
#include "strokelab/metrics.hpp"
#include "strokelab/painting.hpp"
#include "strokelab/predictor.hpp"
#include "strokelab/raster.hpp"
#include "strokelab/verify.hpp"

namespace strokelab {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string numbered(const std::string& stem, std::size_t i, const std::string& ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04zu.%s", stem.c_str(), i, ext.c_str());
  return buf;
}

std::vector<double> parse_triple(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      v.push_back(std::stod(item));
    } catch (const std::exception&) {
      fail(ErrorKind::Config, "--lambda-m expects three comma-separated numbers");
    }
  }
  require(v.size() == 3, ErrorKind::Config, "--lambda-m expects three comma-separated numbers");
  return v;
}

std::vector<fs::path> list_images(const fs::path& dir) {
  require(fs::is_directory(dir), ErrorKind::Io, "not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto ext = e.path().extension().string();
    if (e.is_regular_file() && (ext == ".pgm" || ext == ".ppm" || ext == ".pnm"))
      out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Records the resolved options of a subcommand so it can be replayed.
json options_json(const CLI::App& sub) {
  json cfg = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "out") continue;
    const auto res = opt->results();
    const std::string value = res.empty() ? opt->get_default_str() : res.front();
    if (opt->get_expected_min() == 0 && value.empty()) cfg[name] = false;
    else if (value == "true" || value == "false") cfg[name] = value == "true";
    else if (!value.empty()) cfg[name] = value;
  }
  return cfg;
}

void finish(const CLI::App& sub, const fs::path& out, std::uint64_t seed,
            std::vector<std::string> inputs, std::vector<std::string> outputs) {
  io::RunManifest m;
  m.command = sub.get_name();
  m.config = options_json(sub);
  m.seed = seed;
  m.inputs = std::move(inputs);
  m.outputs = std::move(outputs);
  io::write_manifest(out, m);
}

json schedule_json(int steps, ScheduleMode mode) {
  return {{"steps", steps}, {"mode", to_string(mode)}, {"beta_start", 0.00085}, {"beta_end", 0.012}};
}

NoiseSchedule schedule_from_json(const json& j) {
  return build_schedule(j.at("steps").get<int>(), j.at("beta_start").get<double>(),
                        j.at("beta_end").get<double>(),
                        parse_schedule_mode(j.at("mode").get<std::string>()));
}

struct LoadedDiffusion {
  json header;
  Denoiser model;
  std::optional<ConditionProjector> projector;
};

LoadedDiffusion load_diffusion(const fs::path& path) {
  io::Checkpoint c = io::load_checkpoint(path);
  require(c.header.contains("denoiser"), ErrorKind::Io, "not a diffusion checkpoint: " + path.string());
  const DenoiserArch arch = DenoiserArch::from_json(c.header.at("denoiser"));
  Rng unused(0);
  const Denoiser probe(arch, unused);
  const std::size_t n = probe.param_count();
  require(c.params.size() >= n, ErrorKind::Io, "checkpoint payload too short: " + path.string());
  std::vector<double> model_params(c.params.begin(), c.params.begin() + n);
  LoadedDiffusion out{c.header, Denoiser(arch, std::move(model_params)), std::nullopt};
  if (c.header.contains("projector") && !c.header.at("projector").is_null()) {
    const auto& pj = c.header.at("projector");
    out.projector.emplace(pj.at("input_dim").get<int>(), pj.at("output_dim").get<int>(),
                          std::vector<double>(c.params.begin() + n, c.params.end()));
  } else {
    require(c.params.size() == n, ErrorKind::Io, "unexpected trailing checkpoint data");
  }
  return out;
}

StrokePredictor load_predictor(const fs::path& path) {
  io::Checkpoint c = io::load_checkpoint(path);
  require(c.header.contains("predictor"), ErrorKind::Io, "not a predictor checkpoint: " + path.string());
  return StrokePredictor(PredictorArch::from_json(c.header.at("predictor")), std::move(c.params));
}

// ---- option holders -------------------------------------------------------

struct GenDataOpts {
  std::size_t count = 16;
  int canvas_size = 32;
  std::uint64_t seed = 0;
  bool flip_h = false, flip_v = false, rotate = false, gray = false;
  std::string out;
};

struct VerifyOpts {
  int steps = 1000;
  std::string schedule = "scaled_linear";
  int t_stride = 50;
  std::size_t mc_draws = 1000000;
  std::uint64_t seed = 0;
  std::string out;
};

struct TrainDiffusionOpts {
  std::string data;
  int steps = 64;
  double upsilon = 0.5;
  std::string eta_mode = "eta_uniform";
  int prior_pairs = 8;
  std::string prior_mode = "stochastic";
  int epochs = 120;
  int batch_size = 32;
  double lr = 1e-3;
  double lr_decay = 0.99;
  int hidden = 256;
  int cond_dim = 0;
  std::uint64_t seed = 0;
  std::string out;
};

struct SampleOpts {
  std::string model;
  std::size_t count = 4;
  std::string eta_mode;
  std::string prior_mode;
  std::string condition;
  bool no_noise = false;
  std::uint64_t seed = 0;
  std::string out;
};

struct FitOpts {
  std::string target;
  int iterations = 300;
  std::uint64_t seed = 0;
  std::string out;
};

struct TrainPredictorOpts {
  std::size_t scenes = 3000;
  std::size_t heldout = 1000;
  int epochs = 20;
  int canvas_size = 32;
  std::string lambda_m = "5,10,10";
  double lambda_r = 5.0;
  double margin = 0.125;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  std::string out;
};

struct PaintOpts {
  std::string model;
  std::string target;
  int layers = 2;
  double presence = 0.5;
  std::string texture_model;
  std::uint64_t seed = 0;
  std::string out;
};

struct MetricsOpts {
  std::string images;
  std::string reference;
  double threshold = 0.1;
  std::string out;
};

// ---- commands ---------------------------------------------------------------

void cmd_gen_data(const CLI::App& sub, const GenDataOpts& o) {
  AugmentOptions aug{o.flip_h, o.flip_v, o.rotate};
  const auto samples = generate_stroke_dataset(o.count, o.canvas_size, o.seed, o.gray ? 1 : 3, aug);
  const fs::path out(o.out);
  std::vector<std::string> outputs;
  std::vector<BezierStroke> strokes;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto name = numbered("stroke", i, o.gray ? "pgm" : "ppm");
    io::write_pnm(out / name, samples[i].image);
    outputs.push_back(name);
    strokes.push_back(samples[i].stroke);
  }
  io::write_strokes(out / "strokes.json", strokes);
  outputs.push_back("strokes.json");
  finish(sub, out, o.seed, {}, outputs);
}

int cmd_verify_math(const CLI::App& sub, const VerifyOpts& o) {
  const NoiseSchedule s = build_schedule(o.steps, 0.00085, 0.012, parse_schedule_mode(o.schedule));
  VerifyConfig cfg;
  cfg.t_stride = o.t_stride;
  cfg.mc_draws = o.mc_draws;
  cfg.seed = o.seed;
  const auto results = run_identity_suite(s, cfg);
  const fs::path out(o.out);
  write_verify_csv(out / "verify.csv", results);
  finish(sub, out, o.seed, {}, {"verify.csv"});
  for (const auto& r : results)
    std::cout << (r.pass ? "pass " : "FAIL ") << r.identity << " max_error=" << r.max_error
              << " tolerance=" << r.tolerance << "\n";
  if (!all_pass(results)) {
    std::cerr << "identity suite failed\n";
    return exit_code(ErrorKind::Verification);
  }
  return 0;
}

void cmd_train_diffusion(const CLI::App& sub, const TrainDiffusionOpts& o) {
  const auto files = list_images(o.data);
  require(!files.empty(), ErrorKind::Io, "no images found in " + o.data);
  std::vector<StrokeSample> samples;
  std::vector<BezierStroke> strokes;
  const bool conditional = o.cond_dim > 0;
  if (conditional) {
    strokes = io::read_strokes(fs::path(o.data) / "strokes.json");
    require(strokes.size() == files.size(), ErrorKind::Io, "strokes.json does not match the images");
  }
  for (std::size_t i = 0; i < files.size(); ++i) {
    StrokeSample smp{conditional ? strokes[i] : BezierStroke{}, io::read_pnm(files[i])};
    require(smp.image.width == smp.image.height, ErrorKind::Io, "training images must be square");
    if (!samples.empty())
      require(smp.image.width == samples.front().image.width, ErrorKind::Io,
              "training images differ in size");
    samples.push_back(std::move(smp));
  }
  const auto dataset = to_training_images(samples, conditional);

  DiffusionTrainConfig cfg;
  cfg.smr.upsilon = o.upsilon;
  cfg.smr.eta_sampling = parse_eta_sampling(o.eta_mode);
  cfg.smr.prior_pairs = o.prior_pairs;
  cfg.prior_mode = parse_prior_mode(o.prior_mode);
  cfg.epochs = o.epochs;
  cfg.batch_size = o.batch_size;
  cfg.learning_rate = o.lr;
  cfg.lr_decay = o.lr_decay;
  cfg.hidden = {o.hidden, o.hidden};
  cfg.cond_dim = o.cond_dim;
  cfg.seed = o.seed;
  const ScheduleMode mode = ScheduleMode::ScaledLinear;
  const NoiseSchedule sched = build_schedule(o.steps, 0.00085, 0.012, mode);
  const auto res = train_diffusion(dataset, cfg, sched);

  io::Checkpoint ck;
  ck.header = {{"denoiser", res.model.arch().to_json()},
               {"schedule", schedule_json(o.steps, mode)},
               {"side", samples.front().image.width},
               {"upsilon", o.upsilon},
               {"eta_mode", o.eta_mode},
               {"prior_pairs", o.prior_pairs},
               {"prior_mode", o.prior_mode},
               {"projector", nullptr}};
  ck.params.assign(res.model.params().begin(), res.model.params().end());
  if (res.projector) {
    ck.header["projector"] = {{"input_dim", res.projector->input_dim()},
                              {"output_dim", res.projector->output_dim()}};
    ck.params.insert(ck.params.end(), res.projector->weights().begin(), res.projector->weights().end());
  }
  const fs::path out(o.out);
  io::save_checkpoint(out / "model.bin", ck);
  io::write_loss_csv(out / "loss.csv", res.epoch_loss);
  finish(sub, out, o.seed, {o.data}, {"model.bin", "loss.csv"});
}

void cmd_sample(const CLI::App& sub, const SampleOpts& o) {
  const LoadedDiffusion ld = load_diffusion(o.model);
  if (!o.eta_mode.empty())
    require(o.eta_mode == ld.header.value("eta_mode", ""), ErrorKind::Config,
            "--eta-mode differs from the mode the model was trained with");
  if (!o.prior_mode.empty())
    require(o.prior_mode == ld.header.value("prior_mode", ""), ErrorKind::Config,
            "--prior-mode differs from the mode the model was trained with");
  const NoiseSchedule sched = schedule_from_json(ld.header.at("schedule"));
  const int side = ld.header.at("side").get<int>();

  std::vector<BezierStroke> cond_strokes;
  if (ld.projector) {
    require(!o.condition.empty(), ErrorKind::Config, "conditional model needs --condition strokes.json");
    cond_strokes = io::read_strokes(o.condition);
    require(!cond_strokes.empty(), ErrorKind::Config, "condition file holds no strokes");
  }

  SamplerOptions so;
  so.inject_variance = !o.no_noise;
  const fs::path out(o.out);
  std::vector<std::string> outputs;
  for (std::size_t i = 0; i < o.count; ++i) {
    Tensor z;
    if (ld.projector) {
      StrokeSample smp{cond_strokes[i % cond_strokes.size()], blank_canvas(side, side, 1)};
      z = ld.projector->project(to_training_images({smp}, true).front().cond_features);
    }
    const std::uint64_t s = Rng::derive(o.seed, i).next_u64();
    const Tensor x = ancestral_sample(as_predictor(ld.model, z), sched, s,
                                      static_cast<std::size_t>(side) * side, so);
    const auto name = numbered("sample", i, "pgm");
    io::write_pnm(out / name, tensor_to_canvas(x, side));
    outputs.push_back(name);
  }
  std::vector<std::string> inputs{o.model};
  if (!o.condition.empty()) inputs.push_back(o.condition);
  finish(sub, out, o.seed, inputs, outputs);
}

void cmd_fit_stroke(const CLI::App& sub, const FitOpts& o) {
  const Canvas target = io::read_pnm(o.target);
  Rng rng(o.seed);
  FitOptions fo;
  fo.iterations = o.iterations;
  const FitResult r = fit_stroke(target, rng, fo);
  const fs::path out(o.out);
  io::write_strokes(out / "stroke.json", {r.stroke});
  io::write_pnm(out / "render.pnm",
                rasterize_stroke(r.stroke, target.width, target.height, fo.softness, target.channels).canvas);
  io::write_json(out / "fit.json", {{"loss", r.loss},
                                    {"initial", r.initial.to_array()},
                                    {"best_loss_history", r.best_loss_history}});
  finish(sub, out, o.seed, {o.target}, {"stroke.json", "render.pnm", "fit.json"});
}

void cmd_train_predictor(const CLI::App& sub, const TrainPredictorOpts& o) {
  const auto lm = parse_triple(o.lambda_m);
  PredictorTrainConfig cfg;
  cfg.match.lambda_l1 = lm[0];
  cfg.match.lambda_cos = lm[1];
  cfg.match.lambda_d = lm[2];
  cfg.match.lambda_r = o.lambda_r;
  cfg.match.margin = o.margin;
  cfg.match.canvas_side = o.canvas_size;
  cfg.arch.side = o.canvas_size;
  cfg.epochs = o.epochs;
  cfg.learning_rate = o.lr;
  cfg.seed = o.seed;
  SceneConfig sc;
  sc.side = o.canvas_size;
  const auto train = generate_scenes(Rng::derive(o.seed, 1).next_u64(), o.scenes, sc);
  const auto held = generate_scenes(Rng::derive(o.seed, 2).next_u64(), o.heldout, sc);
  const auto res = train_predictor(train, held, cfg);

  const fs::path out(o.out);
  io::Checkpoint ck{{{"predictor", res.model.arch().to_json()}},
                    std::vector<double>(res.model.params().begin(), res.model.params().end())};
  io::save_checkpoint(out / "predictor.bin", ck);
  io::write_loss_csv(out / "loss.csv", res.epoch_loss);
  std::ostringstream rs;
  rs << "epoch,rank_error\n";
  for (std::size_t e = 0; e < res.rank_error.size(); ++e)
    rs << e << "," << io::format_double(res.rank_error[e]) << "\n";
  io::write_text(out / "rank_error.csv", rs.str());
  finish(sub, out, o.seed, {}, {"predictor.bin", "loss.csv", "rank_error.csv"});
}

void cmd_paint(const CLI::App& sub, const PaintOpts& o) {
  const StrokePredictor model = load_predictor(o.model);
  const Canvas target = io::read_pnm(o.target);

  std::optional<LoadedDiffusion> tex;
  TextureSource texture;
  if (!o.texture_model.empty()) {
    tex.emplace(load_diffusion(o.texture_model));
    require(!tex->projector, ErrorKind::Config, "texture model must be unconditional");
    const NoiseSchedule sched = schedule_from_json(tex->header.at("schedule"));
    const int side = tex->header.at("side").get<int>();
    texture = [&, sched, side](const PlacedStroke& ps) {
      const std::uint64_t key = (static_cast<std::uint64_t>(ps.layer) << 40) ^
                                (static_cast<std::uint64_t>(ps.patch_index) << 8) ^
                                static_cast<std::uint64_t>(ps.slot);
      const Tensor x = ancestral_sample(as_predictor(tex->model), sched,
                                        Rng::derive(o.seed, key).next_u64(),
                                        static_cast<std::size_t>(side) * side);
      return tensor_to_canvas(x, side);
    };
  }

  const PaintResult res = layered_paint(target, model, o.layers, o.presence, texture);
  const fs::path out(o.out);
  const std::string ext = res.final_canvas.channels == 1 ? "pgm" : "ppm";
  std::vector<std::string> outputs;
  for (std::size_t k = 0; k < res.layers.size(); ++k) {
    const auto name = numbered("layer", k, ext);
    io::write_pnm(out / name, res.layers[k]);
    outputs.push_back(name);
  }
  io::write_pnm(out / ("final." + ext), res.final_canvas);
  io::write_json(out / "painting.json", painting_manifest(res));
  outputs.push_back("final." + ext);
  outputs.push_back("painting.json");
  std::vector<std::string> inputs{o.model, o.target};
  if (!o.texture_model.empty()) inputs.push_back(o.texture_model);
  finish(sub, out, o.seed, inputs, outputs);
  std::cout << "mse " << mse(res.final_canvas, target) << " strokes " << res.drawn.size() << "\n";
}

void cmd_metrics(const CLI::App& sub, const MetricsOpts& o) {
  const auto files = list_images(o.images);
  std::vector<io::MetricsRow> rows;
  for (const auto& f : files) {
    const Image img = io::read_pnm(f);
    const CrdResult c = connected_regions(img, o.threshold);
    io::MetricsRow row{f.filename().string(), c.region_count, c.area_ratio, -1.0};
    if (!o.reference.empty()) {
      const fs::path ref = fs::path(o.reference) / f.filename();
      if (fs::exists(ref)) row.mse = mse(img, io::read_pnm(ref));
    }
    rows.push_back(row);
  }
  const fs::path out(o.out);
  io::write_metrics_csv(out / "metrics.csv", rows);
  std::vector<std::string> inputs{o.images};
  if (!o.reference.empty()) inputs.push_back(o.reference);
  finish(sub, out, 0, inputs, {"metrics.csv"});
}

// ---- wiring -----------------------------------------------------------------

struct Cli {
  CLI::App app{"Stroke diffusion and painting toolkit"};
  GenDataOpts gen;
  VerifyOpts ver;
  TrainDiffusionOpts td;
  SampleOpts smp;
  FitOpts fit;
  TrainPredictorOpts tp;
  PaintOpts paint;
  MetricsOpts met;
  std::string rerun_manifest, rerun_out;
  std::map<std::string, CLI::App*> subs;

  Cli() {
    app.require_subcommand(1);
    auto* s = sub("gen-data", "Synthesize single-stroke images and their parameters");
    s->add_option("--count", gen.count)->check(CLI::PositiveNumber);
    s->add_option("--canvas-size", gen.canvas_size);
    s->add_option("--seed", gen.seed)->required();
    s->add_flag("--flip-h", gen.flip_h);
    s->add_flag("--flip-v", gen.flip_v);
    s->add_flag("--rotate", gen.rotate);
    s->add_flag("--gray", gen.gray);
    s->add_option("--out", gen.out)->required();

    s = sub("verify-math", "Run the diffusion identity suite");
    s->add_option("--steps", ver.steps);
    s->add_option("--schedule", ver.schedule);
    s->add_option("--t-stride", ver.t_stride);
    s->add_option("--mc-draws", ver.mc_draws);
    s->add_option("--seed", ver.seed)->required();
    s->add_option("--out", ver.out)->required();

    s = sub("train-diffusion", "Train a tau-predicting denoiser on stroke images");
    s->add_option("--data", td.data)->required();
    s->add_option("--steps", td.steps);
    s->add_option("--upsilon", td.upsilon);
    s->add_option("--eta-mode", td.eta_mode);
    s->add_option("--prior-pairs", td.prior_pairs);
    s->add_option("--prior-mode", td.prior_mode);
    s->add_option("--epochs", td.epochs);
    s->add_option("--batch-size", td.batch_size);
    s->add_option("--lr", td.lr);
    s->add_option("--lr-decay", td.lr_decay);
    s->add_option("--hidden", td.hidden);
    s->add_option("--cond-dim", td.cond_dim);
    s->add_option("--seed", td.seed)->required();
    s->add_option("--out", td.out)->required();

    s = sub("sample", "Ancestral sampling from a trained denoiser");
    s->add_option("--model", smp.model)->required();
    s->add_option("--count", smp.count);
    s->add_option("--eta-mode", smp.eta_mode);
    s->add_option("--prior-mode", smp.prior_mode);
    s->add_option("--condition", smp.condition);
    s->add_flag("--no-noise", smp.no_noise);
    s->add_option("--seed", smp.seed)->required();
    s->add_option("--out", smp.out)->required();

    s = sub("fit-stroke", "Fit one Bezier stroke to an image");
    s->add_option("--target", fit.target)->required();
    s->add_option("--iterations", fit.iterations);
    s->add_option("--seed", fit.seed)->required();
    s->add_option("--out", fit.out)->required();

    s = sub("train-predictor", "Train the stroke predictor on synthetic sequences");
    s->add_option("--scenes", tp.scenes);
    s->add_option("--heldout", tp.heldout);
    s->add_option("--epochs", tp.epochs);
    s->add_option("--canvas-size", tp.canvas_size);
    s->add_option("--lambda-m", tp.lambda_m);
    s->add_option("--lambda-r", tp.lambda_r);
    s->add_option("--margin", tp.margin);
    s->add_option("--lr", tp.lr);
    s->add_option("--seed", tp.seed)->required();
    s->add_option("--out", tp.out)->required();

    s = sub("paint", "Layered grid painting of a target image");
    s->add_option("--model", paint.model)->required();
    s->add_option("--target", paint.target)->required();
    s->add_option("--layers", paint.layers);
    s->add_option("--presence", paint.presence);
    s->add_option("--texture-model", paint.texture_model);
    s->add_option("--seed", paint.seed)->required();
    s->add_option("--out", paint.out)->required();

    s = sub("metrics", "CRD and MSE over a directory of images");
    s->add_option("--images", met.images)->required();
    s->add_option("--reference", met.reference);
    s->add_option("--threshold", met.threshold);
    s->add_option("--out", met.out)->required();

    s = sub("rerun", "Replay a command from its manifest");
    s->add_option("--manifest", rerun_manifest)->required();
    s->add_option("--out", rerun_out)->required();

    for (auto& [name, sc] : subs)
      for (CLI::Option* opt : sc->get_options([](CLI::Option*) { return true; }))
        opt->capture_default_str();
  }

  CLI::App* sub(const std::string& name, const std::string& desc) {
    CLI::App* s = app.add_subcommand(name, desc);
    subs[name] = s;
    return s;
  }
};

std::vector<std::string> replay_args(const io::RunManifest& m, const std::string& out) {
  std::vector<std::string> args{m.command};
  for (const auto& [key, value] : m.config.items()) {
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back("--" + key);
      continue;
    }
    args.push_back("--" + key);
    args.push_back(value.is_string() ? value.get<std::string>() : value.dump());
  }
  args.push_back("--out");
  args.push_back(out);
  return args;
}

int dispatch(Cli& c) {
  auto* used = c.app.get_subcommands().front();
  const std::string name = used->get_name();
  if (name == "gen-data") cmd_gen_data(*used, c.gen);
  else if (name == "verify-math") return cmd_verify_math(*used, c.ver);
  else if (name == "train-diffusion") cmd_train_diffusion(*used, c.td);
  else if (name == "sample") cmd_sample(*used, c.smp);
  else if (name == "fit-stroke") cmd_fit_stroke(*used, c.fit);
  else if (name == "train-predictor") cmd_train_predictor(*used, c.tp);
  else if (name == "paint") cmd_paint(*used, c.paint);
  else if (name == "metrics") cmd_metrics(*used, c.met);
  else if (name == "rerun") {
    const io::RunManifest m = io::read_manifest(c.rerun_manifest);
    require(m.command != "rerun", ErrorKind::Config, "cannot replay a rerun manifest");
    return run_cli(replay_args(m, c.rerun_out));
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  Cli c;
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    c.app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return c.app.exit(e);
  } catch (const CLI::ParseError& e) {
    c.app.exit(e);
    return exit_code(ErrorKind::Config);
  }
  try {
    return dispatch(c);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace strokelab
