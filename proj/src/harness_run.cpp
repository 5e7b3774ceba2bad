#include <algorithm>
#include <cmath>
#include <filesystem>
#include <tuple>

#include "fastlink/allocator.hpp"
#include "fastlink/harness.hpp"
#include "fastlink/kernels.hpp"
#include "fastlink/metrics.hpp"
#include "fastlink/mimo.hpp"
#include "fastlink/predictor.hpp"
#include "fastlink/rng.hpp"

namespace fastlink::harness {

namespace {

// Seed-derivation tags; every consumer of randomness hangs off the
// master seed through one of these, so runs are reproducible end to end.
constexpr std::uint64_t kTagTrainSet = 0x11;
constexpr std::uint64_t kTagDistillSet = 0x12;
constexpr std::uint64_t kTagEvalSet = 0x13;
constexpr std::uint64_t kTagTrain = 0x14;
constexpr std::uint64_t kTagDistill = 0x15;
constexpr std::uint64_t kTagChannel = 0x16;
constexpr std::uint64_t kTagNoise = 0x17;
constexpr std::uint64_t kTagInit = 0x18;

std::vector<codec::ImageSample> load_image_dir(const std::string& path) {
  namespace fs = std::filesystem;
  std::vector<std::string> files;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      if (!entry.is_regular_file()) continue;
      const std::string ext = entry.path().extension().string();
      if (ext == ".pgm" || ext == ".ppm") files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
  } else if (fs::is_regular_file(path)) {
    files.push_back(path);
  }
  if (files.empty())
    throw ConfigError("dataset '" + path + "' holds no .pgm/.ppm images");
  std::vector<codec::ImageSample> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(load_image(f));
  return out;
}

std::vector<codec::ImageSample> make_dataset(const ExperimentConfig& cfg, int count,
                                             std::uint64_t tag) {
  if (cfg.dataset == "synth")
    return synth_dataset(count, cfg.img_width, cfg.img_height, cfg.synth_rho,
                         rng::derive(cfg.master_seed, tag));

  std::vector<codec::ImageSample> loaded = load_image_dir(cfg.dataset);
  for (const auto& img : loaded)
    if (img.width != cfg.img_width || img.height != cfg.img_height ||
        img.channels != cfg.channels)
      throw ConfigError("dataset image shape does not match the configured codec shape");
  std::vector<codec::ImageSample> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(loaded[i % loaded.size()]);
  return out;
}

metrics::QualityReport score(const codec::ImageSample& img, const std::vector<double>& s_hat) {
  if (img.channels == 1)
    return metrics::evaluate(img.pixels, s_hat, img.width, img.height, 1.0);

  // Multi-channel: MSE/PSNR over the flat vector, SSIM averaged per plane.
  std::vector<double> clamped(s_hat.size());
  for (std::size_t i = 0; i < s_hat.size(); ++i) clamped[i] = std::clamp(s_hat[i], 0.0, 1.0);
  metrics::QualityReport r;
  r.mse = metrics::mse(img.pixels, clamped);
  r.psnr = metrics::psnr(img.pixels, clamped, 1.0);
  const std::size_t plane = static_cast<std::size_t>(img.width) * img.height;
  double acc = 0.0;
  for (int ch = 0; ch < img.channels; ++ch) {
    std::vector<double> a(img.pixels.begin() + ch * plane, img.pixels.begin() + (ch + 1) * plane);
    std::vector<double> b(clamped.begin() + ch * plane, clamped.begin() + (ch + 1) * plane);
    const int win = std::min({8, img.width, img.height});
    acc += metrics::ssim(a, b, img.width, img.height, 1.0, win);
  }
  r.ssim = acc / img.channels;
  return r;
}

bool uses_prediction(Scheme s) { return s == Scheme::FastPc || s == Scheme::FastPcIe; }
bool uses_evaluator(Scheme s) { return s == Scheme::FastKcIe || s == Scheme::FastPcIe; }
bool uses_gradient(Scheme s) { return s == Scheme::FastKc || s == Scheme::FastPc; }

// Everything one (mode, snr, trial) cell shares across schemes.
struct TrialContext {
  double sigma2 = 0.0;
  // SISO
  std::vector<cplx> h_future;
  std::vector<cplx> h_pred;
  // MIMO
  std::vector<fading::MatC> hm_future;
  std::vector<fading::MatC> hm_pred;
  std::vector<mimo::Equalizer> eq_true;     // per slot (mimo_mmse)
  std::vector<mimo::SvdTriple> svd_true;    // per slot (mimo_svd)
  std::vector<cplx> noise;                  // flat, shared by every scheme
  double predictor_nmse = 0.0;
  importance::ImportanceVector w_grad;
  importance::ImportanceVector w_eval;
  codec::FeatureTensor a;
};

}  // namespace

ExperimentArtifacts prepare(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentArtifacts art;

  if (!cfg.codec_model.empty()) {
    art.model = codec::load_model(cfg.codec_model);
    if (art.model.l != cfg.l() || art.model.c != cfg.features || art.model.h != cfg.feat_h ||
        art.model.w != cfg.feat_w)
      throw ConfigError("codec_model dims do not match the configured shape");
  } else {
    const auto train_set = make_dataset(cfg, cfg.train_count, kTagTrainSet);
    codec::CodecModel model =
        codec::CodecModel::init(cfg.l(), cfg.features, cfg.feat_h, cfg.feat_w, cfg.use_tanh,
                                rng::derive(cfg.master_seed, kTagInit));
    codec::TrainConfig tc;
    tc.epochs = cfg.train_epochs;
    tc.batch = cfg.train_batch;
    tc.lr = cfg.train_lr;
    tc.power = cfg.power;
    tc.noise_var = noise_var_from_snr(cfg.power, cfg.train_snr_db);
    tc.fade = cfg.train_fade;
    tc.sos_paths = cfg.sos_paths;
    tc.doppler_fd = cfg.doppler_fd;
    tc.sample_period = cfg.sample_period;
    tc.seed = rng::derive(cfg.master_seed, kTagTrain);
    art.model = codec::train(std::move(model), train_set, tc);
  }

  const bool needs_ie =
      std::any_of(cfg.schemes.begin(), cfg.schemes.end(), [](Scheme s) { return uses_evaluator(s); });
  if (needs_ie) {
    if (!cfg.evaluator_model.empty()) {
      art.evaluator = importance::load_evaluator(cfg.evaluator_model);
      if (art.evaluator.feat != art.model.feat() || art.evaluator.c != art.model.c)
        throw ConfigError("evaluator_model dims do not match the codec shape");
    } else {
      art.evaluator = importance::distill_train(build_distill_pairs(cfg, art.model));
    }
    art.has_evaluator = true;
  }
  return art;
}

std::vector<importance::DistillPair> build_distill_pairs(const ExperimentConfig& cfg,
                                                         const codec::CodecModel& model) {
  const auto distill_set = make_dataset(cfg, cfg.distill_count, kTagDistillSet);
  importance::DistillConfig dc;
  dc.power = cfg.power;
  dc.noise_var = noise_var_from_snr(cfg.power, cfg.distill_snr_db);
  dc.fade = true;
  dc.sos_paths = cfg.sos_paths;
  dc.doppler_fd = cfg.doppler_fd;
  dc.sample_period = cfg.sample_period;
  dc.seed = rng::derive(cfg.master_seed, kTagDistill);
  dc.pooling = cfg.pooling();
  return importance::build_distill_dataset(model, distill_set, dc);
}

namespace {

TrialContext build_context(const ExperimentConfig& cfg, const ExperimentArtifacts& art,
                           Mode mode, int mode_idx, int snr_idx, int trial,
                           const codec::ImageSample& img) {
  TrialContext ctx;
  ctx.sigma2 = noise_var_from_snr(cfg.power, cfg.snr_db[snr_idx]);

  const bool need_grad = std::any_of(cfg.schemes.begin(), cfg.schemes.end(), uses_gradient);
  const bool need_eval = std::any_of(cfg.schemes.begin(), cfg.schemes.end(), uses_evaluator);
  const bool need_pred = std::any_of(cfg.schemes.begin(), cfg.schemes.end(), uses_prediction);

  ctx.a = codec::encode(art.model, img);
  if (need_grad) {
    // Transmitter-side surrogate for the gradient labels: a local
    // noiseless encode->decode pass stands in for the received image.
    const std::vector<double> s_local = codec::decode(art.model, ctx.a);
    ctx.w_grad = importance::grad_importance(art.model, ctx.a, img.pixels, s_local, cfg.pooling());
  }
  if (need_eval) ctx.w_eval = importance::evaluate(art.evaluator, ctx.a);

  const int c = cfg.features;
  const int n_stream = std::min(cfg.nr, cfg.nt);
  const int slots = mode == Mode::Siso ? c : (mode == Mode::MimoMmse ? c / cfg.nt : c / n_stream);
  const int spf = cfg.feat_h * cfg.feat_w / 2;  // symbols per feature
  const std::uint64_t chseed = rng::derive(rng::derive(cfg.master_seed, kTagChannel,
                                                       static_cast<std::uint64_t>(mode_idx)),
                                           static_cast<std::uint64_t>(snr_idx),
                                           static_cast<std::uint64_t>(trial));
  const std::uint64_t nseed = rng::derive(rng::derive(cfg.master_seed, kTagNoise,
                                                      static_cast<std::uint64_t>(mode_idx)),
                                          static_cast<std::uint64_t>(snr_idx),
                                          static_cast<std::uint64_t>(trial));

  const int total = cfg.history_len + slots;
  if (mode == Mode::Siso) {
    const auto sos = fading::SosParams::make(cfg.sos_paths, cfg.doppler_fd, cfg.sample_period,
                                             chseed);
    const auto seq = fading::sos_generate(sos, total, kernels::Backend::Serial);
    const std::vector<cplx> history(seq.gains.begin(), seq.gains.begin() + cfg.history_len);
    ctx.h_future.assign(seq.gains.begin() + cfg.history_len, seq.gains.end());
    if (need_pred) {
      const auto st = predictor::fit(history, cfg.predictor_order);
      ctx.h_pred = predictor::predict(st, slots).gains;
      ctx.predictor_nmse = predictor::nmse(ctx.h_pred, ctx.h_future);
    }
    // One complex noise sample per symbol, shared by every scheme.
    rng::Generator ngen(nseed);
    ctx.noise.resize(static_cast<std::size_t>(c) * spf);
    for (auto& v : ctx.noise) v = ngen.cnormal(ctx.sigma2);
  } else {
    fading::SosParams tmpl;
    tmpl.num_paths = cfg.sos_paths;
    tmpl.doppler_fd = cfg.doppler_fd;
    tmpl.sample_period = cfg.sample_period;
    const auto seq = fading::mimo_generate(tmpl, total, cfg.nr, cfg.nt, chseed,
                                           kernels::Backend::Serial);
    ctx.hm_future.assign(seq.matrices.begin() + cfg.history_len, seq.matrices.end());
    if (need_pred) {
      std::vector<std::vector<predictor::PredictorState>> grid(cfg.nr);
      std::vector<double> link_nmse;
      for (int r = 0; r < cfg.nr; ++r) {
        grid[r].reserve(cfg.nt);
        for (int col = 0; col < cfg.nt; ++col) {
          std::vector<cplx> history(cfg.history_len);
          for (int i = 0; i < cfg.history_len; ++i) history[i] = seq.matrices[i](r, col);
          grid[r].push_back(predictor::fit(history, cfg.predictor_order));
        }
      }
      ctx.hm_pred = predictor::predict_mimo(grid, slots).matrices;
      for (int r = 0; r < cfg.nr; ++r)
        for (int col = 0; col < cfg.nt; ++col) {
          std::vector<cplx> p(slots), t(slots);
          for (int i = 0; i < slots; ++i) {
            p[i] = ctx.hm_pred[i](r, col);
            t[i] = ctx.hm_future[i](r, col);
          }
          link_nmse.push_back(predictor::nmse(p, t));
        }
      double acc = 0.0;
      for (double v : link_nmse) acc += v;
      ctx.predictor_nmse = acc / link_nmse.size();
    }
    // Receiver-side pieces depend only on the true channel; shared.
    if (mode == Mode::MimoMmse) {
      ctx.eq_true.reserve(slots);
      for (int t = 0; t < slots; ++t)
        ctx.eq_true.push_back(mimo::mmse_equalizer(ctx.hm_future[t], cfg.power / cfg.nt,
                                                   ctx.sigma2));
    } else {
      ctx.svd_true.reserve(slots);
      for (int t = 0; t < slots; ++t) ctx.svd_true.push_back(mimo::svd_decompose(ctx.hm_future[t]));
    }
    // Noise: slot-major, then channel use, then receive antenna.
    rng::Generator ngen(nseed);
    ctx.noise.resize(static_cast<std::size_t>(slots) * spf * cfg.nr);
    for (auto& v : ctx.noise) v = ngen.cnormal(ctx.sigma2);
  }
  return ctx;
}

ResultRow run_scheme(const ExperimentConfig& cfg, const ExperimentArtifacts& art, Mode mode,
                     Scheme scheme, int snr_idx, int trial, const codec::ImageSample& img,
                     const TrialContext& ctx) {
  const int c = cfg.features;
  const int spf = cfg.feat_h * cfg.feat_w / 2;
  const int n_stream = std::min(cfg.nr, cfg.nt);

  // Forward allocation.
  alloc::Allocation allocation;
  if (scheme == Scheme::Jscc) {
    allocation.organized = ctx.a;
    allocation.eta.resize(c);
    for (int i = 0; i < c; ++i) allocation.eta[i] = i;
  } else {
    const auto& omega = uses_evaluator(scheme) ? ctx.w_eval.scores : ctx.w_grad.scores;
    if (mode == Mode::Siso) {
      const auto& csi = uses_prediction(scheme) ? ctx.h_pred : ctx.h_future;
      allocation = alloc::time_allocate(ctx.a, omega, csi);
    } else if (mode == Mode::MimoMmse) {
      const auto& csi = uses_prediction(scheme) ? ctx.hm_pred : ctx.hm_future;
      allocation = alloc::st_allocate_mmse(ctx.a, omega, csi, cfg.power / cfg.nt, ctx.sigma2);
    } else {
      const auto& csi = uses_prediction(scheme) ? ctx.hm_pred : ctx.hm_future;
      allocation = alloc::st_allocate_svd(ctx.a, omega, csi);
    }
  }

  // Transmit with the scheme-independent noise realization; the receiver
  // knows the true per-slot CSI.
  const double sym_power = mode == Mode::Siso ? cfg.power
                          : mode == Mode::MimoMmse ? cfg.power / cfg.nt
                                                   : cfg.power / cfg.d;
  codec::SymbolBlock block = codec::to_symbols(allocation.organized, sym_power);
  std::vector<cplx> rx(block.symbols.size());

  if (mode == Mode::Siso) {
    for (std::size_t j = 0; j < block.symbols.size(); ++j) {
      const cplx h = ctx.h_future[j / spf];
      if (std::abs(h) == 0.0) throw IntegrityError("run_experiment: zero fading gain");
      rx[j] = (h * block.symbols[j] + ctx.noise[j]) / h;
    }
  } else if (mode == Mode::MimoMmse) {
    const int slots = c / cfg.nt;
    mimo::VecC x(cfg.nt), y(cfg.nr);
    for (int t = 0; t < slots; ++t) {
      const auto& h = ctx.hm_future[t];
      const auto& eq = ctx.eq_true[t];
      for (int i = 0; i < spf; ++i) {
        for (int j = 0; j < cfg.nt; ++j)
          x(j) = block.symbols[static_cast<std::size_t>(t * cfg.nt + j) * spf + i];
        y = h * x;
        for (int r = 0; r < cfg.nr; ++r)
          y(r) += ctx.noise[(static_cast<std::size_t>(t) * spf + i) * cfg.nr + r];
        const mimo::VecC xh = eq.g * y;
        for (int j = 0; j < cfg.nt; ++j)
          rx[static_cast<std::size_t>(t * cfg.nt + j) * spf + i] = xh(j);
      }
    }
  } else {
    const int slots = c / n_stream;
    mimo::VecC x(cfg.d), y(cfg.nr);
    for (int t = 0; t < slots; ++t) {
      const auto& h = ctx.hm_future[t];
      const auto& svd = ctx.svd_true[t];
      const fading::MatC hv = h * svd.v.leftCols(cfg.d);  // effective precoded channel
      for (int i = 0; i < spf; ++i) {
        for (int j = 0; j < cfg.d; ++j)
          x(j) = block.symbols[static_cast<std::size_t>(t * cfg.d + j) * spf + i];
        y = hv * x;
        for (int r = 0; r < cfg.nr; ++r)
          y(r) += ctx.noise[(static_cast<std::size_t>(t) * spf + i) * cfg.nr + r];
        const mimo::VecC z = (svd.u.adjoint() * y).head(cfg.d);
        for (int j = 0; j < cfg.d; ++j) {
          const double lam = svd.lambda[static_cast<std::size_t>(j)];
          rx[static_cast<std::size_t>(t * cfg.d + j) * spf + i] = lam > 0.0 ? z(j) / lam : 0.0;
        }
      }
    }
  }

  block.symbols = std::move(rx);
  const codec::FeatureTensor received = codec::from_symbols(block, c, cfg.feat_h, cfg.feat_w);
  const codec::FeatureTensor restored = alloc::inverse_allocate(received, allocation.eta);
  const std::vector<double> s_hat = codec::decode(art.model, restored);
  const metrics::QualityReport q = score(img, s_hat);

  ResultRow row;
  row.scheme = to_string(scheme);
  row.mode = to_string(mode);
  row.snr_db = cfg.snr_db[snr_idx];
  row.trial = trial;
  row.psnr = q.psnr;
  row.ssim = q.ssim;
  row.mse = q.mse;
  row.side_info_bits = scheme == Scheme::Jscc ? 0 : alloc::side_info_bits(c);
  row.predictor_nmse = uses_prediction(scheme) ? ctx.predictor_nmse : 0.0;
  return row;
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg,
                                      const ExperimentArtifacts& art) {
  cfg.validate();
  if (art.model.l != cfg.l() || art.model.c != cfg.features)
    throw ConfigError("run_experiment: artifacts do not match the configuration");
  const bool needs_ie =
      std::any_of(cfg.schemes.begin(), cfg.schemes.end(), [](Scheme s) { return uses_evaluator(s); });
  if (needs_ie && !art.has_evaluator)
    throw ConfigError("run_experiment: configuration needs an importance evaluator");

  const auto eval_set = make_dataset(cfg, cfg.trials, kTagEvalSet);

  const int n_modes = static_cast<int>(cfg.modes.size());
  const int n_snr = static_cast<int>(cfg.snr_db.size());
  const int n_schemes = static_cast<int>(cfg.schemes.size());
  const int combos = n_modes * n_snr * cfg.trials;

  std::vector<ResultRow> rows(static_cast<std::size_t>(combos) * n_schemes);
#pragma omp parallel for schedule(dynamic) num_threads(kernels::max_threads())
  for (int idx = 0; idx < combos; ++idx) {
    const int mode_idx = idx / (n_snr * cfg.trials);
    const int snr_idx = (idx / cfg.trials) % n_snr;
    const int trial = idx % cfg.trials;
    const Mode mode = cfg.modes[static_cast<std::size_t>(mode_idx)];
    const codec::ImageSample& img = eval_set[static_cast<std::size_t>(trial)];

    const TrialContext ctx =
        build_context(cfg, art, mode, mode_idx, snr_idx, trial, img);
    for (int s = 0; s < n_schemes; ++s)
      rows[static_cast<std::size_t>(idx) * n_schemes + s] =
          run_scheme(cfg, art, mode, cfg.schemes[static_cast<std::size_t>(s)], snr_idx, trial,
                     img, ctx);
  }

  std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.scheme, a.mode, a.snr_db, a.trial) <
           std::tie(b.scheme, b.mode, b.snr_db, b.trial);
  });
  return rows;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
  return run_experiment(cfg, prepare(cfg));
}

}  // namespace fastlink::harness
