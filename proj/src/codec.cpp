#include "fastlink/codec.hpp"

#include <cmath>
#include <fstream>

#include "fastlink/binio.hpp"
#include "fastlink/kernels.hpp"
#include "fastlink/rng.hpp"

namespace fastlink::codec {

namespace {
constexpr char kModelMagic[9] = "FLNKCDC1";

void check_shape(int l, int c, int h, int w) {
  if (l < 1 || c < 1 || h < 1 || w < 1) throw ConfigError("codec: dims must be positive");
  if ((c * h * w) % 2 != 0) throw ConfigError("codec: c*h*w must be even for complex pairing");
}
}  // namespace

CodecModel CodecModel::init(int l, int c, int h, int w, bool use_tanh, std::uint64_t seed) {
  check_shape(l, c, h, w);
  CodecModel m;
  m.l = l;
  m.c = c;
  m.h = h;
  m.w = w;
  m.use_tanh = use_tanh;
  const int f = m.feat();
  m.w1.resize(static_cast<std::size_t>(f) * l);
  m.b1.assign(f, 0.0);
  m.w2.resize(static_cast<std::size_t>(l) * f);
  m.b2.assign(l, 0.0);

  rng::Generator gen(seed);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(l));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(f));
  for (auto& v : m.w1) v = s1 * gen.normal();
  for (auto& v : m.w2) v = s2 * gen.normal();
  return m;
}

FeatureTensor encode(const CodecModel& model, const ImageSample& s) {
  if (s.length() != model.l || static_cast<int>(s.pixels.size()) != model.l)
    throw ConfigError("codec::encode: image length does not match model");
  FeatureTensor a;
  a.c = model.c;
  a.h = model.h;
  a.w = model.w;
  a.values.resize(model.feat());
  kernels::affine(model.w1.data(), s.pixels.data(), model.b1.data(), a.values.data(),
                  model.feat(), model.l);
  if (model.use_tanh)
    for (auto& v : a.values) v = std::tanh(v);
  return a;
}

std::vector<double> decode(const CodecModel& model, const FeatureTensor& a) {
  if (a.size() != model.feat() || static_cast<int>(a.values.size()) != model.feat())
    throw ConfigError("codec::decode: tensor shape does not match model");
  std::vector<double> s_hat(model.l);
  kernels::affine(model.w2.data(), a.values.data(), model.b2.data(), s_hat.data(), model.l,
                  model.feat());
  return s_hat;
}

double loss(const std::vector<double>& s, const std::vector<double>& s_hat) {
  if (s.size() != s_hat.size() || s.empty()) throw ConfigError("codec::loss: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double d = s_hat[i] - s[i];
    acc += d * d;
  }
  return acc / static_cast<double>(s.size());
}

SymbolBlock to_symbols(const FeatureTensor& a, double power) {
  if (a.size() % 2 != 0 || a.values.empty())
    throw ConfigError("codec::to_symbols: element count must be even and nonzero");
  if (!(power > 0.0)) throw ConfigError("codec::to_symbols: power must be > 0");

  const int k = a.size() / 2;
  double norm2 = 0.0;
  for (double v : a.values) norm2 += v * v;

  SymbolBlock block;
  block.power = power;
  block.scale = norm2 > 0.0 ? std::sqrt(power * k / norm2) : 1.0;
  block.symbols.resize(k);
  for (int j = 0; j < k; ++j)
    block.symbols[j] = block.scale * cplx(a.values[2 * j], a.values[2 * j + 1]);
  return block;
}

FeatureTensor from_symbols(const SymbolBlock& block, int c, int h, int w) {
  check_shape(1, c, h, w);
  const int k = c * h * w / 2;
  if (static_cast<int>(block.symbols.size()) != k)
    throw ConfigError("codec::from_symbols: symbol count does not match shape");
  if (!(block.scale != 0.0)) throw IntegrityError("codec::from_symbols: zero scale");

  FeatureTensor a;
  a.c = c;
  a.h = h;
  a.w = w;
  a.values.resize(2 * k);
  const double inv = 1.0 / block.scale;
  for (int j = 0; j < k; ++j) {
    a.values[2 * j] = block.symbols[j].real() * inv;
    a.values[2 * j + 1] = block.symbols[j].imag() * inv;
  }
  return a;
}

namespace {

// Forward pass intermediates shared by forward_loss and the backward pass.
struct ForwardTrace {
  std::vector<double> a;      // post-activation features (length 2k)
  std::vector<double> u;      // equalized-noise perturbation, paired back to reals
  std::vector<double> a_hat;  // decoder input a + u/scale
  std::vector<double> s_hat;
  double norm_a = 0.0;  // |a|
  double scale = 1.0;
  bool noisy = false;
  double loss = 0.0;
};

ForwardTrace run_forward(const CodecModel& model, const ImageSample& s, const ChannelDraw& draw,
                         double power) {
  const int f = model.feat();
  const int k = f / 2;
  const int syms_per_feature = model.h * model.w / 2;
  if (!draw.gains.empty() && static_cast<int>(draw.gains.size()) != model.c)
    throw ConfigError("codec: channel draw needs one gain per feature");
  if (!draw.noise.empty() && static_cast<int>(draw.noise.size()) != k)
    throw ConfigError("codec: channel draw needs one noise sample per symbol");

  ForwardTrace t;
  FeatureTensor enc = encode(model, s);
  t.a = std::move(enc.values);

  double norm2 = 0.0;
  for (double v : t.a) norm2 += v * v;
  t.norm_a = std::sqrt(norm2);
  t.scale = norm2 > 0.0 ? std::sqrt(power * k / norm2) : 1.0;

  t.noisy = !draw.noise.empty();
  t.a_hat = t.a;
  if (t.noisy) {
    t.u.resize(f);
    for (int j = 0; j < k; ++j) {
      cplx h = draw.gains.empty() ? cplx(1.0, 0.0) : draw.gains[j / syms_per_feature];
      if (std::abs(h) == 0.0)
        throw IntegrityError("codec: zero channel gain cannot be zero-forced");
      const cplx e = draw.noise[j] / h;  // equalized noise on symbol j
      t.u[2 * j] = e.real();
      t.u[2 * j + 1] = e.imag();
      t.a_hat[2 * j] += t.u[2 * j] / t.scale;
      t.a_hat[2 * j + 1] += t.u[2 * j + 1] / t.scale;
    }
  }

  FeatureTensor dec_in;
  dec_in.c = model.c;
  dec_in.h = model.h;
  dec_in.w = model.w;
  dec_in.values = t.a_hat;
  t.s_hat = decode(model, dec_in);
  t.loss = loss(s.pixels, t.s_hat);
  return t;
}

}  // namespace

double forward_loss(const CodecModel& model, const ImageSample& s, const ChannelDraw& draw,
                    double power, std::vector<double>* s_hat_out) {
  ForwardTrace t = run_forward(model, s, draw, power);
  if (s_hat_out) *s_hat_out = std::move(t.s_hat);
  return t.loss;
}

std::vector<double> loss_grad_wrt_features(const CodecModel& model, const std::vector<double>& s,
                                           const std::vector<double>& s_hat) {
  if (static_cast<int>(s.size()) != model.l || s.size() != s_hat.size())
    throw ConfigError("codec::loss_grad_wrt_features: length mismatch");
  std::vector<double> r(model.l);
  const double scale = 2.0 / model.l;
  for (int i = 0; i < model.l; ++i) r[i] = scale * (s_hat[i] - s[i]);
  std::vector<double> g(model.feat());
  // g = W2^T r.
  kernels::matmul_tn(model.w2.data(), r.data(), g.data(), model.feat(), model.l, 1);
  return g;
}

Gradients batch_gradients(const CodecModel& model, const std::vector<ImageSample>& batch,
                          const std::vector<ChannelDraw>& draws, double power) {
  if (batch.empty() || batch.size() != draws.size())
    throw ConfigError("codec::batch_gradients: batch and draws must match and be nonempty");

  const int f = model.feat();
  const int l = model.l;
  const int k = f / 2;
  Gradients g;
  g.w1.assign(model.w1.size(), 0.0);
  g.b1.assign(model.b1.size(), 0.0);
  g.w2.assign(model.w2.size(), 0.0);
  g.b2.assign(model.b2.size(), 0.0);

  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  for (std::size_t bi = 0; bi < batch.size(); ++bi) {
    const ImageSample& s = batch[bi];
    ForwardTrace t = run_forward(model, s, draws[bi], power);
    g.loss += t.loss * inv_batch;

    // r = (2/l)(s_hat - s); decoder grads use the decoder input a_hat.
    std::vector<double> r(l);
    for (int i = 0; i < l; ++i) r[i] = 2.0 / l * (t.s_hat[i] - s.pixels[i]);
    for (int i = 0; i < l; ++i) {
      const double ri = r[i] * inv_batch;
      double* row = g.w2.data() + static_cast<std::size_t>(i) * f;
      for (int j = 0; j < f; ++j) row[j] += ri * t.a_hat[j];
      g.b2[i] += ri;
    }

    // da = W2^T r, plus the power-normalizer term when noise flowed
    // through 1/scale: a_hat = a + u * |a| / sqrt(P k).
    std::vector<double> da(f);
    kernels::matmul_tn(model.w2.data(), r.data(), da.data(), f, l, 1);
    if (t.noisy && t.norm_a > 0.0) {
      double dot = 0.0;
      for (int j = 0; j < f; ++j) dot += da[j] * t.u[j];
      const double coef = dot / (t.norm_a * std::sqrt(power * k));
      for (int j = 0; j < f; ++j) da[j] += coef * t.a[j];
    }

    // Through the optional tanh: a = tanh(z) => dz = da * (1 - a^2).
    if (model.use_tanh)
      for (int j = 0; j < f; ++j) da[j] *= 1.0 - t.a[j] * t.a[j];

    for (int j = 0; j < f; ++j) {
      const double dj = da[j] * inv_batch;
      double* row = g.w1.data() + static_cast<std::size_t>(j) * l;
      for (int i = 0; i < l; ++i) row[i] += dj * s.pixels[i];
      g.b1[j] += dj;
    }
  }
  return g;
}

CodecModel train(CodecModel model, const std::vector<ImageSample>& dataset,
                 const TrainConfig& cfg, TrainReport* report) {
  if (dataset.empty()) throw ConfigError("codec::train: dataset is empty");
  if (cfg.epochs < 1 || cfg.batch < 1 || !(cfg.lr > 0.0) || !(cfg.power > 0.0))
    throw ConfigError("codec::train: bad training configuration");

  const int n = static_cast<int>(dataset.size());
  const int k = model.feat() / 2;
  const int steps = (n + cfg.batch - 1) / cfg.batch;
  rng::Generator pick(rng::derive(cfg.seed, 0x7261696e));

  // One epoch = one shuffled pass over the dataset; batch == n is exact
  // full-batch gradient descent.
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

  if (report) report->epoch_loss.clear();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(pick.next_u64() % static_cast<std::uint64_t>(i + 1));
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    for (int step = 0; step < steps; ++step) {
      const int begin = step * cfg.batch;
      const int count = std::min(cfg.batch, n - begin);
      std::vector<ImageSample> batch;
      std::vector<ChannelDraw> draws;
      batch.reserve(static_cast<std::size_t>(count));
      draws.reserve(static_cast<std::size_t>(count));
      for (int b = 0; b < count; ++b) {
        batch.push_back(dataset[static_cast<std::size_t>(order[static_cast<std::size_t>(begin + b)])]);
        ChannelDraw d;
        if (cfg.fade) {
          const auto sos = fading::SosParams::make(
              cfg.sos_paths, cfg.doppler_fd, cfg.sample_period,
              rng::derive(cfg.seed, 0xc51, static_cast<std::uint64_t>(epoch * steps + step),
                          static_cast<std::uint64_t>(b)));
          d.gains = fading::sos_generate(sos, model.c).gains;
        }
        if (cfg.noise_var > 0.0) {
          rng::Generator ngen(rng::derive(cfg.seed, 0xa34,
                                          static_cast<std::uint64_t>(epoch * steps + step),
                                          static_cast<std::uint64_t>(b)));
          d.noise.resize(k);
          for (auto& v : d.noise) v = ngen.cnormal(cfg.noise_var);
        }
        draws.push_back(std::move(d));
      }

      Gradients grad = batch_gradients(model, batch, draws, cfg.power);
      if (!std::isfinite(grad.loss))
        throw IntegrityError("codec::train: loss diverged (non-finite) at epoch " +
                             std::to_string(epoch));

      for (std::size_t i = 0; i < model.w1.size(); ++i) model.w1[i] -= cfg.lr * grad.w1[i];
      for (std::size_t i = 0; i < model.b1.size(); ++i) model.b1[i] -= cfg.lr * grad.b1[i];
      for (std::size_t i = 0; i < model.w2.size(); ++i) model.w2[i] -= cfg.lr * grad.w2[i];
      for (std::size_t i = 0; i < model.b2.size(); ++i) model.b2[i] -= cfg.lr * grad.b2[i];
    }

    // End-of-epoch mean loss over the whole training set, noiseless
    // identity pass: deterministic, so the recorded curve reflects the
    // model trajectory instead of minibatch sampling noise.
    if (report) {
      double eval = 0.0;
      for (const auto& s : dataset) eval += forward_loss(model, s, ChannelDraw{}, cfg.power);
      report->epoch_loss.push_back(eval / n);
    }
  }
  return model;
}

void save_model(const CodecModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IntegrityError("codec::save_model: cannot open " + path);
  binio::write_magic(out, kModelMagic);
  binio::write_i32(out, model.l);
  binio::write_i32(out, model.c);
  binio::write_i32(out, model.h);
  binio::write_i32(out, model.w);
  binio::write_u8(out, model.use_tanh ? 1 : 0);
  binio::write_f64s(out, model.w1);
  binio::write_f64s(out, model.b1);
  binio::write_f64s(out, model.w2);
  binio::write_f64s(out, model.b2);
  if (!out) throw IntegrityError("codec::save_model: write failed for " + path);
}

CodecModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IntegrityError("codec::load_model: cannot open " + path);
  binio::check_magic(in, kModelMagic, "codec model");

  CodecModel m;
  m.l = binio::read_i32(in, "model dims");
  m.c = binio::read_i32(in, "model dims");
  m.h = binio::read_i32(in, "model dims");
  m.w = binio::read_i32(in, "model dims");
  check_shape(m.l, m.c, m.h, m.w);
  m.use_tanh = binio::read_u8(in, "model flags") != 0;
  const std::size_t f = static_cast<std::size_t>(m.feat());
  binio::read_f64s(in, m.w1, f * m.l, "encoder weights");
  binio::read_f64s(in, m.b1, f, "encoder bias");
  binio::read_f64s(in, m.w2, static_cast<std::size_t>(m.l) * f, "decoder weights");
  binio::read_f64s(in, m.b2, static_cast<std::size_t>(m.l), "decoder bias");
  if (!all_finite(m.w1) || !all_finite(m.b1) || !all_finite(m.w2) || !all_finite(m.b2))
    throw IntegrityError("codec::load_model: non-finite weights in " + path);
  return m;
}

}  // namespace fastlink::codec
