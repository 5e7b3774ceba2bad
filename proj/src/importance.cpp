#include "fastlink/importance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "fastlink/binio.hpp"
#include "fastlink/rng.hpp"

#include <Eigen/Dense>

namespace fastlink::importance {

namespace {
constexpr char kDatasetMagic[9] = "FLNKDST1";
constexpr char kEvaluatorMagic[9] = "FLNKEVL1";
}  // namespace

std::vector<double> raw_scores(const codec::CodecModel& model, const std::vector<double>& s,
                               const std::vector<double>& s_hat, Pooling pooling) {
  const std::vector<double> g = codec::loss_grad_wrt_features(model, s, s_hat);
  const int hw = model.h * model.w;
  std::vector<double> raw(model.c);
  for (int k = 0; k < model.c; ++k) {
    double acc = 0.0;
    const double* block = g.data() + static_cast<std::size_t>(k) * hw;
    for (int i = 0; i < hw; ++i) acc += pooling == Pooling::Abs ? std::abs(block[i]) : block[i];
    raw[k] = acc / hw;
  }
  return raw;
}

ImportanceVector normalize(const std::vector<double>& raw) {
  if (raw.empty()) throw ConfigError("importance::normalize: empty scores");
  const auto [mn, mx] = std::minmax_element(raw.begin(), raw.end());
  ImportanceVector out;
  out.scores.resize(raw.size());
  if (*mx == *mn) {
    out.tie = true;
    return out;  // all zeros
  }
  const double span = *mx - *mn;
  for (std::size_t i = 0; i < raw.size(); ++i) out.scores[i] = (raw[i] - *mn) / span;
  return out;
}

ImportanceVector grad_importance(const codec::CodecModel& model, const codec::FeatureTensor& a,
                                 const std::vector<double>& s, const std::vector<double>& s_hat,
                                 Pooling pooling) {
  if (a.c != model.c || a.h != model.h || a.w != model.w)
    throw ConfigError("importance::grad_importance: tensor shape mismatch");
  return normalize(raw_scores(model, s, s_hat, pooling));
}

std::vector<DistillPair> build_distill_dataset(const codec::CodecModel& model,
                                               const std::vector<codec::ImageSample>& dataset,
                                               const DistillConfig& cfg) {
  const int k = model.feat() / 2;
  std::vector<DistillPair> pairs;
  pairs.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    codec::ChannelDraw draw;
    if (cfg.fade) {
      const auto sos = fading::SosParams::make(cfg.sos_paths, cfg.doppler_fd, cfg.sample_period,
                                               rng::derive(cfg.seed, 0xd15, i));
      draw.gains = fading::sos_generate(sos, model.c).gains;
    }
    if (cfg.noise_var > 0.0) {
      rng::Generator ngen(rng::derive(cfg.seed, 0xd16, i));
      draw.noise.resize(k);
      for (auto& v : draw.noise) v = ngen.cnormal(cfg.noise_var);
    }

    std::vector<double> s_hat;
    codec::forward_loss(model, dataset[i], draw, cfg.power, &s_hat);

    DistillPair p;
    p.a = codec::encode(model, dataset[i]);
    p.omega = grad_importance(model, p.a, dataset[i].pixels, s_hat, cfg.pooling);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

EvaluatorModel distill_train(const std::vector<DistillPair>& pairs, double ridge_rel,
                             std::uint64_t codec_id) {
  if (pairs.size() < 32) throw ConfigError("importance::distill_train: need at least 32 pairs");

  const int feat = pairs[0].a.size();
  const int c = static_cast<int>(pairs[0].omega.scores.size());
  const int n = static_cast<int>(pairs.size());
  const int p = feat + 1;  // + intercept

  Eigen::MatrixXd x(n, p);
  Eigen::MatrixXd y(n, c);
  for (int i = 0; i < n; ++i) {
    if (pairs[i].a.size() != feat || static_cast<int>(pairs[i].omega.scores.size()) != c)
      throw ConfigError("importance::distill_train: inconsistent pair shapes");
    for (int j = 0; j < feat; ++j) x(i, j) = pairs[i].a.values[j];
    x(i, feat) = 1.0;
    for (int j = 0; j < c; ++j) y(i, j) = pairs[i].omega.scores[j];
  }

  Eigen::MatrixXd gram = x.transpose() * x;
  const double lambda = ridge_rel * gram.trace() / p;
  for (int j = 0; j < feat; ++j) gram(j, j) += lambda;  // intercept left unpenalized

  Eigen::MatrixXd phi = gram.ldlt().solve(x.transpose() * y);
  if (!phi.allFinite()) throw IntegrityError("importance::distill_train: non-finite fit");

  EvaluatorModel m;
  m.feat = feat;
  m.c = c;
  m.fitted = true;
  m.sample_count = n;
  m.codec_id = codec_id;
  m.phi.resize(static_cast<std::size_t>(p) * c);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < c; ++j) m.phi[static_cast<std::size_t>(i) * c + j] = phi(i, j);
  return m;
}

ImportanceVector evaluate(const EvaluatorModel& evaluator, const codec::FeatureTensor& a) {
  if (!evaluator.fitted) throw IntegrityError("importance::evaluate: evaluator not fitted");
  if (a.size() != evaluator.feat)
    throw ConfigError("importance::evaluate: tensor size does not match evaluator");

  ImportanceVector out;
  out.scores.assign(evaluator.c, 0.0);
  for (int j = 0; j < evaluator.c; ++j) {
    double acc = evaluator.phi[static_cast<std::size_t>(evaluator.feat) * evaluator.c + j];
    for (int i = 0; i < evaluator.feat; ++i)
      acc += evaluator.phi[static_cast<std::size_t>(i) * evaluator.c + j] * a.values[i];
    out.scores[j] = std::clamp(acc, 0.0, 1.0);
  }
  const auto [mn, mx] = std::minmax_element(out.scores.begin(), out.scores.end());
  out.tie = (*mn == *mx);
  return out;
}

void save_distill_dataset(const std::vector<DistillPair>& pairs, const std::string& path) {
  if (pairs.empty()) throw ConfigError("importance::save_distill_dataset: no pairs");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IntegrityError("importance::save_distill_dataset: cannot open " + path);
  binio::write_magic(out, kDatasetMagic);
  binio::write_i32(out, static_cast<std::int32_t>(pairs.size()));
  binio::write_i32(out, pairs[0].a.c);
  binio::write_i32(out, pairs[0].a.h);
  binio::write_i32(out, pairs[0].a.w);
  for (const auto& p : pairs) {
    binio::write_f64s(out, p.a.values);
    binio::write_f64s(out, p.omega.scores);
  }
  if (!out) throw IntegrityError("importance::save_distill_dataset: write failed for " + path);
}

std::vector<DistillPair> load_distill_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IntegrityError("importance::load_distill_dataset: cannot open " + path);
  binio::check_magic(in, kDatasetMagic, "distill dataset");
  const int n = binio::read_i32(in, "pair count");
  const int c = binio::read_i32(in, "dims");
  const int h = binio::read_i32(in, "dims");
  const int w = binio::read_i32(in, "dims");
  if (n < 1 || c < 1 || h < 1 || w < 1)
    throw IntegrityError("importance::load_distill_dataset: bad dims header");

  std::vector<DistillPair> pairs(n);
  for (auto& p : pairs) {
    p.a.c = c;
    p.a.h = h;
    p.a.w = w;
    binio::read_f64s(in, p.a.values, static_cast<std::size_t>(c) * h * w, "feature tensor");
    binio::read_f64s(in, p.omega.scores, static_cast<std::size_t>(c), "importance vector");
    const auto [mn, mx] = std::minmax_element(p.omega.scores.begin(), p.omega.scores.end());
    p.omega.tie = (*mn == *mx);
  }
  return pairs;
}

void save_evaluator(const EvaluatorModel& model, const std::string& path) {
  if (!model.fitted) throw ConfigError("importance::save_evaluator: unfitted evaluator");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IntegrityError("importance::save_evaluator: cannot open " + path);
  binio::write_magic(out, kEvaluatorMagic);
  binio::write_i32(out, model.feat);
  binio::write_i32(out, model.c);
  binio::write_i32(out, model.sample_count);
  std::uint64_t id = model.codec_id;
  binio::write_bytes(out, &id, 8);
  binio::write_f64s(out, model.phi);
  if (!out) throw IntegrityError("importance::save_evaluator: write failed for " + path);
}

EvaluatorModel load_evaluator(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IntegrityError("importance::load_evaluator: cannot open " + path);
  binio::check_magic(in, kEvaluatorMagic, "evaluator");
  EvaluatorModel m;
  m.feat = binio::read_i32(in, "evaluator dims");
  m.c = binio::read_i32(in, "evaluator dims");
  m.sample_count = binio::read_i32(in, "evaluator metadata");
  binio::read_bytes(in, &m.codec_id, 8, "evaluator metadata");
  if (m.feat < 1 || m.c < 1) throw IntegrityError("importance::load_evaluator: bad dims");
  binio::read_f64s(in, m.phi, static_cast<std::size_t>(m.feat + 1) * m.c, "evaluator weights");
  if (!all_finite(m.phi)) throw IntegrityError("importance::load_evaluator: non-finite weights");
  m.fitted = true;
  return m;
}

}  // namespace fastlink::importance
