#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fastlink/codec.hpp"
#include "fastlink/common.hpp"

namespace fastlink::importance {

/// Per-feature importance scores, min-max normalized to [0,1]. If all
/// raw scores are equal the vector is all zeros and `tie` is set, so
/// downstream sorting falls back to index order.
struct ImportanceVector {
  std::vector<double> scores;
  bool tie = false;
};

/// How per-feature gradient maps are pooled into one score: the signed
/// global mean, or the mean of absolute values.
enum class Pooling { Signed, Abs };

/// Raw per-feature scores: the loss gradient with respect to each
/// feature map (through the decoder only), pooled over its h*w entries.
std::vector<double> raw_scores(const codec::CodecModel& model, const std::vector<double>& s,
                               const std::vector<double>& s_hat, Pooling pooling);

/// Min-max normalization with the all-equal degenerate case flagged.
ImportanceVector normalize(const std::vector<double>& raw);

/// Gradient-based importance: pool the decoder-input loss gradient per
/// feature, then min-max normalize. s_hat must be the decode of a.
ImportanceVector grad_importance(const codec::CodecModel& model, const codec::FeatureTensor& a,
                                 const std::vector<double>& s, const std::vector<double>& s_hat,
                                 Pooling pooling = Pooling::Signed);

struct DistillPair {
  codec::FeatureTensor a;
  ImportanceVector omega;
};

struct DistillConfig {
  double power = 1.0;
  double noise_var = 0.0;  // 0 = noiseless realizations
  bool fade = true;
  int sos_paths = 32;
  double doppler_fd = 10.0;
  double sample_period = 1e-3;
  std::uint64_t seed = 0;
  Pooling pooling = Pooling::Signed;
};

/// Stage one of distillation: per image, transmit through a freshly
/// sampled channel realization, compute gradient importance from the
/// received reconstruction, and pair it with the clean feature tensor.
std::vector<DistillPair> build_distill_dataset(const codec::CodecModel& model,
                                               const std::vector<codec::ImageSample>& dataset,
                                               const DistillConfig& cfg);

/// Ridge regressor from flattened feature tensor (plus intercept) to the
/// c importance scores; the transmitter-side stand-in for the gradient
/// computation.
struct EvaluatorModel {
  int feat = 0;  // c*h*w
  int c = 0;
  std::vector<double> phi;  // (feat+1) x c, row-major; last row = intercept
  bool fitted = false;
  std::int32_t sample_count = 0;
  std::uint64_t codec_id = 0;
};

/// Closed-form ridge fit (normal equations); the intercept row is not
/// penalized. Requires at least 32 pairs.
EvaluatorModel distill_train(const std::vector<DistillPair>& pairs, double ridge_rel = 1e-10,
                             std::uint64_t codec_id = 0);

/// Predicted scores, clipped to [0,1].
ImportanceVector evaluate(const EvaluatorModel& evaluator, const codec::FeatureTensor& a);

// Binary persistence: dims header + little-endian doubles.
void save_distill_dataset(const std::vector<DistillPair>& pairs, const std::string& path);
std::vector<DistillPair> load_distill_dataset(const std::string& path);
void save_evaluator(const EvaluatorModel& model, const std::string& path);
EvaluatorModel load_evaluator(const std::string& path);

}  // namespace fastlink::importance
