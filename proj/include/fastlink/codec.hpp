#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fastlink/common.hpp"
#include "fastlink/fading.hpp"

namespace fastlink::codec {

/// Flat pixel vector in [0,1]; length = width * height * channels.
struct ImageSample {
  std::vector<double> pixels;
  int width = 0;
  int height = 0;
  int channels = 1;

  int length() const { return width * height * channels; }
};

/// c features of h x w reals, stored feature-major: feature k occupies
/// values[k*h*w .. (k+1)*h*w).
struct FeatureTensor {
  std::vector<double> values;
  int c = 0;
  int h = 0;
  int w = 0;

  int size() const { return c * h * w; }
};

/// Affine encoder/decoder pair with an optional tanh at the encoder
/// output. Weights are row-major; encoder maps l -> c*h*w, decoder maps
/// c*h*w -> l.
struct CodecModel {
  int l = 0, c = 0, h = 0, w = 0;
  bool use_tanh = false;
  std::vector<double> w1, b1;  // (c*h*w) x l, c*h*w
  std::vector<double> w2, b2;  // l x (c*h*w), l

  int feat() const { return c * h * w; }

  /// Random init: weights N(0, 1/fan_in), zero biases. c*h*w must be even
  /// (complex pairing) and positive.
  static CodecModel init(int l, int c, int h, int w, bool use_tanh, std::uint64_t seed);
};

/// k = c*h*w/2 complex symbols scaled so (1/k)|x|^2 equals the power
/// target exactly; `scale` is the factor applied and is inverted on the
/// way back (1 for the all-zero tensor).
struct SymbolBlock {
  std::vector<cplx> symbols;
  double power = 0.0;
  double scale = 1.0;
};

FeatureTensor encode(const CodecModel& model, const ImageSample& s);
std::vector<double> decode(const CodecModel& model, const FeatureTensor& a);

/// (1/l) |s_hat - s|^2.
double loss(const std::vector<double>& s, const std::vector<double>& s_hat);

/// Pairs consecutive reals (I,Q) in feature-major order, so each feature
/// occupies h*w/2 contiguous symbols, then scales to the exact power
/// target.
SymbolBlock to_symbols(const FeatureTensor& a, double power);
FeatureTensor from_symbols(const SymbolBlock& block, int c, int h, int w);

/// One sampled channel realization for a single image: per-feature slot
/// gains (empty = identity channel) and per-symbol noise (empty =
/// noiseless). Explicit draws keep analytic and finite-difference
/// gradients on identical randomness.
struct ChannelDraw {
  std::vector<cplx> gains;  // length c, one block-fading gain per feature
  std::vector<cplx> noise;  // length k = c*h*w/2
};

/// Full forward pass: encode -> power-normalize -> per-slot fading +
/// AWGN -> zero-forcing by the known gain -> de-normalize -> decode.
/// Returns the loss; optionally the reconstruction.
double forward_loss(const CodecModel& model, const ImageSample& s, const ChannelDraw& draw,
                    double power, std::vector<double>* s_hat_out = nullptr);

struct Gradients {
  std::vector<double> w1, b1, w2, b2;
  double loss = 0.0;
};

/// Mean loss and analytic gradients over a batch, differentiating
/// through the codec, the power normalizer, and the equalized channel.
Gradients batch_gradients(const CodecModel& model, const std::vector<ImageSample>& batch,
                          const std::vector<ChannelDraw>& draws, double power);

/// Gradient of the loss with respect to the decoder input:
/// W2^T (2/l)(s_hat - s), reshaped as c x h x w downstream.
std::vector<double> loss_grad_wrt_features(const CodecModel& model, const std::vector<double>& s,
                                           const std::vector<double>& s_hat);

struct TrainConfig {
  int epochs = 100;
  int batch = 32;
  double lr = 1.0;
  double power = 1.0;
  double noise_var = 0.0;  // 0 = noiseless training
  bool fade = false;       // apply SOS block fading during training
  int sos_paths = 32;
  double doppler_fd = 10.0;
  double sample_period = 1e-3;
  std::uint64_t seed = 0;
};

struct TrainReport {
  // Mean training-set loss at the end of each epoch, measured with a
  // noiseless identity-channel pass so the curve is deterministic.
  std::vector<double> epoch_loss;
};

/// Plain-SGD training loop: shuffled passes over the dataset, one
/// minibatch step per slice (fresh CSI + noise each step), forward,
/// analytic backward, fixed-step update. Aborts with IntegrityError if
/// the loss goes non-finite.
CodecModel train(CodecModel model, const std::vector<ImageSample>& dataset,
                 const TrainConfig& cfg, TrainReport* report = nullptr);

/// Flat binary model file: magic, dims, tanh flag, then w1/b1/w2/b2 as
/// little-endian doubles.
void save_model(const CodecModel& model, const std::string& path);
CodecModel load_model(const std::string& path);

}  // namespace fastlink::codec
