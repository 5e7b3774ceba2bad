#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "fastlink/codec.hpp"
#include "fastlink/common.hpp"
#include "fastlink/importance.hpp"

namespace fastlink::harness {

enum class Mode { Siso, MimoMmse, MimoSvd };
enum class Scheme { Jscc, FastKc, FastPc, FastKcIe, FastPcIe };

std::string to_string(Mode mode);
std::string to_string(Scheme scheme);
Mode parse_mode(const std::string& s);
Scheme parse_scheme(const std::string& s);

/// Whole-experiment configuration, read from flat "key = value" files
/// ('#' comments). Unknown keys are rejected. See docs/CONFIG.md for
/// the key list; every field below has a matching key.
struct ExperimentConfig {
  // link
  double power = 1.0;
  std::vector<double> snr_db = {0, 5, 10, 15, 20, 25};  // +inf = noiseless
  int nt = 2, nr = 2, d = 2;
  std::vector<Mode> modes = {Mode::Siso};
  std::vector<Scheme> schemes = {Scheme::Jscc, Scheme::FastKc};

  // codec shape
  int img_width = 16, img_height = 16, channels = 1;
  int features = 16, feat_h = 4, feat_w = 4;
  bool use_tanh = false;

  // fading
  int sos_paths = 32;
  double doppler_fd = 50.0;
  double sample_period = 1e-3;

  // predictor
  int predictor_order = 8;
  int history_len = 512;

  // experiment
  int trials = 200;
  std::uint64_t master_seed = 1;
  std::string dataset = "synth";  // "synth" or a directory of .pgm/.ppm
  double synth_rho = 0.9;
  std::string importance_pooling = "signed";  // or "abs"

  // codec training (used when codec_model is empty)
  int train_count = 256;
  int train_epochs = 400;
  int train_batch = 32;
  double train_lr = 1.0;
  double train_snr_db = std::numeric_limits<double>::infinity();
  bool train_fade = false;

  // distillation (used when evaluator_model is empty and an IE scheme runs)
  int distill_count = 512;
  double distill_snr_db = 10.0;

  // optional pre-built artifacts
  std::string codec_model;
  std::string evaluator_model;

  int l() const { return img_width * img_height * channels; }
  importance::Pooling pooling() const;

  /// Cross-field checks (divisibility, d vs min(Nr,Nt), ...); throws
  /// ConfigError with the offending key.
  void validate() const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config(const std::string& path);

/// sigma^2 = P / 10^(snr/10); +inf SNR maps to exactly 0.
double noise_var_from_snr(double power, double snr_db);

struct ResultRow {
  std::string scheme;
  std::string mode;
  double snr_db = 0.0;
  int trial = 0;
  double psnr = 0.0;
  double ssim = 0.0;
  double mse = 0.0;
  int side_info_bits = 0;
  double predictor_nmse = 0.0;
};

/// Gauss-Markov textures: white N(0,1) fields filtered by a separable
/// AR(1) in both axes, scaled around mid-gray and clamped to [0,1].
std::vector<codec::ImageSample> synth_dataset(int count, int width, int height, double rho,
                                              std::uint64_t seed);

/// Binary PGM (P5) / PPM (P6) reader; pixels scaled to [0,1]. Parse
/// failures report the byte offset.
codec::ImageSample load_image(const std::string& path);

/// Trained pieces an experiment needs; built once, shared by all rows.
struct ExperimentArtifacts {
  codec::CodecModel model;
  importance::EvaluatorModel evaluator;
  bool has_evaluator = false;
};

/// Trains or loads the codec (and the evaluator when an IE scheme is
/// configured). Deterministic per master seed.
ExperimentArtifacts prepare(const ExperimentConfig& cfg);

/// Gradient-label pairs for evaluator distillation, drawn from the
/// configured dataset and channel; prepare() uses this internally.
std::vector<importance::DistillPair> build_distill_pairs(const ExperimentConfig& cfg,
                                                         const codec::CodecModel& model);

/// Full sweep: every (mode, snr, trial, scheme) combination, schemes
/// sharing channel and noise realizations per (mode, snr, trial) so
/// differences are paired. Rows come back sorted by (scheme, mode, snr,
/// trial). Trials run in parallel; output is independent of thread
/// count.
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg,
                                      const ExperimentArtifacts& art);
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

std::string csv_string(const std::vector<ResultRow>& rows);
void emit_csv(const std::vector<ResultRow>& rows, const std::string& path);

/// Reads a results CSV written by emit_csv (header checked).
std::vector<ResultRow> parse_csv(const std::string& path);

/// Per-(scheme, mode, snr) mean/std summary, plot-ready CSV.
std::string summary_string(const std::vector<ResultRow>& rows);
void emit_summary(const std::vector<ResultRow>& rows, const std::string& path);

}  // namespace fastlink::harness
