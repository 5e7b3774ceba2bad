#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"
#include "fastlink/codec.hpp"
#include "fastlink/harness.hpp"
#include "fastlink/importance.hpp"
#include "fastlink/stats.hpp"

using namespace fastlink;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Small link shape shared by the experiment tests: 8x8 grayscale
/// images, 8 features of 2x2, short fading history.
harness::ExperimentConfig small_cfg() {
  harness::ExperimentConfig cfg;
  cfg.img_width = 8;
  cfg.img_height = 8;
  cfg.channels = 1;
  cfg.features = 8;
  cfg.feat_h = 2;
  cfg.feat_w = 2;
  cfg.sos_paths = 16;
  cfg.predictor_order = 4;
  cfg.history_len = 64;
  cfg.master_seed = 0xabc;
  return cfg;
}

std::filesystem::path scratch_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "fastlink_harness_test";
  std::filesystem::create_directories(dir);
  return dir;
}

void write_file(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  REQUIRE(out.good());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  REQUIRE(out.good());
}

/// Pooled lag-1 neighbor correlation (horizontal and vertical pairs)
/// over a batch of equally sized grayscale images.
double lag1_autocorr(const std::vector<codec::ImageSample>& imgs) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
  std::size_t n = 0;
  for (const auto& img : imgs) {
    const int w = img.width, h = img.height;
    auto at = [&](int y, int x) { return img.pixels[static_cast<std::size_t>(y) * w + x]; };
    auto add = [&](double u, double v) {
      sx += u;
      sy += v;
      sxx += u * u;
      syy += v * v;
      sxy += u * v;
      ++n;
    };
    for (int y = 0; y < h; ++y)
      for (int x = 0; x + 1 < w; ++x) add(at(y, x), at(y, x + 1));
    for (int y = 0; y + 1 < h; ++y)
      for (int x = 0; x < w; ++x) add(at(y, x), at(y + 1, x));
  }
  const double nn = static_cast<double>(n);
  const double cov = sxy / nn - (sx / nn) * (sy / nn);
  const double va = sxx / nn - (sx / nn) * (sx / nn);
  const double vb = syy / nn - (sy / nn) * (sy / nn);
  return cov / std::sqrt(va * vb);
}

}  // namespace

TEST_SUITE_BEGIN("harness");

TEST_CASE("mode and scheme names round-trip") {
  for (auto m : {harness::Mode::Siso, harness::Mode::MimoMmse, harness::Mode::MimoSvd})
    CHECK(harness::parse_mode(harness::to_string(m)) == m);
  for (auto s : {harness::Scheme::Jscc, harness::Scheme::FastKc, harness::Scheme::FastPc,
                 harness::Scheme::FastKcIe, harness::Scheme::FastPcIe})
    CHECK(harness::parse_scheme(harness::to_string(s)) == s);

  CHECK(harness::to_string(harness::Mode::MimoMmse) == "mimo_mmse");
  CHECK(harness::to_string(harness::Scheme::FastKcIe) == "fast_kc_ie");
  CHECK_THROWS_AS(harness::parse_mode("sisu"), ConfigError);
  CHECK_THROWS_AS(harness::parse_scheme("fast"), ConfigError);
}

TEST_CASE("noise variance from SNR") {
  CHECK(harness::noise_var_from_snr(1.0, 10.0) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(harness::noise_var_from_snr(2.0, 10.0) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(harness::noise_var_from_snr(1.0, 0.0) == doctest::Approx(1.0));
  CHECK(harness::noise_var_from_snr(4.0, -3.0) == doctest::Approx(4.0 * std::pow(10.0, 0.3)));
  // Noiseless marker maps to exactly zero, not a denormal.
  CHECK(harness::noise_var_from_snr(1.0, kInf) == 0.0);
}

TEST_CASE("config text: defaults, keys, comments, lists") {
  const harness::ExperimentConfig def = harness::parse_config_text("");
  CHECK(def.power == 1.0);
  CHECK(def.snr_db == std::vector<double>{0, 5, 10, 15, 20, 25});
  CHECK(def.modes == std::vector<harness::Mode>{harness::Mode::Siso});
  CHECK(def.l() == 256);

  const char* text =
      "# link\n"
      "power = 2.5\n"
      "snr_db = 0, 10, inf   # noiseless tail\n"
      "modes = siso, mimo_svd\n"
      "schemes = jscc, fast_pc_ie\n"
      "nt = 2\n"
      "nr = 2\n"
      "d = 2\n"
      "features = 8\n"
      "feat_h = 2\n"
      "feat_w = 2\n"
      "img_width = 8\n"
      "img_height = 8\n"
      "use_tanh = true\n"
      "master_seed = 12345678901\n"
      "synth_rho = 0.5\n"
      "importance_pooling = abs\n"
      "train_snr_db = inf\n";
  const harness::ExperimentConfig cfg = harness::parse_config_text(text);
  CHECK(cfg.power == 2.5);
  REQUIRE(cfg.snr_db.size() == 3);
  CHECK(cfg.snr_db[1] == 10.0);
  CHECK(std::isinf(cfg.snr_db[2]));
  CHECK(cfg.modes == std::vector<harness::Mode>{harness::Mode::Siso, harness::Mode::MimoSvd});
  CHECK(cfg.schemes ==
        std::vector<harness::Scheme>{harness::Scheme::Jscc, harness::Scheme::FastPcIe});
  CHECK(cfg.use_tanh);
  CHECK(cfg.master_seed == 12345678901ULL);
  CHECK(cfg.pooling() == importance::Pooling::Abs);
  CHECK(std::isinf(cfg.train_snr_db));
}

TEST_CASE("config text: malformed input names the line") {
  // Unknown key (typo guard).
  try {
    harness::parse_config_text("power = 1\nbogus_key = 3\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 2") != std::string::npos);
    CHECK(msg.find("bogus_key") != std::string::npos);
  }

  // Duplicate key, with a comment line in between.
  try {
    harness::parse_config_text("power = 1\n# restated below\npower = 2\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("duplicate") != std::string::npos);
  }

  // Missing '='.
  try {
    harness::parse_config_text("power 1\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }

  CHECK_THROWS_AS(harness::parse_config_text("power = abc\n"), ConfigError);
  CHECK_THROWS_AS(harness::parse_config_text("trials = 3.5\n"), ConfigError);
  CHECK_THROWS_AS(harness::parse_config_text("use_tanh = maybe\n"), ConfigError);
  CHECK_THROWS_AS(harness::parse_config_text("modes = fancy\n"), ConfigError);
  CHECK_THROWS_AS(harness::parse_config_text("snr_db =\n"), ConfigError);
}

TEST_CASE("config validation rejects inconsistent links") {
  auto with = [](const char* text) { return harness::parse_config_text(text); };

  // d exceeding the antenna minimum.
  CHECK_THROWS_AS(with("nt = 2\nnr = 2\nd = 3\n"), ConfigError);
  // MMSE slots need features divisible by nt.
  CHECK_THROWS_AS(with("modes = mimo_mmse\nnt = 3\nnr = 3\nd = 3\nfeatures = 16\n"), ConfigError);
  // SVD mode pins d to min(nr, nt).
  CHECK_THROWS_AS(with("modes = mimo_svd\nnt = 2\nnr = 2\nd = 1\n"), ConfigError);
  // Odd per-feature element count cannot form whole complex symbols.
  CHECK_THROWS_AS(with("feat_h = 1\nfeat_w = 3\n"), ConfigError);
  CHECK_THROWS_AS(with("synth_rho = 1.0\n"), ConfigError);
  CHECK_THROWS_AS(with("power = 0\n"), ConfigError);
  CHECK_THROWS_AS(with("predictor_order = 8\nhistory_len = 16\n"), ConfigError);
  CHECK_THROWS_AS(with("importance_pooling = mean\n"), ConfigError);
  CHECK_THROWS_AS(with("channels = 3\n"), ConfigError);  // synth set is grayscale
  CHECK_THROWS_AS(with("schemes = fast_kc_ie\ndistill_count = 8\n"), ConfigError);
}

TEST_CASE("synthetic dataset: determinism, range, count") {
  CHECK(harness::synth_dataset(0, 8, 8, 0.5, 1).empty());

  const auto a = harness::synth_dataset(3, 8, 8, 0.5, 42);
  const auto b = harness::synth_dataset(3, 8, 8, 0.5, 42);
  const auto c = harness::synth_dataset(3, 8, 8, 0.5, 43);
  REQUIRE(a.size() == 3);
  CHECK(a[0].width == 8);
  CHECK(a[0].channels == 1);
  for (int i = 0; i < 3; ++i) CHECK(a[i].pixels == b[i].pixels);
  CHECK(a[0].pixels != c[0].pixels);
  // Images within one batch differ from each other.
  CHECK(a[0].pixels != a[1].pixels);

  for (const auto& img : a)
    for (double v : img.pixels) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }

  CHECK_THROWS_AS(harness::synth_dataset(1, 0, 8, 0.5, 1), ConfigError);
  CHECK_THROWS_AS(harness::synth_dataset(1, 8, 8, 1.0, 1), ConfigError);
  CHECK_THROWS_AS(harness::synth_dataset(-1, 8, 8, 0.5, 1), ConfigError);
}

TEST_CASE("synthetic dataset matches its target correlation") {
  // Pooled lag-1 neighbor correlation over 64 images of 16x16, about
  // 3e4 neighbor pairs. The AR(1) update keeps unit variance, so the
  // theoretical lag-1 correlation is rho in both axes; clamping to
  // [0,1] shaves about 1%, well inside the 0.05 window.
  const auto white = harness::synth_dataset(64, 16, 16, 0.0, 7);
  const auto smooth = harness::synth_dataset(64, 16, 16, 0.9, 7);
  CHECK(std::abs(lag1_autocorr(white)) < 0.05);
  CHECK(std::abs(lag1_autocorr(smooth) - 0.9) < 0.05);
}

TEST_CASE("image reader decodes PGM and PPM") {
  namespace fs = std::filesystem;
  const auto dir = scratch_dir();

  // 2x2 gray, bytes 0 / 255 / 128 / 64.
  {
    std::string bytes = "P5\n2 2\n255\n";
    for (unsigned char b : {0, 255, 128, 64}) bytes.push_back(static_cast<char>(b));
    write_file(dir / "gray.pgm", bytes);
    const auto img = harness::load_image((dir / "gray.pgm").string());
    CHECK(img.width == 2);
    CHECK(img.height == 2);
    CHECK(img.channels == 1);
    REQUIRE(img.pixels.size() == 4);
    CHECK(img.pixels[0] == doctest::Approx(0.0));
    CHECK(img.pixels[1] == doctest::Approx(1.0));
    CHECK(img.pixels[2] == doctest::Approx(128.0 / 255.0).epsilon(1e-12));
    CHECK(img.pixels[3] == doctest::Approx(64.0 / 255.0).epsilon(1e-12));
  }

  // maxval 1: every byte 1 decodes to full scale.
  {
    std::string bytes = "P5\n2 2\n1\n";
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<char>(1));
    write_file(dir / "ones.pgm", bytes);
    const auto img = harness::load_image((dir / "ones.pgm").string());
    for (double v : img.pixels) CHECK(v == doctest::Approx(1.0));
  }

  // Header comments are skipped.
  {
    std::string bytes = "P5\n# made by hand\n2 1 # dims\n255\n";
    bytes.push_back(static_cast<char>(10));
    bytes.push_back(static_cast<char>(20));
    write_file(dir / "comments.pgm", bytes);
    const auto img = harness::load_image((dir / "comments.pgm").string());
    CHECK(img.width == 2);
    CHECK(img.pixels[0] == doctest::Approx(10.0 / 255.0));
  }

  // Color PPM: three interleaved channels.
  {
    std::string bytes = "P6\n2 1\n255\n";
    for (unsigned char b : {255, 0, 0, 0, 255, 0}) bytes.push_back(static_cast<char>(b));
    write_file(dir / "color.ppm", bytes);
    const auto img = harness::load_image((dir / "color.ppm").string());
    CHECK(img.channels == 3);
    REQUIRE(img.pixels.size() == 6);
    CHECK(img.pixels[0] == doctest::Approx(1.0));
    CHECK(img.pixels[1] == doctest::Approx(0.0));
    CHECK(img.pixels[4] == doctest::Approx(1.0));
  }

  // 16-bit big-endian sample.
  {
    std::string bytes = "P5\n1 1\n65535\n";
    bytes.push_back(static_cast<char>(0x01));
    bytes.push_back(static_cast<char>(0x00));
    write_file(dir / "deep.pgm", bytes);
    const auto img = harness::load_image((dir / "deep.pgm").string());
    CHECK(img.pixels[0] == doctest::Approx(256.0 / 65535.0).epsilon(1e-12));
  }
}

TEST_CASE("image reader reports failures with byte offsets") {
  namespace fs = std::filesystem;
  const auto dir = scratch_dir();

  write_file(dir / "bitmap.pbm", std::string("P4\n2 2\n\x0f", 8));
  try {
    harness::load_image((dir / "bitmap.pbm").string());
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("unsupported magic") != std::string::npos);
    CHECK(msg.find("at byte") != std::string::npos);
  }

  std::string trunc = "P5\n2 2\n255\n";
  trunc.push_back('\x7f');  // one of four payload bytes
  write_file(dir / "short.pgm", trunc);
  try {
    harness::load_image((dir / "short.pgm").string());
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("truncated") != std::string::npos);
    CHECK(msg.find("at byte") != std::string::npos);
  }

  write_file(dir / "deep.pgm", "P5\n1 1\n70000\n\x01\x02");
  CHECK_THROWS_AS(harness::load_image((dir / "deep.pgm").string()), ParseError);
  write_file(dir / "flat.pgm", "P5\n0 2\n255\n");
  CHECK_THROWS_AS(harness::load_image((dir / "flat.pgm").string()), ParseError);
  write_file(dir / "cut.pgm", "P5\n2");
  CHECK_THROWS_AS(harness::load_image((dir / "cut.pgm").string()), ParseError);
  CHECK_THROWS_AS(harness::load_image((dir / "missing.pgm").string()), ParseError);
}

TEST_CASE("CSV writer and reader") {
  namespace fs = std::filesystem;
  const auto dir = scratch_dir();

  harness::ResultRow row;
  row.scheme = "jscc";
  row.mode = "siso";
  row.snr_db = 10.0;
  row.trial = 0;
  row.psnr = 33.5;
  row.ssim = 0.9;
  row.mse = 0.000446;
  row.side_info_bits = 0;
  row.predictor_nmse = 0.0;

  // One row: header plus one data line, exact text.
  CHECK(harness::csv_string({row}) ==
        "scheme,mode,snr_db,trial,psnr,ssim,mse,side_info_bits,predictor_nmse\n"
        "jscc,siso,10,0,33.5,0.9,0.000446,0,0\n");

  CHECK_THROWS_AS(harness::csv_string({}), ConfigError);

  // Round-trip through a file: a second emit of the parsed rows is
  // byte-identical (the %.10g rendering is a fixed point of itself).
  std::vector<harness::ResultRow> rows = {row, row};
  rows[1].scheme = "fast_kc";
  rows[1].snr_db = kInf;  // noiseless marker survives the trip
  rows[1].trial = 3;
  rows[1].psnr = 33.123456789012;  // more digits than the format keeps
  rows[1].side_info_bits = 24;
  const auto path = (dir / "rows.csv").string();
  harness::emit_csv(rows, path);
  const auto parsed = harness::parse_csv(path);
  REQUIRE(parsed.size() == 2);
  CHECK(std::isinf(parsed[1].snr_db));
  CHECK(parsed[1].side_info_bits == 24);
  const auto path2 = (dir / "rows2.csv").string();
  harness::emit_csv(parsed, path2);
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  std::stringstream b1, b2;
  b1 << f1.rdbuf();
  b2 << f2.rdbuf();
  CHECK(b1.str() == b2.str());

  // Malformed inputs.
  CHECK_THROWS_AS(harness::parse_csv((dir / "nope.csv").string()), ParseError);
  write_file(dir / "badhdr.csv", "scheme,mode\njscc,siso\n");
  CHECK_THROWS_AS(harness::parse_csv((dir / "badhdr.csv").string()), ParseError);
  write_file(dir / "badrow.csv",
             "scheme,mode,snr_db,trial,psnr,ssim,mse,side_info_bits,predictor_nmse\n"
             "jscc,siso,10\n");
  try {
    harness::parse_csv((dir / "badrow.csv").string());
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  write_file(dir / "empty.csv",
             "scheme,mode,snr_db,trial,psnr,ssim,mse,side_info_bits,predictor_nmse\n");
  CHECK_THROWS_AS(harness::parse_csv((dir / "empty.csv").string()), ParseError);
}

TEST_CASE("summary groups by scheme, mode and SNR") {
  harness::ResultRow r;
  r.mode = "siso";
  r.snr_db = 10.0;
  r.predictor_nmse = 0.0;

  std::vector<harness::ResultRow> rows;
  r.scheme = "jscc";
  r.trial = 0;
  r.psnr = 30.0;
  r.ssim = 0.5;
  r.mse = 0.01;
  rows.push_back(r);
  r.trial = 1;
  r.psnr = 32.0;
  r.ssim = 0.7;
  r.mse = 0.03;
  rows.push_back(r);
  r.scheme = "fast_kc";
  r.trial = 0;
  r.psnr = 28.0;
  r.ssim = 0.6;
  r.mse = 0.02;
  rows.push_back(r);

  // Two groups; hand-computed means and unbiased stds; single-sample
  // groups report std 0.
  CHECK(harness::summary_string(rows) ==
        "scheme,mode,snr_db,n,psnr_mean,psnr_std,ssim_mean,ssim_std,mse_mean,predictor_nmse_mean\n"
        "fast_kc,siso,10,1,28,0,0.6,0,0.02,0\n"
        "jscc,siso,10,2,31,1.414213562,0.6,0.1414213562,0.02,0\n");

  CHECK_THROWS_AS(harness::summary_string({}), ConfigError);
}

TEST_CASE("experiment smoke run: row grid, ordering, determinism") {
  harness::ExperimentConfig cfg = small_cfg();
  cfg.snr_db = {10.0};
  cfg.modes = {harness::Mode::Siso};
  cfg.schemes = {harness::Scheme::Jscc, harness::Scheme::FastKc};
  cfg.trials = 3;
  cfg.train_count = 16;
  cfg.train_epochs = 20;
  cfg.train_batch = 16;
  cfg.train_lr = 0.5;

  const auto rows1 = harness::run_experiment(cfg);
  REQUIRE(rows1.size() == 6);

  // Sorted by (scheme, mode, snr, trial): fast_kc block then jscc block.
  for (int i = 0; i < 3; ++i) {
    CHECK(rows1[static_cast<std::size_t>(i)].scheme == "fast_kc");
    CHECK(rows1[static_cast<std::size_t>(i)].trial == i);
    CHECK(rows1[static_cast<std::size_t>(i) + 3].scheme == "jscc");
    CHECK(rows1[static_cast<std::size_t>(i) + 3].trial == i);
  }
  for (const auto& r : rows1) {
    CHECK(r.mode == "siso");
    CHECK(r.snr_db == 10.0);
    // 8 feature blocks need 8 * ceil(log2 8) = 24 bits of side info.
    CHECK(r.side_info_bits == (r.scheme == "jscc" ? 0 : 24));
    CHECK(r.predictor_nmse == 0.0);  // no prediction-based scheme in the run
    CHECK(std::isfinite(r.psnr));
    CHECK(r.mse > 0.0);
  }

  // Fresh end-to-end rerun (including training) is byte-identical.
  const auto rows2 = harness::run_experiment(cfg);
  CHECK(harness::csv_string(rows1) == harness::csv_string(rows2));

  // Mismatched artifacts are rejected before any trial runs.
  harness::ExperimentArtifacts bad;
  bad.model = codec::CodecModel::init(16, 4, 2, 2, false, 1);
  CHECK_THROWS_AS(harness::run_experiment(cfg, bad), ConfigError);

  harness::ExperimentConfig needs_eval = cfg;
  needs_eval.schemes = {harness::Scheme::FastKcIe};
  harness::ExperimentArtifacts no_eval;
  no_eval.model = codec::CodecModel::init(cfg.l(), cfg.features, cfg.feat_h, cfg.feat_w, false, 1);
  CHECK_THROWS_AS(harness::run_experiment(needs_eval, no_eval), ConfigError);
}

TEST_CASE("zero-noise channel makes every scheme identical") {
  // On a noiseless link the equalized symbols equal the transmitted
  // ones, so feature reordering must cancel exactly (SISO and SVD).
  harness::ExperimentConfig cfg = small_cfg();
  cfg.snr_db = {kInf};
  cfg.modes = {harness::Mode::Siso, harness::Mode::MimoSvd};
  cfg.schemes = {harness::Scheme::Jscc, harness::Scheme::FastKc, harness::Scheme::FastPc,
                 harness::Scheme::FastKcIe, harness::Scheme::FastPcIe};
  cfg.trials = 6;
  cfg.nt = 2;
  cfg.nr = 2;
  cfg.d = 2;
  cfg.distill_count = 32;

  harness::ExperimentArtifacts art;
  art.model = codec::CodecModel::init(cfg.l(), cfg.features, cfg.feat_h, cfg.feat_w, true, 5);
  art.evaluator = importance::distill_train(harness::build_distill_pairs(cfg, art.model));
  art.has_evaluator = true;

  const auto rows = harness::run_experiment(cfg, art);
  REQUIRE(rows.size() == 5 * 2 * 6);

  for (const std::string mode : {"siso", "mimo_svd"}) {
    for (int t = 0; t < cfg.trials; ++t) {
      double lo = std::numeric_limits<double>::max();
      double hi = std::numeric_limits<double>::lowest();
      int seen = 0;
      for (const auto& r : rows)
        if (r.mode == mode && r.trial == t) {
          lo = std::min(lo, r.psnr);
          hi = std::max(hi, r.psnr);
          ++seen;
        }
      CHECK(seen == 5);
      CHECK(hi - lo < 1e-6);  // dB
    }
  }
}

TEST_CASE("equally important features make allocation performance-neutral") {
  // A decoder whose per-feature weight blocks are identical pools the
  // same gradient for every feature, so importance ties and the scores
  // come back all-equal. Feature order then cannot matter: the decode
  // only sees the feature sum, which any permutation preserves.
  harness::ExperimentConfig cfg = small_cfg();
  cfg.snr_db = {10.0};
  cfg.modes = {harness::Mode::Siso};
  cfg.schemes = {harness::Scheme::Jscc, harness::Scheme::FastKc};
  cfg.trials = 200;

  harness::ExperimentArtifacts art;
  art.model = codec::CodecModel::init(cfg.l(), cfg.features, cfg.feat_h, cfg.feat_w, false, 99);
  const int fpb = cfg.feat_h * cfg.feat_w;
  const int feat = art.model.feat();
  for (int i = 0; i < art.model.l; ++i)
    for (int k = 1; k < cfg.features; ++k)
      for (int j = 0; j < fpb; ++j)
        art.model.w2[static_cast<std::size_t>(i) * feat + k * fpb + j] =
            art.model.w2[static_cast<std::size_t>(i) * feat + j];

  // The construction really does tie the importance scores.
  const auto probe = harness::synth_dataset(1, cfg.img_width, cfg.img_height, 0.9, 7);
  const auto a = codec::encode(art.model, probe[0]);
  const auto s_local = codec::decode(art.model, a);
  const auto w =
      importance::grad_importance(art.model, a, probe[0].pixels, s_local, cfg.pooling());
  CHECK(w.tie);
  for (double v : w.scores) CHECK(v == 0.0);

  const auto rows = harness::run_experiment(cfg, art);
  REQUIRE(rows.size() == 400);
  std::vector<double> pj, pf;
  for (const auto& r : rows) (r.scheme == "jscc" ? pj : pf).push_back(r.psnr);
  REQUIRE(pj.size() == 200);
  REQUIRE(pf.size() == 200);

  // Per-trial PSNRs agree to rounding, so the two distributions are
  // statistically indistinguishable: two-sided paired test cannot
  // reject equality at the 1% level.
  double maxd = 0.0;
  for (std::size_t i = 0; i < pj.size(); ++i) maxd = std::max(maxd, std::abs(pf[i] - pj[i]));
  CHECK(maxd < 1e-6);
  const double p_two_sided = 2.0 * std::min(stats::paired_p_value_greater(pf, pj),
                                            stats::paired_p_value_greater(pj, pf));
  CHECK(p_two_sided > 0.01);
}

TEST_SUITE_END();
