#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "fastlink/harness.hpp"
#include "fastlink/rng.hpp"

namespace fastlink::harness {

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::Siso: return "siso";
    case Mode::MimoMmse: return "mimo_mmse";
    case Mode::MimoSvd: return "mimo_svd";
  }
  throw ConfigError("unknown mode value");
}

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::Jscc: return "jscc";
    case Scheme::FastKc: return "fast_kc";
    case Scheme::FastPc: return "fast_pc";
    case Scheme::FastKcIe: return "fast_kc_ie";
    case Scheme::FastPcIe: return "fast_pc_ie";
  }
  throw ConfigError("unknown scheme value");
}

Mode parse_mode(const std::string& s) {
  if (s == "siso") return Mode::Siso;
  if (s == "mimo_mmse") return Mode::MimoMmse;
  if (s == "mimo_svd") return Mode::MimoSvd;
  throw ConfigError("unknown mode '" + s + "' (expected siso|mimo_mmse|mimo_svd)");
}

Scheme parse_scheme(const std::string& s) {
  if (s == "jscc") return Scheme::Jscc;
  if (s == "fast_kc") return Scheme::FastKc;
  if (s == "fast_pc") return Scheme::FastPc;
  if (s == "fast_kc_ie") return Scheme::FastKcIe;
  if (s == "fast_pc_ie") return Scheme::FastPcIe;
  throw ConfigError("unknown scheme '" + s +
                    "' (expected jscc|fast_kc|fast_pc|fast_kc_ie|fast_pc_ie)");
}

importance::Pooling ExperimentConfig::pooling() const {
  if (importance_pooling == "signed") return importance::Pooling::Signed;
  if (importance_pooling == "abs") return importance::Pooling::Abs;
  throw ConfigError("importance_pooling must be 'signed' or 'abs'");
}

void ExperimentConfig::validate() const {
  if (!(power > 0.0)) throw ConfigError("power must be > 0");
  if (snr_db.empty()) throw ConfigError("snr_db list is empty");
  if (nt < 1 || nr < 1 || d < 1) throw ConfigError("nt, nr, d must be >= 1");
  if (d > std::min(nr, nt)) throw ConfigError("d must be <= min(nr, nt)");
  if (modes.empty()) throw ConfigError("modes list is empty");
  if (schemes.empty()) throw ConfigError("schemes list is empty");
  if (img_width < 1 || img_height < 1 || channels < 1)
    throw ConfigError("image dims must be positive");
  if (features < 1 || feat_h < 1 || feat_w < 1) throw ConfigError("feature dims must be positive");
  if ((features * feat_h * feat_w) % 2 != 0)
    throw ConfigError("features*feat_h*feat_w must be even");
  if ((feat_h * feat_w) % 2 != 0)
    throw ConfigError("feat_h*feat_w must be even (whole symbols per feature slot)");
  for (Mode m : modes) {
    if (m == Mode::MimoMmse && features % nt != 0)
      throw ConfigError("features must be divisible by nt for mimo_mmse");
    if (m == Mode::MimoSvd) {
      const int n = std::min(nr, nt);
      if (features % n != 0) throw ConfigError("features must be divisible by min(nr,nt)");
      if (d != n) throw ConfigError("d must equal min(nr,nt) for mimo_svd");
    }
  }
  if (sos_paths < 1) throw ConfigError("sos_paths must be >= 1");
  if (!(sample_period > 0.0)) throw ConfigError("sample_period must be > 0");
  if (!(doppler_fd >= 0.0)) throw ConfigError("doppler_fd must be >= 0");
  if (predictor_order < 1) throw ConfigError("predictor_order must be >= 1");
  if (history_len < 4 * predictor_order)
    throw ConfigError("history_len must be >= 4*predictor_order");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (!(synth_rho >= 0.0 && synth_rho < 1.0)) throw ConfigError("synth_rho must be in [0,1)");
  pooling();  // validates the string
  if (train_count < 1 || train_epochs < 1 || train_batch < 1 || !(train_lr > 0.0))
    throw ConfigError("codec training parameters must be positive");
  if (dataset == "synth" && channels != 1)
    throw ConfigError("synthetic dataset is grayscale; channels must be 1");
  const bool needs_ie = std::any_of(schemes.begin(), schemes.end(), [](Scheme s) {
    return s == Scheme::FastKcIe || s == Scheme::FastPcIe;
  });
  if (needs_ie && evaluator_model.empty() && distill_count < 32)
    throw ConfigError("distill_count must be >= 32 to fit an evaluator");
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (...) {
    throw ConfigError("config key '" + key + "': cannot parse number '" + v + "'");
  }
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long d = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return static_cast<int>(d);
  } catch (...) {
    throw ConfigError("config key '" + key + "': cannot parse integer '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const unsigned long long d = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (...) {
    throw ConfigError("config key '" + key + "': cannot parse integer '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "': cannot parse boolean '" + v + "'");
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  static const std::set<std::string> known = {
      "power",          "snr_db",         "nt",
      "nr",             "d",              "modes",
      "schemes",        "img_width",      "img_height",
      "channels",       "features",       "feat_h",
      "feat_w",         "use_tanh",       "sos_paths",
      "doppler_fd",     "sample_period",  "predictor_order",
      "history_len",    "trials",         "master_seed",
      "dataset",        "synth_rho",      "importance_pooling",
      "train_count",    "train_epochs",   "train_batch",
      "train_lr",       "train_snr_db",   "train_fade",
      "distill_count",  "distill_snr_db", "codec_model",
      "evaluator_model"};

  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!known.count(key))
      throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (kv.count(key))
      throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    kv[key] = value;
  }

  ExperimentConfig cfg;
  auto take = [&](const char* key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };

  if (auto* v = take("power")) cfg.power = parse_double("power", *v);
  if (auto* v = take("snr_db")) {
    cfg.snr_db.clear();
    for (const auto& item : split_list(*v)) cfg.snr_db.push_back(parse_double("snr_db", item));
    if (cfg.snr_db.empty()) throw ConfigError("config key 'snr_db': empty list");
  }
  if (auto* v = take("nt")) cfg.nt = parse_int("nt", *v);
  if (auto* v = take("nr")) cfg.nr = parse_int("nr", *v);
  if (auto* v = take("d")) cfg.d = parse_int("d", *v);
  if (auto* v = take("modes")) {
    cfg.modes.clear();
    for (const auto& item : split_list(*v)) cfg.modes.push_back(parse_mode(item));
  }
  if (auto* v = take("schemes")) {
    cfg.schemes.clear();
    for (const auto& item : split_list(*v)) cfg.schemes.push_back(parse_scheme(item));
  }
  if (auto* v = take("img_width")) cfg.img_width = parse_int("img_width", *v);
  if (auto* v = take("img_height")) cfg.img_height = parse_int("img_height", *v);
  if (auto* v = take("channels")) cfg.channels = parse_int("channels", *v);
  if (auto* v = take("features")) cfg.features = parse_int("features", *v);
  if (auto* v = take("feat_h")) cfg.feat_h = parse_int("feat_h", *v);
  if (auto* v = take("feat_w")) cfg.feat_w = parse_int("feat_w", *v);
  if (auto* v = take("use_tanh")) cfg.use_tanh = parse_bool("use_tanh", *v);
  if (auto* v = take("sos_paths")) cfg.sos_paths = parse_int("sos_paths", *v);
  if (auto* v = take("doppler_fd")) cfg.doppler_fd = parse_double("doppler_fd", *v);
  if (auto* v = take("sample_period")) cfg.sample_period = parse_double("sample_period", *v);
  if (auto* v = take("predictor_order")) cfg.predictor_order = parse_int("predictor_order", *v);
  if (auto* v = take("history_len")) cfg.history_len = parse_int("history_len", *v);
  if (auto* v = take("trials")) cfg.trials = parse_int("trials", *v);
  if (auto* v = take("master_seed")) cfg.master_seed = parse_u64("master_seed", *v);
  if (auto* v = take("dataset")) cfg.dataset = *v;
  if (auto* v = take("synth_rho")) cfg.synth_rho = parse_double("synth_rho", *v);
  if (auto* v = take("importance_pooling")) cfg.importance_pooling = *v;
  if (auto* v = take("train_count")) cfg.train_count = parse_int("train_count", *v);
  if (auto* v = take("train_epochs")) cfg.train_epochs = parse_int("train_epochs", *v);
  if (auto* v = take("train_batch")) cfg.train_batch = parse_int("train_batch", *v);
  if (auto* v = take("train_lr")) cfg.train_lr = parse_double("train_lr", *v);
  if (auto* v = take("train_snr_db")) cfg.train_snr_db = parse_double("train_snr_db", *v);
  if (auto* v = take("train_fade")) cfg.train_fade = parse_bool("train_fade", *v);
  if (auto* v = take("distill_count")) cfg.distill_count = parse_int("distill_count", *v);
  if (auto* v = take("distill_snr_db")) cfg.distill_snr_db = parse_double("distill_snr_db", *v);
  if (auto* v = take("codec_model")) cfg.codec_model = *v;
  if (auto* v = take("evaluator_model")) cfg.evaluator_model = *v;

  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

double noise_var_from_snr(double power, double snr_db) {
  if (std::isinf(snr_db) && snr_db > 0) return 0.0;
  return power / std::pow(10.0, snr_db / 10.0);
}

std::vector<codec::ImageSample> synth_dataset(int count, int width, int height, double rho,
                                              std::uint64_t seed) {
  if (count < 0) throw ConfigError("synth_dataset: count must be >= 0");
  if (width < 1 || height < 1) throw ConfigError("synth_dataset: bad dims");
  if (!(rho >= 0.0 && rho < 1.0)) throw ConfigError("synth_dataset: rho must be in [0,1)");

  std::vector<codec::ImageSample> out;
  out.reserve(static_cast<std::size_t>(count));
  const double blend = std::sqrt(1.0 - rho * rho);
  for (int n = 0; n < count; ++n) {
    rng::Generator gen(rng::derive(seed, 0x5d, static_cast<std::uint64_t>(n)));
    std::vector<double> g(static_cast<std::size_t>(width) * height);
    for (auto& v : g) v = gen.normal();

    // Separable AR(1): filter along rows, then along columns. The
    // y = rho*prev + sqrt(1-rho^2)*x update keeps unit marginals.
    for (int y = 0; y < height; ++y)
      for (int x = 1; x < width; ++x) {
        auto& v = g[static_cast<std::size_t>(y) * width + x];
        v = rho * g[static_cast<std::size_t>(y) * width + x - 1] + blend * v;
      }
    for (int x = 0; x < width; ++x)
      for (int y = 1; y < height; ++y) {
        auto& v = g[static_cast<std::size_t>(y) * width + x];
        v = rho * g[static_cast<std::size_t>(y - 1) * width + x] + blend * v;
      }

    codec::ImageSample img;
    img.width = width;
    img.height = height;
    img.channels = 1;
    img.pixels.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
      img.pixels[i] = std::clamp(0.5 + 0.2 * g[i], 0.0, 1.0);
    out.push_back(std::move(img));
  }
  return out;
}

namespace {

struct PnmCursor {
  const std::string& data;
  std::size_t pos = 0;
  const std::string& path;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(path + ": " + msg + " at byte " + std::to_string(pos));
  }

  void skip_space_and_comments() {
    while (pos < data.size()) {
      const char ch = data[pos];
      if (ch == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(ch))) {
        ++pos;
      } else {
        break;
      }
    }
  }

  int next_int() {
    skip_space_and_comments();
    if (pos >= data.size()) fail("unexpected end of header");
    if (!std::isdigit(static_cast<unsigned char>(data[pos]))) fail("expected digit");
    long v = 0;
    while (pos < data.size() && std::isdigit(static_cast<unsigned char>(data[pos]))) {
      v = v * 10 + (data[pos] - '0');
      if (v > 1 << 30) fail("header number out of range");
      ++pos;
    }
    return static_cast<int>(v);
  }
};

}  // namespace

codec::ImageSample load_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string data = buf.str();

  PnmCursor cur{data, 0, path};
  if (data.size() < 2) cur.fail("missing magic");
  const std::string magic = data.substr(0, 2);
  int channels = 0;
  if (magic == "P5")
    channels = 1;
  else if (magic == "P6")
    channels = 3;
  else
    cur.fail("unsupported magic '" + magic + "' (need binary P5 or P6)");
  cur.pos = 2;

  const int width = cur.next_int();
  const int height = cur.next_int();
  const int maxval = cur.next_int();
  if (width < 1 || height < 1) cur.fail("non-positive image dimensions");
  if (maxval < 1 || maxval > 65535) cur.fail("maxval out of range");

  // Exactly one whitespace byte separates the header from the payload.
  if (cur.pos >= data.size() || !std::isspace(static_cast<unsigned char>(data[cur.pos])))
    cur.fail("expected single whitespace before pixel data");
  ++cur.pos;

  const int bytes_per = maxval > 255 ? 2 : 1;
  const std::size_t count = static_cast<std::size_t>(width) * height * channels;
  if (data.size() - cur.pos < count * bytes_per) {
    cur.pos = data.size();
    cur.fail("truncated pixel payload (need " + std::to_string(count * bytes_per) + " bytes)");
  }

  codec::ImageSample img;
  img.width = width;
  img.height = height;
  img.channels = channels;
  img.pixels.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    int v;
    if (bytes_per == 1) {
      v = static_cast<unsigned char>(data[cur.pos + i]);
    } else {
      v = (static_cast<unsigned char>(data[cur.pos + 2 * i]) << 8) |
          static_cast<unsigned char>(data[cur.pos + 2 * i + 1]);
    }
    img.pixels[i] = static_cast<double>(v) / maxval;
  }
  return img;
}

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

std::string csv_string(const std::vector<ResultRow>& rows) {
  if (rows.empty()) throw ConfigError("csv_string: no rows");
  std::string out = "scheme,mode,snr_db,trial,psnr,ssim,mse,side_info_bits,predictor_nmse\n";
  for (const auto& r : rows) {
    out += r.scheme;
    out += ',';
    out += r.mode;
    out += ',';
    out += fmt_double(r.snr_db);
    out += ',';
    out += std::to_string(r.trial);
    out += ',';
    out += fmt_double(r.psnr);
    out += ',';
    out += fmt_double(r.ssim);
    out += ',';
    out += fmt_double(r.mse);
    out += ',';
    out += std::to_string(r.side_info_bits);
    out += ',';
    out += fmt_double(r.predictor_nmse);
    out += '\n';
  }
  return out;
}

void emit_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IntegrityError("emit_csv: cannot open " + path);
  out << csv_string(rows);
  if (!out) throw IntegrityError("emit_csv: write failed for " + path);
}

std::vector<ResultRow> parse_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("parse_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) ||
      line != "scheme,mode,snr_db,trial,psnr,ssim,mse,side_info_bits,predictor_nmse")
    throw ParseError("parse_csv: unexpected header in " + path);

  std::vector<ResultRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    if (f.size() != 9)
      throw ParseError("parse_csv: line " + std::to_string(lineno) + ": expected 9 fields");
    ResultRow r;
    r.scheme = f[0];
    r.mode = f[1];
    r.snr_db = parse_double("snr_db", f[2]);
    r.trial = parse_int("trial", f[3]);
    r.psnr = parse_double("psnr", f[4]);
    r.ssim = parse_double("ssim", f[5]);
    r.mse = parse_double("mse", f[6]);
    r.side_info_bits = parse_int("side_info_bits", f[7]);
    r.predictor_nmse = parse_double("predictor_nmse", f[8]);
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw ParseError("parse_csv: no data rows in " + path);
  return rows;
}

std::string summary_string(const std::vector<ResultRow>& rows) {
  if (rows.empty()) throw ConfigError("summary_string: no rows");

  struct Acc {
    std::vector<double> psnr, ssim, mse, nmse;
  };
  std::map<std::tuple<std::string, std::string, double>, Acc> groups;
  for (const auto& r : rows) {
    Acc& a = groups[{r.scheme, r.mode, r.snr_db}];
    a.psnr.push_back(r.psnr);
    a.ssim.push_back(r.ssim);
    a.mse.push_back(r.mse);
    a.nmse.push_back(r.predictor_nmse);
  }

  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  auto stddev = [&](const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
  };

  std::string out =
      "scheme,mode,snr_db,n,psnr_mean,psnr_std,ssim_mean,ssim_std,mse_mean,predictor_nmse_mean\n";
  for (const auto& [key, a] : groups) {
    out += std::get<0>(key);
    out += ',';
    out += std::get<1>(key);
    out += ',';
    out += fmt_double(std::get<2>(key));
    out += ',';
    out += std::to_string(a.psnr.size());
    out += ',';
    out += fmt_double(mean(a.psnr));
    out += ',';
    out += fmt_double(stddev(a.psnr));
    out += ',';
    out += fmt_double(mean(a.ssim));
    out += ',';
    out += fmt_double(stddev(a.ssim));
    out += ',';
    out += fmt_double(mean(a.mse));
    out += ',';
    out += fmt_double(mean(a.nmse));
    out += '\n';
  }
  return out;
}

void emit_summary(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IntegrityError("emit_summary: cannot open " + path);
  out << summary_string(rows);
  if (!out) throw IntegrityError("emit_summary: write failed for " + path);
}

}  // namespace fastlink::harness
