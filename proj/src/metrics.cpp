#include "fastlink/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace fastlink::metrics {

double mse(const std::vector<double>& s, const std::vector<double>& s_hat) {
  if (s.size() != s_hat.size() || s.empty())
    throw ConfigError("metrics::mse: images must share a nonzero length");
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double d = s_hat[i] - s[i];
    acc += d * d;
  }
  return acc / static_cast<double>(s.size());
}

double psnr(const std::vector<double>& s, const std::vector<double>& s_hat, double max_val) {
  if (!(max_val > 0.0)) throw ConfigError("metrics::psnr: max_val must be > 0");
  const double e = mse(s, s_hat);
  if (e == 0.0) return kPsnrCapDb;
  return std::min(10.0 * std::log10(max_val * max_val / e), kPsnrCapDb);
}

double ssim(const std::vector<double>& s, const std::vector<double>& s_hat, int width, int height,
            double max_val, int window) {
  if (width < 1 || height < 1 ||
      static_cast<std::size_t>(width) * height != s.size() || s.size() != s_hat.size())
    throw ConfigError("metrics::ssim: image shape mismatch");
  if (window > width || window > height)
    throw ConfigError("metrics::ssim: window larger than image");

  const double c1 = 0.01 * max_val * 0.01 * max_val;
  const double c2 = 0.03 * max_val * 0.03 * max_val;
  const int n = window * window;

  double total = 0.0;
  int count = 0;
  for (int y = 0; y + window <= height; ++y) {
    for (int x = 0; x + window <= width; ++x) {
      double mu_a = 0.0, mu_b = 0.0;
      for (int dy = 0; dy < window; ++dy)
        for (int dx = 0; dx < window; ++dx) {
          const std::size_t idx = static_cast<std::size_t>(y + dy) * width + (x + dx);
          mu_a += s[idx];
          mu_b += s_hat[idx];
        }
      mu_a /= n;
      mu_b /= n;

      // Population (1/n) second moments to match the hand oracle.
      double var_a = 0.0, var_b = 0.0, cov = 0.0;
      for (int dy = 0; dy < window; ++dy)
        for (int dx = 0; dx < window; ++dx) {
          const std::size_t idx = static_cast<std::size_t>(y + dy) * width + (x + dx);
          const double da = s[idx] - mu_a;
          const double db = s_hat[idx] - mu_b;
          var_a += da * da;
          var_b += db * db;
          cov += da * db;
        }
      var_a /= n;
      var_b /= n;
      cov /= n;

      const double num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
      const double den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
      total += num / den;
      ++count;
    }
  }
  return total / count;
}

QualityReport evaluate(const std::vector<double>& s, const std::vector<double>& s_hat, int width,
                       int height, double max_val) {
  // Decoder output is clamped to the pixel range only here, at metric time.
  std::vector<double> clamped(s_hat.size());
  for (std::size_t i = 0; i < s_hat.size(); ++i)
    clamped[i] = std::clamp(s_hat[i], 0.0, max_val);

  QualityReport r;
  r.mse = mse(s, clamped);
  r.psnr = psnr(s, clamped, max_val);
  const int win = std::min({8, width, height});
  r.ssim = ssim(s, clamped, width, height, max_val, win);
  return r;
}

}  // namespace fastlink::metrics
