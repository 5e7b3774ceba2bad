#pragma once

#include <vector>

#include "fastlink/common.hpp"

namespace fastlink::metrics {

struct QualityReport {
  double mse = 0.0;
  double psnr = 0.0;  // dB, capped
  double ssim = 0.0;
};

/// Cap reported when the reconstruction is exact (mse == 0).
inline constexpr double kPsnrCapDb = 100.0;

double mse(const std::vector<double>& s, const std::vector<double>& s_hat);

/// 10 log10(max_val^2 / mse); returns kPsnrCapDb when mse == 0.
double psnr(const std::vector<double>& s, const std::vector<double>& s_hat, double max_val);

/// Mean local SSIM over uniform `window` x `window` patches at stride 1,
/// population moments, C1 = (0.01 max)^2, C2 = (0.03 max)^2. Images are
/// row-major `height` x `width`, single channel.
double ssim(const std::vector<double>& s, const std::vector<double>& s_hat, int width,
            int height, double max_val, int window = 8);

QualityReport evaluate(const std::vector<double>& s, const std::vector<double>& s_hat, int width,
                       int height, double max_val);

}  // namespace fastlink::metrics
