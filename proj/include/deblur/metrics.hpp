#pragma once

#include "deblur/image.hpp"

#include "json.hpp"

#include <optional>
#include <vector>

namespace deblur {

/// Mean squared pixel difference.
double mse(const Grid& x, const Grid& ref);

/// 10 log10(peak^2 / mse); +infinity when the images are identical.
double psnr(const Grid& x, const Grid& ref, double peak = 1.0);

struct SsimOptions {
  Index window = 8;
  double peak = 1.0;
  std::optional<double> c1;  // default (0.01 peak)^2
  std::optional<double> c2;  // default (0.03 peak)^2
};

/// Mean SSIM over every window x window position, uniform weights.
double ssim(const Grid& x, const Grid& ref, const SsimOptions& opt = {});

/// lambda * mean|x_hat - x| + (1 - lambda) * (1 - ssim(x_hat, x)).
double similarity_loss(const Grid& x_hat, const Grid& x, double lambda = 0.2, const SsimOptions& opt = {});

namespace serial {

double ssim(const Grid& x, const Grid& ref, const SsimOptions& opt = {});

}  // namespace serial

struct ChannelQuality {
  double mse = 0.0;
  double psnr_db = 0.0;
  double ssim = 0.0;
  double similarity_loss = 0.0;
};

/// Channel means plus the per-channel values.
struct QualityReport {
  double mse = 0.0;
  double psnr_db = 0.0;
  double ssim = 0.0;
  double similarity_loss = 0.0;
  std::vector<ChannelQuality> per_channel;
};

QualityReport evaluate_quality(const Image& x, const Image& ref, double lambda = 0.2,
                               const SsimOptions& opt = {});

/// Infinite psnr is written as the string "inf".
nlohmann::json to_json(const QualityReport& report);

}  // namespace deblur
