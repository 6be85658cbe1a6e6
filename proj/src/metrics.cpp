#include "deblur/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace deblur {

namespace {

void check_same_shape(const Grid& x, const Grid& ref) {
  if (x.rows() != ref.rows() || x.cols() != ref.cols())
    throw std::invalid_argument("metrics: images differ in shape");
  if (x.size() == 0) throw std::invalid_argument("metrics: empty image");
}

struct SsimConstants {
  Index w;
  double c1;
  double c2;
};

SsimConstants resolve(const Grid& x, const Grid& ref, const SsimOptions& opt) {
  check_same_shape(x, ref);
  if (!(opt.peak > 0.0)) throw std::invalid_argument("ssim: peak must be > 0");
  if (opt.window < 1) throw std::invalid_argument("ssim: window must be >= 1");
  if (opt.window > std::min(x.rows(), x.cols()))
    throw std::invalid_argument("ssim: window larger than image");
  const double c1 = opt.c1.value_or((0.01 * opt.peak) * (0.01 * opt.peak));
  const double c2 = opt.c2.value_or((0.03 * opt.peak) * (0.03 * opt.peak));
  if (!(c1 > 0.0) || !(c2 > 0.0)) throw std::invalid_argument("ssim: stabilizers must be > 0");
  return {opt.window, c1, c2};
}

double window_ssim(const Grid& x, const Grid& y, Index i0, Index j0, const SsimConstants& k) {
  const double inv = 1.0 / static_cast<double>(k.w * k.w);
  double sx = 0.0;
  double sy = 0.0;
  for (Index j = j0; j < j0 + k.w; ++j)
    for (Index i = i0; i < i0 + k.w; ++i) {
      sx += x(i, j);
      sy += y(i, j);
    }
  const double mx = sx * inv;
  const double my = sy * inv;
  double vx = 0.0;
  double vy = 0.0;
  double cxy = 0.0;
  for (Index j = j0; j < j0 + k.w; ++j)
    for (Index i = i0; i < i0 + k.w; ++i) {
      const double dx = x(i, j) - mx;
      const double dy = y(i, j) - my;
      vx += dx * dx;
      vy += dy * dy;
      cxy += dx * dy;
    }
  vx *= inv;
  vy *= inv;
  cxy *= inv;
  return ((2.0 * mx * my + k.c1) * (2.0 * cxy + k.c2)) / ((mx * mx + my * my + k.c1) * (vx + vy + k.c2));
}

}  // namespace

double mse(const Grid& x, const Grid& ref) {
  check_same_shape(x, ref);
  return (x - ref).squaredNorm() / static_cast<double>(x.size());
}

double psnr(const Grid& x, const Grid& ref, double peak) {
  if (!(peak > 0.0)) throw std::invalid_argument("psnr: peak must be > 0");
  const double e = mse(x, ref);
  if (e == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / e);
}

double ssim(const Grid& x, const Grid& ref, const SsimOptions& opt) {
  const SsimConstants k = resolve(x, ref, opt);
  const Index pr = x.rows() - k.w + 1;
  const Index pc = x.cols() - k.w + 1;
  double total = 0.0;
#pragma omp parallel for collapse(2) reduction(+ : total) schedule(static)
  for (Index j = 0; j < pc; ++j)
    for (Index i = 0; i < pr; ++i) total += window_ssim(x, ref, i, j, k);
  return total / static_cast<double>(pr * pc);
}

double serial::ssim(const Grid& x, const Grid& ref, const SsimOptions& opt) {
  const SsimConstants k = resolve(x, ref, opt);
  const Index pr = x.rows() - k.w + 1;
  const Index pc = x.cols() - k.w + 1;
  double total = 0.0;
  for (Index j = 0; j < pc; ++j)
    for (Index i = 0; i < pr; ++i) total += window_ssim(x, ref, i, j, k);
  return total / static_cast<double>(pr * pc);
}

double similarity_loss(const Grid& x_hat, const Grid& x, double lambda, const SsimOptions& opt) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("similarity_loss: lambda must lie in [0, 1]");
  check_same_shape(x_hat, x);
  const double l1 = (x_hat - x).cwiseAbs().mean();
  if (lambda == 1.0) return l1;
  return lambda * l1 + (1.0 - lambda) * (1.0 - ssim(x_hat, x, opt));
}

QualityReport evaluate_quality(const Image& x, const Image& ref, double lambda, const SsimOptions& opt) {
  if (x.channel_count() != ref.channel_count()) throw std::invalid_argument("metrics: channel counts differ");
  QualityReport out;
  for (int c = 0; c < x.channel_count(); ++c) {
    ChannelQuality q;
    q.mse = mse(x.channel(c), ref.channel(c));
    q.psnr_db = psnr(x.channel(c), ref.channel(c), opt.peak);
    q.ssim = ssim(x.channel(c), ref.channel(c), opt);
    q.similarity_loss = similarity_loss(x.channel(c), ref.channel(c), lambda, opt);
    out.per_channel.push_back(q);
  }
  const double count = static_cast<double>(out.per_channel.size());
  for (const auto& q : out.per_channel) {
    out.mse += q.mse / count;
    out.psnr_db += q.psnr_db / count;
    out.ssim += q.ssim / count;
    out.similarity_loss += q.similarity_loss / count;
  }
  return out;
}

namespace {

nlohmann::json number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

}  // namespace

nlohmann::json to_json(const QualityReport& report) {
  nlohmann::json channels = nlohmann::json::array();
  for (const auto& q : report.per_channel)
    channels.push_back({{"mse", q.mse},
                        {"psnr_db", number(q.psnr_db)},
                        {"ssim", q.ssim},
                        {"similarity_loss", q.similarity_loss}});
  return {{"mse", report.mse},
          {"psnr_db", number(report.psnr_db)},
          {"ssim", report.ssim},
          {"similarity_loss", report.similarity_loss},
          {"per_channel", channels}};
}

}  // namespace deblur
