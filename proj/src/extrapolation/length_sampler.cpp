#include "stca/extrapolation/length_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

#include "stca/errors.hpp"

namespace stca::extrapolation {

void LengthSamplerConfig::validate() const {
  if (!(min_length >= 0 && min_length < avg_length && avg_length < max_length && max_length <= infer_length)) {
    throw ConfigError("length config needs 0 <= min < avg < max <= infer, got min=" + std::to_string(min_length) +
                      " avg=" + std::to_string(avg_length) + " max=" + std::to_string(max_length) +
                      " infer=" + std::to_string(infer_length));
  }
  if (!(alpha > 0) || !std::isfinite(alpha)) throw ConfigError("length alpha must be positive");
}

LengthSamplerConfig LengthSamplerConfig::production() {
  return {64, 2000, 10000, 0.02, 10000, Selection::kSuffix};
}

LengthSamplerConfig LengthSamplerConfig::desk() { return {8, 64, 256, 0.02, 256, Selection::kSuffix}; }

double beta_param(const LengthSamplerConfig& c) {
  c.validate();
  return c.alpha * (c.max_length - c.avg_length) / (c.avg_length - c.min_length);
}

namespace {

// log of a Gamma(shape, 1) draw. Shapes below 1 use
// G(a) = G(a + 1) * U^(1/a).
double log_gamma_draw(double shape, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (shape < 1.0) {
    double u = unit(rng);
    while (u <= 0.0) u = unit(rng);
    return log_gamma_draw(shape + 1.0, rng) + std::log(u) / shape;
  }
  std::gamma_distribution<double> g(shape, 1.0);
  double x = g(rng);
  while (x <= 0.0) x = g(rng);
  return std::log(x);
}

}  // namespace

double sample_beta(double a, double b, Rng& rng) {
  if (!(a > 0) || !(b > 0)) throw ConfigError("Beta shapes must be positive");
  const double lx = log_gamma_draw(a, rng);
  const double ly = log_gamma_draw(b, rng);
  return 1.0 / (1.0 + std::exp(ly - lx));
}

std::size_t round8(double x) {
  if (x <= 0) return 0;
  return static_cast<std::size_t>(std::floor(x / 8.0 + 0.5)) * 8;
}

std::size_t length_from_ratio(const LengthSamplerConfig& c, double s) {
  const double raw = c.min_length + s * (c.max_length - c.min_length);
  const std::size_t lo = std::max<std::size_t>(8, round8(c.min_length));
  const std::size_t hi = std::max(lo, round8(c.max_length));
  return std::clamp(round8(raw), lo, hi);
}

std::size_t sample_length(const LengthSamplerConfig& c, Rng& rng) {
  return length_from_ratio(c, sample_beta(c.alpha, beta_param(c), rng));
}

History select_suffix(std::span<const HistoryEvent> history, std::size_t length) {
  const std::size_t n = std::min(length, history.size());
  return History(history.end() - static_cast<std::ptrdiff_t>(n), history.end());
}

History select_random(std::span<const HistoryEvent> history, std::size_t length, Rng& rng) {
  History out;
  std::sample(history.begin(), history.end(), std::back_inserter(out), std::min(length, history.size()), rng);
  return out;
}

History select(std::span<const HistoryEvent> history, std::size_t length, Selection selection, Rng& rng) {
  return selection == Selection::kSuffix ? select_suffix(history, length) : select_random(history, length, rng);
}

SparsityReport sequence_sparsity(const LengthSamplerConfig& c) {
  if (!(c.avg_length > 0 && c.avg_length <= c.max_length && c.max_length <= c.infer_length)) {
    throw ConfigError("sparsity needs 0 < avg <= max <= infer");
  }
  return {c.avg_length / c.max_length, c.avg_length, c.infer_length / c.avg_length};
}

}  // namespace stca::extrapolation
