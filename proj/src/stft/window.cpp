#include "stft/window.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numbers>

#include "common/error.hpp"

namespace gccnmf {

std::string to_string(WindowKind kind) {
  return kind == WindowKind::kSymmetric ? "symmetric" : "asymmetric";
}

WindowKind window_kind_from_string(const std::string& name) {
  if (name == "symmetric") return WindowKind::kSymmetric;
  if (name == "asymmetric") return WindowKind::kAsymmetric;
  fail(ErrorCode::kInvalidParameter, "unknown window kind '" + name + "'");
}

std::vector<double> WindowPair::product() const {
  std::vector<double> out(frame_size);
  for (std::size_t n = 0; n < frame_size; ++n) out[n] = analysis[n] * synthesis[n];
  return out;
}

std::vector<double> periodic_hann(std::size_t size) {
  require(size >= 2 && size % 2 == 0, ErrorCode::kInvalidParameter,
          "periodic Hann size must be even and >= 2, got " + std::to_string(size));
  std::vector<double> out(size);
  const double step = 2.0 * std::numbers::pi / static_cast<double>(size);
  for (std::size_t n = 0; n < size; ++n)
    out[n] = 0.5 * (1.0 - std::cos(step * static_cast<double>(n)));
  return out;
}

namespace {

void check_hop(std::size_t hop, std::size_t span) {
  require(hop >= 1, ErrorCode::kInvalidParameter, "hop must be >= 1");
  require(hop <= span, ErrorCode::kInvalidParameter,
          "hop " + std::to_string(hop) + " exceeds synthesis span " +
              std::to_string(span));
}

}  // namespace

WindowPair symmetric_windows(std::size_t frame_size, std::size_t hop) {
  WindowPair pair;
  pair.analysis = periodic_hann(frame_size);
  for (double& v : pair.analysis) v = std::sqrt(v);
  pair.synthesis = pair.analysis;
  pair.frame_size = frame_size;
  pair.product_half = frame_size / 2;
  pair.hop = hop;
  pair.kind = WindowKind::kSymmetric;
  check_hop(hop, frame_size);
  return pair;
}

WindowPair asymmetric_windows(std::size_t frame_size, std::size_t product_half,
                              std::size_t hop) {
  const std::size_t n_total = frame_size;
  const std::size_t m = product_half;
  require(m >= 1, ErrorCode::kInvalidParameter, "product half-size must be >= 1");
  require(2 * m < n_total, ErrorCode::kInvalidParameter,
          "asymmetric windows need 2M < N (M=" + std::to_string(m) +
              ", N=" + std::to_string(n_total) + ")");
  require((n_total - m) % 2 == 0, ErrorCode::kInvalidParameter,
          "asymmetric windows need N - M even");
  check_hop(hop, 2 * m);

  const auto long_hann = periodic_hann(2 * (n_total - m));
  const auto short_hann = periodic_hann(2 * m);
  const std::size_t tail_start = n_total - 2 * m;  // first non-zero synthesis index
  const std::size_t centre = n_total - m;

  WindowPair pair;
  pair.analysis.assign(n_total, 0.0);
  pair.synthesis.assign(n_total, 0.0);
  for (std::size_t n = 0; n < centre; ++n) pair.analysis[n] = std::sqrt(long_hann[n]);
  for (std::size_t n = centre; n < n_total; ++n) {
    const double v = std::sqrt(short_hann[n - tail_start]);
    pair.analysis[n] = v;
    pair.synthesis[n] = v;
  }
  for (std::size_t n = tail_start; n < centre; ++n) {
    const double denom = std::sqrt(long_hann[n]);
    // long_hann vanishes only at n == 0 and tail_start > 0.
    assert(denom > 0.0);
    pair.synthesis[n] = short_hann[n - tail_start] / denom;
  }
  pair.frame_size = n_total;
  pair.product_half = m;
  pair.hop = hop;
  pair.kind = WindowKind::kAsymmetric;
  return pair;
}

ColaReport cola_report(const WindowPair& pair) {
  const auto prod = pair.product();
  const std::size_t hop = pair.hop;
  std::vector<double> folded(hop, 0.0);
  for (std::size_t n = 0; n < prod.size(); ++n) folded[n % hop] += prod[n];
  const auto [lo, hi] = std::minmax_element(folded.begin(), folded.end());
  double mean = 0.0;
  for (double v : folded) mean += v;
  mean /= static_cast<double>(hop);
  ColaReport report;
  report.constant = mean;
  report.relative_deviation = mean > 0.0 ? (*hi - *lo) / mean : 1.0;
  return report;
}

Latency algorithmic_latency(const WindowPair& pair, double sample_rate) {
  require(sample_rate > 0.0, ErrorCode::kInvalidParameter, "sample rate must be positive");
  require(pair.hop >= 1, ErrorCode::kInvalidParameter, "hop must be >= 1");
  const double span = static_cast<double>(pair.synthesis_span());
  Latency out;
  out.ola_ms = 1000.0 * span / sample_rate;
  out.total_ms = 1000.0 * (span + static_cast<double>(pair.hop)) / sample_rate;
  return out;
}

}  // namespace gccnmf
