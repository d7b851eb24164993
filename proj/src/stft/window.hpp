#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace gccnmf {

enum class WindowKind { kSymmetric, kAsymmetric };

std::string to_string(WindowKind kind);
WindowKind window_kind_from_string(const std::string& name);

// Analysis/synthesis window pair for a frame of `frame_size` samples advanced
// by `hop` samples. The elementwise product is a periodic Hann window of
// length 2 * product_half, right-aligned in the frame.
struct WindowPair {
  std::vector<double> analysis;
  std::vector<double> synthesis;
  std::size_t frame_size = 0;
  std::size_t product_half = 0;
  std::size_t hop = 0;
  WindowKind kind = WindowKind::kSymmetric;

  // Length of the non-zero tail of the synthesis window; this, not the frame
  // size, sets the overlap-add latency.
  std::size_t synthesis_span() const noexcept { return 2 * product_half; }
  std::vector<double> product() const;
};

// 0.5 * (1 - cos(2 pi n / size)) for 0 <= n < size. size must be even, >= 2.
std::vector<double> periodic_hann(std::size_t size);

// sqrt-Hann analysis and synthesis windows of equal length.
WindowPair symmetric_windows(std::size_t frame_size, std::size_t hop);

// Long analysis window weighted towards the frame end, short synthesis window
// of 2 * product_half samples sharing the frame's right edge.
// Requires 1 <= product_half, 2 * product_half < frame_size and
// frame_size - product_half even.
WindowPair asymmetric_windows(std::size_t frame_size, std::size_t product_half,
                              std::size_t hop);

// Steady-state value of the product windows overlap-added at the hop, and the
// relative peak deviation from that constant (0 for an exact COLA pair).
struct ColaReport {
  double constant = 0.0;
  double relative_deviation = 0.0;
};
ColaReport cola_report(const WindowPair& pair);

struct Latency {
  double ola_ms = 0.0;
  double total_ms = 0.0;
};

// Windowing latency: the synthesis span for overlap-add, plus one hop of
// processing budget for the total.
Latency algorithmic_latency(const WindowPair& pair, double sample_rate);

}  // namespace gccnmf
