#include "stft/stft.hpp"

#include <algorithm>

#include "common/error.hpp"

namespace gccnmf {

namespace {
constexpr double kColaTolerance = 1e-10;
}

template <typename Real>
StreamingStft<Real>::StreamingStft(const WindowPair& pair)
    : pair_(pair), fft_(pair.frame_size) {
  const ColaReport cola = cola_report(pair_);
  require(cola.relative_deviation < kColaTolerance, ErrorCode::kInvalidParameter,
          "window pair is not COLA at hop " + std::to_string(pair_.hop));
  analysis_.assign(pair_.analysis.begin(), pair_.analysis.end());
  synthesis_.assign(pair_.synthesis.begin(), pair_.synthesis.end());
  ola_gain_ = static_cast<Real>(1.0 / cola.constant);
  frame_.resize(pair_.frame_size);
  reset();
}

template <typename Real>
void StreamingStft<Real>::reset() {
  for (auto& ch : input_) ch.assign(pair_.frame_size, Real(0));
  for (auto& ch : output_) ch.assign(pair_.synthesis_span(), Real(0));
  frames_ = 0;
}

template <typename Real>
void StreamingStft<Real>::analyze_channel(int c, std::span<const Real> samples,
                                          Spectrum<Real>& out) {
  auto& ring = input_[c];
  const std::size_t hop = pair_.hop;
  std::move(ring.begin() + hop, ring.end(), ring.begin());
  std::copy(samples.begin(), samples.end(), ring.end() - hop);
  for (std::size_t n = 0; n < ring.size(); ++n) frame_[n] = ring[n] * analysis_[n];
  out.resize(bins());
  fft_.forward(frame_, out);
}

template <typename Real>
void StreamingStft<Real>::analyze(std::span<const Real> left,
                                  std::span<const Real> right,
                                  StereoSpectrum<Real>& out) {
  require(left.size() == pair_.hop && right.size() == pair_.hop,
          ErrorCode::kInvalidInput,
          "analyze expects exactly " + std::to_string(pair_.hop) +
              " samples per channel");
  analyze_channel(0, left, out.channel[0]);
  analyze_channel(1, right, out.channel[1]);
  ++frames_;
}

template <typename Real>
void StreamingStft<Real>::synthesize_channel(int c, const Spectrum<Real>& in,
                                             std::span<Real> out) {
  fft_.inverse(in, frame_);
  auto& acc = output_[c];
  const std::size_t span = acc.size();
  const std::size_t offset = pair_.frame_size - span;
  for (std::size_t n = 0; n < span; ++n)
    acc[n] += frame_[offset + n] * synthesis_[offset + n];
  const std::size_t hop = pair_.hop;
  for (std::size_t n = 0; n < hop; ++n) out[n] = acc[n] * ola_gain_;
  std::move(acc.begin() + hop, acc.end(), acc.begin());
  std::fill(acc.end() - hop, acc.end(), Real(0));
}

template <typename Real>
void StreamingStft<Real>::synthesize(const StereoSpectrum<Real>& spectrum,
                                     std::span<Real> left, std::span<Real> right) {
  require(spectrum.bins() == bins() && spectrum.right().size() == bins(),
          ErrorCode::kInvalidInput, "spectrum has the wrong number of bins");
  require(left.size() == pair_.hop && right.size() == pair_.hop,
          ErrorCode::kInvalidInput, "synthesize writes exactly one hop per channel");
  synthesize_channel(0, spectrum.channel[0], left);
  synthesize_channel(1, spectrum.channel[1], right);
}

template class StreamingStft<double>;
template class StreamingStft<float>;

Eigen::MatrixXd magnitude_spectrogram(std::span<const double> signal,
                                      const WindowPair& pair) {
  const std::size_t hop = pair.hop;
  const std::size_t frames = signal.size() / hop;
  const std::size_t bins = pair.frame_size / 2 + 1;
  RealFft<double> fft(pair.frame_size);
  std::vector<double> ring(pair.frame_size, 0.0), frame(pair.frame_size);
  Spectrum<double> spec(bins);
  Eigen::MatrixXd out(bins, frames);
  for (std::size_t t = 0; t < frames; ++t) {
    std::move(ring.begin() + hop, ring.end(), ring.begin());
    std::copy_n(signal.begin() + t * hop, hop, ring.end() - hop);
    for (std::size_t n = 0; n < ring.size(); ++n) frame[n] = ring[n] * pair.analysis[n];
    fft.forward(frame, spec);
    for (std::size_t f = 0; f < bins; ++f) out(f, t) = std::abs(spec[f]);
  }
  return out;
}

}  // namespace gccnmf
