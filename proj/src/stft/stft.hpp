#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "stft/fft.hpp"
#include "stft/window.hpp"

namespace gccnmf {

template <typename Real>
using Spectrum = std::vector<std::complex<Real>>;

// One-sided (N/2 + 1 bins) spectra of the left and right channel of a frame.
template <typename Real>
struct StereoSpectrum {
  std::array<Spectrum<Real>, 2> channel;

  StereoSpectrum() = default;
  explicit StereoSpectrum(std::size_t bins) {
    channel[0].assign(bins, {});
    channel[1].assign(bins, {});
  }
  std::size_t bins() const noexcept { return channel[0].size(); }
  Spectrum<Real>& left() noexcept { return channel[0]; }
  Spectrum<Real>& right() noexcept { return channel[1]; }
  const Spectrum<Real>& left() const noexcept { return channel[0]; }
  const Spectrum<Real>& right() const noexcept { return channel[1]; }
};

// Streaming two-channel STFT with overlap-add resynthesis.
//
// Each call to analyze() shifts `hop` new samples per channel into a
// zero-primed ring of `frame_size` samples and returns the windowed spectrum.
// synthesize() overlap-adds the inverse transform and emits `hop` finished
// samples. Output sample k corresponds to input sample k - output_delay().
template <typename Real>
class StreamingStft {
 public:
  // Throws kInvalidParameter when the pair does not overlap-add to a constant.
  explicit StreamingStft(const WindowPair& pair);

  const WindowPair& pair() const noexcept { return pair_; }
  std::size_t frame_size() const noexcept { return pair_.frame_size; }
  std::size_t hop() const noexcept { return pair_.hop; }
  std::size_t bins() const noexcept { return pair_.frame_size / 2 + 1; }
  std::size_t output_delay() const noexcept { return pair_.synthesis_span() - pair_.hop; }
  std::uint64_t frames_analyzed() const noexcept { return frames_; }
  // The first N / R frames see part of the zero priming.
  bool warming_up() const noexcept { return frames_ <= pair_.frame_size / pair_.hop; }

  void analyze(std::span<const Real> left, std::span<const Real> right,
               StereoSpectrum<Real>& out);
  void synthesize(const StereoSpectrum<Real>& spectrum, std::span<Real> left,
                  std::span<Real> right);
  void reset();

 private:
  void analyze_channel(int c, std::span<const Real> samples, Spectrum<Real>& out);
  void synthesize_channel(int c, const Spectrum<Real>& in, std::span<Real> out);

  WindowPair pair_;
  std::vector<Real> analysis_;
  std::vector<Real> synthesis_;
  Real ola_gain_ = 1;
  RealFft<Real> fft_;
  std::array<std::vector<Real>, 2> input_;
  std::array<std::vector<Real>, 2> output_;
  std::vector<Real> frame_;
  std::uint64_t frames_ = 0;
};

extern template class StreamingStft<float>;
extern template class StreamingStft<double>;

// Magnitude spectrogram (bins x frames) of a mono signal using the analysis
// window of `pair`, zero-primed like the streaming path. Trailing samples that
// do not fill a hop are dropped.
Eigen::MatrixXd magnitude_spectrogram(std::span<const double> signal,
                                      const WindowPair& pair);

}  // namespace gccnmf
