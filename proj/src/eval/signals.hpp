#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pipeline/offline.hpp"

namespace gccnmf {

// Synthetic sources, all deterministic in the seed and normalized to unit RMS.
std::vector<double> white_noise(std::size_t samples, std::uint64_t seed);
// 1/f power spectrum, shaped in the frequency domain.
std::vector<double> pink_noise(std::size_t samples, std::uint64_t seed);
// Voiced syllables: a glottal harmonic series with drifting pitch shaped by
// three formant resonances, separated by short pauses.
std::vector<double> synthetic_speech(std::size_t samples, double sample_rate,
                                     std::uint64_t seed);

// left = source, right = source delayed by `tdoa` seconds through a linear
// phase shift on a zero-padded transform. Requires |tdoa| fs <= max_shift.
Stereo<double> spatialize(std::span<const double> source, double tdoa, double sample_rate,
                          double max_shift = 256.0);

struct MixtureSpec {
  std::vector<double> target;
  std::vector<double> noise;
  double target_tdoa = 0.0;
  double noise_tdoa = 0.0;
  double snr_db = 0.0;
  double sample_rate = 16000.0;
};

struct Mixture {
  Stereo<double> mixture;
  Stereo<double> target;  // spatialized target as mixed
  Stereo<double> noise;   // spatialized, rescaled noise as mixed
};

// Noise is rescaled so the target-to-noise power ratio over the common length,
// pooled over both channels after spatialization, equals spec.snr_db.
Mixture make_mixture(const MixtureSpec& spec);

// Pooled over channels. Returns +infinity when the residual energy is below
// 1e-30.
double snr_db(const Stereo<double>& reference, const Stereo<double>& estimate,
              std::size_t skip = 0);
double energy(const Stereo<double>& s, std::size_t skip = 0);

}  // namespace gccnmf
