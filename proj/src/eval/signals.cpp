#include "eval/signals.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <random>

#include "common/error.hpp"
#include "nmf/random.hpp"
#include "stft/fft.hpp"

namespace gccnmf {

namespace {

void normalize_rms(std::vector<double>& x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  if (e <= 0.0) return;
  const double scale = 1.0 / std::sqrt(e / static_cast<double>(x.size()));
  for (double& v : x) v *= scale;
}

std::size_t even_at_least(std::size_t n) { return n + (n & 1u); }

// Standard normal from raw engine bits (Box-Muller), portable across libraries.
double gaussian(Rng& rng) {
  const double u1 = uniform_open_closed(rng);
  const double u2 = uniform_open_closed(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

std::vector<double> white_noise(std::size_t samples, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(samples);
  for (double& v : x) v = gaussian(rng);
  normalize_rms(x);
  return x;
}

std::vector<double> pink_noise(std::size_t samples, std::uint64_t seed) {
  if (samples == 0) return {};
  const std::size_t n = even_at_least(std::max<std::size_t>(samples, 2));
  std::vector<double> x = white_noise(n, seed);
  RealFft<double> fft(n);
  std::vector<std::complex<double>> spec(n / 2 + 1);
  fft.forward(x, spec);
  spec[0] = 0.0;
  for (std::size_t k = 1; k < spec.size(); ++k) spec[k] /= std::sqrt(static_cast<double>(k));
  fft.inverse(spec, x);
  x.resize(samples);
  normalize_rms(x);
  return x;
}

std::vector<double> synthetic_speech(std::size_t samples, double sample_rate,
                                     std::uint64_t seed) {
  struct Vowel {
    double f1, f2, f3;
  };
  static constexpr Vowel kVowels[] = {
      {730, 1090, 2440}, {270, 2290, 3010}, {300, 870, 2240},
      {530, 1840, 2480}, {570, 840, 2410},  {660, 1720, 2410},
  };
  Rng rng(seed);
  std::vector<double> x(samples, 0.0);
  const double nyquist_guard = 0.45 * sample_rate;
  std::size_t pos = static_cast<std::size_t>(0.05 * sample_rate * uniform_open_closed(rng));
  double phase = 0.0;
  while (pos < samples) {
    const double syllable_s = 0.15 + 0.2 * uniform_open_closed(rng);
    const double pause_s = 0.04 + 0.12 * uniform_open_closed(rng);
    const Vowel& v = kVowels[uniform_index(rng, std::size(kVowels))];
    const double f0_start = 95.0 + 130.0 * uniform_open_closed(rng);
    const double f0_end = f0_start * (0.8 + 0.4 * uniform_open_closed(rng));
    const double level = 0.5 + uniform_open_closed(rng);
    const std::size_t len = static_cast<std::size_t>(syllable_s * sample_rate);

    // Harmonic amplitudes follow the formant envelope at the mean pitch.
    const double f0_mid = 0.5 * (f0_start + f0_end);
    const int harmonics = static_cast<int>(nyquist_guard / (f0_mid * 1.25));
    std::vector<double> amp(static_cast<std::size_t>(harmonics) + 1, 0.0);
    for (int h = 1; h <= harmonics; ++h) {
      const double f = h * f0_mid;
      double env = 0.0;
      for (const auto& [fc, bw, g] : {std::tuple{v.f1, 90.0, 1.0}, std::tuple{v.f2, 120.0, 0.6},
                                     std::tuple{v.f3, 170.0, 0.3}}) {
        const double d = (f - fc) / bw;
        env += g / (1.0 + d * d);
      }
      amp[static_cast<std::size_t>(h)] = env / std::sqrt(static_cast<double>(h));
    }
    for (std::size_t i = 0; i < len && pos + i < samples; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(len);
      const double f0 = f0_start + (f0_end - f0_start) * t;
      phase += 2.0 * std::numbers::pi * f0 / sample_rate;
      if (phase > 2.0 * std::numbers::pi) phase -= 2.0 * std::numbers::pi;
      const double envelope = level * std::sin(std::numbers::pi * t);
      double s = 0.0;
      for (int h = 1; h <= harmonics; ++h) {
        if (h * f0 >= nyquist_guard) break;
        s += amp[static_cast<std::size_t>(h)] * std::sin(h * phase);
      }
      x[pos + i] = envelope * s;
    }
    pos += len + static_cast<std::size_t>(pause_s * sample_rate);
  }
  normalize_rms(x);
  return x;
}

Stereo<double> spatialize(std::span<const double> source, double tdoa, double sample_rate,
                          double max_shift) {
  const double shift = tdoa * sample_rate;
  require(std::abs(shift) <= max_shift, ErrorCode::kInvalidParameter,
          "delay of " + std::to_string(shift) + " samples exceeds the limit of " +
              std::to_string(max_shift));
  Stereo<double> out;
  out.left.assign(source.begin(), source.end());
  if (source.empty()) return out;
  const auto pad = static_cast<std::size_t>(std::ceil(std::abs(shift))) + 2;
  const std::size_t n = even_at_least(source.size() + pad);
  std::vector<double> buf(n, 0.0);
  std::copy(source.begin(), source.end(), buf.begin());
  RealFft<double> fft(n);
  std::vector<std::complex<double>> spec(n / 2 + 1);
  fft.forward(buf, spec);
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double w = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    if (k == n / 2)
      spec[k] *= std::cos(w * shift);
    else
      spec[k] *= std::polar(1.0, -w * shift);
  }
  fft.inverse(spec, buf);
  out.right.assign(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(source.size()));
  return out;
}

double energy(const Stereo<double>& s, std::size_t skip) {
  double e = 0.0;
  for (std::size_t i = skip; i < s.frames(); ++i) e += s.left[i] * s.left[i] + s.right[i] * s.right[i];
  return e;
}

Mixture make_mixture(const MixtureSpec& spec) {
  require(!spec.target.empty() && !spec.noise.empty(), ErrorCode::kInvalidInput,
          "mixture sources must be non-empty");
  const std::size_t length = std::min(spec.target.size(), spec.noise.size());
  const std::span<const double> t(spec.target.data(), length);
  const std::span<const double> n(spec.noise.data(), length);
  Mixture m;
  m.target = spatialize(t, spec.target_tdoa, spec.sample_rate);
  m.noise = spatialize(n, spec.noise_tdoa, spec.sample_rate);
  const double pt = energy(m.target);
  const double pn = energy(m.noise);
  require(pt > 0.0 && pn > 0.0, ErrorCode::kInvalidInput, "mixture source has zero power");
  const double gain = std::sqrt(pt / (pn * std::pow(10.0, spec.snr_db / 10.0)));
  for (auto* ch : {&m.noise.left, &m.noise.right})
    for (double& v : *ch) v *= gain;
  m.mixture.left.resize(length);
  m.mixture.right.resize(length);
  for (std::size_t i = 0; i < length; ++i) {
    m.mixture.left[i] = m.target.left[i] + m.noise.left[i];
    m.mixture.right[i] = m.target.right[i] + m.noise.right[i];
  }
  return m;
}

double snr_db(const Stereo<double>& reference, const Stereo<double>& estimate, std::size_t skip) {
  require(reference.frames() == estimate.frames() &&
              reference.right.size() == estimate.right.size(),
          ErrorCode::kInvalidInput, "reference and estimate lengths differ");
  double signal = 0.0, residual = 0.0;
  for (std::size_t i = skip; i < reference.frames(); ++i) {
    for (int c = 0; c < 2; ++c) {
      const double r = c == 0 ? reference.left[i] : reference.right[i];
      const double e = c == 0 ? estimate.left[i] : estimate.right[i];
      signal += r * r;
      residual += (e - r) * (e - r);
    }
  }
  if (residual < 1e-30) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(signal / residual);
}

}  // namespace gccnmf
