#include <algorithm>
#include <cmath>
#include <random>

#include "stft/stft.hpp"
#include "stft/window.hpp"
#include "support/check.hpp"
#include "support/oracles.hpp"

using namespace gccnmf;
using Catch::Approx;

namespace {

// Streams `x` (identical on both channels with a sign flip on the right)
// through analyze/synthesize untouched and returns the left and right output.
template <typename Real>
std::array<std::vector<Real>, 2> identity_stream(const WindowPair& pair,
                                                 const std::vector<double>& x) {
  StreamingStft<Real> stft(pair);
  const std::size_t hop = pair.hop;
  std::vector<Real> l(hop), r(hop), ol(hop), orr(hop);
  std::array<std::vector<Real>, 2> out;
  StereoSpectrum<Real> spec(stft.bins());
  for (std::size_t start = 0; start + hop <= x.size(); start += hop) {
    for (std::size_t i = 0; i < hop; ++i) {
      l[i] = static_cast<Real>(x[start + i]);
      r[i] = static_cast<Real>(-0.5 * x[start + i]);
    }
    stft.analyze(l, r, spec);
    stft.synthesize(spec, ol, orr);
    out[0].insert(out[0].end(), ol.begin(), ol.end());
    out[1].insert(out[1].end(), orr.begin(), orr.end());
  }
  return out;
}

template <typename Real>
double reconstruction_error(const WindowPair& pair, std::size_t length, std::uint64_t seed) {
  const auto x = oracle::noise(length, seed);
  const auto out = identity_stream<Real>(pair, x);
  const std::size_t delay = pair.synthesis_span() - pair.hop;
  std::vector<double> ref_l(length, 0.0), ref_r(length, 0.0);
  for (std::size_t k = 0; k + delay < length; ++k) {
    ref_l[k + delay] = x[k];
    ref_r[k + delay] = -0.5 * x[k];
  }
  // Exclude the warm-up frames.
  const std::size_t from = pair.frame_size + delay;
  return std::max(oracle::rel_rms(ref_l, out[0], from, out[0].size()),
                  oracle::rel_rms(ref_r, out[1], from, out[1].size()));
}

bool is_cola(const WindowPair& pair) {
  const auto period = oracle::ola_period(pair.product(), pair.hop);
  const auto [lo, hi] = std::minmax_element(period.begin(), period.end());
  return (*hi - *lo) <= 1e-10 * std::abs(*hi);
}

// Random asymmetric presets: 2M < N, N - M even, hop dividing 2M with at
// least 50% overlap of the product window.
struct AsymPreset {
  std::size_t n, m, hop;
};

AsymPreset random_asym(std::mt19937_64& rng) {
  const std::size_t n = std::size_t{1} << (6 + rng() % 5);  // 64 .. 1024
  std::size_t m;
  do {
    m = 2 + 2 * (rng() % (n / 4));  // even, so N - M is even
  } while (2 * m >= n);
  std::vector<std::size_t> hops;
  for (std::size_t r = 1; r <= m; ++r)
    if ((2 * m) % r == 0) hops.push_back(r);
  return {n, m, hops[rng() % hops.size()]};
}

}  // namespace

TEST_CASE("periodic Hann samples", "[stft][window]") {
  const auto h = periodic_hann(4);
  REQUIRE(h[0] == Approx(0.0).margin(1e-15));
  REQUIRE(h[1] == Approx(0.5).margin(1e-15));
  REQUIRE(h[2] == Approx(1.0).margin(1e-15));
  REQUIRE(h[3] == Approx(0.5).margin(1e-15));
}

TEST_CASE("periodic Hann rejects odd or tiny sizes", "[stft][window]") {
  REQUIRE_ERROR_CODE(periodic_hann(0), ErrorCode::kInvalidParameter);
  REQUIRE_ERROR_CODE(periodic_hann(1), ErrorCode::kInvalidParameter);
  REQUIRE_ERROR_CODE(periodic_hann(7), ErrorCode::kInvalidParameter);
}

TEST_CASE("symmetric windows multiply to the periodic Hann", "[stft][window]") {
  const auto pair = symmetric_windows(1024, 256);
  const auto hann = periodic_hann(1024);
  const auto prod = pair.product();
  REQUIRE(pair.product_half == 512);
  REQUIRE(pair.analysis == pair.synthesis);
  for (std::size_t n = 0; n < 1024; ++n) REQUIRE(std::abs(prod[n] - hann[n]) < 1e-12);
}

TEST_CASE("symmetric N=8 overlap-adds to 2 at hop 2", "[stft][window][cola]") {
  const auto pair = symmetric_windows(8, 2);
  const auto period = oracle::ola_period(pair.product(), 2);
  for (double v : period) REQUIRE(v == Approx(2.0).epsilon(1e-12));
  REQUIRE(cola_report(pair).constant == Approx(2.0).epsilon(1e-12));
  REQUIRE(cola_report(pair).relative_deviation < 1e-10);
}

TEST_CASE("symmetric N=8 without overlap is not COLA", "[stft][window][cola]") {
  const auto pair = symmetric_windows(8, 8);
  REQUIRE_FALSE(is_cola(pair));
  REQUIRE(cola_report(pair).relative_deviation > 0.1);
  REQUIRE_ERROR_CODE(StreamingStft<double>(pair), ErrorCode::kInvalidParameter);
}

TEST_CASE("asymmetric N=1024 M=16 product is a right-aligned Hann of 32", "[stft][window]") {
  const auto pair = asymmetric_windows(1024, 16, 8);
  const auto hann = periodic_hann(32);
  const auto prod = pair.product();
  for (std::size_t n = 0; n < 992; ++n) {
    REQUIRE(pair.synthesis[n] == 0.0);
    REQUIRE(std::abs(prod[n]) < 1e-12);
  }
  for (std::size_t n = 992; n < 1024; ++n) REQUIRE(std::abs(prod[n] - hann[n - 992]) < 1e-12);
  for (std::size_t n = 0; n < 1024; ++n) {
    REQUIRE(pair.analysis[n] >= 0.0);
    REQUIRE(pair.synthesis[n] >= 0.0);
  }
  REQUIRE(pair.synthesis_span() == 32);
}

TEST_CASE("asymmetric window preconditions", "[stft][window]") {
  REQUIRE_ERROR_CODE(asymmetric_windows(1024, 512, 8), ErrorCode::kInvalidParameter);
  REQUIRE_ERROR_CODE(asymmetric_windows(1024, 600, 8), ErrorCode::kInvalidParameter);
  REQUIRE_ERROR_CODE(asymmetric_windows(1024, 0, 1), ErrorCode::kInvalidParameter);
  REQUIRE_ERROR_CODE(asymmetric_windows(1024, 15, 8), ErrorCode::kInvalidParameter);
  REQUIRE_ERROR_CODE(asymmetric_windows(1024, 16, 0), ErrorCode::kInvalidParameter);
  REQUIRE_ERROR_CODE(symmetric_windows(1024, 0), ErrorCode::kInvalidParameter);
}

TEST_CASE("shipped presets are COLA", "[stft][cola][property]") {
  const std::vector<WindowPair> presets = {
      symmetric_windows(1024, 256), symmetric_windows(512, 128), symmetric_windows(2048, 512),
      asymmetric_windows(1024, 16, 8), asymmetric_windows(1024, 16, 16),
      asymmetric_windows(1024, 32, 16), asymmetric_windows(2048, 64, 32)};
  for (const auto& pair : presets) {
    INFO("N=" << pair.frame_size << " M=" << pair.product_half << " R=" << pair.hop);
    REQUIRE(is_cola(pair));
    REQUIRE(cola_report(pair).relative_deviation < 1e-10);
  }
}

TEST_CASE("random asymmetric presets are COLA and positive", "[stft][cola][property]") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_asym(rng);
    INFO("N=" << p.n << " M=" << p.m << " R=" << p.hop);
    const auto pair = asymmetric_windows(p.n, p.m, p.hop);
    REQUIRE(is_cola(pair));
    const auto hann = periodic_hann(2 * p.m);
    const auto prod = pair.product();
    for (std::size_t n = 0; n < p.n; ++n) {
      REQUIRE(pair.analysis[n] >= 0.0);
      REQUIRE(pair.synthesis[n] >= 0.0);
      const double expected = n < p.n - 2 * p.m ? 0.0 : hann[n - (p.n - 2 * p.m)];
      REQUIRE(std::abs(prod[n] - expected) < 1e-12);
    }
  }
}

TEST_CASE("analysis of silence is silent", "[stft][analyze]") {
  StreamingStft<double> stft(symmetric_windows(8, 2));
  StereoSpectrum<double> spec(stft.bins());
  const std::vector<double> zeros(2, 0.0);
  for (int i = 0; i < 6; ++i) {
    stft.analyze(zeros, zeros, spec);
    for (int c = 0; c < 2; ++c)
      for (const auto& v : spec.channel[c]) REQUIRE(std::abs(v) == 0.0);
  }
}

TEST_CASE("DC input gives the analysis window sum in bin 0", "[stft][analyze]") {
  const auto pair = symmetric_windows(8, 2);
  StreamingStft<double> stft(pair);
  StereoSpectrum<double> spec(stft.bins());
  const std::vector<double> ones(2, 1.0);
  for (int i = 0; i < 4; ++i) stft.analyze(ones, ones, spec);
  double sum = 0.0;
  for (double v : pair.analysis) sum += v;
  REQUIRE(spec.left()[0].real() == Approx(sum).epsilon(1e-12));
  REQUIRE(std::abs(spec.left()[0].imag()) < 1e-12);
}

TEST_CASE("analysis matches a direct DFT of the windowed frame", "[stft][analyze]") {
  const std::size_t n = 64, hop = 16, k = 5;
  const auto pair = symmetric_windows(n, hop);
  StreamingStft<double> stft(pair);
  StereoSpectrum<double> spec(stft.bins());
  std::vector<double> signal(n);
  for (std::size_t t = 0; t < n; ++t)
    signal[t] = std::cos(2.0 * std::numbers::pi * static_cast<double>(k * t) / n + 0.3);
  for (std::size_t start = 0; start < n; start += hop) {
    std::vector<double> chunk(signal.begin() + start, signal.begin() + start + hop);
    stft.analyze(chunk, chunk, spec);
  }
  std::vector<double> windowed(n);
  for (std::size_t t = 0; t < n; ++t) windowed[t] = signal[t] * pair.analysis[t];
  const auto ref = oracle::dft(windowed);
  std::size_t peak = 0;
  for (std::size_t f = 0; f < ref.size(); ++f) {
    REQUIRE(std::abs(spec.left()[f] - ref[f]) < 1e-9);
    if (std::abs(spec.left()[f]) > std::abs(spec.left()[peak])) peak = f;
  }
  REQUIRE(peak == k);
}

TEST_CASE("analyze and synthesize reject wrong sizes", "[stft][analyze]") {
  StreamingStft<double> stft(symmetric_windows(8, 2));
  StereoSpectrum<double> spec(stft.bins());
  const std::vector<double> three(3, 0.0), two(2, 0.0);
  REQUIRE_ERROR_CODE(stft.analyze(three, three, spec), ErrorCode::kInvalidInput);
  REQUIRE_ERROR_CODE(stft.analyze(two, three, spec), ErrorCode::kInvalidInput);
  std::vector<double> out3(3), out2(2);
  stft.analyze(two, two, spec);
  REQUIRE_ERROR_CODE(stft.synthesize(spec, out3, out3), ErrorCode::kInvalidInput);
  StereoSpectrum<double> wrong(4);
  REQUIRE_ERROR_CODE(stft.synthesize(wrong, out2, out2), ErrorCode::kInvalidInput);
}

TEST_CASE("identity round trip symmetric 1024/256", "[stft][reconstruction]") {
  const auto pair = symmetric_windows(1024, 256);
  REQUIRE(reconstruction_error<double>(pair, 16384, 1) < 1e-10);
  REQUIRE(reconstruction_error<float>(pair, 16384, 1) < 1e-5);
}

TEST_CASE("identity round trip asymmetric 1024/16/8", "[stft][reconstruction]") {
  const auto pair = asymmetric_windows(1024, 16, 8);
  REQUIRE(reconstruction_error<double>(pair, 16384, 2) < 1e-10);
  REQUIRE(reconstruction_error<float>(pair, 16384, 2) < 1e-5);
}

TEST_CASE("identity round trip on random presets", "[stft][reconstruction][property]") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    const bool symmetric = trial % 2 == 0;
    WindowPair pair;
    if (symmetric) {
      const std::size_t n = std::size_t{1} << (4 + rng() % 7);
      const std::size_t hop = n / (std::size_t{2} << (rng() % 3));
      pair = symmetric_windows(n, hop);
    } else {
      const auto p = random_asym(rng);
      pair = asymmetric_windows(p.n, p.m, p.hop);
    }
    INFO("N=" << pair.frame_size << " M=" << pair.product_half << " R=" << pair.hop);
    const std::size_t length = pair.hop * (4 * pair.frame_size / pair.hop + 64);
    REQUIRE(reconstruction_error<double>(pair, length, 100 + trial) < 1e-10);
    REQUIRE(reconstruction_error<float>(pair, length, 100 + trial) < 1e-5);
  }
}

TEST_CASE("zero spectrum drains to silence", "[stft][reconstruction]") {
  const auto pair = symmetric_windows(64, 16);
  StreamingStft<double> stft(pair);
  StereoSpectrum<double> spec(stft.bins());
  std::vector<double> in(16, 1.0), l(16), r(16);
  for (int i = 0; i < 8; ++i) {
    stft.analyze(in, in, spec);
    stft.synthesize(spec, l, r);
  }
  const StereoSpectrum<double> zero(stft.bins());
  for (int i = 0; i < 8; ++i) stft.synthesize(zero, l, r);
  for (std::size_t i = 0; i < 16; ++i) {
    REQUIRE(l[i] == 0.0);
    REQUIRE(r[i] == 0.0);
  }
}

TEST_CASE("latency of the default presets", "[stft][latency]") {
  const auto sym = algorithmic_latency(symmetric_windows(1024, 256), 16000.0);
  REQUIRE(sym.ola_ms == Approx(64.0));
  REQUIRE(sym.total_ms == Approx(80.0));
  const auto asym = algorithmic_latency(asymmetric_windows(1024, 16, 16), 16000.0);
  REQUIRE(asym.ola_ms == Approx(2.0));
  REQUIRE(asym.total_ms == Approx(3.0));
  REQUIRE_ERROR_CODE(algorithmic_latency(symmetric_windows(1024, 256), 0.0),
                     ErrorCode::kInvalidParameter);
}

TEST_CASE("stream delay plus two hops equals the total latency", "[stft][latency][property]") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = random_asym(rng);
    const auto pair = asymmetric_windows(p.n, p.m, p.hop);
    StreamingStft<double> stft(pair);
    const auto lat = algorithmic_latency(pair, 16000.0);
    const double delay_plus_buffers =
        static_cast<double>(stft.output_delay() + 2 * pair.hop) * 1000.0 / 16000.0;
    REQUIRE(delay_plus_buffers == Approx(lat.total_ms).epsilon(1e-12));
  }
}

TEST_CASE("total latency increases in hop and window span", "[stft][latency][property]") {
  for (std::size_t n : {256u, 512u, 1024u, 2048u}) {
    double prev = 0.0;
    for (std::size_t hop = 1; hop <= n / 2; hop *= 2) {
      const double t = algorithmic_latency(symmetric_windows(n, hop), 16000.0).total_ms;
      REQUIRE(t > prev);
      prev = t;
    }
  }
  double prev_n = 0.0;
  for (std::size_t n = 64; n <= 4096; n *= 2) {
    const double t = algorithmic_latency(symmetric_windows(n, 16), 16000.0).total_ms;
    REQUIRE(t > prev_n);
    prev_n = t;
  }
  double prev_m = 0.0;
  for (std::size_t m = 8; m < 512; m += 8) {
    const double t = algorithmic_latency(asymmetric_windows(1024, m, 8), 16000.0).total_ms;
    REQUIRE(t > prev_m);
    prev_m = t;
  }
}

TEST_CASE("magnitude spectrogram matches the streaming analysis", "[stft][analyze]") {
  const auto pair = symmetric_windows(64, 16);
  const auto x = oracle::noise(16 * 20, 9);
  const auto mag = magnitude_spectrogram(x, pair);
  REQUIRE(mag.cols() == 20);
  StreamingStft<double> stft(pair);
  StereoSpectrum<double> spec(stft.bins());
  for (std::size_t t = 0; t < 20; ++t) {
    std::vector<double> chunk(x.begin() + t * 16, x.begin() + t * 16 + 16);
    stft.analyze(chunk, chunk, spec);
    for (std::size_t f = 0; f < stft.bins(); ++f)
      REQUIRE(mag(f, t) == Approx(std::abs(spec.left()[f])).margin(1e-12));
  }
}
