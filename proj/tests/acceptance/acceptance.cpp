// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any selected criterion fails. `--only <name>` runs one.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eval/harness.hpp"
#include "eval/signals.hpp"
#include "mask/mask.hpp"
#include "nmf/nmf.hpp"
#include "spatial/gcc.hpp"
#include "spatial/localizer.hpp"
#include "stft/stft.hpp"
#include "support/oracles.hpp"

using namespace gccnmf;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Runs `x` through analysis and synthesis with unit gain and returns the
// steady-state relative RMS error against the delayed input.
template <typename Real>
double identity_error(const WindowPair& pair, const std::vector<double>& x) {
  StreamingStft<Real> stft(pair);
  const std::size_t hop = pair.hop, n = x.size() / hop * hop;
  std::vector<Real> in(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n));
  std::vector<Real> out(n);
  StereoSpectrum<Real> spec(stft.bins());
  for (std::size_t s = 0; s < n; s += hop) {
    const auto chunk = std::span<const Real>(in).subspan(s, hop);
    stft.analyze(chunk, chunk, spec);
    stft.synthesize(spec, std::span(out).subspan(s, hop), std::span(out).subspan(s, hop));
  }
  const std::size_t d = stft.output_delay();
  std::vector<double> ref(n, 0.0), got(out.begin(), out.end());
  for (std::size_t k = 0; k + d < n; ++k) ref[k + d] = x[k];
  return oracle::rel_rms(ref, got, pair.frame_size + d, n);
}

Outcome reconstruction(const WindowPair& pair) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto x = white_noise(3 * 16000, 1);
  const double e64 = identity_error<double>(pair, x);
  const double e32 = identity_error<float>(pair, x);
  const double t = seconds_since(t0);
  return {e64 < 1e-10 && e32 < 1e-5 && t < 5.0,
          fmt("float64 %.2e (< 1e-10), float32 %.2e (< 1e-5), %.2f s (< 5 s)", e64, e32, t)};
}

Outcome reconstruction_symmetric() { return reconstruction(symmetric_windows(1024, 256)); }
Outcome reconstruction_asymmetric() { return reconstruction(asymmetric_windows(1024, 16, 8)); }

Outcome latency() {
  const auto sym = algorithmic_latency(symmetric_windows(1024, 256), 16000.0);
  const auto asym = algorithmic_latency(asymmetric_windows(1024, 16, 16), 16000.0);
  const bool ok = std::abs(sym.total_ms - 80.0) < 1e-9 && std::abs(asym.total_ms - 3.0) < 1e-9;
  return {ok, fmt("symmetric 1024/256: %.6f ms (80), asymmetric 2M=32 R=16: %.6f ms (3)",
                  sym.total_ms, asym.total_ms)};
}

Outcome localization() {
  const double fs = 16000.0;
  const TdoaGrid grid{TdoaGridSpec{}};
  const auto pair = symmetric_windows(1024, 256);
  std::mt19937_64 rng(2024);
  int nearest = 0, matches_xcorr = 0;
  std::string misses;
  for (int trial = 0; trial < 20; ++trial) {
    const int k = static_cast<int>(rng() % 7) - 3;
    const auto l = white_noise(16000, 100 + static_cast<std::uint64_t>(trial));
    const auto r = oracle::shifted(l, k);
    StreamingStft<double> stft(pair);
    StereoSpectrum<double> spec(stft.bins());
    std::vector<AngularSpectrum> frames;
    for (std::size_t s = 0; s + 256 <= l.size(); s += 256) {
      stft.analyze(std::span(l).subspan(s, 256), std::span(r).subspan(s, 256), spec);
      if (!stft.warming_up()) frames.push_back(gcc_phat_frame(spec, grid, fs));
    }
    const std::size_t found = locate_offline(frames);
    const int lag = oracle::xcorr_argmax(l, r, 8);
    if (found == grid.nearest_index(k / fs)) ++nearest;
    else misses += fmt(" k=%d got %zu want %zu;", k, found, grid.nearest_index(k / fs));
    if (found == grid.nearest_index(lag / fs)) ++matches_xcorr;
  }
  return {nearest == 20 && matches_xcorr == 20,
          fmt("nearest grid point %d/20, agrees with cross-correlation argmax %d/20", nearest,
              matches_xcorr) + misses};
}

Outcome nmf_monotonicity() {
  int monotone = 0, nonnegative = 0;
  double worst = 0.0;
  for (int inst = 0; inst < 50; ++inst) {
    Rng rng(static_cast<std::uint64_t>(inst) + 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix v(64, 200);
    for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = u(rng) * u(rng);
    bool mono = true;
    double prev = INFINITY;
    const auto f = factorize(v, 16, 100, static_cast<std::uint64_t>(inst) + 1000,
                             [&](int, double kl) {
                               if (kl > prev * (1.0 + 1e-9)) mono = false;
                               if (std::isfinite(prev)) worst = std::max(worst, (kl - prev) / prev);
                               prev = kl;
                             });
    monotone += mono && f.kl_trace.size() == 100;
    nonnegative += f.w.minCoeff() >= 0.0 && f.h.minCoeff() >= 0.0;
  }
  return {monotone == 50 && nonnegative == 50,
          fmt("non-increasing %d/50, nonnegative %d/50, largest relative increase %.2e", monotone,
              nonnegative, worst)};
}

Outcome rank1_recovery() {
  Rng rng(5);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  Eigen::VectorXd w(64), h(100);
  for (auto& x : w) x = u(rng);
  for (auto& x : h) x = u(rng);
  const Matrix v = w * h.transpose();
  const auto f = factorize(v, 1, 200, 9);
  const double kl = kl_divergence(v, f.w * f.h);
  return {kl < 1e-6, fmt("KL %.3e (< 1e-6)", kl)};
}

Outcome filter_equivalence() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  int identical = 0;
  for (int frame = 0; frame < 100; ++frame) {
    const Eigen::Index bins = 513, atoms = 64;
    Eigen::MatrixXd w(bins, atoms);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = u(rng);
    for (Eigen::Index j = 0; j < atoms; ++j) w.col(j) /= w.col(j).sum();
    Eigen::VectorXd mask(atoms);
    for (auto& m : mask) m = u(rng) < 0.5 ? 0.0 : u(rng);
    StereoSpectrum<double> spec(static_cast<std::size_t>(bins));
    for (auto& ch : spec.channel)
      for (auto& c : ch) c = {g(rng), g(rng)};
    const std::array<Eigen::VectorXd, 2> ones{Eigen::VectorXd::Ones(atoms),
                                              Eigen::VectorXd::Ones(atoms)};
    const auto a = wiener_filter<double>(spec, w, ones, mask);
    const auto b = phase_filter<double>(spec, w, mask);
    identical += a.channel == b.channel;
  }
  return {identical == 100, fmt("bit-identical frames %d/100", identical)};
}

Outcome soft_binary_limit() {
  std::size_t cases = 0, equal = 0;
  for (std::size_t k : {16u, 127u, 128u, 256u}) {
    std::vector<int> tdoas(k);
    for (std::size_t i = 0; i < k; ++i) tdoas[i] = static_cast<int>(i);
    for (int e = 1; e <= 128; ++e) {
      MaskParams b;
      b.epsilon = e / 64.0;
      MaskParams s;
      s.mode = MaskMode::kSoft;
      s.alpha = b.epsilon / 2.0;
      s.beta = MaskParams::kInfinity;
      s.eta = 0.0;
      for (std::size_t target = 0; target < k; ++target) {
        ++cases;
        const int t = static_cast<int>(target);
        equal += binary_mask(tdoas, t, b, k) == soft_mask(tdoas, t, s, k);
      }
    }
  }
  return {equal == cases, fmt("identical masks %zu/%zu (every target and distance)", equal, cases)};
}

struct Standard {
  Scenario scenario;
  std::shared_ptr<const Dictionary> dict;
  EnhancerConfig config;
};

Standard standard_scenario() {
  Standard s;
  s.config.mask.coefficients = CoefficientMode::kAllOnes;
  ScenarioSpec spec;  // 0 dB, target at 0, interferer at 0.8 tau_max, D = 128
  s.scenario = make_scenario(spec, s.config);
  s.dict = std::make_shared<const Dictionary>(train_scenario_dictionary(spec, s.config));
  s.config.tdoa_override = s.scenario.target_index;
  return s;
}

CellResult run_eps(const Standard& s, double eps) {
  auto c = s.config;
  c.mask.epsilon = eps;
  return evaluate_cell(s.scenario, c, s.dict);
}

Outcome enhancement() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = standard_scenario();
  const auto narrow = run_eps(s, 3.0 / 64.0);
  const auto full = run_eps(s, 1.0);
  const double t = seconds_since(t0);
  const bool ok = narrow.snr_improvement_db >= 3.0 && std::abs(full.snr_improvement_db) <= 0.1 &&
                  t < 30.0;
  return {ok, fmt("improvement at eps=3/64: %+.2f dB (>= +3), at eps=1: %+.3f dB (|.| <= 0.1), "
                  "interference %+.1f dB, %.1f s (< 30 s)",
                  narrow.snr_improvement_db, full.snr_improvement_db,
                  narrow.residual_interference_db, t)};
}

Outcome tradeoff() {
  const auto s = standard_scenario();
  const std::vector<double> eps = {1.0, 0.5, 0.25, 3.0 / 64.0, 1.0 / 64.0};
  std::vector<double> residual;
  std::string detail = "residual interference (wide to narrow):";
  bool monotone = true;
  for (double e : eps) {
    residual.push_back(run_eps(s, e).residual_interference_db);
    detail += fmt(" %.1f", residual.back());
    if (residual.size() > 1 && residual.back() > residual[residual.size() - 2]) monotone = false;
  }
  return {monotone, detail + " dB"};
}

Outcome benchmark_trend() {
  const EnhancerConfig c;
  std::vector<double> means;
  std::string detail = "mean frame time:";
  bool increasing = true;
  for (std::size_t d : {64u, 128u, 256u, 512u, 1024u}) {
    auto dict = std::make_shared<const Dictionary>(random_dictionary(c, d, 1));
    means.push_back(benchmark_frame_time(c, dict, 200).mean_us);
    detail += fmt(" D=%zu %.0f us", d, means.back());
    if (means.size() > 1 && !(means.back() > means[means.size() - 2])) increasing = false;
  }
  return {increasing, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"reconstruction_symmetric", reconstruction_symmetric},
      {"reconstruction_asymmetric", reconstruction_asymmetric},
      {"latency", latency},
      {"localization", localization},
      {"nmf_monotonicity", nmf_monotonicity},
      {"rank1_recovery", rank1_recovery},
      {"filter_equivalence", filter_equivalence},
      {"soft_binary_limit", soft_binary_limit},
      {"enhancement", enhancement},
      {"tradeoff", tradeoff},
      {"benchmark_trend", benchmark_trend},
  };
  CLI::App app{"acceptance criteria"};
  std::string only;
  std::vector<std::string> names;
  for (const auto& [name, fn] : criteria) names.push_back(name);
  app.add_option("--only", only, "run a single criterion")->check(CLI::IsMember(names));
  CLI11_PARSE(app, argc, argv);

  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    if (!only.empty() && name != only) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}
