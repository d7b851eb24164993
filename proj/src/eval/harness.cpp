#include "eval/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include "common/error.hpp"
#include "io/wav.hpp"
#include "nmf/nmf.hpp"
#include "nmf/random.hpp"
#include "spatial/tdoa_grid.hpp"

namespace gccnmf {

namespace {

std::size_t samples_for(double seconds, double fs) {
  return static_cast<std::size_t>(std::llround(seconds * fs));
}

Stereo<float> to_float(const Stereo<double>& s) {
  return {std::vector<float>(s.left.begin(), s.left.end()),
          std::vector<float>(s.right.begin(), s.right.end())};
}

Stereo<double> to_double(const Stereo<float>& s) {
  return {std::vector<double>(s.left.begin(), s.left.end()),
          std::vector<double>(s.right.begin(), s.right.end())};
}

void export_wav(const std::filesystem::path& path, const Stereo<double>& s, double fs) {
  AudioBuffer b;
  b.sample_rate = static_cast<std::uint32_t>(fs);
  b.channels = {std::vector<float>(s.left.begin(), s.left.end()),
                std::vector<float>(s.right.begin(), s.right.end())};
  write_wav(path, b, WavFormat::kFloat32);
}

DictionaryLayout layout_for(const EnhancerConfig& config) {
  return {config.sample_rate, config.window.frame_size, config.window.kind};
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

Scenario make_scenario(const ScenarioSpec& spec, const EnhancerConfig& config) {
  const double fs = config.sample_rate;
  const std::size_t n = samples_for(spec.seconds, fs);
  require(n > 0, ErrorCode::kInvalidParameter, "scenario length must be positive");
  Scenario s;
  s.spec = spec;
  s.sample_rate = fs;
  s.noise_tdoa = spec.noise_tdoa_fraction * config.grid.tau_max();
  s.target_index = TdoaGrid(config.grid).nearest_index(spec.target_tdoa);
  MixtureSpec m;
  m.target = synthetic_speech(n, fs, mix_seed(spec.seed, 1));
  m.noise = pink_noise(n, mix_seed(spec.seed, 2));
  m.target_tdoa = spec.target_tdoa;
  m.noise_tdoa = s.noise_tdoa;
  m.snr_db = spec.snr_db;
  m.sample_rate = fs;
  s.mix = make_mixture(m);
  return s;
}

Dictionary train_scenario_dictionary(const ScenarioSpec& spec, const EnhancerConfig& config) {
  const double fs = config.sample_rate;
  const std::size_t n = samples_for(spec.train_seconds, fs);
  const WindowPair pair = config.window.make_pair();
  const std::vector<double> speech = synthetic_speech(n, fs, mix_seed(spec.seed, 3));
  const std::vector<double> noise = pink_noise(n, mix_seed(spec.seed, 4));
  const Matrix vs = magnitude_spectrogram(speech, pair);
  const Matrix vn = magnitude_spectrogram(noise, pair);
  const Matrix v = sample_training_frames(vs, vn, spec.train_frames, mix_seed(spec.seed, 5));
  if (spec.method == TrainMethod::kCopy)
    return copy_to_train(v, spec.atoms, mix_seed(spec.seed, 6), layout_for(config));
  return pretrain_dictionary(v, spec.atoms, spec.train_iterations, mix_seed(spec.seed, 6),
                             layout_for(config));
}

CellResult evaluate_cell(const Scenario& scenario, const EnhancerConfig& config,
                         std::shared_ptr<const Dictionary> dict,
                         const std::optional<std::filesystem::path>& export_dir,
                         const std::string& cell_id) {
  require(std::abs(config.sample_rate - scenario.sample_rate) < 1e-9,
          ErrorCode::kConfigMismatch, "scenario and configuration sample rates differ");
  CellResult r;
  r.cell_id = cell_id;
  r.atoms = dict->size();
  r.train_frames = dict->provenance.train_frames;
  r.train_iterations = dict->provenance.iterations;
  r.config = config;

  EnhancerConfig run_config = config;
  const Stereo<float> mixture = to_float(scenario.mix.mixture);
  if (config.localizer.mode == LocalizerMode::kOffline && !config.tdoa_override)
    run_config.tdoa_override = locate_signal(config, mixture);
  Enhancer<float> enhancer(run_config, std::move(dict));
  const Stereo<float> target = to_float(scenario.mix.target);
  const Stereo<float> noise = to_float(scenario.mix.noise);
  std::vector<Stereo<float>> shadows;
  const Stereo<double> out = to_double(run_aligned(enhancer, mixture, {&target, &noise}, &shadows));
  const Stereo<double> out_noise = to_double(shadows[1]);

  const std::size_t skip = std::min(config.window.frame_size, out.frames());
  r.input_snr_db = snr_db(scenario.mix.target, scenario.mix.mixture, skip);
  r.output_snr_db = snr_db(scenario.mix.target, out, skip);
  r.snr_improvement_db = r.output_snr_db - r.input_snr_db;
  const double in_noise = energy(scenario.mix.noise, skip);
  const double left_noise = std::max(energy(out_noise, skip), 1e-300);
  r.residual_interference_db = 10.0 * std::log10(left_noise / in_noise);
  r.mean_frame_us = enhancer.mean_frame_time_us();
  r.target_index = enhancer.target_index();

  if (export_dir) {
    std::filesystem::create_directories(*export_dir);
    export_wav(*export_dir / (cell_id + "_ref.wav"), scenario.mix.target, scenario.sample_rate);
    export_wav(*export_dir / (cell_id + "_est.wav"), out, scenario.sample_rate);
  }
  return r;
}

std::vector<CellResult> run_sweep(const SweepOptions& options) {
  options.base.validate();
  const auto axis = [](const auto& values, auto base) {
    using T = decltype(base);
    return values.empty() ? std::vector<T>{base} : std::vector<T>(values.begin(), values.end());
  };
  const ScenarioSpec& sc = options.scenario;
  const EnhancerConfig& base = options.base;
  const auto atoms = axis(options.axes.atoms, sc.atoms);
  const auto frames = axis(options.axes.train_frames, sc.train_frames);
  const auto train_iters = axis(options.axes.train_iterations, sc.train_iterations);
  const auto infer_iters = axis(options.axes.inference_iterations,
                                base.mask.coefficients == CoefficientMode::kAllOnes
                                    ? -1
                                    : base.inference_iterations);
  const auto epsilon = axis(options.axes.epsilon, base.mask.epsilon);
  const auto alpha = axis(options.axes.alpha, base.mask.alpha);
  const auto beta = axis(options.axes.beta, base.mask.beta);
  const auto eta = axis(options.axes.eta, base.mask.eta);
  const auto snr = axis(options.axes.snr_db, sc.snr_db);

  struct Cell {
    std::size_t atoms, frames;
    int train_iters;
    double snr;
    EnhancerConfig config;
  };
  std::vector<Cell> cells;
  for (auto d : atoms)
    for (auto t : frames)
      for (auto ti : train_iters)
        for (auto ii : infer_iters)
          for (auto e : epsilon)
            for (auto a : alpha)
              for (auto b : beta)
                for (auto h : eta)
                  for (auto s : snr) {
                    EnhancerConfig c = base;
                    if (!options.axes.inference_iterations.empty()) {
                      // -1 selects all-ones coefficients.
                      c.mask.coefficients =
                          ii < 0 ? CoefficientMode::kAllOnes : CoefficientMode::kInferred;
                      if (ii >= 0) c.inference_iterations = ii;
                    }
                    c.mask.epsilon = e;
                    c.mask.alpha = a;
                    c.mask.beta = b;
                    c.mask.eta = h;
                    if (sc.pin_target && !c.tdoa_override)
                      c.tdoa_override = TdoaGrid(c.grid).nearest_index(sc.target_tdoa);
                    c.validate();
                    cells.push_back({d, t, ti, s, c});
                  }

  // Shared inputs are built up front so cells can run in any order.
  using DictKey = std::tuple<std::size_t, std::size_t, int>;
  std::map<DictKey, std::shared_ptr<const Dictionary>> dicts;
  std::map<double, std::shared_ptr<const Scenario>> scenes;
  for (const auto& cell : cells) {
    const DictKey key{cell.atoms, cell.frames, cell.train_iters};
    if (!dicts.count(key)) {
      ScenarioSpec spec = sc;
      spec.atoms = cell.atoms;
      spec.train_frames = cell.frames;
      spec.train_iterations = cell.train_iters;
      dicts[key] = std::make_shared<const Dictionary>(train_scenario_dictionary(spec, base));
    }
    if (!scenes.count(cell.snr)) {
      ScenarioSpec spec = sc;
      spec.snr_db = cell.snr;
      scenes[cell.snr] = std::make_shared<const Scenario>(make_scenario(spec, base));
    }
  }

  std::vector<CellResult> results(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        const Cell& cell = cells[i];
        char id[32];
        std::snprintf(id, sizeof id, "cell%04zu", i);
        results[i] = evaluate_cell(*scenes.at(cell.snr), cell.config,
                                   dicts.at({cell.atoms, cell.frames, cell.train_iters}),
                                   options.export_dir, id);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, std::max<std::size_t>(cells.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return results;
}

void write_sweep_csv(std::ostream& out, const std::vector<CellResult>& rows) {
  out << kSweepCsvHeader << '\n';
  for (const auto& r : rows) {
    const auto& m = r.config.mask;
    out << r.cell_id << ',' << r.atoms << ',' << r.train_frames << ',' << r.train_iterations
        << ','
        << (m.coefficients == CoefficientMode::kAllOnes ? -1 : r.config.inference_iterations)
        << ',' << format_double(m.epsilon) << ','
        << format_double(m.alpha) << ',' << format_double(m.beta) << ','
        << format_double(m.eta) << ',' << to_string(m.mode) << ','
        << to_string(m.coefficients) << ',' << format_double(r.input_snr_db) << ','
        << format_double(r.output_snr_db) << ',' << format_double(r.snr_improvement_db) << ','
        << format_double(r.residual_interference_db) << ',' << format_double(r.mean_frame_us)
        << ',' << r.target_index << '\n';
  }
}

Dictionary random_dictionary(const EnhancerConfig& config, std::size_t atoms,
                             std::uint64_t seed) {
  require(atoms >= 1, ErrorCode::kInvalidParameter, "dictionary needs at least one atom");
  Dictionary d;
  d.layout = layout_for(config);
  Rng rng(seed);
  Eigen::MatrixXd w(static_cast<Eigen::Index>(d.layout.bins()), static_cast<Eigen::Index>(atoms));
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = uniform_open_closed(rng);
    w.col(j) /= w.col(j).sum();
  }
  d.atoms = w.cast<float>();
  for (Eigen::Index j = 0; j < d.atoms.cols(); ++j) d.atoms.col(j) /= d.atoms.col(j).sum();
  d.provenance.method = "random";
  d.provenance.seed = seed;
  return d;
}

BenchResult benchmark_frame_time(const EnhancerConfig& config,
                                 std::shared_ptr<const Dictionary> dict, std::size_t trials,
                                 std::uint64_t seed) {
  require(trials >= 100, ErrorCode::kInvalidParameter,
          "benchmark needs at least 100 trials, got " + std::to_string(trials));
  Enhancer<float> enhancer(config, dict);
  const std::size_t hop = enhancer.hop();
  const std::size_t warmup = config.window.frame_size / hop + 10;
  const std::size_t total = warmup + trials;
  const std::vector<double> l = white_noise(total * hop, mix_seed(seed, 1));
  const std::vector<double> r = white_noise(total * hop, mix_seed(seed, 2));
  std::vector<float> il(hop), ir(hop), ol(hop), orr(hop);
  std::vector<double> times;
  times.reserve(trials);
  for (std::size_t f = 0; f < total; ++f) {
    for (std::size_t i = 0; i < hop; ++i) {
      il[i] = static_cast<float>(0.1 * l[f * hop + i]);
      ir[i] = static_cast<float>(0.1 * r[f * hop + i]);
    }
    const auto t0 = std::chrono::steady_clock::now();
    enhancer.process(il, ir, ol, orr);
    const auto t1 = std::chrono::steady_clock::now();
    if (f >= warmup) times.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
  }
  BenchResult b;
  b.atoms = dict->size();
  b.trials = trials;
  double sum = 0.0;
  for (double t : times) sum += t;
  b.mean_us = sum / static_cast<double>(times.size());
  std::sort(times.begin(), times.end());
  const auto idx = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(times.size()))) - 1;
  b.p95_us = times[std::min(idx, times.size() - 1)];
  b.hop_us = 1e6 * static_cast<double>(hop) / config.sample_rate;
  b.realtime_ok = b.mean_us < b.hop_us;
  return b;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchResult>& rows) {
  out << kBenchCsvHeader << '\n';
  for (const auto& b : rows)
    out << b.atoms << ',' << b.trials << ',' << format_double(b.mean_us) << ','
        << format_double(b.p95_us) << ',' << format_double(b.hop_us) << ','
        << (b.realtime_ok ? 1 : 0) << '\n';
}

}  // namespace gccnmf
