#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "eval/signals.hpp"
#include "nmf/dictionary.hpp"
#include "pipeline/config.hpp"

namespace gccnmf {

enum class TrainMethod { kNmf, kCopy };

// Synthetic test scene: a speech-like target and a pink-noise interferer at
// separate TDOAs, mixed at a given SNR. Dictionaries are trained on
// separately seeded draws of both source types so test audio is held out.
struct ScenarioSpec {
  double seconds = 10.0;
  double snr_db = 0.0;
  double target_tdoa = 0.0;
  double noise_tdoa_fraction = 0.8;  // of the grid's tau_max
  std::uint64_t seed = 1;
  double train_seconds = 30.0;
  std::size_t atoms = 128;
  std::size_t train_frames = 2048;
  int train_iterations = 100;
  TrainMethod method = TrainMethod::kNmf;
  // Score with tau-hat fixed at the known target position instead of the
  // configured localizer.
  bool pin_target = true;
};

struct Scenario {
  ScenarioSpec spec;
  double sample_rate = 16000.0;
  Mixture mix;
  double noise_tdoa = 0.0;
  std::size_t target_index = 0;  // grid point nearest the target TDOA
};

Scenario make_scenario(const ScenarioSpec& spec, const EnhancerConfig& config);

Dictionary train_scenario_dictionary(const ScenarioSpec& spec, const EnhancerConfig& config);

struct CellResult {
  std::string cell_id;
  std::size_t atoms = 0;
  std::size_t train_frames = 0;
  int train_iterations = 0;
  EnhancerConfig config;
  double input_snr_db = 0.0;
  double output_snr_db = 0.0;
  double snr_improvement_db = 0.0;
  // Interference energy left in the output relative to the input, in dB.
  double residual_interference_db = 0.0;
  double mean_frame_us = 0.0;
  std::size_t target_index = 0;
};

// Scores skip the first frame_size aligned samples (warm-up).
CellResult evaluate_cell(const Scenario& scenario, const EnhancerConfig& config,
                         std::shared_ptr<const Dictionary> dict,
                         const std::optional<std::filesystem::path>& export_dir = {},
                         const std::string& cell_id = "cell");

struct SweepAxes {
  std::vector<std::size_t> atoms;
  std::vector<std::size_t> train_frames;
  std::vector<int> train_iterations;
  std::vector<int> inference_iterations;
  std::vector<double> epsilon;
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<double> eta;
  std::vector<double> snr_db;
};

struct SweepOptions {
  ScenarioSpec scenario;
  EnhancerConfig base;
  SweepAxes axes;  // an empty axis keeps the base value
  std::optional<std::filesystem::path> export_dir;
  std::size_t jobs = 1;
};

// Cartesian product of the axes in declaration order, last axis fastest.
std::vector<CellResult> run_sweep(const SweepOptions& options);

void write_sweep_csv(std::ostream& out, const std::vector<CellResult>& rows);
inline constexpr const char* kSweepCsvHeader =
    "cell_id,atoms,train_frames,train_iterations,inference_iterations,epsilon,alpha,beta,eta,"
    "mask_mode,coefficients,input_snr_db,output_snr_db,snr_improvement_db,"
    "residual_interference_db,mean_frame_us,target_index";

struct BenchResult {
  std::size_t atoms = 0;
  std::size_t trials = 0;
  double mean_us = 0.0;
  double p95_us = 0.0;
  double hop_us = 0.0;  // real-time budget per frame
  bool realtime_ok = false;
};

// Random L1-normalized dictionary shaped for `config`.
Dictionary random_dictionary(const EnhancerConfig& config, std::size_t atoms,
                             std::uint64_t seed);

// Times process() on stereo white noise after filling the analysis window.
// trials must be at least 100.
BenchResult benchmark_frame_time(const EnhancerConfig& config,
                                 std::shared_ptr<const Dictionary> dict,
                                 std::size_t trials, std::uint64_t seed = 7);

void write_bench_csv(std::ostream& out, const std::vector<BenchResult>& rows);
inline constexpr const char* kBenchCsvHeader = "atoms,trials,mean_us,p95_us,hop_us,realtime_ok";

}  // namespace gccnmf
