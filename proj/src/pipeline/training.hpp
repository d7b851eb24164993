#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "nmf/dictionary.hpp"
#include "nmf/nmf.hpp"
#include "pipeline/config.hpp"

namespace gccnmf {

struct TrainOptions {
  std::filesystem::path speech_dir;
  std::filesystem::path noise_dir;
  std::size_t atoms = 1024;
  int iterations = 100;
  std::size_t frames = 2048;
  std::uint64_t seed = 0;
  bool copy = false;  // copy-to-train instead of NMF
};

// Every *.wav directly inside `dir`, sorted by name.
std::vector<std::filesystem::path> list_wavs(const std::filesystem::path& dir);

// Magnitude frames of the first channel of every file, side by side. All files
// must share `config.sample_rate`.
Matrix spectrogram_pool(const std::vector<std::filesystem::path>& files,
                        const EnhancerConfig& config);

Dictionary train_from_directories(const TrainOptions& options, const EnhancerConfig& config,
                                  const ProgressFn& progress = {});

}  // namespace gccnmf
