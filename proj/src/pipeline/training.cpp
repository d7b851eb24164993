#include "pipeline/training.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"
#include "io/wav.hpp"
#include "stft/stft.hpp"

namespace gccnmf {

std::vector<std::filesystem::path> list_wavs(const std::filesystem::path& dir) {
  std::error_code ec;
  require(std::filesystem::is_directory(dir, ec), ErrorCode::kIo,
          "not a directory: " + dir.string());
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".wav") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

Matrix spectrogram_pool(const std::vector<std::filesystem::path>& files,
                        const EnhancerConfig& config) {
  const WindowPair pair = config.window.make_pair();
  std::vector<Matrix> parts;
  Eigen::Index columns = 0;
  for (const auto& path : files) {
    const AudioBuffer b = read_wav(path);
    require(std::abs(static_cast<double>(b.sample_rate) - config.sample_rate) < 1e-9,
            ErrorCode::kConfigMismatch,
            path.string() + " is " + std::to_string(b.sample_rate) + " Hz, expected " +
                std::to_string(static_cast<long>(config.sample_rate)) + " Hz");
    if (b.frames() == 0) continue;
    const std::vector<double> mono(b.channels[0].begin(), b.channels[0].end());
    parts.push_back(magnitude_spectrogram(mono, pair));
    columns += parts.back().cols();
  }
  Matrix v(static_cast<Eigen::Index>(pair.frame_size / 2 + 1), columns);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    v.middleCols(at, p.cols()) = p;
    at += p.cols();
  }
  return v;
}

Dictionary train_from_directories(const TrainOptions& options, const EnhancerConfig& config,
                                  const ProgressFn& progress) {
  const auto speech_files = list_wavs(options.speech_dir);
  const auto noise_files = list_wavs(options.noise_dir);
  require(!speech_files.empty(), ErrorCode::kEmptyInput,
          "no WAV files in " + options.speech_dir.string());
  require(!noise_files.empty(), ErrorCode::kEmptyInput,
          "no WAV files in " + options.noise_dir.string());
  const Matrix speech = spectrogram_pool(speech_files, config);
  const Matrix noise = spectrogram_pool(noise_files, config);
  require(speech.cols() > 0 && noise.cols() > 0, ErrorCode::kEmptyInput,
          "training audio is too short to fill a frame");
  const Matrix v = sample_training_frames(speech, noise, options.frames, options.seed);
  const DictionaryLayout layout{config.sample_rate, config.window.frame_size, config.window.kind};
  if (options.copy) return copy_to_train(v, options.atoms, options.seed, layout);
  return pretrain_dictionary(v, options.atoms, options.iterations, options.seed, layout, progress);
}

}  // namespace gccnmf
