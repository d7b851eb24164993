#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Core>

#include "stft/window.hpp"

namespace gccnmf {

// STFT configuration a dictionary was trained under.
struct DictionaryLayout {
  double sample_rate = 16000.0;
  std::size_t frame_size = 1024;
  WindowKind window_kind = WindowKind::kSymmetric;

  std::size_t bins() const noexcept { return frame_size / 2 + 1; }
};

struct TrainingProvenance {
  std::string method = "nmf";  // "nmf" or "copy"
  std::uint64_t seed = 0;
  int iterations = 0;
  std::size_t train_frames = 0;
};

// Nonnegative spectral atoms (bins x atoms), each column with unit L1 norm.
// Stored in float32, the precision of the on-disk payload.
struct Dictionary {
  Eigen::MatrixXf atoms;
  DictionaryLayout layout;
  TrainingProvenance provenance;

  std::size_t bins() const noexcept { return static_cast<std::size_t>(atoms.rows()); }
  std::size_t size() const noexcept { return static_cast<std::size_t>(atoms.cols()); }

  // Throws kInvariantViolation on negative or non-finite entries, columns whose
  // L1 norm is not 1 within 1e-6, or a bin count that disagrees with layout.
  void validate() const;
};

}  // namespace gccnmf
