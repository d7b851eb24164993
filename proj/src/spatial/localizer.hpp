#pragma once

#include <cstddef>
#include <deque>
#include <string>
#include <vector>

#include "spatial/gcc.hpp"

namespace gccnmf {

enum class LocalizerMode { kOffline, kAccumulated, kSliding };

std::string to_string(LocalizerMode mode);
LocalizerMode localizer_mode_from_string(const std::string& name);

// Max-pool over all frames, then argmax (lowest index on ties).
std::size_t locate_offline(const std::vector<AngularSpectrum>& frames);

// Online target localization. Accumulated mode keeps an elementwise running
// max of every frame seen; sliding mode pools the most recent `window` frames.
class Localizer {
 public:
  Localizer(LocalizerMode mode, std::size_t grid_size, std::size_t window = 1);

  LocalizerMode mode() const noexcept { return mode_; }
  std::size_t window() const noexcept { return window_; }
  std::size_t estimate() const noexcept { return estimate_; }
  const AngularSpectrum& pool() const noexcept { return pool_; }

  std::size_t update(const AngularSpectrum& frame);
  void reset();

 private:
  LocalizerMode mode_;
  std::size_t grid_size_;
  std::size_t window_;
  std::size_t estimate_ = 0;
  AngularSpectrum pool_;
  std::deque<AngularSpectrum> history_;
};

}  // namespace gccnmf
