#include "spatial/localizer.hpp"

#include <algorithm>

#include "common/error.hpp"

namespace gccnmf {

std::string to_string(LocalizerMode mode) {
  switch (mode) {
    case LocalizerMode::kOffline: return "offline";
    case LocalizerMode::kAccumulated: return "accumulated";
    case LocalizerMode::kSliding: return "sliding";
  }
  return "accumulated";
}

LocalizerMode localizer_mode_from_string(const std::string& name) {
  if (name == "offline") return LocalizerMode::kOffline;
  if (name == "accumulated") return LocalizerMode::kAccumulated;
  if (name == "sliding") return LocalizerMode::kSliding;
  fail(ErrorCode::kInvalidParameter, "unknown localizer mode '" + name + "'");
}

std::size_t locate_offline(const std::vector<AngularSpectrum>& frames) {
  require(!frames.empty(), ErrorCode::kEmptyInput, "locate_offline needs >= 1 frame");
  AngularSpectrum pool = frames.front();
  for (std::size_t t = 1; t < frames.size(); ++t) {
    require(frames[t].size() == pool.size(), ErrorCode::kInvalidInput,
            "angular spectra differ in length");
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = std::max(pool[i], frames[t][i]);
  }
  return argmax(pool);
}

Localizer::Localizer(LocalizerMode mode, std::size_t grid_size, std::size_t window)
    : mode_(mode), grid_size_(grid_size), window_(window) {
  require(grid_size >= 2, ErrorCode::kInvalidParameter, "grid size must be >= 2");
  require(mode != LocalizerMode::kSliding || window >= 1, ErrorCode::kInvalidParameter,
          "sliding window length must be >= 1");
  reset();
}

void Localizer::reset() {
  pool_.clear();
  history_.clear();
  estimate_ = 0;
}

std::size_t Localizer::update(const AngularSpectrum& frame) {
  require(frame.size() == grid_size_, ErrorCode::kInvalidInput,
          "angular spectrum length does not match the grid");
  if (mode_ == LocalizerMode::kSliding) {
    history_.push_back(frame);
    while (history_.size() > window_) history_.pop_front();
    pool_ = history_.front();
    for (std::size_t t = 1; t < history_.size(); ++t)
      for (std::size_t i = 0; i < grid_size_; ++i)
        pool_[i] = std::max(pool_[i], history_[t][i]);
  } else if (pool_.empty()) {
    pool_ = frame;
  } else {
    for (std::size_t i = 0; i < grid_size_; ++i) pool_[i] = std::max(pool_[i], frame[i]);
  }
  estimate_ = argmax(pool_);
  return estimate_;
}

}  // namespace gccnmf
