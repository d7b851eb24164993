#pragma once

#include <cstddef>
#include <vector>

namespace gccnmf {

// Microphone geometry used to size the TDOA axis.
struct TdoaGridSpec {
  std::size_t count = 128;
  double mic_spacing_m = 0.086;
  double speed_of_sound = 343.0;
  double margin = 1.25;

  double tau_max() const noexcept { return margin * mic_spacing_m / speed_of_sound; }
};

// Uniform TDOA axis in seconds from -tau_max to +tau_max inclusive. Positive
// values mean the right channel lags the left.
class TdoaGrid {
 public:
  TdoaGrid(double tau_max, std::size_t count);
  explicit TdoaGrid(const TdoaGridSpec& spec) : TdoaGrid(spec.tau_max(), spec.count) {}

  std::size_t size() const noexcept { return values_.size(); }
  double tau_max() const noexcept { return tau_max_; }
  double step() const noexcept { return values_[1] - values_[0]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  const std::vector<double>& values() const noexcept { return values_; }
  // Lowest index among the closest grid points.
  std::size_t nearest_index(double tau) const noexcept;

 private:
  double tau_max_;
  std::vector<double> values_;
};

}  // namespace gccnmf
