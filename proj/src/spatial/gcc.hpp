#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "nmf/dictionary.hpp"
#include "spatial/tdoa_grid.hpp"
#include "stft/stft.hpp"

namespace gccnmf {

// GCC values over the TDOA grid for one frame.
using AngularSpectrum = std::vector<double>;

// Lowest index of the maximum.
std::size_t argmax(const std::vector<double>& values);

// Precomputed per-bin phase-shift tables for one (grid, sample rate, frame
// size) combination. Evaluates
//   g[k] = Re sum_f exp(j (angle V_L - angle V_R)) exp(-j 2 pi f tau_k)
// over one-sided bins with f in Hz and tau in seconds; bins where
// |V_L| |V_R| < kEps contribute nothing.
template <typename Real>
class GccEngine {
 public:
  using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

  GccEngine(const TdoaGrid& grid, double sample_rate, std::size_t frame_size);

  const TdoaGrid& grid() const noexcept { return grid_; }
  std::size_t bins() const noexcept { return static_cast<std::size_t>(cos_.rows()); }

  // GCC-PHAT angular spectrum of a frame.
  void phat(const StereoSpectrum<Real>& spec, AngularSpectrum& out);

  // Per-atom GCC-NMF TDOA grid indices. `atoms` must be L1-normalized
  // (bins x atoms); with normalized atoms the atom weighting reduces to W_fd.
  void atom_tdoas(const StereoSpectrum<Real>& spec, const Mat& atoms,
                  std::vector<int>& out);

  // Angular spectrum of each atom (atoms x grid) from the last atom_tdoas call.
  const Mat& atom_spectra() const noexcept { return atom_spectra_; }

 private:
  void load_phasors(const StereoSpectrum<Real>& spec);

  TdoaGrid grid_;
  Mat cos_;  // bins x grid: cos(2 pi f tau)
  Mat sin_;  // bins x grid: sin(2 pi f tau)
  Eigen::Matrix<Real, Eigen::Dynamic, 1> re_, im_;
  Mat weighted_;
  Mat atom_spectra_;
};

extern template class GccEngine<float>;
extern template class GccEngine<double>;

AngularSpectrum gcc_phat_frame(const StereoSpectrum<double>& spec,
                               const TdoaGrid& grid, double sample_rate);

std::vector<int> gcc_nmf_atom_tdoas(const StereoSpectrum<double>& spec,
                                    const Dictionary& dict, const TdoaGrid& grid);

}  // namespace gccnmf
