#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "stft/stft.hpp"

namespace gccnmf {

enum class MaskMode { kBinary, kSoft };
enum class CoefficientMode { kInferred, kAllOnes };

std::string to_string(MaskMode mode);
std::string to_string(CoefficientMode mode);
MaskMode mask_mode_from_string(const std::string& name);
CoefficientMode coefficient_mode_from_string(const std::string& name);

// Activation-mask window parameters. epsilon and alpha are fractions of the
// full TDOA grid (grid size K samples), so epsilon = 3/64 spans 6 grid samples
// at K = 128. beta = +infinity selects the box-shaped limit of the soft mask.
struct MaskParams {
  static constexpr double kInfinity = std::numeric_limits<double>::infinity();

  double epsilon = 3.0 / 64.0;
  double alpha = 3.0 / 16.0;
  double beta = kInfinity;
  double eta = 0.0;
  MaskMode mode = MaskMode::kBinary;
  CoefficientMode coefficients = CoefficientMode::kAllOnes;

  // Throws kInvariantViolation naming the offending field.
  void validate() const;
  bool operator==(const MaskParams&) const = default;
};

// m_d = 1 if |target - tdoa_d| < epsilon / 2 (in grid samples), else 0.
std::vector<double> binary_mask(std::span<const int> atom_tdoas, int target,
                                const MaskParams& params, std::size_t grid_size);

// m_d = (1 - eta) exp(-(|target - tdoa_d| / alpha)^beta) + eta.
std::vector<double> soft_mask(std::span<const int> atom_tdoas, int target,
                              const MaskParams& params, std::size_t grid_size);

// Dispatches on params.mode.
std::vector<double> atom_mask(std::span<const int> atom_tdoas, int target,
                              const MaskParams& params, std::size_t grid_size);

// Per-bin filter gain sum_d W_fd h_d m_d / max(sum_d W_fd h_d, kEps), clamped
// to [0, 1]. `atoms` is bins x atoms.
template <typename Real>
void filter_gain(const Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>& atoms,
                 const Eigen::Matrix<Real, Eigen::Dynamic, 1>& activations,
                 const Eigen::Matrix<Real, Eigen::Dynamic, 1>& mask,
                 Eigen::Matrix<Real, Eigen::Dynamic, 1>& gain);

// Wiener-like filtering with per-channel activations: each channel gets its
// own gain computed from its activations.
template <typename Real>
StereoSpectrum<Real> wiener_filter(
    const StereoSpectrum<Real>& spec,
    const Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>& atoms,
    const std::array<Eigen::Matrix<Real, Eigen::Dynamic, 1>, 2>& activations,
    const Eigen::Matrix<Real, Eigen::Dynamic, 1>& mask);

// Phase-based filtering: activations replaced by ones, one gain shared by both
// channels, independent of the input magnitudes.
template <typename Real>
StereoSpectrum<Real> phase_filter(
    const StereoSpectrum<Real>& spec,
    const Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>& atoms,
    const Eigen::Matrix<Real, Eigen::Dynamic, 1>& mask);

template <typename Real>
void apply_gain(const Eigen::Matrix<Real, Eigen::Dynamic, 1>& gain, Spectrum<Real>& spec);

}  // namespace gccnmf
