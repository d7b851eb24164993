#include "mask/mask.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "common/error.hpp"

namespace gccnmf {

std::string to_string(MaskMode mode) {
  return mode == MaskMode::kBinary ? "binary" : "soft";
}

std::string to_string(CoefficientMode mode) {
  return mode == CoefficientMode::kAllOnes ? "all_ones" : "inferred";
}

MaskMode mask_mode_from_string(const std::string& name) {
  if (name == "binary") return MaskMode::kBinary;
  if (name == "soft") return MaskMode::kSoft;
  fail(ErrorCode::kInvalidParameter, "unknown mask mode '" + name + "'");
}

CoefficientMode coefficient_mode_from_string(const std::string& name) {
  if (name == "all_ones" || name == "all-ones") return CoefficientMode::kAllOnes;
  if (name == "inferred") return CoefficientMode::kInferred;
  fail(ErrorCode::kInvalidParameter, "unknown coefficient mode '" + name + "'");
}

void MaskParams::validate() const {
  require(std::isfinite(epsilon) && epsilon > 0.0, ErrorCode::kInvariantViolation,
          "epsilon must be finite and > 0");
  require(std::isfinite(alpha) && alpha > 0.0, ErrorCode::kInvariantViolation,
          "alpha must be finite and > 0");
  require(beta > 0.0 && !std::isnan(beta), ErrorCode::kInvariantViolation,
          "beta must be > 0 or infinity");
  require(eta >= 0.0 && eta <= 1.0, ErrorCode::kInvariantViolation,
          "eta must lie in [0, 1]");
}

std::vector<double> binary_mask(std::span<const int> atom_tdoas, int target,
                                const MaskParams& params, std::size_t grid_size) {
  const double half_width = 0.5 * params.epsilon * static_cast<double>(grid_size);
  std::vector<double> out(atom_tdoas.size());
  for (std::size_t d = 0; d < out.size(); ++d) {
    const double dist = std::abs(target - atom_tdoas[d]);
    out[d] = dist < half_width ? 1.0 : 0.0;
  }
  return out;
}

std::vector<double> soft_mask(std::span<const int> atom_tdoas, int target,
                              const MaskParams& params, std::size_t grid_size) {
  const double width = params.alpha * static_cast<double>(grid_size);
  const double eta = params.eta;
  std::vector<double> out(atom_tdoas.size());
  for (std::size_t d = 0; d < out.size(); ++d) {
    const double dist = std::abs(target - atom_tdoas[d]);
    if (std::isinf(params.beta)) {
      out[d] = dist < width ? 1.0 : eta;
    } else {
      out[d] = (1.0 - eta) * std::exp(-std::pow(dist / width, params.beta)) + eta;
    }
  }
  return out;
}

std::vector<double> atom_mask(std::span<const int> atom_tdoas, int target,
                              const MaskParams& params, std::size_t grid_size) {
  return params.mode == MaskMode::kBinary
             ? binary_mask(atom_tdoas, target, params, grid_size)
             : soft_mask(atom_tdoas, target, params, grid_size);
}

template <typename Real>
void filter_gain(const Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>& atoms,
                 const Eigen::Matrix<Real, Eigen::Dynamic, 1>& activations,
                 const Eigen::Matrix<Real, Eigen::Dynamic, 1>& mask,
                 Eigen::Matrix<Real, Eigen::Dynamic, 1>& gain) {
  require(atoms.cols() == activations.size() && atoms.cols() == mask.size(),
          ErrorCode::kInvalidInput, "filter_gain: atom count mismatch");
  const Eigen::Matrix<Real, Eigen::Dynamic, 1> masked = activations.cwiseProduct(mask);
  const Eigen::Matrix<Real, Eigen::Dynamic, 1> target = atoms * masked;
  const Eigen::Matrix<Real, Eigen::Dynamic, 1> mixture = atoms * activations;
  gain.resize(atoms.rows());
  const Real floor = static_cast<Real>(kEps);
  for (Eigen::Index f = 0; f < gain.size(); ++f)
    gain[f] = std::clamp(target[f] / std::max(mixture[f], floor), Real(0), Real(1));
}

template <typename Real>
void apply_gain(const Eigen::Matrix<Real, Eigen::Dynamic, 1>& gain, Spectrum<Real>& spec) {
  require(static_cast<std::size_t>(gain.size()) == spec.size(), ErrorCode::kInvalidInput,
          "gain length does not match the spectrum");
  for (std::size_t f = 0; f < spec.size(); ++f) spec[f] *= gain[static_cast<Eigen::Index>(f)];
}

template <typename Real>
StereoSpectrum<Real> wiener_filter(
    const StereoSpectrum<Real>& spec,
    const Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>& atoms,
    const std::array<Eigen::Matrix<Real, Eigen::Dynamic, 1>, 2>& activations,
    const Eigen::Matrix<Real, Eigen::Dynamic, 1>& mask) {
  StereoSpectrum<Real> out = spec;
  Eigen::Matrix<Real, Eigen::Dynamic, 1> gain;
  for (int c = 0; c < 2; ++c) {
    filter_gain<Real>(atoms, activations[c], mask, gain);
    apply_gain<Real>(gain, out.channel[c]);
  }
  return out;
}

template <typename Real>
StereoSpectrum<Real> phase_filter(
    const StereoSpectrum<Real>& spec,
    const Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>& atoms,
    const Eigen::Matrix<Real, Eigen::Dynamic, 1>& mask) {
  const Eigen::Matrix<Real, Eigen::Dynamic, 1> ones =
      Eigen::Matrix<Real, Eigen::Dynamic, 1>::Ones(atoms.cols());
  Eigen::Matrix<Real, Eigen::Dynamic, 1> gain;
  filter_gain<Real>(atoms, ones, mask, gain);
  StereoSpectrum<Real> out = spec;
  apply_gain<Real>(gain, out.channel[0]);
  apply_gain<Real>(gain, out.channel[1]);
  return out;
}

#define GCCNMF_INSTANTIATE_MASK(Real)                                                  \
  template void filter_gain<Real>(const Eigen::Matrix<Real, -1, -1>&,                  \
                                  const Eigen::Matrix<Real, -1, 1>&,                   \
                                  const Eigen::Matrix<Real, -1, 1>&,                   \
                                  Eigen::Matrix<Real, -1, 1>&);                        \
  template void apply_gain<Real>(const Eigen::Matrix<Real, -1, 1>&, Spectrum<Real>&);  \
  template StereoSpectrum<Real> wiener_filter<Real>(                                   \
      const StereoSpectrum<Real>&, const Eigen::Matrix<Real, -1, -1>&,                 \
      const std::array<Eigen::Matrix<Real, -1, 1>, 2>&,                                \
      const Eigen::Matrix<Real, -1, 1>&);                                              \
  template StereoSpectrum<Real> phase_filter<Real>(const StereoSpectrum<Real>&,        \
                                                   const Eigen::Matrix<Real, -1, -1>&, \
                                                   const Eigen::Matrix<Real, -1, 1>&);

GCCNMF_INSTANTIATE_MASK(float)
GCCNMF_INSTANTIATE_MASK(double)

}  // namespace gccnmf
