#include "spatial/gcc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "common/error.hpp"

namespace gccnmf {

TdoaGrid::TdoaGrid(double tau_max, std::size_t count) : tau_max_(tau_max) {
  require(count >= 2, ErrorCode::kInvalidParameter, "TDOA grid needs >= 2 points");
  require(tau_max > 0.0 && std::isfinite(tau_max), ErrorCode::kInvalidParameter,
          "tau_max must be positive");
  values_.resize(count);
  const double step = 2.0 * tau_max / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i)
    values_[i] = -tau_max + step * static_cast<double>(i);
  values_.back() = tau_max;
}

std::size_t TdoaGrid::nearest_index(double tau) const noexcept {
  std::size_t best = 0;
  double best_dist = std::abs(values_[0] - tau);
  for (std::size_t i = 1; i < values_.size(); ++i) {
    const double dist = std::abs(values_[i] - tau);
    if (dist < best_dist) {
      best = i;
      best_dist = dist;
    }
  }
  return best;
}

std::size_t argmax(const std::vector<double>& values) {
  return static_cast<std::size_t>(
      std::max_element(values.begin(), values.end()) - values.begin());
}

template <typename Real>
GccEngine<Real>::GccEngine(const TdoaGrid& grid, double sample_rate,
                           std::size_t frame_size)
    : grid_(grid) {
  require(sample_rate > 0.0, ErrorCode::kInvalidParameter, "sample rate must be positive");
  const std::size_t bins = frame_size / 2 + 1;
  const auto k = static_cast<Eigen::Index>(grid.size());
  cos_.resize(static_cast<Eigen::Index>(bins), k);
  sin_.resize(static_cast<Eigen::Index>(bins), k);
  for (std::size_t f = 0; f < bins; ++f) {
    const double hz = static_cast<double>(f) * sample_rate / static_cast<double>(frame_size);
    for (Eigen::Index i = 0; i < k; ++i) {
      const double phase = 2.0 * std::numbers::pi * hz * grid[static_cast<std::size_t>(i)];
      cos_(static_cast<Eigen::Index>(f), i) = static_cast<Real>(std::cos(phase));
      sin_(static_cast<Eigen::Index>(f), i) = static_cast<Real>(std::sin(phase));
    }
  }
  re_.resize(static_cast<Eigen::Index>(bins));
  im_.resize(static_cast<Eigen::Index>(bins));
}

template <typename Real>
void GccEngine<Real>::load_phasors(const StereoSpectrum<Real>& spec) {
  require(spec.bins() == bins() && spec.right().size() == bins(),
          ErrorCode::kInvalidInput, "spectrum bin count does not match GCC tables");
  for (std::size_t f = 0; f < bins(); ++f) {
    const auto l = spec.left()[f];
    const auto r = spec.right()[f];
    const double mag = std::abs(std::complex<double>(l)) * std::abs(std::complex<double>(r));
    const auto e = static_cast<Eigen::Index>(f);
    if (mag < kEps) {
      re_[e] = Real(0);
      im_[e] = Real(0);
      continue;
    }
    // exp(j (angle L - angle R)) = L conj(R) / (|L| |R|)
    const std::complex<double> cross =
        std::complex<double>(l) * std::conj(std::complex<double>(r)) / mag;
    re_[e] = static_cast<Real>(cross.real());
    im_[e] = static_cast<Real>(cross.imag());
  }
}

// Re{(a + jb)(cos - j sin)} = a cos + b sin
template <typename Real>
void GccEngine<Real>::phat(const StereoSpectrum<Real>& spec, AngularSpectrum& out) {
  load_phasors(spec);
  const Eigen::Matrix<Real, 1, Eigen::Dynamic> g =
      re_.transpose() * cos_ + im_.transpose() * sin_;
  out.resize(grid_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<double>(g[static_cast<Eigen::Index>(i)]);
}

template <typename Real>
void GccEngine<Real>::atom_tdoas(const StereoSpectrum<Real>& spec, const Mat& atoms,
                                 std::vector<int>& out) {
  require(static_cast<std::size_t>(atoms.rows()) == bins(), ErrorCode::kConfigMismatch,
          "dictionary bin count does not match the spectrum");
  load_phasors(spec);
  weighted_ = cos_.array().colwise() * re_.array() + sin_.array().colwise() * im_.array();
  atom_spectra_.resize(atoms.cols(), weighted_.cols());
  atom_spectra_.noalias() = atoms.transpose() * weighted_;
  out.resize(static_cast<std::size_t>(atoms.cols()));
  for (Eigen::Index d = 0; d < atom_spectra_.rows(); ++d) {
    Eigen::Index best = 0;
    Real best_val = atom_spectra_(d, 0);
    for (Eigen::Index i = 1; i < atom_spectra_.cols(); ++i) {
      if (atom_spectra_(d, i) > best_val) {
        best_val = atom_spectra_(d, i);
        best = i;
      }
    }
    out[static_cast<std::size_t>(d)] = static_cast<int>(best);
  }
}

template class GccEngine<float>;
template class GccEngine<double>;

AngularSpectrum gcc_phat_frame(const StereoSpectrum<double>& spec,
                               const TdoaGrid& grid, double sample_rate) {
  GccEngine<double> engine(grid, sample_rate, 2 * (spec.bins() - 1));
  AngularSpectrum out;
  engine.phat(spec, out);
  return out;
}

std::vector<int> gcc_nmf_atom_tdoas(const StereoSpectrum<double>& spec,
                                    const Dictionary& dict, const TdoaGrid& grid) {
  require(dict.bins() == spec.bins(), ErrorCode::kConfigMismatch,
          "dictionary bin count does not match the spectrum");
  GccEngine<double> engine(grid, dict.layout.sample_rate, dict.layout.frame_size);
  Eigen::MatrixXd atoms = dict.atoms.cast<double>();
  for (Eigen::Index d = 0; d < atoms.cols(); ++d) {
    const double s = atoms.col(d).sum();
    if (s > 0.0) atoms.col(d) /= s;
  }
  std::vector<int> out;
  engine.atom_tdoas(spec, atoms, out);
  return out;
}

}  // namespace gccnmf
