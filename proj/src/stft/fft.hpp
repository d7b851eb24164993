#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace gccnmf {

// One-sided real FFT of fixed size backed by FFTW plans. The inverse is
// normalized (divides by size) so inverse(forward(x)) == x.
template <typename Real>
class RealFft {
 public:
  explicit RealFft(std::size_t size);
  ~RealFft();
  RealFft(RealFft&&) noexcept;
  RealFft& operator=(RealFft&&) noexcept;
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const noexcept { return size_; }
  std::size_t bins() const noexcept { return size_ / 2 + 1; }

  // in.size() == size(), out.size() == bins()
  void forward(std::span<const Real> in, std::span<std::complex<Real>> out);
  // in.size() == bins(), out.size() == size()
  void inverse(std::span<const std::complex<Real>> in, std::span<Real> out);

 private:
  struct Plans;
  std::size_t size_ = 0;
  std::unique_ptr<Plans> plans_;
};

extern template class RealFft<float>;
extern template class RealFft<double>;

}  // namespace gccnmf
