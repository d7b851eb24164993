#include "stft/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>

#include "common/error.hpp"

namespace gccnmf {
namespace {

// FFTW's planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

template <typename Real>
struct FftwApi;

template <>
struct FftwApi<double> {
  using Plan = fftw_plan;
  using Complex = fftw_complex;
  static void* alloc(std::size_t bytes) { return fftw_malloc(bytes); }
  static void release(void* p) { fftw_free(p); }
  static Plan r2c(int n, double* in, Complex* out) {
    return fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
  }
  static Plan c2r(int n, Complex* in, double* out) {
    return fftw_plan_dft_c2r_1d(n, in, out, FFTW_ESTIMATE);
  }
  static void run(Plan p) { fftw_execute(p); }
  static void destroy(Plan p) { fftw_destroy_plan(p); }
};

template <>
struct FftwApi<float> {
  using Plan = fftwf_plan;
  using Complex = fftwf_complex;
  static void* alloc(std::size_t bytes) { return fftwf_malloc(bytes); }
  static void release(void* p) { fftwf_free(p); }
  static Plan r2c(int n, float* in, Complex* out) {
    return fftwf_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
  }
  static Plan c2r(int n, Complex* in, float* out) {
    return fftwf_plan_dft_c2r_1d(n, in, out, FFTW_ESTIMATE);
  }
  static void run(Plan p) { fftwf_execute(p); }
  static void destroy(Plan p) { fftwf_destroy_plan(p); }
};

}  // namespace

template <typename Real>
struct RealFft<Real>::Plans {
  using Api = FftwApi<Real>;
  Real* time = nullptr;
  typename Api::Complex* freq = nullptr;
  typename Api::Plan forward = nullptr;
  typename Api::Plan inverse = nullptr;

  ~Plans() {
    std::lock_guard lock(planner_mutex());
    if (forward) Api::destroy(forward);
    if (inverse) Api::destroy(inverse);
    Api::release(time);
    Api::release(freq);
  }
};

template <typename Real>
RealFft<Real>::RealFft(std::size_t size) : size_(size) {
  require(size >= 2, ErrorCode::kInvalidParameter, "FFT size must be >= 2");
  using Api = FftwApi<Real>;
  plans_ = std::make_unique<Plans>();
  plans_->time = static_cast<Real*>(Api::alloc(sizeof(Real) * size));
  plans_->freq = static_cast<typename Api::Complex*>(
      Api::alloc(sizeof(typename Api::Complex) * bins()));
  std::lock_guard lock(planner_mutex());
  const int n = static_cast<int>(size);
  plans_->forward = Api::r2c(n, plans_->time, plans_->freq);
  plans_->inverse = Api::c2r(n, plans_->freq, plans_->time);
  require(plans_->forward && plans_->inverse, ErrorCode::kInvalidParameter,
          "FFTW planning failed");
}

template <typename Real>
RealFft<Real>::~RealFft() = default;
template <typename Real>
RealFft<Real>::RealFft(RealFft&&) noexcept = default;
template <typename Real>
RealFft<Real>& RealFft<Real>::operator=(RealFft&&) noexcept = default;

template <typename Real>
void RealFft<Real>::forward(std::span<const Real> in,
                            std::span<std::complex<Real>> out) {
  std::copy(in.begin(), in.end(), plans_->time);
  FftwApi<Real>::run(plans_->forward);
  const auto* src = reinterpret_cast<const std::complex<Real>*>(plans_->freq);
  std::copy(src, src + bins(), out.begin());
}

template <typename Real>
void RealFft<Real>::inverse(std::span<const std::complex<Real>> in,
                            std::span<Real> out) {
  auto* dst = reinterpret_cast<std::complex<Real>*>(plans_->freq);
  std::copy(in.begin(), in.end(), dst);
  // c2r assumes a real DC and Nyquist bin.
  dst[0] = {dst[0].real(), Real(0)};
  if (size_ % 2 == 0) dst[bins() - 1] = {dst[bins() - 1].real(), Real(0)};
  FftwApi<Real>::run(plans_->inverse);
  const Real scale = Real(1) / static_cast<Real>(size_);
  for (std::size_t i = 0; i < size_; ++i) out[i] = plans_->time[i] * scale;
}

template class RealFft<float>;
template class RealFft<double>;

}  // namespace gccnmf
