#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "io/wav.hpp"
#include "pipeline/enhancer.hpp"

namespace gccnmf {

template <typename Real>
struct Stereo {
  std::vector<Real> left;
  std::vector<Real> right;

  std::size_t frames() const noexcept { return left.size(); }
};

// Streams `in` through the enhancer hop by hop, zero-padding the tail, and
// returns an output of the same length aligned with the input (the first
// output_delay() samples of the raw stream are dropped). Each entry of
// `shadow_in` is pushed through its own shadow stream with the same gains.
template <typename Real>
Stereo<Real> run_aligned(Enhancer<Real>& enhancer, const Stereo<Real>& in,
                         const std::vector<const Stereo<Real>*>& shadow_in = {},
                         std::vector<Stereo<Real>>* shadow_out = nullptr);

// Pass-1 target estimate: GCC-PHAT over every frame, max-pooled.
template <typename Real>
std::size_t locate_signal(const EnhancerConfig& config, const Stereo<Real>& in);

struct EnhanceReport {
  std::size_t frames = 0;
  std::size_t target_index = 0;
  double target_tdoa_s = 0.0;
  Latency latency;
  std::size_t output_delay = 0;
  double mean_frame_us = 0.0;
  bool realtime_ok = false;
};

// File mode. With the offline localizer, pass 1 fixes the target TDOA from the
// whole input before pass 2 filters it; other modes run a single pass.
// Rejects mono input and sample-rate mismatches.
AudioBuffer enhance_buffer(const EnhancerConfig& config,
                           std::shared_ptr<const Dictionary> dict,
                           const AudioBuffer& input, EnhanceReport* report = nullptr);

void enhance_file(const EnhancerConfig& config, std::shared_ptr<const Dictionary> dict,
                  const std::string& in_path, const std::string& out_path,
                  WavFormat format = WavFormat::kFloat32, EnhanceReport* report = nullptr);

}  // namespace gccnmf
