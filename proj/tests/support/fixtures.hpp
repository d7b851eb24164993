#pragma once

#include <memory>
#include <random>

#include "nmf/dictionary.hpp"
#include "pipeline/config.hpp"

// Random L1-normalized dictionary matching `config`'s window.
inline std::shared_ptr<const gccnmf::Dictionary> random_dict(
    const gccnmf::EnhancerConfig& config, std::size_t atoms, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  auto d = std::make_shared<gccnmf::Dictionary>();
  d->layout.sample_rate = config.sample_rate;
  d->layout.frame_size = config.window.frame_size;
  d->layout.window_kind = config.window.kind;
  const auto bins = static_cast<Eigen::Index>(config.window.frame_size / 2 + 1);
  d->atoms.resize(bins, static_cast<Eigen::Index>(atoms));
  for (Eigen::Index j = 0; j < d->atoms.cols(); ++j) {
    for (Eigen::Index i = 0; i < bins; ++i) d->atoms(i, j) = u(rng) * u(rng) * u(rng);
    d->atoms.col(j) /= d->atoms.col(j).sum();
  }
  return d;
}

inline gccnmf::EnhancerConfig small_config() {
  gccnmf::EnhancerConfig c;
  c.window = gccnmf::WindowConfig::symmetric(256, 64);
  return c;
}
