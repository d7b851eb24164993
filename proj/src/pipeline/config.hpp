#pragma once

#include <cstdint>
#include <optional>

#include <nlohmann/json_fwd.hpp>

#include "mask/mask.hpp"
#include "spatial/localizer.hpp"
#include "spatial/tdoa_grid.hpp"
#include "stft/window.hpp"

namespace gccnmf {

struct WindowConfig {
  WindowKind kind = WindowKind::kSymmetric;
  std::size_t frame_size = 1024;
  std::size_t product_half = 512;  // ignored for symmetric windows
  std::size_t hop = 256;

  static WindowConfig symmetric(std::size_t frame_size, std::size_t hop);
  static WindowConfig asymmetric(std::size_t frame_size, std::size_t product_half,
                                 std::size_t hop);
  WindowPair make_pair() const;
};

struct LocalizerConfig {
  LocalizerMode mode = LocalizerMode::kAccumulated;
  std::size_t window = 64;  // frames, sliding mode
};

struct EnhancerConfig {
  double sample_rate = 16000.0;
  WindowConfig window;
  MaskParams mask;
  LocalizerConfig localizer;
  TdoaGridSpec grid;
  // Activation updates per frame when mask.coefficients == kInferred;
  // 0 keeps the random initialization.
  int inference_iterations = 100;
  std::optional<std::size_t> tdoa_override;
  std::uint64_t seed = 0;

  void validate() const;
};

void to_json(nlohmann::json& j, const MaskParams& p);
// Merges the fields present in `j` into `p` (partial updates allowed).
void merge_mask_params(const nlohmann::json& j, MaskParams& p);

void to_json(nlohmann::json& j, const EnhancerConfig& c);
// Missing fields keep their defaults. An inference_iterations of -1 selects
// all-ones coefficients.
EnhancerConfig enhancer_config_from_json(const nlohmann::json& j);

}  // namespace gccnmf
