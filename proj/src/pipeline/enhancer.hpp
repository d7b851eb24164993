#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "mask/mask.hpp"
#include "nmf/dictionary.hpp"
#include "pipeline/config.hpp"
#include "pipeline/control.hpp"
#include "pipeline/telemetry.hpp"
#include "spatial/gcc.hpp"
#include "spatial/localizer.hpp"
#include "stft/stft.hpp"

namespace gccnmf {

// Frame-by-frame two-channel enhancer:
//   analyze -> GCC-PHAT -> target TDOA -> per-atom TDOAs -> activation mask
//   -> Wiener-like or phase-based filter -> overlap-add.
// One instance is one stream and is advanced by a single thread. post() may
// be called from any thread; queued messages are applied at the start of the
// next process() call.
template <typename Real>
class Enhancer {
 public:
  using Vec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
  using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

  Enhancer(const EnhancerConfig& config, std::shared_ptr<const Dictionary> dict);

  const EnhancerConfig& config() const noexcept { return config_; }
  const WindowPair& pair() const noexcept { return stft_.pair(); }
  const TdoaGrid& grid() const noexcept { return gcc_.grid(); }
  std::size_t hop() const noexcept { return stft_.hop(); }
  std::size_t bins() const noexcept { return stft_.bins(); }
  // Input sample k reappears at output sample k + output_delay().
  std::size_t output_delay() const noexcept { return stft_.output_delay(); }
  Latency latency() const { return algorithmic_latency(stft_.pair(), config_.sample_rate); }
  std::uint64_t frames() const noexcept { return frame_index_; }

  // Exactly hop() samples per channel in and out.
  void process(std::span<const Real> in_left, std::span<const Real> in_right,
               std::span<Real> out_left, std::span<Real> out_right);

  // Auxiliary streams that receive the same per-frame gains as the main
  // stream; call process_shadow(i, ...) after process() for the same hop.
  std::size_t add_shadow();
  void process_shadow(std::size_t index, std::span<const Real> in_left,
                      std::span<const Real> in_right, std::span<Real> out_left,
                      std::span<Real> out_right);

  // Immediate setters for single-threaded callers.
  void set_mask_params(const MaskParams& params);
  void set_tdoa_override(std::optional<std::size_t> index);
  void set_localizer(const LocalizerConfig& localizer);
  void set_dictionary(std::shared_ptr<const Dictionary> dict);

  // Thread-safe mailbox. Non-increasing msg_ids from the same source are
  // rejected immediately; everything else is validated and applied (or
  // rejected) at the next frame boundary. Each message is acked once.
  void post(ControlMessage msg);
  void reject(std::uint64_t source, std::int64_t msg_id, const std::string& reason);
  std::vector<ControlAck> take_acks();

  const TelemetryFrame& telemetry() const noexcept { return telemetry_; }
  // True once at least 1/30 s of audio has passed since the last mark.
  bool telemetry_due() const noexcept;
  void mark_telemetry_published() noexcept { last_publish_frame_ = frame_index_; }
  void set_looping_source(bool looping) noexcept { looping_source_ = looping; }

  std::size_t target_index() const noexcept { return target_; }
  const std::vector<int>& atom_tdoas() const noexcept { return atom_tdoas_; }
  const std::vector<double>& mask() const noexcept { return mask_; }
  const AngularSpectrum& angular_spectrum() const noexcept { return angular_; }
  const Vec& gain(int channel) const noexcept { return gains_[channel]; }
  double mean_frame_time_us() const noexcept;

 private:
  void load_dictionary(std::shared_ptr<const Dictionary> dict);
  void drain_mailbox();
  void apply(const ControlMessage& msg);
  void compute_gains(const StereoSpectrum<Real>& spec);
  void update_telemetry(double frame_us);

  EnhancerConfig config_;
  std::shared_ptr<const Dictionary> dict_;
  Mat atoms_;
  Vec atom_sums_;
  StreamingStft<Real> stft_;
  GccEngine<Real> gcc_;
  Localizer localizer_;
  StereoSpectrum<Real> spec_;
  AngularSpectrum angular_;
  std::vector<int> atom_tdoas_;
  std::vector<double> mask_;
  std::array<Vec, 2> gains_;
  std::array<Vec, 2> activations_;
  Vec mask_vec_;
  Vec magnitude_;
  std::size_t target_ = 0;
  std::uint64_t frame_index_ = 0;
  std::uint64_t last_publish_frame_ = 0;
  bool looping_source_ = false;
  double total_frame_us_ = 0.0;
  std::int64_t last_applied_msg_ = -1;
  TelemetryFrame telemetry_;

  struct Shadow {
    StreamingStft<Real> stft;
    StereoSpectrum<Real> spec;
  };
  std::vector<Shadow> shadows_;

  std::mutex mailbox_mutex_;
  std::deque<ControlMessage> mailbox_;
  std::vector<ControlAck> acks_;
  std::map<std::uint64_t, std::int64_t> last_msg_by_source_;
};

extern template class Enhancer<float>;
extern template class Enhancer<double>;

}  // namespace gccnmf
