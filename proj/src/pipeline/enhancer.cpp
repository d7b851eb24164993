#include "pipeline/enhancer.hpp"

#include <chrono>
#include <cmath>

#include "common/error.hpp"
#include "nmf/nmf.hpp"

namespace gccnmf {

namespace {

std::shared_ptr<const Dictionary> checked(std::shared_ptr<const Dictionary> dict) {
  require(dict != nullptr, ErrorCode::kInvalidParameter, "enhancer needs a dictionary");
  return dict;
}

}  // namespace

template <typename Real>
Enhancer<Real>::Enhancer(const EnhancerConfig& config, std::shared_ptr<const Dictionary> dict)
    : config_((config.validate(), config)),
      dict_(checked(std::move(dict))),
      stft_(config_.window.make_pair()),
      gcc_(TdoaGrid(config_.grid), config_.sample_rate, config_.window.frame_size),
      localizer_(config_.localizer.mode, config_.grid.count, config_.localizer.window),
      spec_(config_.window.frame_size / 2 + 1) {
  require(dict_->bins() == stft_.bins(), ErrorCode::kConfigMismatch,
          "dictionary has " + std::to_string(dict_->bins()) + " bins, window needs " +
              std::to_string(stft_.bins()));
  require(std::abs(dict_->layout.sample_rate - config_.sample_rate) < 1e-9,
          ErrorCode::kConfigMismatch, "dictionary sample rate differs from the stream");
  load_dictionary(dict_);
  if (config_.tdoa_override) target_ = *config_.tdoa_override;
  gains_[0] = Vec::Ones(static_cast<Eigen::Index>(bins()));
  gains_[1] = gains_[0];
  angular_.assign(config_.grid.count, 0.0);
}

template <typename Real>
void Enhancer<Real>::load_dictionary(std::shared_ptr<const Dictionary> dict) {
  dict_ = std::move(dict);
  atoms_ = dict_->atoms.template cast<Real>();
  // Atom weighting divides by each atom's L1 norm; stored atoms are already
  // normalized up to float rounding.
  for (Eigen::Index d = 0; d < atoms_.cols(); ++d) {
    const Real s = atoms_.col(d).sum();
    if (s > Real(0)) atoms_.col(d) /= s;
  }
  atom_sums_ = atoms_.colwise().sum().transpose();
  mask_vec_.resize(atoms_.cols());
}

template <typename Real>
void Enhancer<Real>::set_mask_params(const MaskParams& params) {
  params.validate();
  config_.mask = params;
}

template <typename Real>
void Enhancer<Real>::set_tdoa_override(std::optional<std::size_t> index) {
  if (index)
    require(*index < config_.grid.count, ErrorCode::kInvariantViolation,
            "tdoa_index must lie in [0, " + std::to_string(config_.grid.count) + ")");
  config_.tdoa_override = index;
}

template <typename Real>
void Enhancer<Real>::set_localizer(const LocalizerConfig& localizer) {
  require(localizer.mode != LocalizerMode::kSliding || localizer.window >= 1,
          ErrorCode::kInvariantViolation, "sliding window must be >= 1 frame");
  config_.localizer = localizer;
  localizer_ = Localizer(localizer.mode, config_.grid.count, localizer.window);
}

template <typename Real>
void Enhancer<Real>::set_dictionary(std::shared_ptr<const Dictionary> dict) {
  require(dict != nullptr, ErrorCode::kInvalidParameter, "null dictionary");
  require(dict->bins() == bins(), ErrorCode::kInvariantViolation,
          "dictionary has " + std::to_string(dict->bins()) + " bins, stream needs " +
              std::to_string(bins()));
  load_dictionary(std::move(dict));
}

template <typename Real>
void Enhancer<Real>::post(ControlMessage msg) {
  std::lock_guard lock(mailbox_mutex_);
  auto it = last_msg_by_source_.find(msg.source);
  if (it != last_msg_by_source_.end() && msg.msg_id <= it->second) {
    acks_.push_back({msg.source, msg.msg_id, false,
                     "msg_id " + std::to_string(msg.msg_id) +
                         " is not greater than the previous " + std::to_string(it->second),
                     0});
    return;
  }
  last_msg_by_source_[msg.source] = msg.msg_id;
  mailbox_.push_back(std::move(msg));
}

template <typename Real>
void Enhancer<Real>::reject(std::uint64_t source, std::int64_t msg_id,
                            const std::string& reason) {
  std::lock_guard lock(mailbox_mutex_);
  acks_.push_back({source, msg_id, false, reason, 0});
}

template <typename Real>
std::vector<ControlAck> Enhancer<Real>::take_acks() {
  std::lock_guard lock(mailbox_mutex_);
  std::vector<ControlAck> out;
  out.swap(acks_);
  return out;
}

template <typename Real>
void Enhancer<Real>::apply(const ControlMessage& msg) {
  switch (msg.kind) {
    case ControlKind::kSetMaskParams: {
      MaskParams next = config_.mask;
      merge_mask_params(msg.payload, next);
      if (next.coefficients == CoefficientMode::kInferred)
        require(config_.inference_iterations >= 0, ErrorCode::kInvariantViolation,
                "inference iterations unset");
      set_mask_params(next);
      break;
    }
    case ControlKind::kSetTdoaOverride: {
      const auto& p = msg.payload;
      require(p.contains("tdoa_index") && p["tdoa_index"].is_number_integer(),
              ErrorCode::kInvariantViolation, "set_tdoa_override needs integer tdoa_index");
      const auto idx = p["tdoa_index"].get<std::int64_t>();
      require(idx >= 0, ErrorCode::kInvariantViolation, "tdoa_index must be >= 0");
      set_tdoa_override(static_cast<std::size_t>(idx));
      break;
    }
    case ControlKind::kClearTdoaOverride:
      set_tdoa_override(std::nullopt);
      break;
    case ControlKind::kSetLocalizer: {
      LocalizerConfig next = config_.localizer;
      const auto& p = msg.payload;
      if (p.contains("mode")) {
        require(p["mode"].is_string(), ErrorCode::kInvariantViolation, "mode must be a string");
        next.mode = localizer_mode_from_string(p["mode"].get<std::string>());
        require(next.mode != LocalizerMode::kOffline, ErrorCode::kInvariantViolation,
                "offline localization is unavailable on a live stream");
      }
      if (p.contains("window")) {
        require(p["window"].is_number_integer() && p["window"].get<std::int64_t>() >= 1,
                ErrorCode::kInvariantViolation, "window must be an integer >= 1");
        next.window = p["window"].get<std::size_t>();
      }
      set_localizer(next);
      break;
    }
    case ControlKind::kSetDictionary:
      require(msg.dictionary != nullptr, ErrorCode::kInvariantViolation,
              "set_dictionary carried no loaded dictionary");
      set_dictionary(msg.dictionary);
      break;
  }
}

template <typename Real>
void Enhancer<Real>::drain_mailbox() {
  std::deque<ControlMessage> pending;
  {
    std::lock_guard lock(mailbox_mutex_);
    if (mailbox_.empty()) return;
    pending.swap(mailbox_);
  }
  std::vector<ControlAck> done;
  for (const auto& msg : pending) {
    // Apply to a copy of the mutable state so a failure leaves nothing half-set.
    const EnhancerConfig saved_config = config_;
    ControlAck ack{msg.source, msg.msg_id, true, {}, frame_index_};
    try {
      apply(msg);
      last_applied_msg_ = msg.msg_id;
    } catch (const std::exception& e) {
      config_ = saved_config;
      ack.applied = false;
      ack.reason = e.what();
    }
    done.push_back(std::move(ack));
  }
  std::lock_guard lock(mailbox_mutex_);
  for (auto& a : done) acks_.push_back(std::move(a));
}

template <typename Real>
void Enhancer<Real>::compute_gains(const StereoSpectrum<Real>& spec) {
  for (std::size_t d = 0; d < mask_.size(); ++d)
    mask_vec_[static_cast<Eigen::Index>(d)] = static_cast<Real>(mask_[d]);
  if (config_.mask.coefficients == CoefficientMode::kAllOnes) {
    const Vec ones = Vec::Ones(atoms_.cols());
    filter_gain<Real>(atoms_, ones, mask_vec_, gains_[0]);
    gains_[1] = gains_[0];
    return;
  }
  magnitude_.resize(static_cast<Eigen::Index>(bins()));
  for (int c = 0; c < 2; ++c) {
    for (std::size_t f = 0; f < bins(); ++f)
      magnitude_[static_cast<Eigen::Index>(f)] = std::abs(spec.channel[c][f]);
    Rng rng(mix_seed(config_.seed, 2 * frame_index_ + static_cast<std::uint64_t>(c)));
    infer_activations<Real>(atoms_, atom_sums_, magnitude_, config_.inference_iterations,
                            rng, activations_[c]);
    filter_gain<Real>(atoms_, activations_[c], mask_vec_, gains_[c]);
  }
}

template <typename Real>
void Enhancer<Real>::process(std::span<const Real> in_left, std::span<const Real> in_right,
                             std::span<Real> out_left, std::span<Real> out_right) {
  const auto start = std::chrono::steady_clock::now();
  drain_mailbox();
  stft_.analyze(in_left, in_right, spec_);
  gcc_.phat(spec_, angular_);
  const std::size_t located = localizer_.update(angular_);
  target_ = config_.tdoa_override ? *config_.tdoa_override : located;
  gcc_.atom_tdoas(spec_, atoms_, atom_tdoas_);
  mask_ = atom_mask(atom_tdoas_, static_cast<int>(target_), config_.mask, config_.grid.count);
  compute_gains(spec_);
  apply_gain<Real>(gains_[0], spec_.channel[0]);
  apply_gain<Real>(gains_[1], spec_.channel[1]);
  stft_.synthesize(spec_, out_left, out_right);
  ++frame_index_;
  const double us = std::chrono::duration<double, std::micro>(
                        std::chrono::steady_clock::now() - start).count();
  total_frame_us_ += us;
  update_telemetry(us);
}

template <typename Real>
std::size_t Enhancer<Real>::add_shadow() {
  shadows_.push_back({StreamingStft<Real>(stft_.pair()), StereoSpectrum<Real>(bins())});
  return shadows_.size() - 1;
}

template <typename Real>
void Enhancer<Real>::process_shadow(std::size_t index, std::span<const Real> in_left,
                                    std::span<const Real> in_right,
                                    std::span<Real> out_left, std::span<Real> out_right) {
  require(index < shadows_.size(), ErrorCode::kInvalidParameter, "no such shadow stream");
  auto& s = shadows_[index];
  s.stft.analyze(in_left, in_right, s.spec);
  apply_gain<Real>(gains_[0], s.spec.channel[0]);
  apply_gain<Real>(gains_[1], s.spec.channel[1]);
  s.stft.synthesize(s.spec, out_left, out_right);
}

template <typename Real>
bool Enhancer<Real>::telemetry_due() const noexcept {
  const double elapsed = static_cast<double>((frame_index_ - last_publish_frame_) * hop()) /
                         config_.sample_rate;
  return last_publish_frame_ == 0 ? frame_index_ > 0 : elapsed >= 1.0 / 30.0;
}

template <typename Real>
double Enhancer<Real>::mean_frame_time_us() const noexcept {
  return frame_index_ == 0 ? 0.0 : total_frame_us_ / static_cast<double>(frame_index_);
}

template <typename Real>
void Enhancer<Real>::update_telemetry(double frame_us) {
  auto& t = telemetry_;
  t.frame_index = frame_index_ - 1;
  t.tau_index = static_cast<std::int32_t>(target_);
  t.flags = 0;
  if (config_.tdoa_override) t.flags |= kFlagOverride;
  if (looping_source_) t.flags |= kFlagLoopingSource;
  if (config_.mask.mode == MaskMode::kSoft) t.flags |= kFlagSoftMask;
  if (config_.mask.coefficients == CoefficientMode::kAllOnes) t.flags |= kFlagAllOnes;
  t.localizer_mode = config_.localizer.mode;
  t.localizer_window = static_cast<std::uint32_t>(config_.localizer.window);
  t.params = config_.mask;
  t.latency_ms = static_cast<float>(latency().total_ms);
  t.frame_time_us = static_cast<float>(frame_us);
  t.last_msg_id = last_applied_msg_;
  t.angular.assign(angular_.begin(), angular_.end());
  t.mask = downsample_mask(mask_);
  t.gain.resize(bins());
  for (std::size_t f = 0; f < bins(); ++f)
    t.gain[f] = static_cast<float>(gains_[0][static_cast<Eigen::Index>(f)]);
}

template class Enhancer<float>;
template class Enhancer<double>;

}  // namespace gccnmf
