#include "pipeline/offline.hpp"

#include <cmath>

#include "common/error.hpp"

namespace gccnmf {

namespace {

std::size_t padded_length(std::size_t length, std::size_t delay, std::size_t hop) {
  const std::size_t total = length + delay;
  return (total + hop - 1) / hop * hop;
}

template <typename Real>
std::span<const Real> hop_of(const std::vector<Real>& v, std::vector<Real>& scratch,
                             std::size_t start, std::size_t hop) {
  if (start + hop <= v.size()) return {v.data() + start, hop};
  std::fill(scratch.begin(), scratch.end(), Real(0));
  for (std::size_t i = start; i < v.size(); ++i) scratch[i - start] = v[i];
  return {scratch.data(), hop};
}

}  // namespace

template <typename Real>
Stereo<Real> run_aligned(Enhancer<Real>& enhancer, const Stereo<Real>& in,
                         const std::vector<const Stereo<Real>*>& shadow_in,
                         std::vector<Stereo<Real>>* shadow_out) {
  require(in.left.size() == in.right.size(), ErrorCode::kInvalidInput,
          "channel lengths differ");
  for (const auto* s : shadow_in)
    require(s != nullptr && s->left.size() == in.left.size() &&
                s->right.size() == in.left.size(),
            ErrorCode::kInvalidInput, "shadow input length differs from the main input");
  require(shadow_in.empty() || shadow_out != nullptr, ErrorCode::kInvalidParameter,
          "shadow inputs need an output vector");

  const std::size_t hop = enhancer.hop();
  const std::size_t delay = enhancer.output_delay();
  const std::size_t length = in.frames();
  const std::size_t total = padded_length(length, delay, hop);

  std::vector<std::size_t> shadow_ids;
  for (std::size_t i = 0; i < shadow_in.size(); ++i) shadow_ids.push_back(enhancer.add_shadow());

  auto emit = [&](Stereo<Real>& out, const std::vector<Real>& l, const std::vector<Real>& r,
                  std::size_t start) {
    for (std::size_t i = 0; i < hop; ++i) {
      const std::size_t k = start + i;
      if (k < delay || k - delay >= length) continue;
      out.left[k - delay] = l[i];
      out.right[k - delay] = r[i];
    }
  };

  Stereo<Real> out{std::vector<Real>(length), std::vector<Real>(length)};
  if (shadow_out) {
    shadow_out->assign(shadow_in.size(), out);
  }
  std::vector<Real> sl(hop), sr(hop), ol(hop), orr(hop);
  for (std::size_t start = 0; start < total; start += hop) {
    enhancer.process(hop_of(in.left, sl, start, hop), hop_of(in.right, sr, start, hop), ol, orr);
    emit(out, ol, orr, start);
    for (std::size_t i = 0; i < shadow_in.size(); ++i) {
      enhancer.process_shadow(shadow_ids[i], hop_of(shadow_in[i]->left, sl, start, hop),
                              hop_of(shadow_in[i]->right, sr, start, hop), ol, orr);
      emit((*shadow_out)[i], ol, orr, start);
    }
  }
  return out;
}

template <typename Real>
std::size_t locate_signal(const EnhancerConfig& config, const Stereo<Real>& in) {
  const WindowPair pair = config.window.make_pair();
  StreamingStft<Real> stft(pair);
  GccEngine<Real> gcc(TdoaGrid(config.grid), config.sample_rate, pair.frame_size);
  const std::size_t hop = pair.hop;
  const std::size_t total = padded_length(in.frames(), stft.output_delay(), hop);
  StereoSpectrum<Real> spec(stft.bins());
  AngularSpectrum frame;
  Localizer pool(LocalizerMode::kAccumulated, config.grid.count);
  std::vector<Real> sl(hop), sr(hop);
  for (std::size_t start = 0; start < total; start += hop) {
    stft.analyze(hop_of(in.left, sl, start, hop), hop_of(in.right, sr, start, hop), spec);
    gcc.phat(spec, frame);
    pool.update(frame);
  }
  return pool.estimate();
}

template Stereo<float> run_aligned(Enhancer<float>&, const Stereo<float>&,
                                   const std::vector<const Stereo<float>*>&,
                                   std::vector<Stereo<float>>*);
template Stereo<double> run_aligned(Enhancer<double>&, const Stereo<double>&,
                                    const std::vector<const Stereo<double>*>&,
                                    std::vector<Stereo<double>>*);
template std::size_t locate_signal(const EnhancerConfig&, const Stereo<float>&);
template std::size_t locate_signal(const EnhancerConfig&, const Stereo<double>&);

AudioBuffer enhance_buffer(const EnhancerConfig& config, std::shared_ptr<const Dictionary> dict,
                           const AudioBuffer& input, EnhanceReport* report) {
  require(input.channel_count() == 2, ErrorCode::kInvalidInput,
          "enhancement needs a stereo input, got " + std::to_string(input.channel_count()) +
              " channel(s)");
  require(std::abs(static_cast<double>(input.sample_rate) - config.sample_rate) < 1e-9,
          ErrorCode::kConfigMismatch,
          "input is " + std::to_string(input.sample_rate) + " Hz, configuration expects " +
              std::to_string(static_cast<long>(config.sample_rate)) + " Hz");

  Stereo<float> in{input.channels[0], input.channels[1]};
  EnhancerConfig run_config = config;
  if (config.localizer.mode == LocalizerMode::kOffline && !config.tdoa_override)
    run_config.tdoa_override = locate_signal(config, in);

  Enhancer<float> enhancer(run_config, std::move(dict));
  Stereo<float> out = run_aligned(enhancer, in);

  if (report) {
    report->frames = enhancer.frames();
    report->target_index = enhancer.target_index();
    report->target_tdoa_s = enhancer.grid()[enhancer.target_index()];
    report->latency = enhancer.latency();
    report->output_delay = enhancer.output_delay();
    report->mean_frame_us = enhancer.mean_frame_time_us();
    report->realtime_ok =
        report->mean_frame_us * 1e-6 < static_cast<double>(enhancer.hop()) / config.sample_rate;
  }
  AudioBuffer result;
  result.sample_rate = input.sample_rate;
  result.channels = {std::move(out.left), std::move(out.right)};
  return result;
}

void enhance_file(const EnhancerConfig& config, std::shared_ptr<const Dictionary> dict,
                  const std::string& in_path, const std::string& out_path, WavFormat format,
                  EnhanceReport* report) {
  const AudioBuffer in = read_wav(in_path);
  write_wav(out_path, enhance_buffer(config, std::move(dict), in, report), format);
}

}  // namespace gccnmf
