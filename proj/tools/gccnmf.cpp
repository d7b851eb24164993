// gccnmf command-line front end. Talks to the library only through the C API.

#include <atomic>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <limits>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gccnmf/gccnmf.h"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ApiError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(gcn_status s) {
  if (s != GCN_OK)
    throw ApiError(std::string(gcn_status_string(s)) + ": " + gcn_last_error());
}

struct DictHandle {
  gcn_dictionary* p = nullptr;
  ~DictHandle() { gcn_dictionary_free(p); }
};

// "a:b:step" (inclusive) or "v1,v2,...".
std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  auto number = [&](const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size())
      throw UsageError("--" + flag + ": '" + s + "' is not a number");
    return v;
  };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3)
      throw UsageError("--" + flag + ": range must look like start:stop:step");
    const double a = number(parts[0]), b = number(parts[1]), step = number(parts[2]);
    if (!(step != 0.0) || !std::isfinite(a) || !std::isfinite(b) || (b - a) / step < 0)
      throw UsageError("--" + flag + ": empty or unbounded range '" + text + "'");
    const auto n = static_cast<long>(std::floor((b - a) / step + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(a + static_cast<double>(i) * step);
    return out;
  }
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');) out.push_back(number(p));
  if (out.empty()) throw UsageError("--" + flag + ": empty list");
  return out;
}

template <typename T>
std::vector<T> parse_int_list(const std::string& text, const std::string& flag) {
  std::vector<T> out;
  for (double v : parse_list(text, flag)) {
    if (v != std::floor(v) || !std::isfinite(v))
      throw UsageError("--" + flag + ": '" + std::to_string(v) + "' is not an integer");
    out.push_back(static_cast<T>(v));
  }
  return out;
}

// Options that shape the enhancer configuration, shared by every subcommand.
struct ConfigFlags {
  std::string config_file;
  std::optional<double> fs;
  std::optional<std::string> window;
  std::optional<std::size_t> frame_size, product_half, hop;
  std::optional<double> epsilon, alpha, eta;
  std::optional<std::string> beta;
  std::optional<std::string> mask, coefficients, localizer;
  std::optional<std::size_t> sliding_window, tdoa_index;
  std::optional<int> inference_iterations;
  std::optional<std::uint64_t> seed;

  void add(CLI::App* app, bool mask_flags = true) {
    app->add_option("--config", config_file, "JSON configuration file (flags override it)")
        ->check(CLI::ExistingFile);
    app->add_option("--fs", fs, "sample rate in Hz");
    app->add_option("--window", window, "symmetric | asymmetric")
        ->check(CLI::IsMember({"symmetric", "asymmetric"}));
    app->add_option("--frame-size", frame_size, "analysis frame N");
    app->add_option("--product-half", product_half, "asymmetric product half-size M");
    app->add_option("--hop", hop, "hop R");
    if (mask_flags) {
      app->add_option("--epsilon", epsilon, "binary window width, fraction of the TDOA grid");
      app->add_option("--alpha", alpha, "soft window width, fraction of the TDOA grid");
      app->add_option("--beta", beta, "soft shape exponent or inf");
      app->add_option("--eta", eta, "soft floor in [0, 1]");
    }
    app->add_option("--mask", mask, "binary | soft")->check(CLI::IsMember({"binary", "soft"}));
    app->add_option("--coefficients", coefficients, "all-ones (default) | inferred")
        ->check(CLI::IsMember({"all-ones", "all_ones", "inferred"}));
    app->add_option("--inference-iterations", inference_iterations,
                    "activation updates per frame for inferred coefficients");
    app->add_option("--localizer", localizer, "offline | accumulated | sliding")
        ->check(CLI::IsMember({"offline", "accumulated", "sliding"}));
    app->add_option("--sliding-window", sliding_window, "sliding localizer length in frames");
    app->add_option("--tdoa-index", tdoa_index, "pin the target to this TDOA grid index");
    app->add_option("--seed", seed, "random seed");
  }

  nlohmann::json build() const {
    nlohmann::json j = nlohmann::json::object();
    if (!config_file.empty()) {
      std::ifstream f(config_file);
      try {
        j = nlohmann::json::parse(f);
      } catch (const nlohmann::json::exception& e) {
        throw UsageError("--config: " + std::string(e.what()));
      }
    }
    if (fs) j["sample_rate"] = *fs;
    if (window || frame_size || product_half || hop) {
      auto& w = j["window"];
      if (!w.is_object()) w = nlohmann::json::object();
      if (window) w["kind"] = *window;
      if (frame_size) w["frame_size"] = *frame_size;
      if (product_half) w["product_half"] = *product_half;
      if (hop) w["hop"] = *hop;
    }
    auto mask_obj = [&]() -> nlohmann::json& {
      if (!j["mask"].is_object()) j["mask"] = nlohmann::json::object();
      return j["mask"];
    };
    if (epsilon) mask_obj()["epsilon"] = *epsilon;
    if (alpha) mask_obj()["alpha"] = *alpha;
    if (eta) mask_obj()["eta"] = *eta;
    if (beta) {
      if (*beta == "inf") mask_obj()["beta"] = "inf";
      else mask_obj()["beta"] = parse_list(*beta, "beta").at(0);
    }
    if (mask) mask_obj()["mode"] = *mask;
    if (coefficients) mask_obj()["coefficients"] = *coefficients;
    if (inference_iterations) j["inference_iterations"] = *inference_iterations;
    if (localizer || sliding_window) {
      auto& l = j["localizer"];
      if (!l.is_object()) l = nlohmann::json::object();
      if (localizer) l["mode"] = *localizer;
      if (sliding_window) l["window"] = *sliding_window;
    }
    if (tdoa_index) j["tdoa_override"] = *tdoa_index;
    if (seed) j["seed"] = *seed;
    return j;
  }
};

void print_kl(int iteration, double kl, void*) {
  std::printf("iter %4d  kl %.9g\n", iteration, kl);
  std::fflush(stdout);
}

int cmd_train(const std::string& speech, const std::string& noise, std::size_t atoms,
              int iterations, std::size_t frames, std::uint64_t seed, const std::string& method,
              const std::string& out, const ConfigFlags& flags) {
  gcn_train_options o{};
  o.speech_dir = speech.c_str();
  o.noise_dir = noise.c_str();
  o.atoms = atoms;
  o.iterations = iterations;
  o.frames = frames;
  o.seed = seed;
  o.copy_to_train = method == "copy";
  const std::string config = flags.build().dump();
  DictHandle d;
  check(gcn_dictionary_train(&o, config.c_str(), method == "copy" ? nullptr : print_kl, nullptr,
                             &d.p));
  check(gcn_dictionary_save(d.p, out.c_str()));
  gcn_dictionary_info info{};
  check(gcn_dictionary_info_get(d.p, &info));
  std::printf("wrote %s: %zu atoms x %zu bins (%s, seed %llu)\n", out.c_str(), info.atoms,
              info.bins, info.method, static_cast<unsigned long long>(info.seed));
  return 0;
}

int cmd_enhance(const std::string& in, const std::string& out, const std::string& dict_path,
                const std::string& reference, bool pcm16, const ConfigFlags& flags) {
  DictHandle d;
  check(gcn_dictionary_load(dict_path.c_str(), &d.p));
  const std::string config = flags.build().dump();
  gcn_enhance_report r{};
  check(gcn_enhance_file(config.c_str(), d.p, in.c_str(), out.c_str(), pcm16 ? 1 : 0, &r));
  std::printf("frames %zu, target tdoa index %zu (%.3f us)\n", r.frames, r.target_index,
              r.target_tdoa_s * 1e6);
  std::printf("latency: overlap-add %.3f ms, total %.3f ms, stream delay %zu samples\n",
              r.ola_latency_ms, r.total_latency_ms, r.output_delay);
  std::printf("mean frame time %.1f us (%s)\n", r.mean_frame_us,
              r.realtime_ok ? "real-time" : "slower than real-time");
  if (!reference.empty()) {
    double before = 0.0, after = 0.0;
    check(gcn_snr_files(reference.c_str(), in.c_str(), 0, &before));
    check(gcn_snr_files(reference.c_str(), out.c_str(), 0, &after));
    std::printf("snr: input %.2f dB, output %.2f dB, improvement %.2f dB\n", before, after,
                after - before);
  }
  return 0;
}

std::atomic<bool> g_stop{false};

int cmd_serve(const std::string& host, std::uint16_t port, const std::string& dict_path,
              const std::string& source, bool no_realtime, bool stream_audio, double duration,
              std::size_t queue, const ConfigFlags& flags) {
  DictHandle d;
  check(gcn_dictionary_load(dict_path.c_str(), &d.p));
  const std::string config = flags.build().dump();
  gcn_server_options o{};
  o.host = host.c_str();
  o.port = port;
  o.source_wav = source.c_str();
  o.realtime = no_realtime ? 0 : 1;
  o.stream_audio = stream_audio ? 1 : 0;
  o.queue_capacity = queue;
  gcn_server* server = nullptr;
  check(gcn_server_start(config.c_str(), d.p, &o, &server));
  std::printf("listening on ws://%s:%u\n", host.c_str(), gcn_server_port(server));
  std::fflush(stdout);
  std::signal(SIGINT, [](int) { g_stop = true; });
  std::signal(SIGTERM, [](int) { g_stop = true; });
  const auto start = std::chrono::steady_clock::now();
  while (!g_stop) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    if (duration > 0 &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() >= duration)
      break;
  }
  gcn_server_stats s{};
  gcn_server_stats_get(server, &s);
  gcn_server_stop(server);
  std::printf("frames %llu, telemetry sent %llu, dropped %llu\n",
              static_cast<unsigned long long>(s.frames),
              static_cast<unsigned long long>(s.telemetry_published),
              static_cast<unsigned long long>(s.telemetry_dropped));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-channel GCC-NMF speech enhancement"};
  app.require_subcommand(1);
  app.set_version_flag("--version", gcn_version());

  // train
  auto* train = app.add_subcommand("train", "learn a dictionary from speech and noise WAVs");
  std::string speech_dir, noise_dir, train_out, method = "nmf";
  std::size_t atoms = 1024, frames = 2048;
  int iterations = 100;
  std::uint64_t train_seed = 0;
  train->add_option("--speech-dir", speech_dir, "directory of speech WAVs")->required();
  train->add_option("--noise-dir", noise_dir, "directory of noise WAVs")->required();
  train->add_option("-D,--atoms", atoms, "dictionary size")->capture_default_str();
  train->add_option("--iterations", iterations, "NMF update rounds")->capture_default_str();
  train->add_option("--frames", frames, "training frames, half speech half noise")
      ->capture_default_str();
  train->add_option("--train-seed", train_seed, "sampling and initialization seed");
  train->add_option("--method", method, "nmf | copy")
      ->check(CLI::IsMember({"nmf", "copy"}))
      ->capture_default_str();
  train->add_option("-o,--out", train_out, "dictionary file to write")->required();
  ConfigFlags train_flags;
  train_flags.add(train, false);

  // enhance
  auto* enhance = app.add_subcommand("enhance", "enhance a stereo WAV file");
  std::string in_wav, out_wav, dict_path, reference;
  bool pcm16 = false;
  enhance->add_option("input", in_wav, "stereo input WAV")->required();
  enhance->add_option("output", out_wav, "output WAV")->required();
  enhance->add_option("-d,--dict", dict_path, "dictionary file")->required();
  enhance->add_option("--reference", reference, "clean stereo reference for SNR reporting");
  enhance->add_flag("--pcm16", pcm16, "write 16-bit PCM instead of float32");
  ConfigFlags enhance_flags;
  enhance_flags.add(enhance);

  // serve
  auto* serve = app.add_subcommand("serve", "run the live control/telemetry service");
  std::string host = "127.0.0.1", serve_dict, source;
  std::uint16_t port = 8765;
  bool no_realtime = false, stream_audio = false;
  double duration = 0.0;
  std::size_t queue = 16;
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("-d,--dict", serve_dict, "dictionary file")->required();
  serve->add_option("--source", source, "stereo WAV played in a loop")->required();
  serve->add_flag("--no-realtime", no_realtime, "process as fast as possible");
  serve->add_flag("--stream-audio", stream_audio, "broadcast enhanced audio frames");
  serve->add_option("--duration", duration, "stop after this many seconds (0: run until signal)");
  serve->add_option("--queue", queue, "per-subscriber telemetry queue length")->capture_default_str();
  ConfigFlags serve_flags;
  serve_flags.add(serve);

  // eval
  auto* eval = app.add_subcommand("eval", "parameter sweep on the synthetic scenario");
  std::string snr_s, eps_s, alpha_s, beta_s, eta_s, sizes_s, tframes_s, titers_s, iiters_s;
  std::string eval_out, export_dir;
  double seconds = 10.0;
  std::uint64_t scenario_seed = 1;
  std::size_t jobs = 1, eval_atoms = 128;
  bool localize = false;
  eval->add_option("--snr", snr_s, "input SNRs in dB, start:stop:step or a,b,c");
  eval->add_option("--epsilon", eps_s, "epsilon values");
  eval->add_option("--alpha", alpha_s, "alpha values");
  eval->add_option("--beta", beta_s, "beta values (inf allowed)");
  eval->add_option("--eta", eta_s, "eta values");
  eval->add_option("--dict-sizes", sizes_s, "dictionary sizes");
  eval->add_option("--train-frames", tframes_s, "training frame counts");
  eval->add_option("--train-iterations", titers_s, "training iteration counts");
  eval->add_option("--inference", iiters_s, "inference iterations (-1: all-ones)");
  eval->add_option("--atoms", eval_atoms, "dictionary size when not swept")->capture_default_str();
  eval->add_option("--seconds", seconds, "scenario length")->capture_default_str();
  eval->add_option("--scenario-seed", scenario_seed)->capture_default_str();
  eval->add_option("--jobs", jobs, "parallel cells")->capture_default_str();
  eval->add_flag("--localize", localize, "use the configured localizer instead of the known target");
  eval->add_option("-o,--out", eval_out, "CSV file (default: stdout)");
  eval->add_option("--export-dir", export_dir, "write <cell-id>_{ref,est}.wav pairs here");
  ConfigFlags eval_flags;
  eval_flags.add(eval, false);

  // bench
  auto* bench = app.add_subcommand("bench", "per-frame processing time by dictionary size");
  std::string bench_sizes = "64,256,1024", bench_out;
  std::size_t trials = 200;
  std::uint64_t bench_seed = 7;
  bench->add_option("--dict-sizes", bench_sizes, "dictionary sizes")->capture_default_str();
  bench->add_option("--trials", trials, "timed frames per size (>= 100)")->capture_default_str();
  bench->add_option("--bench-seed", bench_seed)->capture_default_str();
  bench->add_option("-o,--out", bench_out, "CSV file (default: stdout)");
  ConfigFlags bench_flags;
  bench_flags.add(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*train)
      return cmd_train(speech_dir, noise_dir, atoms, iterations, frames, train_seed, method,
                       train_out, train_flags);
    if (*enhance) return cmd_enhance(in_wav, out_wav, dict_path, reference, pcm16, enhance_flags);
    if (*serve)
      return cmd_serve(host, port, serve_dict, source, no_realtime, stream_audio, duration,
                       queue, serve_flags);
    if (*eval) {
      nlohmann::json sweep;
      sweep["base"] = eval_flags.build();
      sweep["scenario"] = {{"seconds", seconds}, {"seed", scenario_seed},
                           {"atoms", eval_atoms}, {"pin_target", !localize}};
      nlohmann::json axes = nlohmann::json::object();
      auto put = [&](const std::string& s, const char* key, const char* flag) {
        if (!s.empty()) axes[key] = parse_list(s, flag);
      };
      put(snr_s, "snr_db", "snr");
      put(eps_s, "epsilon", "epsilon");
      put(alpha_s, "alpha", "alpha");
      put(eta_s, "eta", "eta");
      if (!beta_s.empty()) {
        nlohmann::json b = nlohmann::json::array();
        for (double v : parse_list(beta_s, "beta"))
          b.push_back(std::isinf(v) ? nlohmann::json("inf") : nlohmann::json(v));
        axes["beta"] = b;
      }
      if (!sizes_s.empty()) axes["atoms"] = parse_int_list<std::size_t>(sizes_s, "dict-sizes");
      if (!tframes_s.empty())
        axes["train_frames"] = parse_int_list<std::size_t>(tframes_s, "train-frames");
      if (!titers_s.empty())
        axes["train_iterations"] = parse_int_list<int>(titers_s, "train-iterations");
      if (!iiters_s.empty()) axes["inference_iterations"] = parse_int_list<int>(iiters_s, "inference");
      sweep["axes"] = axes;
      sweep["jobs"] = jobs;
      const std::string text = sweep.dump();
      std::string csv = eval_out;
      const bool to_stdout = csv.empty();
      if (to_stdout) csv = "/dev/stdout";
      std::size_t rows = 0;
      check(gcn_eval_sweep(text.c_str(), csv.c_str(), export_dir.empty() ? nullptr : export_dir.c_str(),
                           &rows));
      if (!to_stdout) std::printf("wrote %zu rows to %s\n", rows, csv.c_str());
      return 0;
    }
    if (*bench) {
      const auto sizes = parse_int_list<std::size_t>(bench_sizes, "dict-sizes");
      std::vector<gcn_bench_row> rows(sizes.size());
      const std::string config = bench_flags.build().dump();
      std::string csv = bench_out.empty() ? "/dev/stdout" : bench_out;
      check(gcn_bench(config.c_str(), sizes.data(), sizes.size(), trials, bench_seed, rows.data(),
                      csv.c_str()));
      if (!bench_out.empty())
        for (const auto& r : rows)
          std::printf("D=%zu mean %.1f us p95 %.1f us budget %.1f us %s\n", r.atoms, r.mean_us,
                      r.p95_us, r.hop_us, r.realtime_ok ? "real-time" : "too slow");
      return 0;
    }
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  }
  return kExitFailure;
}
