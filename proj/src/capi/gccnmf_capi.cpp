#include "gccnmf/gccnmf.h"

#include <cmath>
#include <cstring>
#include <deque>
#include <fstream>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "common/error.hpp"
#include "eval/harness.hpp"
#include "io/dictionary_file.hpp"
#include "io/wav.hpp"
#include "pipeline/enhancer.hpp"
#include "pipeline/offline.hpp"
#include "pipeline/training.hpp"
#include "service/server.hpp"

using namespace gccnmf;

struct gcn_dictionary {
  std::shared_ptr<const Dictionary> dict;
};

struct gcn_enhancer {
  std::unique_ptr<Enhancer<float>> engine;
  std::deque<std::string> acks;
  std::int64_t next_auto_id = 1;
};

struct gcn_server {
  std::unique_ptr<Service> service;
};

namespace {

thread_local std::string g_last_error;

gcn_status set_error(gcn_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename F>
gcn_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return GCN_OK;
  } catch (const Error& e) {
    return set_error(static_cast<gcn_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(GCN_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(GCN_ERR_INTERNAL, e.what());
  }
}

EnhancerConfig parse_config(const char* json) {
  if (json == nullptr || *json == '\0') {
    EnhancerConfig c;
    c.validate();
    return c;
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kInvalidParameter, std::string("config is not valid JSON: ") + e.what());
  }
  return enhancer_config_from_json(j);
}

void need(const void* p, const char* what) {
  require(p != nullptr, ErrorCode::kInvalidParameter, std::string(what) + " is NULL");
}

double number_or_inf(const nlohmann::json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    require(s == "inf" || s == "infinity", ErrorCode::kInvalidParameter,
            "expected a number or \"inf\"");
    return MaskParams::kInfinity;
  }
  return v.get<double>();
}

template <typename T>
std::vector<T> axis_values(const nlohmann::json& axes, const char* name) {
  std::vector<T> out;
  if (!axes.contains(name)) return out;
  for (const auto& v : axes[name]) {
    if constexpr (std::is_floating_point_v<T>)
      out.push_back(number_or_inf(v));
    else
      out.push_back(v.get<T>());
  }
  return out;
}

SweepOptions parse_sweep(const char* text) {
  SweepOptions o;
  nlohmann::json j;
  try {
    j = text && *text ? nlohmann::json::parse(text) : nlohmann::json::object();
    if (j.contains("base")) o.base = enhancer_config_from_json(j["base"]);
    if (j.contains("scenario")) {
      const auto& s = j["scenario"];
      auto& sc = o.scenario;
      sc.seconds = s.value("seconds", sc.seconds);
      sc.snr_db = s.value("snr_db", sc.snr_db);
      sc.target_tdoa = s.value("target_tdoa", sc.target_tdoa);
      sc.noise_tdoa_fraction = s.value("noise_tdoa_fraction", sc.noise_tdoa_fraction);
      sc.seed = s.value("seed", sc.seed);
      sc.train_seconds = s.value("train_seconds", sc.train_seconds);
      sc.atoms = s.value("atoms", sc.atoms);
      sc.train_frames = s.value("train_frames", sc.train_frames);
      sc.train_iterations = s.value("train_iterations", sc.train_iterations);
      sc.pin_target = s.value("pin_target", sc.pin_target);
      const auto method = s.value("method", std::string("nmf"));
      require(method == "nmf" || method == "copy", ErrorCode::kInvalidParameter,
              "scenario method must be nmf or copy");
      sc.method = method == "copy" ? TrainMethod::kCopy : TrainMethod::kNmf;
    }
    if (j.contains("axes")) {
      const auto& a = j["axes"];
      for (const auto& [key, value] : a.items()) {
        static const char* kKnown[] = {"atoms", "train_frames", "train_iterations",
                                       "inference_iterations", "epsilon", "alpha", "beta",
                                       "eta", "snr_db"};
        require(std::find_if(std::begin(kKnown), std::end(kKnown),
                             [&](const char* k) { return key == k; }) != std::end(kKnown),
                ErrorCode::kInvalidParameter, "unknown sweep axis '" + key + "'");
        require(value.is_array(), ErrorCode::kInvalidParameter,
                "sweep axis '" + key + "' must be an array");
      }
      o.axes.atoms = axis_values<std::size_t>(a, "atoms");
      o.axes.train_frames = axis_values<std::size_t>(a, "train_frames");
      o.axes.train_iterations = axis_values<int>(a, "train_iterations");
      o.axes.inference_iterations = axis_values<int>(a, "inference_iterations");
      o.axes.epsilon = axis_values<double>(a, "epsilon");
      o.axes.alpha = axis_values<double>(a, "alpha");
      o.axes.beta = axis_values<double>(a, "beta");
      o.axes.eta = axis_values<double>(a, "eta");
      o.axes.snr_db = axis_values<double>(a, "snr_db");
    }
    o.jobs = j.value("jobs", std::size_t{1});
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kInvalidParameter, std::string("bad sweep description: ") + e.what());
  }
  return o;
}

void copy_string(char* dst, std::size_t cap, const std::string& s) {
  const std::size_t n = std::min(cap - 1, s.size());
  std::memcpy(dst, s.data(), n);
  dst[n] = '\0';
}

}  // namespace

extern "C" {

const char* gcn_version(void) { return "0.1.0"; }

const char* gcn_status_string(gcn_status status) {
  switch (status) {
    case GCN_OK: return "ok";
    case GCN_ERR_INVALID_PARAMETER: return "invalid parameter";
    case GCN_ERR_INVALID_INPUT: return "invalid input";
    case GCN_ERR_IO: return "i/o error";
    case GCN_ERR_MALFORMED_HEADER: return "malformed header";
    case GCN_ERR_UNSUPPORTED_CODEC: return "unsupported codec";
    case GCN_ERR_TRUNCATED: return "truncated data";
    case GCN_ERR_VERSION_MISMATCH: return "version mismatch";
    case GCN_ERR_CORRUPTED: return "corrupted data";
    case GCN_ERR_INVARIANT_VIOLATION: return "invariant violation";
    case GCN_ERR_CONFIG_MISMATCH: return "configuration mismatch";
    case GCN_ERR_EMPTY_INPUT: return "empty input";
    case GCN_ERR_BUFFER_TOO_SMALL: return "buffer too small";
    case GCN_ERR_PORT_BUSY: return "port busy";
    case GCN_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* gcn_last_error(void) { return g_last_error.c_str(); }

gcn_status gcn_dictionary_load(const char* path, gcn_dictionary** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new gcn_dictionary{std::make_shared<const Dictionary>(load_dictionary(path))};
  });
}

gcn_status gcn_dictionary_save(const gcn_dictionary* dict, const char* path) {
  return guarded([&] {
    need(dict, "dict");
    need(path, "path");
    save_dictionary(path, *dict->dict);
  });
}

gcn_status gcn_dictionary_info_get(const gcn_dictionary* dict, gcn_dictionary_info* out) {
  return guarded([&] {
    need(dict, "dict");
    need(out, "out");
    const Dictionary& d = *dict->dict;
    *out = {};
    out->bins = d.bins();
    out->atoms = d.size();
    out->sample_rate = d.layout.sample_rate;
    out->frame_size = d.layout.frame_size;
    out->seed = d.provenance.seed;
    out->iterations = d.provenance.iterations;
    out->train_frames = d.provenance.train_frames;
    copy_string(out->method, sizeof out->method, d.provenance.method);
    copy_string(out->window_kind, sizeof out->window_kind, to_string(d.layout.window_kind));
  });
}

gcn_status gcn_dictionary_train(const gcn_train_options* options, const char* config_json,
                                gcn_progress_fn progress, void* user, gcn_dictionary** out) {
  return guarded([&] {
    need(options, "options");
    need(options->speech_dir, "speech_dir");
    need(options->noise_dir, "noise_dir");
    need(out, "out");
    TrainOptions t;
    t.speech_dir = options->speech_dir;
    t.noise_dir = options->noise_dir;
    t.atoms = options->atoms ? options->atoms : 1024;
    t.iterations = options->iterations ? options->iterations : 100;
    t.frames = options->frames ? options->frames : 2048;
    t.seed = options->seed;
    t.copy = options->copy_to_train != 0;
    ProgressFn fn;
    if (progress) fn = [&](int it, double kl) { progress(it, kl, user); };
    *out = new gcn_dictionary{std::make_shared<const Dictionary>(
        train_from_directories(t, parse_config(config_json), fn))};
  });
}

void gcn_dictionary_free(gcn_dictionary* dict) { delete dict; }

gcn_status gcn_enhancer_create(const char* config_json, const gcn_dictionary* dict,
                               gcn_enhancer** out) {
  return guarded([&] {
    need(dict, "dict");
    need(out, "out");
    auto e = std::make_unique<gcn_enhancer>();
    e->engine = std::make_unique<Enhancer<float>>(parse_config(config_json), dict->dict);
    *out = e.release();
  });
}

void gcn_enhancer_free(gcn_enhancer* enhancer) { delete enhancer; }

size_t gcn_enhancer_hop(const gcn_enhancer* enhancer) {
  return enhancer ? enhancer->engine->hop() : 0;
}

size_t gcn_enhancer_output_delay(const gcn_enhancer* enhancer) {
  return enhancer ? enhancer->engine->output_delay() : 0;
}

gcn_status gcn_enhancer_latency(const gcn_enhancer* enhancer, double* ola_ms, double* total_ms) {
  return guarded([&] {
    need(enhancer, "enhancer");
    const Latency l = enhancer->engine->latency();
    if (ola_ms) *ola_ms = l.ola_ms;
    if (total_ms) *total_ms = l.total_ms;
  });
}

gcn_status gcn_enhancer_process(gcn_enhancer* enhancer, const float* in_left,
                                const float* in_right, float* out_left, float* out_right,
                                size_t count) {
  return guarded([&] {
    need(enhancer, "enhancer");
    need(in_left, "in_left");
    need(in_right, "in_right");
    need(out_left, "out_left");
    need(out_right, "out_right");
    enhancer->engine->process({in_left, count}, {in_right, count}, {out_left, count},
                              {out_right, count});
    for (auto& ack : enhancer->engine->take_acks()) enhancer->acks.push_back(ack.to_json());
  });
}

gcn_status gcn_enhancer_post_control(gcn_enhancer* enhancer, const char* json) {
  return guarded([&] {
    need(enhancer, "enhancer");
    need(json, "json");
    std::optional<std::int64_t> msg_id;
    try {
      ControlMessage msg = parse_control(json, &msg_id);
      if (msg.kind == ControlKind::kSetDictionary) {
        const auto& p = msg.payload;
        require(p.contains("path") && p["path"].is_string(), ErrorCode::kInvalidInput,
                "set_dictionary needs a string path");
        msg.dictionary = std::make_shared<const Dictionary>(
            load_dictionary(p["path"].get<std::string>()));
      }
      enhancer->engine->post(std::move(msg));
    } catch (const Error& e) {
      enhancer->acks.push_back(ControlAck{0, msg_id.value_or(-1), false, e.what(), 0}.to_json());
      throw;
    }
  });
}

gcn_status gcn_enhancer_poll_ack(gcn_enhancer* enhancer, char* buf, size_t capacity,
                                 size_t* written) {
  return guarded([&] {
    need(enhancer, "enhancer");
    need(written, "written");
    for (auto& ack : enhancer->engine->take_acks()) enhancer->acks.push_back(ack.to_json());
    *written = 0;
    if (enhancer->acks.empty()) return;
    const std::string& front = enhancer->acks.front();
    if (buf == nullptr || capacity < front.size() + 1) {
      *written = front.size() + 1;
      fail(ErrorCode::kBufferTooSmall, "ack needs " + std::to_string(front.size() + 1) + " bytes");
    }
    std::memcpy(buf, front.c_str(), front.size() + 1);
    *written = front.size() + 1;
    enhancer->acks.pop_front();
  });
}

gcn_status gcn_enhancer_telemetry(const gcn_enhancer* enhancer, uint8_t* buf, size_t capacity,
                                  size_t* written) {
  return guarded([&] {
    need(enhancer, "enhancer");
    need(written, "written");
    const auto bytes = encode_telemetry(enhancer->engine->telemetry());
    *written = bytes.size();
    if (buf == nullptr || capacity < bytes.size())
      fail(ErrorCode::kBufferTooSmall, "telemetry needs " + std::to_string(bytes.size()) + " bytes");
    std::memcpy(buf, bytes.data(), bytes.size());
  });
}

gcn_status gcn_enhancer_target_index(const gcn_enhancer* enhancer, size_t* out) {
  return guarded([&] {
    need(enhancer, "enhancer");
    need(out, "out");
    *out = enhancer->engine->target_index();
  });
}

gcn_status gcn_enhance_file(const char* config_json, const gcn_dictionary* dict,
                            const char* in_path, const char* out_path, int pcm16,
                            gcn_enhance_report* report) {
  return guarded([&] {
    need(dict, "dict");
    need(in_path, "in_path");
    need(out_path, "out_path");
    EnhanceReport r;
    enhance_file(parse_config(config_json), dict->dict, in_path, out_path,
                 pcm16 ? WavFormat::kPcm16 : WavFormat::kFloat32, &r);
    if (report) {
      report->frames = r.frames;
      report->target_index = r.target_index;
      report->target_tdoa_s = r.target_tdoa_s;
      report->ola_latency_ms = r.latency.ola_ms;
      report->total_latency_ms = r.latency.total_ms;
      report->output_delay = r.output_delay;
      report->mean_frame_us = r.mean_frame_us;
      report->realtime_ok = r.realtime_ok ? 1 : 0;
    }
  });
}

gcn_status gcn_snr_files(const char* reference_path, const char* estimate_path, size_t skip,
                         double* snr) {
  return guarded([&] {
    need(reference_path, "reference_path");
    need(estimate_path, "estimate_path");
    need(snr, "snr_db");
    const AudioBuffer ref = read_wav(reference_path);
    const AudioBuffer est = read_wav(estimate_path);
    require(ref.channel_count() == 2 && est.channel_count() == 2, ErrorCode::kInvalidInput,
            "SNR needs two stereo files");
    require(ref.sample_rate == est.sample_rate, ErrorCode::kConfigMismatch,
            "reference and estimate sample rates differ");
    auto stereo = [](const AudioBuffer& b) {
      return Stereo<double>{std::vector<double>(b.channels[0].begin(), b.channels[0].end()),
                            std::vector<double>(b.channels[1].begin(), b.channels[1].end())};
    };
    *snr = snr_db(stereo(ref), stereo(est), skip);
  });
}

gcn_status gcn_eval_sweep(const char* sweep_json, const char* csv_path, const char* export_dir,
                          size_t* rows) {
  return guarded([&] {
    SweepOptions o = parse_sweep(sweep_json);
    if (export_dir) o.export_dir = std::filesystem::path(export_dir);
    const auto results = run_sweep(o);
    if (csv_path) {
      std::ofstream f(csv_path);
      require(f.good(), ErrorCode::kIo, std::string("cannot write ") + csv_path);
      write_sweep_csv(f, results);
      require(f.good(), ErrorCode::kIo, std::string("write failed: ") + csv_path);
    }
    if (rows) *rows = results.size();
  });
}

gcn_status gcn_bench(const char* config_json, const size_t* atom_counts, size_t count,
                     size_t trials, uint64_t seed, gcn_bench_row* rows, const char* csv_path) {
  return guarded([&] {
    need(atom_counts, "atom_counts");
    require(count > 0, ErrorCode::kInvalidParameter, "no dictionary sizes given");
    const EnhancerConfig config = parse_config(config_json);
    std::vector<BenchResult> results;
    for (size_t i = 0; i < count; ++i) {
      auto dict = std::make_shared<const Dictionary>(
          random_dictionary(config, atom_counts[i], seed + i));
      results.push_back(benchmark_frame_time(config, dict, trials, seed));
    }
    if (rows)
      for (size_t i = 0; i < count; ++i)
        rows[i] = {results[i].atoms, results[i].trials, results[i].mean_us,
                   results[i].p95_us, results[i].hop_us, results[i].realtime_ok ? 1 : 0};
    if (csv_path) {
      std::ofstream f(csv_path);
      require(f.good(), ErrorCode::kIo, std::string("cannot write ") + csv_path);
      write_bench_csv(f, results);
    }
  });
}

gcn_status gcn_server_start(const char* config_json, const gcn_dictionary* dict,
                            const gcn_server_options* options, gcn_server** out) {
  return guarded([&] {
    need(dict, "dict");
    need(options, "options");
    need(options->source_wav, "source_wav");
    need(out, "out");
    ServiceConfig c;
    c.enhancer = parse_config(config_json);
    if (options->host) c.host = options->host;
    c.port = options->port;
    c.source = read_wav(options->source_wav);
    c.realtime = options->realtime != 0;
    c.stream_audio = options->stream_audio != 0;
    if (options->queue_capacity) c.queue_capacity = options->queue_capacity;
    *out = new gcn_server{std::make_unique<Service>(std::move(c), dict->dict)};
  });
}

uint16_t gcn_server_port(const gcn_server* server) {
  return server ? server->service->port() : 0;
}

gcn_status gcn_server_stats_get(const gcn_server* server, gcn_server_stats* out) {
  return guarded([&] {
    need(server, "server");
    need(out, "out");
    const ServiceStats s = server->service->stats();
    out->frames = s.frames;
    out->telemetry_published = s.telemetry_published;
    out->telemetry_dropped = s.telemetry_dropped;
    out->connections = s.connections;
  });
}

void gcn_server_stop(gcn_server* server) {
  if (!server) return;
  server->service->stop();
  delete server;
}

}  // extern "C"
