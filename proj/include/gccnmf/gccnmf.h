#ifndef GCCNMF_GCCNMF_H
#define GCCNMF_GCCNMF_H

/*
 * C interface to the two-channel GCC-NMF speech enhancer.
 *
 * Every function returns a gcn_status. On failure a description is available
 * from gcn_last_error() on the same thread until the next call. Objects are
 * opaque handles released with the matching *_free / *_stop function.
 *
 * Configuration is passed as JSON text (NULL selects the defaults):
 *
 *   {"sample_rate": 16000,
 *    "window": {"kind": "symmetric" | "asymmetric", "frame_size": 1024,
 *               "product_half": 16, "hop": 256},
 *    "mask": {"epsilon": 0.046875, "alpha": 0.1875, "beta": "inf", "eta": 0,
 *             "mode": "binary" | "soft", "coefficients": "all_ones" | "inferred"},
 *    "localizer": {"mode": "offline" | "accumulated" | "sliding", "window": 64},
 *    "grid": {"count": 128, "mic_spacing_m": 0.086, "speed_of_sound": 343,
 *             "margin": 1.25},
 *    "inference_iterations": 100, "tdoa_override": 63, "seed": 0}
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GCN_API __declspec(dllexport)
#else
#define GCN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gcn_status {
  GCN_OK = 0,
  GCN_ERR_INVALID_PARAMETER = 1,
  GCN_ERR_INVALID_INPUT = 2,
  GCN_ERR_IO = 3,
  GCN_ERR_MALFORMED_HEADER = 4,
  GCN_ERR_UNSUPPORTED_CODEC = 5,
  GCN_ERR_TRUNCATED = 6,
  GCN_ERR_VERSION_MISMATCH = 7,
  GCN_ERR_CORRUPTED = 8,
  GCN_ERR_INVARIANT_VIOLATION = 9,
  GCN_ERR_CONFIG_MISMATCH = 10,
  GCN_ERR_EMPTY_INPUT = 11,
  GCN_ERR_BUFFER_TOO_SMALL = 12,
  GCN_ERR_PORT_BUSY = 13,
  GCN_ERR_INTERNAL = 100
} gcn_status;

GCN_API const char* gcn_version(void);
GCN_API const char* gcn_status_string(gcn_status status);
GCN_API const char* gcn_last_error(void);

/* ---- dictionaries ---- */

typedef struct gcn_dictionary gcn_dictionary;

typedef struct gcn_dictionary_info {
  size_t bins;
  size_t atoms;
  double sample_rate;
  size_t frame_size;
  uint64_t seed;
  int iterations;
  size_t train_frames;
  char method[16];
  char window_kind[16];
} gcn_dictionary_info;

typedef struct gcn_train_options {
  const char* speech_dir;
  const char* noise_dir;
  size_t atoms;      /* 0 -> 1024 */
  int iterations;    /* 0 -> 100 */
  size_t frames;     /* 0 -> 2048 */
  uint64_t seed;
  int copy_to_train; /* nonzero: sample frames as atoms instead of NMF */
} gcn_train_options;

/* Called once per training round with the KL divergence after that round. */
typedef void (*gcn_progress_fn)(int iteration, double kl, void* user);

GCN_API gcn_status gcn_dictionary_load(const char* path, gcn_dictionary** out);
GCN_API gcn_status gcn_dictionary_save(const gcn_dictionary* dict, const char* path);
GCN_API gcn_status gcn_dictionary_info_get(const gcn_dictionary* dict, gcn_dictionary_info* out);
/* config_json supplies the sample rate and window the atoms are trained for. */
GCN_API gcn_status gcn_dictionary_train(const gcn_train_options* options,
                                        const char* config_json, gcn_progress_fn progress,
                                        void* user, gcn_dictionary** out);
GCN_API void gcn_dictionary_free(gcn_dictionary* dict);

/* ---- streaming enhancer ---- */

typedef struct gcn_enhancer gcn_enhancer;

GCN_API gcn_status gcn_enhancer_create(const char* config_json, const gcn_dictionary* dict,
                                       gcn_enhancer** out);
GCN_API void gcn_enhancer_free(gcn_enhancer* enhancer);
GCN_API size_t gcn_enhancer_hop(const gcn_enhancer* enhancer);
/* Samples between an input sample and its image in the output stream. */
GCN_API size_t gcn_enhancer_output_delay(const gcn_enhancer* enhancer);
GCN_API gcn_status gcn_enhancer_latency(const gcn_enhancer* enhancer, double* ola_ms,
                                        double* total_ms);
/* count must equal gcn_enhancer_hop(). */
GCN_API gcn_status gcn_enhancer_process(gcn_enhancer* enhancer, const float* in_left,
                                        const float* in_right, float* out_left,
                                        float* out_right, size_t count);
/* Queues a control message (JSON text); it is applied at the next frame.
 * A message that fails to parse returns an error and also queues its
 * rejected ack, so every message is acknowledged once. set_dictionary takes
 * {"path": "<dictionary file>"}. */
GCN_API gcn_status gcn_enhancer_post_control(gcn_enhancer* enhancer, const char* json);
/* Copies the oldest pending ack (JSON, NUL-terminated) into buf. *written is
 * 0 when nothing is pending. GCN_ERR_BUFFER_TOO_SMALL leaves the ack queued
 * and reports the needed size (including the NUL) in *written. */
GCN_API gcn_status gcn_enhancer_poll_ack(gcn_enhancer* enhancer, char* buf, size_t capacity,
                                         size_t* written);
/* Encodes the latest telemetry frame in the binary wire layout. */
GCN_API gcn_status gcn_enhancer_telemetry(const gcn_enhancer* enhancer, uint8_t* buf,
                                          size_t capacity, size_t* written);
GCN_API gcn_status gcn_enhancer_target_index(const gcn_enhancer* enhancer, size_t* out);

/* ---- file mode ---- */

typedef struct gcn_enhance_report {
  size_t frames;
  size_t target_index;
  double target_tdoa_s;
  double ola_latency_ms;
  double total_latency_ms;
  size_t output_delay;
  double mean_frame_us;
  int realtime_ok;
} gcn_enhance_report;

GCN_API gcn_status gcn_enhance_file(const char* config_json, const gcn_dictionary* dict,
                                    const char* in_path, const char* out_path, int pcm16,
                                    gcn_enhance_report* report);
/* Channel-pooled SNR of `estimate` against `reference` (equal-length stereo
 * WAVs), skipping the first `skip` samples. +inf when they match exactly. */
GCN_API gcn_status gcn_snr_files(const char* reference_path, const char* estimate_path,
                                 size_t skip, double* snr_db);

/* ---- evaluation ---- */

/* sweep_json: {"scenario": {...}, "base": <config>, "axes": {"epsilon": [...],
 * "snr_db": [...], ...}, "jobs": 1}. Writes the results CSV to csv_path and,
 * when export_dir is not NULL, <cell-id>_{ref,est}.wav pairs. */
GCN_API gcn_status gcn_eval_sweep(const char* sweep_json, const char* csv_path,
                                  const char* export_dir, size_t* rows);

typedef struct gcn_bench_row {
  size_t atoms;
  size_t trials;
  double mean_us;
  double p95_us;
  double hop_us;
  int realtime_ok;
} gcn_bench_row;

/* One row per dictionary size, random dictionaries; trials >= 100. */
GCN_API gcn_status gcn_bench(const char* config_json, const size_t* atom_counts, size_t count,
                             size_t trials, uint64_t seed, gcn_bench_row* rows,
                             const char* csv_path);

/* ---- live service ---- */

typedef struct gcn_server gcn_server;

typedef struct gcn_server_options {
  const char* host;        /* NULL -> 127.0.0.1 */
  uint16_t port;           /* 0 -> any free port */
  const char* source_wav;  /* stereo file, looped */
  int realtime;            /* pace at the audio rate */
  int stream_audio;        /* broadcast enhanced PCM frames */
  size_t queue_capacity;   /* per-subscriber telemetry queue, 0 -> 16 */
} gcn_server_options;

typedef struct gcn_server_stats {
  uint64_t frames;
  uint64_t telemetry_published;
  uint64_t telemetry_dropped;
  size_t connections;
} gcn_server_stats;

GCN_API gcn_status gcn_server_start(const char* config_json, const gcn_dictionary* dict,
                                    const gcn_server_options* options, gcn_server** out);
GCN_API uint16_t gcn_server_port(const gcn_server* server);
GCN_API gcn_status gcn_server_stats_get(const gcn_server* server, gcn_server_stats* out);
/* Stops the audio loop, closes connections and frees the handle. */
GCN_API void gcn_server_stop(gcn_server* server);

#ifdef __cplusplus
}
#endif

#endif /* GCCNMF_GCCNMF_H */
