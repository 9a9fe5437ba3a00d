/* Plain C entry points for foreign-function bindings. Arrays cross as
 * contiguous buffers with explicit lengths. Every call returns HATS_OK or an
 * error code and writes a NUL-terminated diagnostic into `err` when given. */
#ifndef HATS_C_API_H_
#define HATS_C_API_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

enum { HATS_OK = 0, HATS_INPUT_ERROR = 1, HATS_INTERNAL_ERROR = 2 };

typedef struct hats_params {
  double gamma_g;
  double gamma_y;
  double gamma_r;
  double delta;
  uint32_t window_h;
  uint64_t key;
  double lambda_f;
  double alpha;
  uint32_t vocab_size;
} hats_params;

typedef struct hats_report {
  uint64_t length;
  uint64_t green_hits;
  uint64_t red_hits;
  double p_hat_g;
  double p_hat_r;
  double z_g;
  double z_r; /* NaN when gamma_r = 0 */
  int has_z_r;
  double p_g;
  double p_r;
  double fisher_score;
  double threshold;
  int watermarked;
  int low_confidence;
} hats_report;

typedef struct hats_engine hats_engine;

/* Fills `out` with the default parameters. */
void hats_default_params(hats_params* out);

int hats_configure(const hats_params* params, hats_engine** out, char* err, size_t err_len);
void hats_free(hats_engine* engine);

/* logits_out and mask_out must hold n_logits entries; n_logits must equal vocab_size.
 * mask_out[k] = 1 marks a Red (forbidden) entry, whose logit is -inf. */
int hats_bias(const hats_engine* engine, const uint32_t* context, size_t n_context, const double* logits,
              size_t n_logits, double* logits_out, uint8_t* mask_out, char* err, size_t err_len);

/* Labels 0 = GREEN, 1 = YELLOW, 2 = RED for every vocabulary entry. */
int hats_partition(const hats_engine* engine, const uint32_t* context, size_t n_context, uint8_t* labels_out,
                   size_t n_labels, char* err, size_t err_len);

int hats_detect(const hats_engine* engine, const uint32_t* tokens, size_t n_tokens, hats_report* out, char* err,
                size_t err_len);

#ifdef __cplusplus
}
#endif

#endif /* HATS_C_API_H_ */
