#include "hats/processor.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "hats/c_api.h"
#include "hats/prf_partition.hpp"

namespace hats {

WatermarkProcessor::WatermarkProcessor(const PartitionParams& params) : params_(params) { params_.validate(); }

TriPartition WatermarkProcessor::partition_for(std::span<const TokenId> context) const {
  const auto window = context.size() > params_.window_h ? context.last(params_.window_h) : context;
  return tri_partition(seed_from_context(window, params_.key, params_.vocab_size), params_);
}

BiasedLogits WatermarkProcessor::bias(std::span<const TokenId> context, std::span<const double> logits) const {
  if (logits.size() != params_.vocab_size)
    throw InputError("logits", "length " + std::to_string(logits.size()) + " differs from vocab_size " +
                                   std::to_string(params_.vocab_size));
  return bias_logits(logits, partition_for(context), params_.delta);
}

DetectionReport WatermarkProcessor::detect(std::span<const TokenId> tokens) const {
  return hats::detect(tokens, params_);
}

}  // namespace hats

struct hats_engine {
  hats::WatermarkProcessor processor;
};

namespace {

void write_error(char* err, std::size_t err_len, const char* message) {
  if (err == nullptr || err_len == 0) return;
  std::strncpy(err, message, err_len - 1);
  err[err_len - 1] = '\0';
}

template <typename Fn>
int guarded(char* err, std::size_t err_len, Fn&& fn) {
  try {
    fn();
    return HATS_OK;
  } catch (const hats::InputError& e) {
    write_error(err, err_len, e.what());
    return HATS_INPUT_ERROR;
  } catch (const std::exception& e) {
    write_error(err, err_len, e.what());
    return HATS_INTERNAL_ERROR;
  } catch (...) {
    write_error(err, err_len, "unknown error");
    return HATS_INTERNAL_ERROR;
  }
}

hats::PartitionParams from_c(const hats_params& p) {
  return hats::PartitionParams{p.gamma_g, p.gamma_y, p.gamma_r, p.delta,     p.window_h,
                               p.key,     p.lambda_f, p.alpha,  p.vocab_size};
}

void require(const void* ptr, std::size_t n, const char* field) {
  if (ptr == nullptr && n != 0) throw hats::InputError(field, "null buffer with non-zero length");
}

}  // namespace

extern "C" {

void hats_default_params(hats_params* out) {
  if (out == nullptr) return;
  const hats::PartitionParams d;
  *out = hats_params{d.gamma_g, d.gamma_y, d.gamma_r, d.delta, d.window_h, d.key, d.lambda_f, d.alpha, d.vocab_size};
}

int hats_configure(const hats_params* params, hats_engine** out, char* err, size_t err_len) {
  return guarded(err, err_len, [&] {
    if (params == nullptr || out == nullptr) throw hats::InputError("params", "null pointer");
    *out = new hats_engine{hats::WatermarkProcessor(from_c(*params))};
  });
}

void hats_free(hats_engine* engine) { delete engine; }

int hats_bias(const hats_engine* engine, const uint32_t* context, size_t n_context, const double* logits,
              size_t n_logits, double* logits_out, uint8_t* mask_out, char* err, size_t err_len) {
  return guarded(err, err_len, [&] {
    if (engine == nullptr) throw hats::InputError("handle", "engine is not configured");
    require(context, n_context, "context");
    require(logits, n_logits, "logits");
    require(logits_out, n_logits, "logits_out");
    require(mask_out, n_logits, "mask_out");
    const auto biased = engine->processor.bias({context, n_context}, {logits, n_logits});
    std::copy(biased.values.begin(), biased.values.end(), logits_out);
    std::copy(biased.masked.begin(), biased.masked.end(), mask_out);
  });
}

int hats_partition(const hats_engine* engine, const uint32_t* context, size_t n_context, uint8_t* labels_out,
                   size_t n_labels, char* err, size_t err_len) {
  return guarded(err, err_len, [&] {
    if (engine == nullptr) throw hats::InputError("handle", "engine is not configured");
    require(context, n_context, "context");
    require(labels_out, n_labels, "labels_out");
    if (n_labels != engine->processor.params().vocab_size)
      throw hats::InputError("labels_out", "length differs from vocab_size");
    const auto partition = engine->processor.partition_for({context, n_context});
    for (std::size_t k = 0; k < n_labels; ++k) labels_out[k] = static_cast<uint8_t>(partition[k]);
  });
}

int hats_detect(const hats_engine* engine, const uint32_t* tokens, size_t n_tokens, hats_report* out, char* err,
                size_t err_len) {
  return guarded(err, err_len, [&] {
    if (engine == nullptr) throw hats::InputError("handle", "engine is not configured");
    if (out == nullptr) throw hats::InputError("report", "null output pointer");
    require(tokens, n_tokens, "tokens");
    const auto r = engine->processor.detect({tokens, n_tokens});
    *out = hats_report{r.length,
                       r.green_hits,
                       r.red_hits,
                       r.p_hat_g,
                       r.p_hat_r,
                       r.z_g,
                       r.z_r.value_or(std::numeric_limits<double>::quiet_NaN()),
                       r.z_r.has_value() ? 1 : 0,
                       r.p_g,
                       r.p_r,
                       r.fisher_score,
                       r.threshold,
                       r.decision == hats::Decision::kWatermarked ? 1 : 0,
                       r.low_confidence ? 1 : 0};
  });
}

}  // extern "C"
