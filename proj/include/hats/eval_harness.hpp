#pragma once

// Monte Carlo evaluation: TPR on watermarked generations, FPR on clean text,
// perplexity of watermarked vs. plain decoding, and parameter sweeps.
//
// Every random choice flows from EvalConfig::seed through per-sample
// sub-seeds, so reports are identical for any worker count.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hats/decode_engine.hpp"
#include "hats/detector.hpp"
#include "hats/logits_source.hpp"
#include "hats/params.hpp"

namespace hats::eval {

enum class CleanSource { kCorpus, kUniform };

struct EvalConfig {
  std::size_t n_samples = 200;
  std::size_t tokens_per_sample = 250;
  std::size_t prompt_tokens = 16;
  PartitionParams params;
  /// Plain-text or JSON-lines token files. TPR draws prompts from them; FPR
  /// chunks them into clean streams.
  std::vector<std::string> corpus_paths;
  CleanSource clean_source = CleanSource::kCorpus;
  /// Harness RNG seed, independent of the watermark key.
  std::uint64_t seed = 0;
  /// Negative control: detect with a different key. Requires the explicit flag.
  bool mismatched_key_mode = false;
  std::optional<std::uint64_t> detect_key;
  double temperature = 0.0;  ///< 0 = greedy decoding
  unsigned workers = 1;

  void validate() const;
  PartitionParams detection_params() const;
};

EvalConfig config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const EvalConfig& config);

struct SampleResult {
  std::size_t id = 0;
  double fisher_score = 0.0;
  Decision decision = Decision::kClean;
  double z_g = 0.0;
  std::optional<double> z_r;
  std::uint64_t green_hits = 0;
  std::uint64_t red_hits = 0;
  std::optional<double> ppl_watermarked;
  std::optional<double> ppl_plain;
};

struct PplSummary {
  double mean = 0.0;
  double median = 0.0;
};

struct EvalReport {
  std::string kind;  ///< "tpr" or "fpr"
  std::optional<double> tpr;
  std::optional<double> fpr;
  std::size_t flagged = 0;
  double threshold = 0.0;
  std::vector<SampleResult> per_sample;
  std::optional<PplSummary> ppl_watermarked;
  std::optional<PplSummary> ppl_plain;
  EvalConfig config;
};

nlohmann::json to_json(const EvalReport& report);

/// Generates n_samples watermarked completions and reports the detected fraction.
/// Detection sees only the completion tokens.
EvalReport run_tpr(const EvalConfig& config, const LogitsSource& source);

/// Detects over clean streams (corpus chunks or i.i.d. uniform tokens).
EvalReport run_fpr(const EvalConfig& config);

/// Harness prompts and completions, reusable across detector settings.
std::vector<GenerationRecord> generate_samples(const EvalConfig& config, const LogitsSource& source);

/// Non-overlapping tokens_per_sample chunks, interleaved across corpus files,
/// or i.i.d. uniform streams. Throws InputError when the corpus is too short.
std::vector<std::vector<TokenId>> clean_streams(const EvalConfig& config);

/// Tokens of one corpus file: bytes for text, concatenated ids for .jsonl.
std::vector<TokenId> load_corpus(const std::string& path);

struct SweepGrid {
  std::vector<double> deltas{4.0};
  std::vector<double> gamma_gs{0.25};
  std::vector<double> gamma_rs{0.10};
  std::vector<double> lambda_fs{0.5};
  std::vector<double> alphas{0.01};
  std::vector<std::size_t> lengths{250};
  std::size_t max_cells = 512;

  std::size_t cell_count() const noexcept;
};

SweepGrid grid_from_json(const nlohmann::json& doc);

struct SweepRow {
  double delta = 0.0;
  double gamma_g = 0.0;
  double gamma_y = 0.0;
  double gamma_r = 0.0;
  double lambda_f = 0.0;
  double alpha = 0.0;
  std::size_t length = 0;
  std::size_t n_samples = 0;
  bool valid = false;
  std::string note;
  double tpr = 0.0;
  double fpr = 0.0;
};

/// Cartesian sweep; base supplies everything the grid does not vary. Cells
/// with gamma_r = 0 and lambda_f < 1, or ratios that fail validation, are
/// emitted with valid = false. Throws InputError above grid.max_cells.
std::vector<SweepRow> sweep(const EvalConfig& base, const SweepGrid& grid, const LogitsSource& source);

inline constexpr const char* kSweepCsvHeader =
    "delta,gamma_g,gamma_y,gamma_r,lambda_f,alpha,tokens,n_samples,status,tpr,fpr,note";

std::string to_csv(const std::vector<SweepRow>& rows);

}  // namespace hats::eval
