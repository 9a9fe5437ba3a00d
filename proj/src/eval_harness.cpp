#include "hats/eval_harness.hpp"

#include <algorithm>
#include <exception>
#include <filesystem>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>
#include <thread>
#include <tuple>

#include "hats/json_io.hpp"
#include "hats/numerics.hpp"
#include "hats/prf_partition.hpp"

namespace hats::eval {

using nlohmann::json;

namespace {

std::uint64_t sample_seed(std::uint64_t harness_seed, std::size_t index) {
  return hash64(harness_seed + hash64(static_cast<std::uint64_t>(index)));
}

// Runs fn(i) for i in [0, n) across `workers` threads. Results land by index,
// so the outcome does not depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  auto guarded = [&](std::size_t i) {
    try {
      fn(i);
    } catch (const InputError& e) {
      throw InputError(e.field(), "sample " + std::to_string(i) + ": " + e.what());
    } catch (const IoError& e) {
      throw IoError("sample " + std::to_string(i) + ": " + e.what());
    } catch (const std::exception& e) {
      throw std::runtime_error("sample " + std::to_string(i) + ": " + e.what());
    }
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) guarded(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) guarded(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

PplSummary summarize(std::vector<double> values) {
  PplSummary s;
  if (values.empty()) return s;
  double total = 0.0;
  for (double v : values) total += v;
  s.mean = total / static_cast<double>(values.size());
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  s.median = values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
  return s;
}

std::vector<TokenId> concatenated_corpus(const EvalConfig& config) {
  std::vector<TokenId> all;
  for (const auto& path : config.corpus_paths) {
    auto tokens = load_corpus(path);
    all.insert(all.end(), tokens.begin(), tokens.end());
  }
  return all;
}

SampleResult score(std::size_t id, std::span<const TokenId> tokens, const PartitionParams& params) {
  const DetectionReport report = detect(tokens, params);
  SampleResult r;
  r.id = id;
  r.fisher_score = report.fisher_score;
  r.decision = report.decision;
  r.z_g = report.z_g;
  r.z_r = report.z_r;
  r.green_hits = report.green_hits;
  r.red_hits = report.red_hits;
  return r;
}

std::size_t count_flagged(const std::vector<SampleResult>& rows) {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const SampleResult& r) {
    return r.decision == Decision::kWatermarked;
  }));
}

DecodeMode decode_mode(const EvalConfig& config, std::size_t index) {
  if (config.temperature <= 0.0) return DecodeMode::greedy();
  return DecodeMode::sample(config.temperature, hash64(sample_seed(config.seed, index) ^ 0x5A17ULL));
}

}  // namespace

void EvalConfig::validate() const {
  params.validate();
  if (n_samples < 1) throw InputError("n_samples", "must be at least 1");
  if (tokens_per_sample < 25) throw InputError("tokens_per_sample", "must be at least 25");
  if (prompt_tokens < 1) throw InputError("prompt_tokens", "must be at least 1");
  if (temperature < 0.0 || !std::isfinite(temperature))
    throw InputError("temperature", "must be non-negative (0 selects greedy decoding)");
  if (mismatched_key_mode && !detect_key)
    throw InputError("detect_key", "mismatched_key_mode requires an explicit detect_key");
  if (detect_key && *detect_key != params.key && !mismatched_key_mode)
    throw InputError("detect_key", "differs from the generation key; set mismatched_key_mode to allow it");
  if (mismatched_key_mode && *detect_key == params.key)
    throw InputError("detect_key", "mismatched_key_mode requires a key different from params.key");
}

PartitionParams EvalConfig::detection_params() const {
  PartitionParams p = params;
  if (detect_key) p.key = *detect_key;
  return p;
}

EvalConfig config_from_json(const json& doc) {
  EvalConfig c;
  try {
    if (doc.contains("params")) c.params = params_from_json(doc.at("params"));
    c.n_samples = doc.value("n_samples", c.n_samples);
    c.tokens_per_sample = doc.value("tokens_per_sample", c.tokens_per_sample);
    c.prompt_tokens = doc.value("prompt_tokens", c.prompt_tokens);
    c.corpus_paths = doc.value("corpus_paths", c.corpus_paths);
    const auto source = doc.value("clean_source", std::string("corpus"));
    if (source == "corpus") c.clean_source = CleanSource::kCorpus;
    else if (source == "uniform") c.clean_source = CleanSource::kUniform;
    else throw InputError("clean_source", "must be \"corpus\" or \"uniform\"");
    c.seed = doc.value("seed", c.seed);
    c.mismatched_key_mode = doc.value("mismatched_key_mode", false);
    if (doc.contains("detect_key") && !doc.at("detect_key").is_null())
      c.detect_key = doc.at("detect_key").get<std::uint64_t>();
    c.temperature = doc.value("temperature", c.temperature);
    c.workers = doc.value("workers", c.workers);
  } catch (const json::exception& e) {
    throw InputError("config", e.what());
  }
  return c;
}

json to_json(const EvalConfig& c) {
  return json{{"n_samples", c.n_samples},
              {"tokens_per_sample", c.tokens_per_sample},
              {"prompt_tokens", c.prompt_tokens},
              {"params", hats::to_json(c.params)},
              {"corpus_paths", c.corpus_paths},
              {"clean_source", c.clean_source == CleanSource::kCorpus ? "corpus" : "uniform"},
              {"seed", c.seed},
              {"mismatched_key_mode", c.mismatched_key_mode},
              {"detect_key", c.detect_key ? json(*c.detect_key) : json(nullptr)},
              {"temperature", c.temperature}};
}

json to_json(const EvalReport& r) {
  json rows = json::array();
  for (const auto& s : r.per_sample) {
    json row{{"id", s.id},
             {"fisher_score", s.fisher_score},
             {"decision", std::string(to_string(s.decision))},
             {"z_g", s.z_g},
             {"z_r", s.z_r ? json(*s.z_r) : json(nullptr)},
             {"S_G", s.green_hits},
             {"S_R", s.red_hits}};
    if (s.ppl_watermarked) row["ppl_watermarked"] = *s.ppl_watermarked;
    if (s.ppl_plain) row["ppl_plain"] = *s.ppl_plain;
    rows.push_back(std::move(row));
  }
  auto summary = [](const std::optional<PplSummary>& s) {
    return s ? json{{"mean", s->mean}, {"median", s->median}} : json(nullptr);
  };
  json doc{{"kind", r.kind},
           {"tpr", r.tpr ? json(*r.tpr) : json(nullptr)},
           {"fpr", r.fpr ? json(*r.fpr) : json(nullptr)},
           {"flagged", r.flagged},
           {"n_samples", r.per_sample.size()},
           {"threshold", r.threshold},
           {"ppl_watermarked", summary(r.ppl_watermarked)},
           {"ppl_plain", summary(r.ppl_plain)},
           {"per_sample", std::move(rows)},
           {"config", to_json(r.config)}};
  if (r.ppl_watermarked && r.ppl_plain) doc["ppl_delta_mean"] = r.ppl_watermarked->mean - r.ppl_plain->mean;
  return doc;
}

std::vector<TokenId> load_corpus(const std::string& path) {
  if (!std::filesystem::exists(path)) throw InputError("corpus_paths", "no such file: " + path);
  if (std::filesystem::path(path).extension() == ".jsonl") {
    std::vector<TokenId> all;
    for (const auto& line : read_json_lines(path)) {
      auto tokens = tokens_from_json_line(line);
      all.insert(all.end(), tokens.begin(), tokens.end());
    }
    return all;
  }
  return bytes_to_tokens(read_file(path));
}

std::vector<GenerationRecord> generate_samples(const EvalConfig& config, const LogitsSource& source) {
  config.validate();
  const std::vector<TokenId> corpus = concatenated_corpus(config);
  if (!corpus.empty() && corpus.size() < config.prompt_tokens)
    throw InputError("corpus_paths", "corpus has " + std::to_string(corpus.size()) +
                                         " tokens, fewer than prompt_tokens = " +
                                         std::to_string(config.prompt_tokens));
  for (TokenId t : corpus) {
    if (t >= config.params.vocab_size) throw InputError("corpus_paths", "corpus token outside vocabulary");
  }

  std::vector<GenerationRecord> records(config.n_samples);
  parallel_for(config.n_samples, config.workers, [&](std::size_t i) {
    std::mt19937_64 rng(sample_seed(config.seed, i));
    TokenStream prompt{{}, config.params.vocab_size};
    if (corpus.empty()) {
      for (std::size_t j = 0; j < config.prompt_tokens; ++j)
        prompt.tokens.push_back(static_cast<TokenId>(rng() % config.params.vocab_size));
    } else {
      const std::size_t offset = rng() % (corpus.size() - config.prompt_tokens + 1);
      prompt.tokens.assign(corpus.begin() + static_cast<std::ptrdiff_t>(offset),
                           corpus.begin() + static_cast<std::ptrdiff_t>(offset + config.prompt_tokens));
    }
    records[i] = generate(prompt, config.tokens_per_sample, source, config.params, decode_mode(config, i));
  });
  return records;
}

std::vector<std::vector<TokenId>> clean_streams(const EvalConfig& config) {
  config.validate();
  const std::size_t L = config.tokens_per_sample;
  std::vector<std::vector<TokenId>> streams;
  streams.reserve(config.n_samples);

  if (config.clean_source == CleanSource::kUniform) {
    streams.resize(config.n_samples);
    for (std::size_t i = 0; i < config.n_samples; ++i) {
      std::mt19937_64 rng(sample_seed(config.seed, i));
      streams[i].resize(L);
      for (auto& t : streams[i]) t = static_cast<TokenId>(rng() % config.params.vocab_size);
    }
    return streams;
  }

  if (config.corpus_paths.empty()) throw InputError("corpus_paths", "clean corpus required for FPR runs");
  std::vector<std::vector<TokenId>> files;
  std::size_t available = 0;
  for (const auto& path : config.corpus_paths) {
    files.push_back(load_corpus(path));
    for (TokenId t : files.back()) {
      if (t >= config.params.vocab_size) throw InputError("corpus_paths", path + " has a token outside vocabulary");
    }
    available += files.back().size() / L;
  }
  if (available < config.n_samples)
    throw InputError("corpus_paths", "corpus yields " + std::to_string(available) + " chunks of " +
                                         std::to_string(L) + " tokens; n_samples needs " +
                                         std::to_string(config.n_samples) + " (short by " +
                                         std::to_string(config.n_samples - available) + ")");

  // Round-robin across files so multi-corpus runs mix sources.
  std::vector<std::size_t> cursor(files.size(), 0);
  while (streams.size() < config.n_samples) {
    for (std::size_t f = 0; f < files.size() && streams.size() < config.n_samples; ++f) {
      if (cursor[f] + L > files[f].size()) continue;
      const auto begin = files[f].begin() + static_cast<std::ptrdiff_t>(cursor[f]);
      streams.emplace_back(begin, begin + static_cast<std::ptrdiff_t>(L));
      cursor[f] += L;
    }
  }
  return streams;
}

EvalReport run_tpr(const EvalConfig& config, const LogitsSource& source) {
  const auto records = generate_samples(config, source);
  const PartitionParams detect_params = config.detection_params();

  EvalReport report;
  report.kind = "tpr";
  report.config = config;
  report.per_sample.resize(records.size());
  parallel_for(records.size(), config.workers, [&](std::size_t i) {
    const auto& rec = records[i];
    SampleResult row = score(i, rec.completion.tokens, detect_params);
    const auto full = rec.full_stream();
    row.ppl_watermarked = perplexity(full, source, rec.prompt.size()).value;

    auto plain = rec.prompt.tokens;
    const auto plain_completion =
        generate_unwatermarked(rec.prompt, config.tokens_per_sample, source, decode_mode(config, i));
    plain.insert(plain.end(), plain_completion.begin(), plain_completion.end());
    row.ppl_plain = perplexity(plain, source, rec.prompt.size()).value;
    report.per_sample[i] = row;
  });

  report.flagged = count_flagged(report.per_sample);
  report.tpr = static_cast<double>(report.flagged) / static_cast<double>(report.per_sample.size());
  report.threshold = numerics::chi2_4_quantile(1.0 - detect_params.alpha);

  std::vector<double> wm, plain;
  for (const auto& row : report.per_sample) {
    wm.push_back(*row.ppl_watermarked);
    plain.push_back(*row.ppl_plain);
  }
  report.ppl_watermarked = summarize(std::move(wm));
  report.ppl_plain = summarize(std::move(plain));
  return report;
}

EvalReport run_fpr(const EvalConfig& config) {
  const auto streams = clean_streams(config);
  const PartitionParams detect_params = config.detection_params();

  EvalReport report;
  report.kind = "fpr";
  report.config = config;
  report.per_sample.resize(streams.size());
  parallel_for(streams.size(), config.workers,
               [&](std::size_t i) { report.per_sample[i] = score(i, streams[i], detect_params); });
  report.flagged = count_flagged(report.per_sample);
  report.fpr = static_cast<double>(report.flagged) / static_cast<double>(report.per_sample.size());
  report.threshold = numerics::chi2_4_quantile(1.0 - detect_params.alpha);
  return report;
}

std::size_t SweepGrid::cell_count() const noexcept {
  return deltas.size() * gamma_gs.size() * gamma_rs.size() * lambda_fs.size() * alphas.size() * lengths.size();
}

SweepGrid grid_from_json(const json& doc) {
  SweepGrid g;
  try {
    g.deltas = doc.value("delta", g.deltas);
    g.gamma_gs = doc.value("gamma_g", g.gamma_gs);
    g.gamma_rs = doc.value("gamma_r", g.gamma_rs);
    g.lambda_fs = doc.value("lambda_f", g.lambda_fs);
    g.alphas = doc.value("alpha", g.alphas);
    g.lengths = doc.value("tokens", g.lengths);
    g.max_cells = doc.value("max_cells", g.max_cells);
  } catch (const json::exception& e) {
    throw InputError("grid", e.what());
  }
  return g;
}

std::vector<SweepRow> sweep(const EvalConfig& base, const SweepGrid& grid, const LogitsSource& source) {
  const std::size_t cells = grid.cell_count();
  if (cells == 0) throw InputError("grid", "every axis needs at least one value");
  if (cells > grid.max_cells)
    throw InputError("grid", std::to_string(cells) + " cells exceed the budget of " +
                                 std::to_string(grid.max_cells));

  std::map<std::size_t, std::vector<std::vector<TokenId>>> clean_by_length;
  std::vector<SweepRow> rows;
  rows.reserve(cells);

  for (double delta : grid.deltas) {
    for (double gamma_g : grid.gamma_gs) {
      for (double gamma_r : grid.gamma_rs) {
        for (std::size_t length : grid.lengths) {
          EvalConfig cfg = base;
          cfg.params.delta = delta;
          cfg.params.gamma_g = gamma_g;
          cfg.params.gamma_r = gamma_r;
          cfg.params.gamma_y = 1.0 - gamma_g - gamma_r;
          cfg.tokens_per_sample = length;

          std::string setup_error;
          std::vector<GenerationRecord> generations;
          try {
            cfg.params.validate();
            generations = generate_samples(cfg, source);
            if (!clean_by_length.contains(length)) clean_by_length[length] = clean_streams(cfg);
          } catch (const InputError& e) {
            setup_error = e.what();
          }

          for (double lambda_f : grid.lambda_fs) {
            for (double alpha : grid.alphas) {
              SweepRow row;
              row.delta = delta;
              row.gamma_g = gamma_g;
              row.gamma_y = cfg.params.gamma_y;
              row.gamma_r = gamma_r;
              row.lambda_f = lambda_f;
              row.alpha = alpha;
              row.length = length;
              row.n_samples = cfg.n_samples;
              if (!setup_error.empty()) {
                row.note = setup_error;
              } else if (gamma_r == 0.0 && lambda_f < 1.0) {
                row.note = "gamma_r = 0 leaves z_r undefined";
              } else {
                PartitionParams detect_params = cfg.detection_params();
                detect_params.lambda_f = lambda_f;
                detect_params.alpha = alpha;
                std::size_t hits = 0;
                for (const auto& g : generations)
                  hits += detect(g.completion.tokens, detect_params).decision == Decision::kWatermarked;
                std::size_t false_hits = 0;
                const auto& clean = clean_by_length.at(length);
                for (const auto& s : clean)
                  false_hits += detect(s, detect_params).decision == Decision::kWatermarked;
                row.valid = true;
                row.tpr = static_cast<double>(hits) / static_cast<double>(generations.size());
                row.fpr = static_cast<double>(false_hits) / static_cast<double>(clean.size());
              }
              rows.push_back(std::move(row));
            }
          }
        }
      }
    }
  }
  return rows;
}

std::string to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << kSweepCsvHeader << '\n';
  out << std::setprecision(10);
  for (const auto& r : rows) {
    std::string note = r.note;
    std::replace(note.begin(), note.end(), ',', ';');
    std::replace(note.begin(), note.end(), '"', '\'');
    out << r.delta << ',' << r.gamma_g << ',' << r.gamma_y << ',' << r.gamma_r << ',' << r.lambda_f << ','
        << r.alpha << ',' << r.length << ',' << r.n_samples << ',' << (r.valid ? "ok" : "invalid") << ',';
    if (r.valid) out << r.tpr << ',' << r.fpr;
    else out << ',';
    out << ',' << note << '\n';
  }
  return out.str();
}

}  // namespace hats::eval
