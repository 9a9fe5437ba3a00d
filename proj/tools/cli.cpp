#include "cli.hpp"

#include <CLI11.hpp>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hats/decode_engine.hpp"
#include "hats/detector.hpp"
#include "hats/eval_harness.hpp"
#include "hats/json_io.hpp"
#include "hats/logits_source.hpp"

namespace hats::cli {

namespace {

using nlohmann::json;

struct ParamFlags {
  std::string params_file;
  std::optional<std::uint64_t> key;
  std::optional<double> delta, gamma_g, gamma_y, gamma_r, alpha, lambda_f;
  std::optional<std::uint32_t> window, vocab_size;

  void attach(CLI::App& app) {
    app.add_option("--params", params_file, "JSON parameter file")->check(CLI::ExistingFile);
    app.add_option("--key", key, "watermark key (u64)");
    app.add_option("--delta", delta, "logit bias amplitude");
    app.add_option("--gamma-g", gamma_g, "Green ratio");
    app.add_option("--gamma-y", gamma_y, "Yellow ratio");
    app.add_option("--gamma-r", gamma_r, "Red ratio");
    app.add_option("--alpha", alpha, "detection level");
    app.add_option("--lambda-f", lambda_f, "Fisher weight on the Green p-value");
    app.add_option("--window", window, "context window h");
    app.add_option("--vocab-size", vocab_size, "vocabulary size");
  }

  PartitionParams resolve(PartitionParams base = {}) const {
    if (!params_file.empty()) {
      json doc;
      try {
        doc = json::parse(read_file(params_file));
      } catch (const json::parse_error& e) {
        throw IoError(params_file + ": " + e.what());
      }
      base = params_from_json(doc, base);
    }
    if (key) base.key = *key;
    if (delta) base.delta = *delta;
    if (gamma_g) base.gamma_g = *gamma_g;
    if (gamma_y) base.gamma_y = *gamma_y;
    if (gamma_r) base.gamma_r = *gamma_r;
    if (alpha) base.alpha = *alpha;
    if (lambda_f) base.lambda_f = *lambda_f;
    if (window) base.window_h = *window;
    if (vocab_size) base.vocab_size = *vocab_size;
    base.validate();
    return base;
  }
};

struct ModelFlags {
  std::string model_file;
  std::string corpus_file;
  std::uint32_t order = 2;

  void attach(CLI::App& app) {
    app.add_option("--model", model_file, "trained toy model (JSON from `train`)")->check(CLI::ExistingFile);
    app.add_option("--corpus", corpus_file, "train the toy model from this text file instead")
        ->check(CLI::ExistingFile);
    app.add_option("--order", order, "Markov order when training from --corpus");
  }

  ToyMarkovModel load(std::uint32_t vocab_size) const {
    if (!model_file.empty()) {
      auto model = ToyMarkovModel::from_json(read_file(model_file));
      if (model.vocab_size() != vocab_size)
        throw InputError("vocab_size", "model vocabulary " + std::to_string(model.vocab_size()) +
                                           " differs from params " + std::to_string(vocab_size));
      return model;
    }
    if (corpus_file.empty()) throw InputError("model", "either --model or --corpus is required");
    ToyMarkovModel model(order, vocab_size);
    model.train(bytes_to_tokens(read_file(corpus_file)));
    return model;
  }
};

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

std::string summary_line(const DetectionReport& r) {
  std::string line = std::string(to_string(r.decision)) + " fisher_score=" + fmt(r.fisher_score) +
                     " threshold=" + fmt(r.threshold) + " L=" + std::to_string(r.length) +
                     " S_G=" + std::to_string(r.green_hits) + " S_R=" + std::to_string(r.red_hits) +
                     " z_g=" + fmt(r.z_g) + " z_r=" + (r.z_r ? fmt(*r.z_r) : std::string("n/a"));
  if (r.low_confidence) line += " (low confidence: fewer than 25 tokens)";
  return line;
}

int cmd_train(const std::string& in, const std::string& out_path, std::uint32_t order, std::uint32_t vocab,
              std::ostream& out) {
  ToyMarkovModel model(order, vocab);
  const auto tokens = bytes_to_tokens(read_file(in));
  model.train(tokens);
  write_file(out_path, model.to_json());
  out << "trained order-" << order << " model on " << tokens.size() << " tokens (" << model.context_count()
      << " contexts) -> " << out_path << '\n';
  return 0;
}

std::vector<TokenStream> read_prompts(const std::string& path, const std::string& format, std::uint32_t vocab) {
  std::vector<TokenStream> prompts;
  if (format == "tokens-jsonl") {
    for (const auto& line : read_json_lines(path)) prompts.push_back({tokens_from_json_line(line), vocab});
  } else {
    std::istringstream in(read_file(path));
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) prompts.push_back({bytes_to_tokens(line), vocab});
    }
  }
  if (prompts.empty()) throw InputError("in", "no prompts found in " + path);
  return prompts;
}

int cmd_detect(const std::string& in, const std::string& format, const std::string& out_path,
               const PartitionParams& params, std::ostream& out) {
  if (format == "tokens-jsonl") {
    std::string lines;
    std::size_t index = 0;
    for (const auto& doc : read_json_lines(in)) {
      const auto report = detect(tokens_from_json_line(doc), params);
      out << "[" << index++ << "] " << summary_line(report) << '\n';
      lines += to_json(report).dump() + '\n';
    }
    if (index == 0) throw InputError("in", "no token streams in " + in);
    if (!out_path.empty()) write_file(out_path, lines);
    return 0;
  }
  const auto report = detect(bytes_to_tokens(read_file(in)), params);
  out << summary_line(report) << '\n';
  if (!out_path.empty()) write_file(out_path, to_json(report).dump(2) + '\n');
  return 0;
}

eval::EvalConfig load_eval_config(const std::string& path, const ParamFlags& flags, json* raw = nullptr) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw IoError(path + ": " + e.what());
  }
  auto config = eval::config_from_json(doc);
  config.params = flags.resolve(config.params);
  config.validate();
  if (raw) *raw = std::move(doc);
  return config;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tri-set (Green/Yellow/Red) token watermarking: train, generate, detect, evaluate"};
  app.require_subcommand(1);

  // train
  std::string train_in, train_out;
  std::uint32_t train_order = 2, train_vocab = 256;
  auto* train = app.add_subcommand("train", "train the byte-level toy Markov model");
  train->add_option("--in", train_in, "plain-text corpus")->required()->check(CLI::ExistingFile);
  train->add_option("--out", train_out, "model JSON output")->required();
  train->add_option("--order", train_order, "Markov order");

  // generate
  ParamFlags gen_flags;
  ModelFlags gen_model;
  std::string gen_in, gen_out, gen_format = "text";
  std::size_t gen_tokens = 200;
  double gen_temperature = 0.0;
  std::uint64_t gen_sample_seed = 0;
  auto* gen = app.add_subcommand("generate", "watermarked generation, one JSON line per prompt");
  gen_flags.attach(*gen);
  gen_model.attach(*gen);
  gen->add_option("--in", gen_in, "prompts: one per line (text) or token lines (tokens-jsonl)")
      ->required()
      ->check(CLI::ExistingFile);
  gen->add_option("--out", gen_out, "JSON-lines output")->required();
  gen->add_option("--format", gen_format, "prompt format")->check(CLI::IsMember({"text", "tokens-jsonl"}));
  gen->add_option("--n-tokens", gen_tokens, "completion length");
  gen->add_option("--temperature", gen_temperature, "sample at this temperature instead of greedy");
  gen->add_option("--sample-seed", gen_sample_seed, "RNG seed for sampling mode");

  // detect
  ParamFlags det_flags;
  std::string det_in, det_out, det_format = "text";
  auto* det = app.add_subcommand("detect", "detect the watermark in a text file or token streams");
  det_flags.attach(*det);
  det->add_option("--in", det_in, "input file")->required()->check(CLI::ExistingFile);
  det->add_option("--out", det_out, "report output (JSON, or JSON lines for tokens-jsonl)");
  det->add_option("--format", det_format, "input format")->check(CLI::IsMember({"text", "tokens-jsonl"}));

  // eval-tpr / eval-fpr / sweep
  ParamFlags tpr_flags, fpr_flags, sweep_flags;
  ModelFlags tpr_model, sweep_model;
  std::string tpr_config, tpr_out, fpr_config, fpr_out, sweep_config, sweep_out;
  auto* tpr = app.add_subcommand("eval-tpr", "true-positive rate on watermarked generations");
  tpr_flags.attach(*tpr);
  tpr_model.attach(*tpr);
  tpr->add_option("--config", tpr_config, "EvalConfig JSON")->required()->check(CLI::ExistingFile);
  tpr->add_option("--out", tpr_out, "EvalReport JSON output");
  auto* fpr = app.add_subcommand("eval-fpr", "false-positive rate on clean text");
  fpr_flags.attach(*fpr);
  fpr->add_option("--config", fpr_config, "EvalConfig JSON")->required()->check(CLI::ExistingFile);
  fpr->add_option("--out", fpr_out, "EvalReport JSON output");
  auto* sw = app.add_subcommand("sweep", "TPR/FPR over a parameter grid, CSV output");
  sweep_flags.attach(*sw);
  sweep_model.attach(*sw);
  sw->add_option("--config", sweep_config, "EvalConfig JSON with a \"grid\" object")
      ->required()
      ->check(CLI::ExistingFile);
  sw->add_option("--out", sweep_out, "CSV output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*train) return cmd_train(train_in, train_out, train_order, train_vocab, out);

    if (*gen) {
      const auto params = gen_flags.resolve();
      const auto model = gen_model.load(params.vocab_size);
      const auto mode = gen_temperature > 0.0 ? DecodeMode::sample(gen_temperature, gen_sample_seed)
                                              : DecodeMode::greedy();
      std::string lines;
      std::size_t green = 0, total = 0;
      for (const auto& prompt : read_prompts(gen_in, gen_format, params.vocab_size)) {
        const auto record = generate(prompt, gen_tokens, model, params, mode);
        for (Label l : record.labels) green += l == Label::kGreen;
        total += record.labels.size();
        lines += to_json(record).dump() + '\n';
      }
      write_file(gen_out, lines);
      out << "generated " << total << " tokens (" << green << " GREEN) -> " << gen_out << '\n';
      return 0;
    }

    if (*det) return cmd_detect(det_in, det_format, det_out, det_flags.resolve(), out);

    if (*tpr) {
      const auto config = load_eval_config(tpr_config, tpr_flags);
      const auto model = tpr_model.load(config.params.vocab_size);
      const auto report = eval::run_tpr(config, model);
      out << "TPR " << fmt(*report.tpr) << " (" << report.flagged << "/" << report.per_sample.size()
          << ") at alpha=" << config.params.alpha << "; ppl watermarked " << fmt(report.ppl_watermarked->mean)
          << " vs plain " << fmt(report.ppl_plain->mean) << '\n';
      if (!tpr_out.empty()) write_file(tpr_out, eval::to_json(report).dump(2) + '\n');
      return 0;
    }

    if (*fpr) {
      const auto config = load_eval_config(fpr_config, fpr_flags);
      const auto report = eval::run_fpr(config);
      out << "FPR " << fmt(*report.fpr) << " (" << report.flagged << "/" << report.per_sample.size()
          << ") at alpha=" << config.params.alpha << '\n';
      if (!fpr_out.empty()) write_file(fpr_out, eval::to_json(report).dump(2) + '\n');
      return 0;
    }

    if (*sw) {
      json raw;
      const auto config = load_eval_config(sweep_config, sweep_flags, &raw);
      const auto grid = eval::grid_from_json(raw.value("grid", json::object()));
      const auto model = sweep_model.load(config.params.vocab_size);
      const auto rows = eval::sweep(config, grid, model);
      write_file(sweep_out, eval::to_csv(rows));
      out << "sweep: " << rows.size() << " cells -> " << sweep_out << '\n';
      return 0;
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace hats::cli
