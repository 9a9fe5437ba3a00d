#include "hats/json_io.hpp"

#include <fstream>
#include <sstream>

namespace hats {

using nlohmann::json;

json to_json(const PartitionParams& p) {
  return json{{"gamma_g", p.gamma_g}, {"gamma_y", p.gamma_y},   {"gamma_r", p.gamma_r},
              {"delta", p.delta},     {"window_h", p.window_h}, {"key", p.key},
              {"lambda_f", p.lambda_f}, {"alpha", p.alpha},     {"vocab_size", p.vocab_size}};
}

namespace {

template <typename T>
void read_field(const json& doc, const char* name, T& out) {
  auto it = doc.find(name);
  if (it == doc.end()) return;
  try {
    if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) throw InputError(name, "must be an integer");
      if (it->is_number_integer() && !it->is_number_unsigned() && it->get<std::int64_t>() < 0)
        throw InputError(name, "must be non-negative");
    } else {
      if (!it->is_number()) throw InputError(name, "must be a number");
    }
    out = it->get<T>();
  } catch (const json::exception&) {
    throw InputError(name, "has the wrong type");
  }
}

}  // namespace

PartitionParams params_from_json(const json& doc, PartitionParams base) {
  if (!doc.is_object()) throw InputError("params", "must be a JSON object");
  static const char* const kKnown[] = {"gamma_g", "gamma_y", "gamma_r", "delta",     "window_h",
                                       "key",     "lambda_f", "alpha",  "vocab_size"};
  for (const auto& [key, value] : doc.items()) {
    if (std::find(std::begin(kKnown), std::end(kKnown), key) == std::end(kKnown))
      throw InputError(key, "unknown parameter");
  }
  read_field(doc, "gamma_g", base.gamma_g);
  read_field(doc, "gamma_y", base.gamma_y);
  read_field(doc, "gamma_r", base.gamma_r);
  read_field(doc, "delta", base.delta);
  read_field(doc, "window_h", base.window_h);
  read_field(doc, "key", base.key);
  read_field(doc, "lambda_f", base.lambda_f);
  read_field(doc, "alpha", base.alpha);
  read_field(doc, "vocab_size", base.vocab_size);
  return base;
}

json to_json(const DetectionReport& r) {
  return json{{"L", r.length},
              {"S_G", r.green_hits},
              {"S_R", r.red_hits},
              {"p_hat_g", r.p_hat_g},
              {"p_hat_r", r.p_hat_r},
              {"z_g", r.z_g},
              {"z_r", r.z_r ? json(*r.z_r) : json(nullptr)},
              {"p_g", r.p_g},
              {"p_r", r.p_r},
              {"fisher_score", r.fisher_score},
              {"threshold", r.threshold},
              {"decision", std::string(to_string(r.decision))},
              {"low_confidence", r.low_confidence},
              {"params", to_json(r.params)}};
}

DetectionReport report_from_json(const json& doc) {
  DetectionReport r;
  try {
    r.length = doc.at("L").get<std::uint64_t>();
    r.green_hits = doc.at("S_G").get<std::uint64_t>();
    r.red_hits = doc.at("S_R").get<std::uint64_t>();
    r.p_hat_g = doc.at("p_hat_g").get<double>();
    r.p_hat_r = doc.at("p_hat_r").get<double>();
    r.z_g = doc.at("z_g").get<double>();
    if (!doc.at("z_r").is_null()) r.z_r = doc.at("z_r").get<double>();
    r.p_g = doc.at("p_g").get<double>();
    r.p_r = doc.at("p_r").get<double>();
    r.fisher_score = doc.at("fisher_score").get<double>();
    r.threshold = doc.at("threshold").get<double>();
    r.decision = doc.at("decision").get<std::string>() == "WATERMARKED" ? Decision::kWatermarked
                                                                         : Decision::kClean;
    r.low_confidence = doc.at("low_confidence").get<bool>();
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed detection report: ") + e.what());
  }
  r.params = params_from_json(doc.at("params"));
  return r;
}

json to_json(const GenerationRecord& g) {
  std::vector<std::string> labels;
  labels.reserve(g.labels.size());
  for (Label l : g.labels) labels.emplace_back(to_string(l));
  return json{{"prompt_tokens", g.prompt.tokens},
              {"completion_tokens", g.completion.tokens},
              {"params", to_json(g.params)},
              {"per_step_labels", labels}};
}

GenerationRecord generation_from_json(const json& doc) {
  GenerationRecord g;
  try {
    g.params = params_from_json(doc.at("params"));
    g.prompt = TokenStream{doc.at("prompt_tokens").get<std::vector<TokenId>>(), g.params.vocab_size};
    g.completion = TokenStream{doc.at("completion_tokens").get<std::vector<TokenId>>(), g.params.vocab_size};
    for (const auto& name : doc.at("per_step_labels")) {
      const auto s = name.get<std::string>();
      if (s == "GREEN") g.labels.push_back(Label::kGreen);
      else if (s == "YELLOW") g.labels.push_back(Label::kYellow);
      else if (s == "RED") g.labels.push_back(Label::kRed);
      else throw InputError("per_step_labels", "unknown label '" + s + "'");
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed generation record: ") + e.what());
  }
  return g;
}

std::vector<TokenId> tokens_from_json_line(const json& doc) {
  try {
    if (doc.is_array()) return doc.get<std::vector<TokenId>>();
    if (doc.contains("tokens")) return doc.at("tokens").get<std::vector<TokenId>>();
    if (doc.contains("completion_tokens")) return doc.at("completion_tokens").get<std::vector<TokenId>>();
  } catch (const json::exception& e) {
    throw IoError(std::string("token line: ") + e.what());
  }
  throw IoError("token line must be an id array, {\"tokens\": [...]}, or a generation record");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << contents;
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<json> read_json_lines(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<json> out;
  std::string line;
  for (std::size_t number = 1; std::getline(in, line); ++number) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw IoError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace hats
