#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <nlohmann/json.hpp>
#include <string>

#include "hats/logits_source.hpp"

namespace hats {

UniformSource::UniformSource(std::uint32_t vocab_size) : vocab_size_(vocab_size) {
  if (vocab_size < 2) throw InputError("vocab_size", "must be at least 2");
}

std::vector<double> UniformSource::next_logits(std::span<const TokenId>) const {
  return std::vector<double>(vocab_size_, -std::log(static_cast<double>(vocab_size_)));
}

ToyMarkovModel::ToyMarkovModel(std::uint32_t order, std::uint32_t vocab_size)
    : order_(order), vocab_size_(vocab_size) {
  if (vocab_size < 2) throw InputError("vocab_size", "must be at least 2");
  if (order < 1) throw InputError("order", "must be at least 1");
  const auto bits = static_cast<std::uint32_t>(std::bit_width(vocab_size - 1));
  if (bits * order > 64) throw InputError("order", "context does not fit a 64-bit key");
}

ToyMarkovModel::Row& ToyMarkovModel::row_for(std::span<const TokenId> gram) {
  Row& row = rows_[pack(gram)];
  if (row.counts.empty()) row.counts.assign(vocab_size_, 0);
  return row;
}

std::uint64_t ToyMarkovModel::pack(std::span<const TokenId> gram) const {
  std::uint64_t key = 0;
  for (TokenId t : gram) key = key * vocab_size_ + t;
  return key;
}

std::vector<TokenId> ToyMarkovModel::unpack(std::uint64_t key) const {
  std::vector<TokenId> gram(order_);
  for (std::uint32_t i = order_; i-- > 0;) {
    gram[i] = static_cast<TokenId>(key % vocab_size_);
    key /= vocab_size_;
  }
  return gram;
}

void ToyMarkovModel::train(std::span<const TokenId> tokens) {
  for (TokenId t : tokens) {
    if (t >= vocab_size_) throw InputError("tokens", "id " + std::to_string(t) + " outside vocabulary");
  }
  for (std::size_t i = order_; i < tokens.size(); ++i) {
    Row& row = row_for(tokens.subspan(i - order_, order_));
    ++row.counts[tokens[i]];
    ++row.total;
  }
}

std::vector<double> ToyMarkovModel::next_logits(std::span<const TokenId> context) const {
  const Row* row = nullptr;
  if (context.size() >= order_) {
    auto gram = context.last(order_);
    if (std::all_of(gram.begin(), gram.end(), [&](TokenId t) { return t < vocab_size_; })) {
      auto it = rows_.find(pack(gram));
      if (it != rows_.end()) row = &it->second;
    }
  }
  const double total = row ? static_cast<double>(row->total) : 0.0;
  const double log_denominator = std::log(total + vocab_size_);
  std::vector<double> logits(vocab_size_);
  for (std::uint32_t k = 0; k < vocab_size_; ++k) {
    const double count = row ? row->counts[k] : 0.0;
    logits[k] = std::log(count + 1.0) - log_denominator;
  }
  return logits;
}

std::string ToyMarkovModel::to_json() const {
  // Sorted by key so the serialized form is deterministic.
  std::map<std::uint64_t, const Row*> ordered;
  for (const auto& [key, row] : rows_) ordered.emplace(key, &row);

  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [key, row] : ordered) {
    nlohmann::json counts = nlohmann::json::array();
    for (std::uint32_t k = 0; k < vocab_size_; ++k) {
      if (row->counts[k] != 0) counts.push_back({k, row->counts[k]});
    }
    rows.push_back({{"context", unpack(key)}, {"counts", std::move(counts)}});
  }
  nlohmann::json doc = {{"order", order_}, {"vocab_size", vocab_size_}, {"rows", std::move(rows)}};
  return doc.dump();
}

ToyMarkovModel ToyMarkovModel::from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
    ToyMarkovModel model(doc.at("order").get<std::uint32_t>(), doc.at("vocab_size").get<std::uint32_t>());
    for (const auto& entry : doc.at("rows")) {
      const auto gram = entry.at("context").get<std::vector<TokenId>>();
      if (gram.size() != model.order_) throw InputError("context", "length differs from model order");
      for (TokenId t : gram) {
        if (t >= model.vocab_size_) throw InputError("context", "token id outside vocabulary");
      }
      Row& row = model.row_for(gram);
      if (row.total != 0) throw InputError("context", "duplicate row");
      for (const auto& pair : entry.at("counts")) {
        const auto k = pair.at(0).get<std::uint32_t>();
        const auto n = pair.at(1).get<std::uint32_t>();
        if (k >= model.vocab_size_) throw InputError("counts", "token id outside vocabulary");
        row.counts[k] = n;
        row.total += n;
      }
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed model file: ") + e.what());
  }
}

std::vector<TokenId> bytes_to_tokens(std::string_view text) {
  std::vector<TokenId> out(text.size());
  std::transform(text.begin(), text.end(), out.begin(),
                 [](char c) { return static_cast<TokenId>(static_cast<unsigned char>(c)); });
  return out;
}

std::string tokens_to_bytes(std::span<const TokenId> tokens) {
  std::string out;
  out.reserve(tokens.size());
  for (TokenId t : tokens) {
    if (t > 255) throw InputError("tokens", "id " + std::to_string(t) + " is not a byte");
    out.push_back(static_cast<char>(static_cast<unsigned char>(t)));
  }
  return out;
}

}  // namespace hats
