#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hats {

using TokenId = std::uint32_t;

/// Raised when caller-supplied data violates an operation's preconditions.
/// `field()` names the offending parameter or input when one is identifiable.
class InputError : public std::invalid_argument {
 public:
  InputError(std::string field, const std::string& what)
      : std::invalid_argument(field.empty() ? what : field + ": " + what),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// File-system and format failures (unreadable corpus, malformed JSON line).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Label : std::uint8_t { kGreen = 0, kYellow = 1, kRed = 2 };

std::string_view to_string(Label label) noexcept;

/// An ordered sequence of vocabulary indices and the vocabulary they index.
struct TokenStream {
  std::vector<TokenId> tokens;
  std::uint32_t vocab_size = 256;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }
};

}  // namespace hats
