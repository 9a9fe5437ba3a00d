#include "hats/params.hpp"

#include <cmath>

namespace hats {

std::string_view to_string(Label label) noexcept {
  switch (label) {
    case Label::kGreen:
      return "GREEN";
    case Label::kYellow:
      return "YELLOW";
    case Label::kRed:
      return "RED";
  }
  return "?";
}

namespace {

bool open_unit(double v) { return std::isfinite(v) && v > 0.0 && v < 1.0; }

}  // namespace

void PartitionParams::validate() const {
  if (!open_unit(gamma_g)) throw InputError("gamma_g", "must lie in (0,1)");
  if (!open_unit(gamma_y)) throw InputError("gamma_y", "must lie in (0,1)");
  if (!std::isfinite(gamma_r) || gamma_r < 0.0 || gamma_r >= 1.0)
    throw InputError("gamma_r", "must lie in [0,1)");
  if (std::abs(gamma_g + gamma_y + gamma_r - 1.0) > 1e-12)
    throw InputError("gamma_y", "gamma_g + gamma_y + gamma_r must equal 1");
  if (!(gamma_r < 1.0 - gamma_g))
    throw InputError("gamma_r", "must be smaller than 1 - gamma_g");
  if (!std::isfinite(delta) || delta <= 0.0) throw InputError("delta", "must be positive");
  if (window_h < 1) throw InputError("window_h", "must be at least 1");
  if (!std::isfinite(lambda_f) || lambda_f <= 0.0 || lambda_f > 1.0)
    throw InputError("lambda_f", "must lie in (0,1]");
  if (!open_unit(alpha)) throw InputError("alpha", "must lie in (0,1)");
  if (vocab_size < 2) throw InputError("vocab_size", "must be at least 2");
}

}  // namespace hats
