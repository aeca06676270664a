#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qclock {

/// Failure categories shared by all modules. Scan drivers turn these into row flags.
enum class Errc {
  GaplessMode,
  OutOfBand,
  VanHoveSingularity,
  DegenerateRoot,
  NoResonance,
  ConditionUndefined,
  BadBroadening,
  TooLarge,
  ZeroRates,
  ZeroDownRate,
  UnstableStep,
  NotReachable,
  PassiveState,
  InvalidArgument,
  ConfigError,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace qclock
