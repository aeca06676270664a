#include "qclock/errors.hpp"

namespace qclock {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::GaplessMode: return "GaplessMode";
    case Errc::OutOfBand: return "OutOfBand";
    case Errc::VanHoveSingularity: return "VanHoveSingularity";
    case Errc::DegenerateRoot: return "DegenerateRoot";
    case Errc::NoResonance: return "NoResonance";
    case Errc::ConditionUndefined: return "ConditionUndefined";
    case Errc::BadBroadening: return "BadBroadening";
    case Errc::TooLarge: return "TooLarge";
    case Errc::ZeroRates: return "ZeroRates";
    case Errc::ZeroDownRate: return "ZeroDownRate";
    case Errc::UnstableStep: return "UnstableStep";
    case Errc::NotReachable: return "NotReachable";
    case Errc::PassiveState: return "PassiveState";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace qclock
