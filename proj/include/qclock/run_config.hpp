#pragma once

// Run configuration shared by every CLI subcommand. Stored as JSON:
//
// {
//   "model":    {"kind": "ising" | "xx", "kappa": 1.0, "t": 1.0},
//   "quench":   {"initial": 0.5, "final": 2.0},            // h (ising) or V (xx)
//   "coupling": {"epsilon0": 5.0, "g_obs": 1.0, "L": 100.0},
//   "ladder":   {"d": 20, "g": 0.01, "Gamma": null, "epsilon_w": null},
//   "clock":    {"source": "quench" | "ratio", "bias_ratio": 3.0, "gamma_sum": 1.0},
//   "scan":     [{"param": "quench.final", "min": 0.1, "max": 3.0, "steps": 30}],
//   "oracle":   {"L": 4096, "eta": 0.001, "kernel": "lorentzian",
//                "ladder": [[512, 0.01], [2048, 0.003], [4096, 0.001]]},
//   "mc":       {"n_trajectories": 0, "seed": 1, "histogram_bins": 0},
//   "output":   {"path": "", "format": "csv", "precision": 10},
//   "threads":  0
// }
//
// Every key is optional; missing keys keep the defaults shown. Unknown keys are errors.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qclock/clock_dynamics.hpp"
#include "qclock/lehmann_oracle.hpp"
#include "qclock/model_spectra.hpp"
#include "qclock/rates.hpp"

namespace qclock {

enum class ClockSource {
  Quench,  ///< rates from the configured quench
  Ratio,   ///< gamma_up / gamma_down = bias_ratio with gamma_up + gamma_down = gamma_sum
};

struct ModelConfig {
  ModelKind kind = ModelKind::IsingXY;
  double kappa = 1.0;
  double t = 1.0;
  bool operator==(const ModelConfig&) const = default;
};

struct QuenchConfig {
  double initial = 0.5;
  double final = 2.0;
  bool operator==(const QuenchConfig&) const = default;
};

struct LadderConfig {
  int d = 20;
  double g = 0.01;
  std::optional<double> Gamma;
  /// Must equal coupling.epsilon0 when set.
  std::optional<double> epsilon_w;
  bool operator==(const LadderConfig&) const = default;
};

struct ClockConfig {
  ClockSource source = ClockSource::Quench;
  double bias_ratio = 3.0;
  double gamma_sum = 1.0;
  bool operator==(const ClockConfig&) const = default;
};

struct ScanAxis {
  std::string param;
  double min = 0.0;
  double max = 0.0;
  int steps = 1;
  bool operator==(const ScanAxis&) const = default;

  double value(int i) const;
};

struct OracleConfig {
  int L = 4096;
  double eta = 1e-3;
  KernelShape kernel = KernelShape::Lorentzian;
  std::vector<std::pair<int, double>> ladder{{512, 1e-2}, {2048, 3e-3}, {4096, 1e-3}};
  bool operator==(const OracleConfig&) const = default;
};

struct McConfig {
  std::uint64_t n_trajectories = 0;
  std::uint64_t seed = 1;
  int histogram_bins = 0;
  bool operator==(const McConfig&) const = default;
};

enum class OutputFormat { Csv, Json };

struct OutputConfig {
  std::string path;  ///< empty or "-" writes to stdout
  OutputFormat format = OutputFormat::Csv;
  int precision = 10;
  bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
  ModelConfig model;
  QuenchConfig quench;
  QubitCoupling coupling{5.0, 1.0, 100.0};
  LadderConfig ladder;
  ClockConfig clock;
  std::vector<ScanAxis> scan;
  OracleConfig oracle;
  McConfig mc;
  OutputConfig output;
  unsigned threads = 0;  ///< 0: QCLOCK_THREADS, then 1

  bool operator==(const RunConfig&) const = default;

  QuenchSpec quench_spec() const;
  QubitCoupling coupling_spec() const { return coupling; }
  LadderSpec ladder_spec() const;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Names accepted by ScanAxis::param and set_parameter.
const std::vector<std::string>& scan_parameters();

RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::string& path);
std::string emit_config(const RunConfig& config);

/// Sets a scannable numeric parameter; throws ConfigError for unknown names or
/// non-integral values of integer parameters.
void set_parameter(RunConfig& config, std::string_view name, double value);

/// Applies "dotted.key=value" to the configuration. The value is read as JSON
/// when possible ("3", "null", "[1,2]") and as a bare string otherwise.
void apply_override(RunConfig& config, std::string_view assignment);

}  // namespace qclock
