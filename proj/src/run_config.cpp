#include "qclock/run_config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "qclock/errors.hpp"

namespace qclock {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& field, const std::string& what) {
  throw Error(Errc::ConfigError, fmt::format("{}: {}", field, what));
}

void reject_unknown(const json& obj, const std::string& section,
                    std::initializer_list<std::string_view> known) {
  if (!obj.is_object()) config_error(section, "expected an object");
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (std::string_view k : known) ok = ok || item.key() == k;
    if (!ok) config_error(section.empty() ? item.key() : section + "." + item.key(), "unknown key");
  }
}

double get_number(const json& obj, const std::string& section, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) config_error(section + "." + key, "expected a number");
  return v.get<double>();
}

std::optional<double> get_optional(const json& obj, const std::string& section, const char* key,
                                   std::optional<double> fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (v.is_null()) return std::nullopt;
  if (!v.is_number()) config_error(section + "." + key, "expected a number or null");
  return v.get<double>();
}

long long get_integer(const json& obj, const std::string& section, const char* key, long long fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (std::floor(x) == x && std::abs(x) < 9e15) return static_cast<long long>(x);
  }
  config_error(section + "." + key, "expected an integer");
}

std::string get_string(const json& obj, const std::string& section, const char* key,
                       const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) config_error(section + "." + key, "expected a string");
  return v.get<std::string>();
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string kind_name(ModelKind k) { return k == ModelKind::IsingXY ? "ising" : "xx"; }

json to_json(const RunConfig& c) {
  json j;
  j["model"] = {{"kind", kind_name(c.model.kind)}, {"kappa", c.model.kappa}, {"t", c.model.t}};
  j["quench"] = {{"initial", c.quench.initial}, {"final", c.quench.final}};
  j["coupling"] = {{"epsilon0", c.coupling.epsilon0}, {"g_obs", c.coupling.g_obs}, {"L", c.coupling.L}};
  j["ladder"] = {{"d", c.ladder.d},
                 {"g", c.ladder.g},
                 {"Gamma", optional_json(c.ladder.Gamma)},
                 {"epsilon_w", optional_json(c.ladder.epsilon_w)}};
  j["clock"] = {{"source", c.clock.source == ClockSource::Quench ? "quench" : "ratio"},
                {"bias_ratio", c.clock.bias_ratio},
                {"gamma_sum", c.clock.gamma_sum}};
  j["scan"] = json::array();
  for (const ScanAxis& a : c.scan)
    j["scan"].push_back({{"param", a.param}, {"min", a.min}, {"max", a.max}, {"steps", a.steps}});
  json ladder = json::array();
  for (const auto& [L, eta] : c.oracle.ladder) ladder.push_back(json::array({L, eta}));
  j["oracle"] = {{"L", c.oracle.L},
                 {"eta", c.oracle.eta},
                 {"kernel", c.oracle.kernel == KernelShape::Lorentzian ? "lorentzian" : "gaussian"},
                 {"ladder", ladder}};
  j["mc"] = {{"n_trajectories", c.mc.n_trajectories},
             {"seed", c.mc.seed},
             {"histogram_bins", c.mc.histogram_bins}};
  j["output"] = {{"path", c.output.path},
                 {"format", c.output.format == OutputFormat::Csv ? "csv" : "json"},
                 {"precision", c.output.precision}};
  j["threads"] = c.threads;
  return j;
}

RunConfig from_json(const json& j) {
  RunConfig c;
  reject_unknown(j, "", {"model", "quench", "coupling", "ladder", "clock", "scan", "oracle", "mc",
                         "output", "threads"});

  if (j.contains("model")) {
    const json& m = j.at("model");
    reject_unknown(m, "model", {"kind", "kappa", "t"});
    const std::string kind = get_string(m, "model", "kind", kind_name(c.model.kind));
    if (kind == "ising")
      c.model.kind = ModelKind::IsingXY;
    else if (kind == "xx")
      c.model.kind = ModelKind::XXRing;
    else
      config_error("model.kind", "expected \"ising\" or \"xx\"");
    c.model.kappa = get_number(m, "model", "kappa", c.model.kappa);
    c.model.t = get_number(m, "model", "t", c.model.t);
  }
  if (j.contains("quench")) {
    const json& q = j.at("quench");
    reject_unknown(q, "quench", {"initial", "final"});
    c.quench.initial = get_number(q, "quench", "initial", c.quench.initial);
    c.quench.final = get_number(q, "quench", "final", c.quench.final);
  }
  if (j.contains("coupling")) {
    const json& q = j.at("coupling");
    reject_unknown(q, "coupling", {"epsilon0", "g_obs", "L"});
    c.coupling.epsilon0 = get_number(q, "coupling", "epsilon0", c.coupling.epsilon0);
    c.coupling.g_obs = get_number(q, "coupling", "g_obs", c.coupling.g_obs);
    c.coupling.L = get_number(q, "coupling", "L", c.coupling.L);
  }
  if (j.contains("ladder")) {
    const json& l = j.at("ladder");
    reject_unknown(l, "ladder", {"d", "g", "Gamma", "epsilon_w"});
    c.ladder.d = static_cast<int>(get_integer(l, "ladder", "d", c.ladder.d));
    c.ladder.g = get_number(l, "ladder", "g", c.ladder.g);
    c.ladder.Gamma = get_optional(l, "ladder", "Gamma", c.ladder.Gamma);
    c.ladder.epsilon_w = get_optional(l, "ladder", "epsilon_w", c.ladder.epsilon_w);
  }
  if (j.contains("clock")) {
    const json& k = j.at("clock");
    reject_unknown(k, "clock", {"source", "bias_ratio", "gamma_sum"});
    const std::string src = get_string(k, "clock", "source", "quench");
    if (src == "quench")
      c.clock.source = ClockSource::Quench;
    else if (src == "ratio")
      c.clock.source = ClockSource::Ratio;
    else
      config_error("clock.source", "expected \"quench\" or \"ratio\"");
    c.clock.bias_ratio = get_number(k, "clock", "bias_ratio", c.clock.bias_ratio);
    c.clock.gamma_sum = get_number(k, "clock", "gamma_sum", c.clock.gamma_sum);
  }
  if (j.contains("scan")) {
    const json& s = j.at("scan");
    if (!s.is_array()) config_error("scan", "expected an array of axes");
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::string sec = fmt::format("scan[{}]", i);
      reject_unknown(s[i], sec, {"param", "min", "max", "steps"});
      ScanAxis a;
      a.param = get_string(s[i], sec, "param", "");
      a.min = get_number(s[i], sec, "min", 0.0);
      a.max = get_number(s[i], sec, "max", a.min);
      a.steps = static_cast<int>(get_integer(s[i], sec, "steps", 1));
      c.scan.push_back(a);
    }
  }
  if (j.contains("oracle")) {
    const json& o = j.at("oracle");
    reject_unknown(o, "oracle", {"L", "eta", "kernel", "ladder"});
    c.oracle.L = static_cast<int>(get_integer(o, "oracle", "L", c.oracle.L));
    c.oracle.eta = get_number(o, "oracle", "eta", c.oracle.eta);
    const std::string kernel = get_string(o, "oracle", "kernel", "lorentzian");
    if (kernel == "lorentzian")
      c.oracle.kernel = KernelShape::Lorentzian;
    else if (kernel == "gaussian")
      c.oracle.kernel = KernelShape::Gaussian;
    else
      config_error("oracle.kernel", "expected \"lorentzian\" or \"gaussian\"");
    if (o.contains("ladder")) {
      const json& lad = o.at("ladder");
      if (!lad.is_array()) config_error("oracle.ladder", "expected [[L, eta], ...]");
      c.oracle.ladder.clear();
      for (const json& step : lad) {
        if (!step.is_array() || step.size() != 2 || !step[0].is_number_integer() || !step[1].is_number())
          config_error("oracle.ladder", "expected [[L, eta], ...]");
        c.oracle.ladder.emplace_back(step[0].get<int>(), step[1].get<double>());
      }
    }
  }
  if (j.contains("mc")) {
    const json& m = j.at("mc");
    reject_unknown(m, "mc", {"n_trajectories", "seed", "histogram_bins"});
    if (m.contains("n_trajectories")) {
      if (!m.at("n_trajectories").is_number_unsigned()) config_error("mc.n_trajectories", "expected a non-negative integer");
      c.mc.n_trajectories = m.at("n_trajectories").get<std::uint64_t>();
    }
    if (m.contains("seed")) {
      if (!m.at("seed").is_number_unsigned()) config_error("mc.seed", "expected a non-negative integer");
      c.mc.seed = m.at("seed").get<std::uint64_t>();
    }
    c.mc.histogram_bins = static_cast<int>(get_integer(m, "mc", "histogram_bins", c.mc.histogram_bins));
  }
  if (j.contains("output")) {
    const json& o = j.at("output");
    reject_unknown(o, "output", {"path", "format", "precision"});
    c.output.path = get_string(o, "output", "path", c.output.path);
    const std::string fmt_name = get_string(o, "output", "format", "csv");
    if (fmt_name == "csv")
      c.output.format = OutputFormat::Csv;
    else if (fmt_name == "json")
      c.output.format = OutputFormat::Json;
    else
      config_error("output.format", "expected \"csv\" or \"json\"");
    c.output.precision = static_cast<int>(get_integer(o, "output", "precision", c.output.precision));
  }
  if (j.contains("threads")) {
    const long long n = get_integer(j, "", "threads", 0);
    if (n < 0) config_error("threads", "must be >= 0");
    c.threads = static_cast<unsigned>(n);
  }
  c.validate();
  return c;
}

json parse_json(std::string_view text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    config_error(where, e.what());
  }
}

}  // namespace

double ScanAxis::value(int i) const {
  if (steps <= 1) return min;
  return min + (max - min) * static_cast<double>(i) / static_cast<double>(steps - 1);
}

QuenchSpec RunConfig::quench_spec() const {
  if (model.kind == ModelKind::IsingXY) return QuenchSpec::ising(quench.initial, quench.final, model.kappa);
  return QuenchSpec::xx(model.t, quench.initial, quench.final);
}

LadderSpec RunConfig::ladder_spec() const {
  LadderSpec s;
  s.d = ladder.d;
  s.g = ladder.g;
  s.Gamma = ladder.Gamma;
  s.epsilon_w = ladder.epsilon_w.value_or(coupling.epsilon0);
  return s;
}

const std::vector<std::string>& scan_parameters() {
  static const std::vector<std::string> names{
      "model.kappa",     "model.t",       "quench.initial",   "quench.final",
      "coupling.epsilon0", "coupling.g_obs", "coupling.L",     "ladder.d",
      "ladder.g",        "ladder.Gamma",  "clock.bias_ratio", "clock.gamma_sum",
      "oracle.L",        "oracle.eta"};
  return names;
}

void RunConfig::validate() const {
  auto finite = [](const char* field, double v) {
    if (!std::isfinite(v)) config_error(field, "must be finite");
  };
  finite("model.kappa", model.kappa);
  if (!(model.t > 0.0) || !std::isfinite(model.t)) config_error("model.t", "must be positive");
  finite("quench.initial", quench.initial);
  finite("quench.final", quench.final);
  if (!(coupling.epsilon0 > 0.0) || !std::isfinite(coupling.epsilon0))
    config_error("coupling.epsilon0", "must be positive");
  finite("coupling.g_obs", coupling.g_obs);
  if (!(coupling.L >= 2.0) || !std::isfinite(coupling.L)) config_error("coupling.L", "must be >= 2");
  if (ladder.d < 2) config_error("ladder.d", "must be >= 2");
  if (!(ladder.g > 0.0) || !std::isfinite(ladder.g)) config_error("ladder.g", "must be positive");
  if (ladder.Gamma && !(*ladder.Gamma > 0.0)) config_error("ladder.Gamma", "must be positive or null");
  if (ladder.epsilon_w && *ladder.epsilon_w != coupling.epsilon0)
    config_error("ladder.epsilon_w", "must equal coupling.epsilon0 (resonance)");
  if (!(clock.bias_ratio >= 0.0) || !std::isfinite(clock.bias_ratio))
    config_error("clock.bias_ratio", "must be >= 0");
  if (!(clock.gamma_sum > 0.0) || !std::isfinite(clock.gamma_sum))
    config_error("clock.gamma_sum", "must be positive");
  for (std::size_t i = 0; i < scan.size(); ++i) {
    const ScanAxis& a = scan[i];
    const std::string sec = fmt::format("scan[{}]", i);
    bool known = false;
    for (const std::string& n : scan_parameters()) known = known || n == a.param;
    if (!known) config_error(sec + ".param", fmt::format("unknown parameter \"{}\"", a.param));
    if (a.steps < 1) config_error(sec + ".steps", "must be >= 1");
    if (!std::isfinite(a.min) || !std::isfinite(a.max)) config_error(sec, "bounds must be finite");
  }
  if (oracle.L < 64 || oracle.L % 2 != 0) config_error("oracle.L", "must be even and >= 64");
  if (!(oracle.eta > 0.0)) config_error("oracle.eta", "must be positive");
  for (const auto& [L, eta] : oracle.ladder)
    if (L < 64 || L % 2 != 0 || !(eta > 0.0)) config_error("oracle.ladder", "entries need even L >= 64 and eta > 0");
  if (mc.histogram_bins < 0) config_error("mc.histogram_bins", "must be >= 0");
  if (output.precision < 6 || output.precision > 17) config_error("output.precision", "must be in [6, 17]");
}

RunConfig parse_config(std::string_view json_text) {
  return from_json(parse_json(json_text, "config"));
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error(path, "cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string emit_config(const RunConfig& config) {
  return to_json(config).dump(2, ' ', false, json::error_handler_t::strict) + "\n";
}

void set_parameter(RunConfig& c, std::string_view name, double value) {
  auto integral = [&](const char* field) {
    if (std::floor(value) != value) config_error(field, "expected an integer value");
    return static_cast<int>(value);
  };
  if (name == "model.kappa") c.model.kappa = value;
  else if (name == "model.t") c.model.t = value;
  else if (name == "quench.initial") c.quench.initial = value;
  else if (name == "quench.final") c.quench.final = value;
  else if (name == "coupling.epsilon0") c.coupling.epsilon0 = value;
  else if (name == "coupling.g_obs") c.coupling.g_obs = value;
  else if (name == "coupling.L") c.coupling.L = value;
  else if (name == "ladder.d") c.ladder.d = integral("ladder.d");
  else if (name == "ladder.g") c.ladder.g = value;
  else if (name == "ladder.Gamma") c.ladder.Gamma = value;
  else if (name == "clock.bias_ratio") c.clock.bias_ratio = value;
  else if (name == "clock.gamma_sum") c.clock.gamma_sum = value;
  else if (name == "oracle.L") c.oracle.L = integral("oracle.L");
  else if (name == "oracle.eta") c.oracle.eta = value;
  else config_error(std::string(name), "not a scannable parameter");
}

void apply_override(RunConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0)
    config_error(std::string(assignment), "expected key=value");
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));

  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json doc = to_json(config);
  json::json_pointer ptr;
  try {
    std::string pointer = "/" + key;
    for (char& ch : pointer)
      if (ch == '.') ch = '/';
    ptr = json::json_pointer(pointer);
  } catch (const json::exception&) {
    config_error(key, "malformed key");
  }
  if (!doc.contains(ptr.parent_pointer())) config_error(key, "unknown section");
  doc[ptr] = value;
  config = from_json(doc);
}

}  // namespace qclock
