#include "parafrac/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "parafrac/errors.hpp"

namespace parafrac {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto c = s.find(',');
    out.push_back(trim(s.substr(0, c)));
    if (c == std::string_view::npos) break;
    s.remove_prefix(c + 1);
  }
  return out;
}

double to_double(std::string_view v, const std::string& key) {
  double x = 0.0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end || v.empty() || !std::isfinite(x)) {
    throw ValidationError(key, fmt::format("expected a number, got '{}'", v));
  }
  return x;
}

long long to_int(std::string_view v, const std::string& key) {
  long long x = 0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end || v.empty()) {
    throw ValidationError(key, fmt::format("expected an integer, got '{}'", v));
  }
  return x;
}

std::vector<double> to_doubles(std::string_view v, const std::string& key) {
  std::vector<double> out;
  if (trim(v).empty()) return out;
  for (auto item : split_list(v)) out.push_back(to_double(item, key));
  return out;
}

std::string join(const std::vector<double>& v) { return fmt::format("{}", fmt::join(v, ", ")); }
std::string join(const std::vector<int>& v) { return fmt::format("{}", fmt::join(v, ", ")); }

template <class E>
E pick(std::string_view v, const std::string& key,
       std::initializer_list<std::pair<std::string_view, E>> table) {
  for (const auto& [name, e] : table) {
    if (v == name) return e;
  }
  std::string names;
  for (const auto& [name, e] : table) names += (names.empty() ? "" : ", ") + std::string(name);
  throw ValidationError(key, fmt::format("unknown value '{}' (expected one of {})", v, names));
}

std::string_view drift_name(DriftKind k) {
  switch (k) {
    case DriftKind::zero: return "zero";
    case DriftKind::constant: return "constant";
    case DriftKind::power: return "power";
    case DriftKind::weierstrass: return "weierstrass";
    case DriftKind::sampled_path: return "sampled_path";
  }
  return "zero";
}

std::string_view energy_kernel_name(EnergyKernel k) {
  switch (k) {
    case EnergyKernel::euclidean_beta: return "euclidean";
    case EnergyKernel::K_beta: return "K";
    case EnergyKernel::kappa_beta: return "kappa";
  }
  return "euclidean";
}

using Setter = std::function<void(ExperimentConfig&, std::string_view, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"experiment.kind",
       [](auto& c, auto v, const auto& k) {
         c.kind = pick<ExperimentKind>(v, k, {{"graph_dim", ExperimentKind::graph_dim},
                                              {"range_dim", ExperimentKind::range_dim},
                                              {"parabolic_dim", ExperimentKind::parabolic_dim},
                                              {"kernel_sweep", ExperimentKind::kernel_sweep},
                                              {"energy_threshold", ExperimentKind::energy_threshold},
                                              {"formula_table", ExperimentKind::formula_table},
                                              {"hitcount", ExperimentKind::hitcount}});
       }},
      {"experiment.replicas",
       [](auto& c, auto v, const auto& k) {
         const auto n = to_int(v, k);
         if (n < 1) throw ValidationError(k, "must be >= 1");
         c.replicas = static_cast<std::size_t>(n);
       }},
      {"experiment.seed", [](auto& c, auto v, const auto& k) {
         try {
           c.seed = parse_seed(v);
         } catch (const ParameterError& e) {
           throw ValidationError(k, e.what());
         }
       }},
      {"experiment.threads",
       [](auto& c, auto v, const auto& k) {
         const auto n = to_int(v, k);
         if (n < 1) throw ValidationError(k, "must be >= 1");
         c.threads = static_cast<unsigned>(n);
       }},
      {"experiment.tolerance", [](auto& c, auto v, const auto& k) { c.tolerance = to_double(v, k); }},
      {"experiment.out", [](auto& c, auto v, const auto&) { c.out_dir = std::string(v); }},
      {"process.alpha", [](auto& c, auto v, const auto& k) { c.process.alpha = to_double(v, k); }},
      {"process.d", [](auto& c, auto v, const auto& k) { c.process.d = static_cast<int>(to_int(v, k)); }},
      {"time_set.kind",
       [](auto& c, auto v, const auto& k) {
         c.time_set.kind = pick<TimeSetKind>(v, k, {{"interval", TimeSetKind::interval},
                                                    {"cantor", TimeSetKind::cantor}});
       }},
      {"time_set.level",
       [](auto& c, auto v, const auto& k) { c.time_set.level = static_cast<int>(to_int(v, k)); }},
      {"time_set.ratio", [](auto& c, auto v, const auto& k) { c.time_set.ratio = to_double(v, k); }},
      {"time_set.t_max", [](auto& c, auto v, const auto& k) { c.time_set.t_max = to_double(v, k); }},
      {"drift.kind",
       [](auto& c, auto v, const auto& k) {
         c.drift.kind = pick<DriftKind>(v, k, {{"zero", DriftKind::zero},
                                               {"constant", DriftKind::constant},
                                               {"power", DriftKind::power},
                                               {"weierstrass", DriftKind::weierstrass}});
       }},
      {"drift.constant", [](auto& c, auto v, const auto& k) { c.drift.constant = to_doubles(v, k); }},
      {"drift.beta", [](auto& c, auto v, const auto& k) { c.drift.beta = to_double(v, k); }},
      {"drift.base", [](auto& c, auto v, const auto& k) { c.drift.base = to_double(v, k); }},
      {"estimate.levels",
       [](auto& c, auto v, const auto& k) {
         try {
           c.levels = parse_levels(v);
         } catch (const ParameterError& e) {
           throw ValidationError(k, e.what());
         }
       }},
      {"estimate.convention",
       [](auto& c, auto v, const auto& k) {
         c.convention = pick<GaugeConvention>(v, k, {{"time_gauge", GaugeConvention::time_gauge},
                                                     {"diam_gauge", GaugeConvention::diam_gauge}});
       }},
      {"kernel.kernel",
       [](auto& c, auto v, const auto& k) { c.kernel.kappa = pick<bool>(v, k, {{"K", false}, {"kappa", true}}); }},
      {"kernel.variable",
       [](auto& c, auto v, const auto& k) { c.kernel.in_tau = pick<bool>(v, k, {{"tau", true}, {"delta", false}}); }},
      {"kernel.beta", [](auto& c, auto v, const auto& k) { c.kernel.beta = to_double(v, k); }},
      {"kernel.scales",
       [](auto& c, auto v, const auto& k) {
         try {
           c.kernel.scales = parse_levels(v);
         } catch (const ParameterError& e) {
           throw ValidationError(k, e.what());
         }
       }},
      {"kernel.tau", [](auto& c, auto v, const auto& k) { c.kernel.tau = to_double(v, k); }},
      {"kernel.delta_norm", [](auto& c, auto v, const auto& k) { c.kernel.delta_norm = to_double(v, k); }},
      {"kernel.n_mc",
       [](auto& c, auto v, const auto& k) {
         const auto n = to_int(v, k);
         if (n < 1) throw ValidationError(k, "must be >= 1");
         c.kernel.n_mc = static_cast<std::size_t>(n);
       }},
      {"energy.kernel",
       [](auto& c, auto v, const auto& k) {
         c.energy.kernel = pick<EnergyKernel>(v, k, {{"euclidean", EnergyKernel::euclidean_beta},
                                                     {"K", EnergyKernel::K_beta},
                                                     {"kappa", EnergyKernel::kappa_beta}});
       }},
      {"energy.measure",
       [](auto& c, auto v, const auto& k) {
         c.energy.graph_measure = pick<bool>(v, k, {{"graph", true}, {"time", false}});
       }},
      {"energy.betas", [](auto& c, auto v, const auto& k) { c.energy.betas = to_doubles(v, k); }},
      {"energy.levels",
       [](auto& c, auto v, const auto& k) {
         try {
           c.energy.levels = parse_levels(v);
         } catch (const ParameterError& e) {
           throw ValidationError(k, e.what());
         }
       }},
      {"energy.resolution", [](auto& c, auto v, const auto& k) { c.energy.resolution = to_double(v, k); }},
      {"energy.kernel_mc",
       [](auto& c, auto v, const auto& k) {
         const auto n = to_int(v, k);
         if (n < 1) throw ValidationError(k, "must be >= 1");
         c.energy.kernel_mc = static_cast<std::size_t>(n);
       }},
      {"formula.phi_alpha", [](auto& c, auto v, const auto& k) { c.formula.phi_alpha = to_double(v, k); }},
      {"formula.holder_beta", [](auto& c, auto v, const auto& k) { c.formula.holder_beta = to_double(v, k); }},
      {"formula.hurst", [](auto& c, auto v, const auto& k) { c.formula.hurst = to_double(v, k); }},
  };
  return table;
}

std::size_t n_points(const TimeSetSpec& t) {
  const std::size_t n = std::size_t{1} << t.level;
  return t.kind == TimeSetKind::interval ? n + 1 : n;
}

double resolution(const TimeSetSpec& t) {
  return t.kind == TimeSetKind::interval ? t.t_max * std::ldexp(1.0, -t.level)
                                         : t.t_max * std::pow(t.ratio, t.level);
}

// Upper bound on the largest gap of the level-n point set.
double max_gap(const TimeSetSpec& t) {
  if (t.kind == TimeSetKind::interval) return resolution(t);
  if (t.level == 0) return 0.0;
  return t.t_max * (1.0 - t.ratio);
}

std::vector<int> range_of(int lo, int hi) {
  std::vector<int> out;
  for (int k = lo; k <= hi; ++k) out.push_back(k);
  return out;
}

}  // namespace

std::string_view to_string(ExperimentKind k) noexcept {
  switch (k) {
    case ExperimentKind::graph_dim: return "graph_dim";
    case ExperimentKind::range_dim: return "range_dim";
    case ExperimentKind::parabolic_dim: return "parabolic_dim";
    case ExperimentKind::kernel_sweep: return "kernel_sweep";
    case ExperimentKind::energy_threshold: return "energy_threshold";
    case ExperimentKind::formula_table: return "formula_table";
    case ExperimentKind::hitcount: return "hitcount";
  }
  return "unknown";
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t parse_seed(std::string_view text) {
  text = trim(text);
  int base = 10;
  if (text.starts_with("0x") || text.starts_with("0X")) {
    base = 16;
    text.remove_prefix(2);
  }
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v, base);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw ParameterError(fmt::format("invalid seed '{}'", text));
  }
  return v;
}

std::vector<int> parse_levels(std::string_view text) {
  text = trim(text);
  const auto dots = text.find("..");
  std::vector<int> out;
  auto num = [](std::string_view s) {
    s = trim(s);
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
      throw ParameterError(fmt::format("invalid level '{}'", s));
    }
    return v;
  };
  if (dots != std::string_view::npos) {
    const int lo = num(text.substr(0, dots));
    const int hi = num(text.substr(dots + 2));
    if (hi < lo) throw ParameterError("level range is empty");
    return range_of(lo, hi);
  }
  if (text.empty()) return out;
  for (auto item : split_list(text)) out.push_back(num(item));
  return out;
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::string section;
  std::map<std::string, int> seen;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string_view::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ValidationError("", fmt::format("line {}: malformed section header", line_no));
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      const bool known = std::any_of(setters().begin(), setters().end(), [&](const auto& kv) {
        return kv.first.starts_with(section + ".");
      });
      if (!known) throw ValidationError(section, fmt::format("line {}: unknown section", line_no));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("", fmt::format("line {}: expected 'key = value'", line_no));
    }
    if (section.empty()) {
      throw ValidationError("", fmt::format("line {}: key outside of a section", line_no));
    }
    const std::string key = section + "." + std::string(trim(line.substr(0, eq)));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ValidationError(key, fmt::format("line {}: unknown key", line_no));
    if (seen[key]++ > 0) throw ValidationError(key, fmt::format("line {}: duplicate key", line_no));
    it->second(cfg, trim(line.substr(eq + 1)), key);
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("config", fmt::format("cannot read '{}'", path));
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string ExperimentConfig::canonical() const {
  std::string s;
  auto line = [&s](std::string_view k, const std::string& v) { s += fmt::format("{} = {}\n", k, v); };
  s += "[experiment]\n";
  line("kind", std::string(to_string(kind)));
  line("replicas", std::to_string(replicas));
  line("seed", std::to_string(seed));
  line("threads", std::to_string(threads));
  if (tolerance) line("tolerance", fmt::format("{}", *tolerance));
  line("out", out_dir);
  s += "\n[process]\n";
  line("alpha", fmt::format("{}", process.alpha));
  line("d", std::to_string(process.d));
  s += "\n[time_set]\n";
  line("kind", time_set.kind == TimeSetKind::interval ? "interval" : "cantor");
  line("level", std::to_string(time_set.level));
  line("ratio", fmt::format("{}", time_set.ratio));
  line("t_max", fmt::format("{}", time_set.t_max));
  s += "\n[drift]\n";
  line("kind", std::string(drift_name(drift.kind)));
  line("constant", join(drift.constant));
  line("beta", fmt::format("{}", drift.beta));
  line("base", fmt::format("{}", drift.base));
  s += "\n[estimate]\n";
  line("levels", join(levels));
  line("convention", std::string(to_string(convention)));
  s += "\n[kernel]\n";
  line("kernel", kernel.kappa ? "kappa" : "K");
  line("variable", kernel.in_tau ? "tau" : "delta");
  line("beta", fmt::format("{}", kernel.beta));
  line("scales", join(kernel.scales));
  line("tau", fmt::format("{}", kernel.tau));
  line("delta_norm", fmt::format("{}", kernel.delta_norm));
  line("n_mc", std::to_string(kernel.n_mc));
  s += "\n[energy]\n";
  line("kernel", std::string(energy_kernel_name(energy.kernel)));
  line("measure", energy.graph_measure ? "graph" : "time");
  line("betas", join(energy.betas));
  line("levels", join(energy.levels));
  line("resolution", fmt::format("{}", energy.resolution));
  line("kernel_mc", std::to_string(energy.kernel_mc));
  s += "\n[formula]\n";
  if (formula.phi_alpha) line("phi_alpha", fmt::format("{}", *formula.phi_alpha));
  if (formula.holder_beta) line("holder_beta", fmt::format("{}", *formula.holder_beta));
  if (formula.hurst) line("hurst", fmt::format("{}", *formula.hurst));
  return s;
}

std::string ExperimentConfig::hash() const {
  // Thread count and output directory do not change results.
  ExperimentConfig c = *this;
  c.threads = 1;
  c.out_dir = ".";
  return fmt::format("{:016x}", fnv1a64(c.canonical()));
}

TimeSet ExperimentConfig::build_time_set() const {
  return parafrac::build_time_set(time_set.kind, time_set.level, time_set.ratio, time_set.t_max);
}

DriftSpec ExperimentConfig::build_drift() const {
  const int d = process.d;
  switch (drift.kind) {
    case DriftKind::zero: return DriftSpec::zero(d, time_set.t_max);
    case DriftKind::constant: return DriftSpec::constant_vector(drift.constant, time_set.t_max);
    case DriftKind::power: return DriftSpec::power(drift.beta, d);
    case DriftKind::weierstrass: return DriftSpec::weierstrass(drift.base, drift.beta, d, time_set.t_max);
    case DriftKind::sampled_path: break;
  }
  throw ValidationError("drift.kind", "sampled_path drifts cannot be configured");
}

std::vector<int> ExperimentConfig::effective_levels() const {
  if (!levels.empty()) return levels;
  const double tscale = time_set.t_max > 1.0 ? time_set.t_max : 1.0;
  switch (kind) {
    case ExperimentKind::graph_dim: return default_euclidean_graph_levels(n_points(time_set));
    case ExperimentKind::parabolic_dim: return default_parabolic_levels(resolution(time_set) / tscale);
    case ExperimentKind::range_dim: return default_range_levels(resolution(time_set), process.alpha);
    case ExperimentKind::hitcount: {
      const double g = max_gap(time_set);
      if (!(g > 0.0)) return {};
      return range_of(2, static_cast<int>(std::floor(std::log2(1.0 / g))) - 2);
    }
    default: return {};
  }
}

void ExperimentConfig::validate() const {
  try {
    process.validate();
  } catch (const ParameterError& e) {
    throw ValidationError("process", e.what());
  }
  if (replicas < 1) throw ValidationError("experiment.replicas", "must be >= 1");
  if (threads < 1) throw ValidationError("experiment.threads", "must be >= 1");
  if (tolerance && !(*tolerance >= 0.0)) throw ValidationError("experiment.tolerance", "must be >= 0");
  if (time_set.level < 0 || time_set.level > 26) {
    throw ValidationError("time_set.level", "must lie in [0, 26]");
  }
  if (time_set.kind == TimeSetKind::cantor && !(time_set.ratio > 0.0 && time_set.ratio <= 0.5)) {
    throw ValidationError("time_set.ratio", "must lie in (0, 1/2]");
  }
  if (!(time_set.t_max > 0.0)) throw ValidationError("time_set.t_max", "must be positive");
  try {
    (void)build_drift();
  } catch (const ParameterError& e) {
    throw ValidationError("drift", e.what());
  }
  if (drift.kind == DriftKind::constant && static_cast<int>(drift.constant.size()) != process.d) {
    throw ValidationError("drift.constant", "needs exactly d coordinates");
  }
  if (drift.kind == DriftKind::power && time_set.t_max > 1.0) {
    throw ValidationError("drift.kind", "power drift is defined on [0, 1]; t_max must be <= 1");
  }

  const auto lv = effective_levels();
  const double h = resolution(time_set);
  const double tscale = time_set.t_max > 1.0 ? time_set.t_max : 1.0;
  switch (kind) {
    case ExperimentKind::graph_dim:
    case ExperimentKind::parabolic_dim:
    case ExperimentKind::range_dim: {
      if (lv.size() < 8) {
        throw ValidationError("estimate.levels", "need at least 8 levels (4 remain after trimming)");
      }
      if (!std::is_sorted(lv.begin(), lv.end()) || lv.front() < 0) {
        throw ValidationError("estimate.levels", "levels must be sorted and >= 0");
      }
      const double finest_time = kind == ExperimentKind::range_dim
                                     ? std::exp2(-lv.back() * process.alpha)
                                     : std::ldexp(1.0, -lv.back()) * tscale;
      if (finest_time < 4.0 * h) {
        throw ValidationError("estimate.levels",
                              fmt::format("finest level {} is finer than 4x the grid spacing {}",
                                          lv.back(), h));
      }
      break;
    }
    case ExperimentKind::hitcount: {
      if (lv.size() < 2) throw ValidationError("estimate.levels", "need at least 2 levels");
      const double g = max_gap(time_set);
      for (int k : lv) {
        if (g > std::ldexp(1.0, -k) / 4.0) {
          throw ValidationError("estimate.levels",
                                fmt::format("level {} needs grid gaps <= 2^-{}/4", k, k));
        }
      }
      break;
    }
    case ExperimentKind::kernel_sweep: {
      if (kernel.scales.size() < 3) throw ValidationError("kernel.scales", "need at least 3 scales");
      if (!(kernel.beta >= 0.0)) throw ValidationError("kernel.beta", "must be >= 0");
      if (kernel.kappa && !(kernel.beta < process.d)) {
        throw ValidationError("kernel.beta", "kappa kernel needs beta < d");
      }
      if (kernel.n_mc < 1000) throw ValidationError("kernel.n_mc", "must be >= 1000");
      for (int j : kernel.scales) {
        if (j < 0) throw ValidationError("kernel.scales", "scales must be >= 0");
      }
      if (!(kernel.delta_norm >= 0.0 && kernel.delta_norm <= 1.0)) {
        throw ValidationError("kernel.delta_norm", "must lie in [0, 1]");
      }
      if (!(kernel.tau > 0.0 && kernel.tau <= 1.0)) throw ValidationError("kernel.tau", "must lie in (0, 1]");
      if (!kernel.in_tau) {
        const int finest = *std::max_element(kernel.scales.begin(), kernel.scales.end());
        const double smallest = std::ldexp(1.0, -finest);
        if (kernel.tau > std::pow(smallest, std::max(process.alpha, 1.0))) {
          throw ValidationError("kernel.tau", "delta sweeps need tau <= ||delta||^(alpha v 1) at every scale");
        }
      }
      break;
    }
    case ExperimentKind::energy_threshold: {
      if (energy.betas.size() < 5) throw ValidationError("energy.betas", "need at least 5 values");
      if (!std::is_sorted(energy.betas.begin(), energy.betas.end())) {
        throw ValidationError("energy.betas", "must be sorted");
      }
      if (energy.kernel == EnergyKernel::kappa_beta && !(energy.betas.back() < process.d)) {
        throw ValidationError("energy.betas", "kappa kernel needs beta < d");
      }
      if (energy.kernel != EnergyKernel::euclidean_beta && time_set.t_max > 1.0) {
        throw ValidationError("time_set.t_max", "kernel energies need t_max <= 1");
      }
      if (!energy.levels.empty() &&
          (energy.levels.size() < 3 || !std::is_sorted(energy.levels.begin(), energy.levels.end()))) {
        throw ValidationError("energy.levels", "need at least 3 sorted levels");
      }
      if (!(energy.resolution > 0.0)) throw ValidationError("energy.resolution", "must be positive");
      if (time_set.level > 16) {
        throw ValidationError("time_set.level", "energy sums are quadratic; use level <= 16");
      }
      break;
    }
    case ExperimentKind::formula_table: {
      if (formula.phi_alpha && !(*formula.phi_alpha >= 0.0 && *formula.phi_alpha <= process.d + 1.0)) {
        throw ValidationError("formula.phi_alpha", "must lie in [0, d + 1]");
      }
      if (formula.holder_beta && !(*formula.holder_beta > 0.0 && *formula.holder_beta <= 1.0)) {
        throw ValidationError("formula.holder_beta", "must lie in (0, 1]");
      }
      if (formula.hurst && !(*formula.hurst > 0.0 && *formula.hurst <= 1.0)) {
        throw ValidationError("formula.hurst", "must lie in (0, 1]");
      }
      break;
    }
  }
}

}  // namespace parafrac
