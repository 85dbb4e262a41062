// parafrac: command line driver for simulations, box counting, closed-form
// dimension formulas, kernel probes, energy thresholds and plots.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "parafrac/config.hpp"
#include "parafrac/csv.hpp"
#include "parafrac/dim_formulas.hpp"
#include "parafrac/energy_probe.hpp"
#include "parafrac/errors.hpp"
#include "parafrac/experiment.hpp"
#include "parafrac/parabolic_cover.hpp"
#include "parafrac/plot.hpp"
#include "parafrac/rng.hpp"
#include "parafrac/stable_sim.hpp"

namespace fs = std::filesystem;
using namespace parafrac;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

struct Common {
  std::string config;
  std::optional<std::string> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> replicas;
  std::optional<unsigned> threads;
  std::string format = "csv";
};

struct ProcessFlags {
  std::optional<double> alpha;
  std::optional<int> d;
  std::optional<TimeSetKind> time_set;
  std::optional<int> level;
  std::optional<double> t_max;
  std::optional<std::string> levels;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "INI experiment config")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "master seed, decimal or 0x-hex (PARAFRAC_SEED overrides)");
  app->add_option("--out", c.out, "output directory");
  app->add_option("--replicas", c.replicas, "number of replicas")->check(CLI::PositiveNumber);
  app->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
  app->add_option("--format", c.format, "stdout format")->check(CLI::IsMember({"csv", "table"}));
}

void add_process(CLI::App* app, ProcessFlags& p) {
  const std::map<std::string, TimeSetKind> kinds{{"interval", TimeSetKind::interval},
                                                 {"cantor", TimeSetKind::cantor}};
  app->add_option("--alpha", p.alpha, "stability index in (0,2]");
  app->add_option("--dim", p.d, "spatial dimension");
  app->add_option("--time-set", p.time_set, "interval or cantor")
      ->transform(CLI::CheckedTransformer(kinds, CLI::ignore_case));
  app->add_option("--level", p.level, "time set level (interval: 2^level+1 points)");
  app->add_option("--t-max", p.t_max, "right end of the time interval");
  app->add_option("--levels", p.levels, "box levels, \"a..b\" or a comma list");
}

std::uint64_t resolve_seed(const Common& c, std::uint64_t fallback) {
  if (const char* env = std::getenv("PARAFRAC_SEED"); env && *env) {
    try {
      return parse_seed(env);
    } catch (const Error& e) {
      throw ValidationError("PARAFRAC_SEED", e.what());
    }
  }
  return c.seed ? parse_seed(*c.seed) : fallback;
}

ExperimentConfig base_config(const Common& c, const ProcessFlags& p, ExperimentKind kind) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
  cfg.kind = kind;
  if (p.alpha) cfg.process.alpha = *p.alpha;
  if (p.d) cfg.process.d = *p.d;
  if (p.time_set) cfg.time_set.kind = *p.time_set;
  if (p.level) cfg.time_set.level = *p.level;
  if (p.t_max) cfg.time_set.t_max = *p.t_max;
  if (p.levels) cfg.levels = parse_levels(*p.levels);
  cfg.seed = resolve_seed(c, cfg.seed);
  if (c.out) cfg.out_dir = *c.out;
  if (c.replicas) cfg.replicas = *c.replicas;
  if (c.threads) cfg.threads = *c.threads;
  return cfg;
}

void print_table(const CsvTable& t, const std::string& format) {
  std::cout << (format == "table" ? t.to_table() : t.to_csv());
}

void print_summary(const RunRecord& rec) {
  std::string line = fmt::format("{}: mean {} (stderr {}) over {} ok replicas", to_string(rec.kind),
                                 csv_number(rec.mean), csv_number(rec.std_error), rec.n_ok);
  if (rec.oracle) {
    line += rec.oracle->is_value()
                ? fmt::format(", oracle {}", csv_number(rec.oracle->value()))
                : fmt::format(", oracle [{}, {}]", csv_number(rec.oracle->lo), csv_number(rec.oracle->hi));
  }
  if (rec.pass) line += fmt::format(", {} at tolerance {}", *rec.pass ? "pass" : "FAIL", csv_number(rec.tolerance));
  if (rec.runtime_failure) line += ", runtime failure (fewer than 80% of replicas succeeded)";
  std::cerr << line << '\n';
}

int run_and_report(const ExperimentConfig& cfg, bool write_files, const std::string& format,
                   const std::string& main_table) {
  const auto rec = run_experiment(cfg, write_files);
  if (auto it = rec.tables.find(main_table); it != rec.tables.end() && main_table != "results") {
    print_table(it->second, format);
  }
  if (auto it = rec.tables.find("results"); it != rec.tables.end()) {
    if (main_table != "results") std::cout << '\n';
    print_table(it->second, format);
    print_summary(rec);
  }
  return exit_code(rec);
}

int cmd_simulate(const Common& c, const ProcessFlags& p) {
  auto cfg = base_config(c, p, ExperimentKind::graph_dim);
  cfg.process.validate();
  const auto ts = cfg.build_time_set();
  const auto grid = ts.grid();
  const auto drift = cfg.build_drift();
  std::vector<std::string> header{"replica", "seed", "t"};
  for (int j = 1; j <= cfg.process.d; ++j) header.push_back(fmt::format("x{}", j));
  CsvTable t(header);
  const auto d = static_cast<std::size_t>(cfg.process.d);
  std::vector<double> f(d);
  for (std::size_t r = 0; r < cfg.replicas; ++r) {
    const std::uint64_t seed = mix_seed(cfg.seed, r);
    const auto path = simulate_path(cfg.process, grid, seed, cfg.threads);
    for (std::size_t i = 0; i < path.size(); ++i) {
      const double time = grid.points()[i];
      eval_drift(drift, time, f);
      std::vector<std::string> row{std::to_string(r), std::to_string(seed), csv_number(time)};
      for (std::size_t j = 0; j < d; ++j) row.push_back(csv_number(path.position(i)[j] + f[j]));
      t.add_row(std::move(row));
    }
  }
  if (c.out) {
    fs::create_directories(*c.out);
    const auto file = (fs::path(*c.out) / "paths.csv").string();
    t.write(file);
    std::cerr << fmt::format("wrote {} rows to {}\n", t.rows().size(), file);
  } else {
    print_table(t, c.format);
  }
  return 0;
}

PointCloud read_cloud(const std::string& path) {
  const auto t = CsvTable::read(path);
  if (t.empty()) throw InputError(fmt::format("'{}' holds no points", path));
  PointCloud cloud;
  cloud.has_time = t.header().front() == "t";
  cloud.dim = t.header().size();
  cloud.data.reserve(t.rows().size() * cloud.dim);
  for (const auto& row : t.rows()) {
    for (const auto& field : row) {
      try {
        std::size_t used = 0;
        const double v = std::stod(field, &used);
        if (used != field.size()) throw std::invalid_argument(field);
        cloud.data.push_back(v);
      } catch (const std::exception&) {
        throw InputError(fmt::format("'{}': non-numeric field '{}'", path, field));
      }
    }
  }
  return cloud;
}

int cmd_boxcount(const Common& c, const ProcessFlags& p, const std::string& cloud_kind,
                 const std::optional<std::string>& input, const std::string& convention) {
  const auto conv = convention == "time" ? GaugeConvention::time_gauge : GaugeConvention::diam_gauge;
  if (input) {
    const auto cloud = read_cloud(*input);
    const double alpha = cloud_kind == "parabolic" ? p.alpha.value_or(2.0) : 1.0;
    const auto levels = p.levels ? parse_levels(*p.levels) : default_euclidean_graph_levels(cloud.size());
    const auto ledger = occupancy(cloud, alpha, levels, c.threads.value_or(1));
    CsvTable t({"alpha", "k", "time_side", "space_side", "N_k"});
    for (std::size_t j = 0; j < ledger.levels.size(); ++j) {
      t.add_row({csv_number(alpha), std::to_string(ledger.levels[j]), csv_number(ledger.time_side(j)),
                 csv_number(ledger.space_side(j)), std::to_string(ledger.counts[j])});
    }
    print_table(t, c.format);
    const auto est = estimate_dimension(ledger, conv);
    std::cerr << fmt::format("estimate {} (stderr {}) over levels {}..{}\n", csv_number(est.value),
                             csv_number(est.std_error), est.window.front(), est.window.back());
    if (c.out) {
      fs::create_directories(*c.out);
      t.write((fs::path(*c.out) / "ledger.csv").string());
    }
    return 0;
  }
  const auto kind = cloud_kind == "range"       ? ExperimentKind::range_dim
                    : cloud_kind == "parabolic" ? ExperimentKind::parabolic_dim
                                                : ExperimentKind::graph_dim;
  auto cfg = base_config(c, p, kind);
  cfg.convention = conv;
  return run_and_report(cfg, c.out.has_value(), c.format, "results");
}

struct FormulaFlags {
  std::optional<double> phi;
  std::optional<double> holder_beta;
  std::optional<double> hurst;
  bool self_check = false;
};

int cmd_formula(const Common& c, const ProcessFlags& p, const FormulaFlags& f) {
  if (f.self_check) {
    const auto rep = formula_self_check();
    CsvTable t({"lattice_points", "generic_points", "multi_fire", "failures", "max_disagreement"});
    t.add_row({std::to_string(rep.points), std::to_string(rep.generic_points), std::to_string(rep.multi_fire),
               std::to_string(rep.failures), csv_number(rep.max_disagreement)});
    print_table(t, c.format);
    for (const auto& m : rep.messages) std::cerr << m << '\n';
    return rep.ok() ? 0 : 1;
  }
  auto cfg = base_config(c, p, ExperimentKind::formula_table);
  if (f.phi) cfg.formula.phi_alpha = f.phi;
  if (f.holder_beta) cfg.formula.holder_beta = f.holder_beta;
  if (f.hurst) cfg.formula.hurst = f.hurst;
  return run_and_report(cfg, c.out.has_value(), c.format, "formula");
}

struct KernelFlags {
  std::optional<bool> kappa;
  std::optional<bool> in_tau;
  std::optional<double> beta;
  std::optional<std::string> scales;
  std::optional<double> tau;
  std::optional<double> delta_norm;
  std::optional<std::size_t> n_mc;
  bool point = false;
};

int cmd_kernel(const Common& c, const ProcessFlags& p, const KernelFlags& k) {
  auto cfg = base_config(c, p, ExperimentKind::kernel_sweep);
  auto& ks = cfg.kernel;
  if (k.kappa) ks.kappa = *k.kappa;
  if (k.in_tau) ks.in_tau = *k.in_tau;
  if (k.beta) ks.beta = *k.beta;
  if (k.scales) ks.scales = parse_levels(*k.scales);
  if (k.tau) ks.tau = *k.tau;
  if (k.delta_norm) ks.delta_norm = *k.delta_norm;
  if (k.n_mc) ks.n_mc = *k.n_mc;
  if (!k.point) return run_and_report(cfg, c.out.has_value(), c.format, "kernel_sweep");

  KernelQuery q;
  q.alpha = cfg.process.alpha;
  q.d = cfg.process.d;
  q.beta = ks.beta;
  q.tau = ks.tau;
  q.delta.assign(static_cast<std::size_t>(q.d), 0.0);
  q.delta[0] = ks.delta_norm;
  q.n_mc = ks.n_mc;
  q.validate();
  const auto est = ks.kappa ? kernel_kappa(q, cfg.seed) : kernel_K(q, cfg.seed);
  CsvTable t({"kernel", "alpha", "d", "beta", "tau", "delta_norm", "estimate", "stderr", "clip_rate", "valid"});
  t.add_row({ks.kappa ? "kappa" : "K", csv_number(q.alpha), std::to_string(q.d), csv_number(q.beta),
             csv_number(q.tau), csv_number(ks.delta_norm), csv_number(est.value), csv_number(est.std_error),
             csv_number(est.clip_rate), est.valid ? "true" : "false"});
  print_table(t, c.format);
  return est.valid ? 0 : kExitRuntime;
}

struct EnergyFlags {
  std::optional<EnergyKernel> kernel;
  std::optional<std::string> measure;
  std::vector<double> betas;
  std::optional<std::string> mesh;
  std::optional<double> resolution;
};

int cmd_energy(const Common& c, const ProcessFlags& p, const EnergyFlags& e) {
  auto cfg = base_config(c, p, ExperimentKind::energy_threshold);
  if (e.kernel) cfg.energy.kernel = *e.kernel;
  if (e.measure) cfg.energy.graph_measure = *e.measure == "graph";
  if (!e.betas.empty()) cfg.energy.betas = e.betas;
  if (e.mesh) cfg.energy.levels = parse_levels(*e.mesh);
  if (e.resolution) cfg.energy.resolution = *e.resolution;
  return run_and_report(cfg, c.out.has_value(), c.format, "energy");
}

int cmd_experiment(const Common& c) {
  ExperimentConfig cfg = load_config(c.config);
  cfg.seed = resolve_seed(c, cfg.seed);
  if (c.out) cfg.out_dir = *c.out;
  if (c.replicas) cfg.replicas = *c.replicas;
  if (c.threads) cfg.threads = *c.threads;
  const auto main_table = cfg.kind == ExperimentKind::formula_table ? "formula" : "results";
  return run_and_report(cfg, true, c.format, main_table);
}

int cmd_plot(const Common& c, const std::string& input, const std::optional<std::string>& output) {
  const auto svg = plot_csv(CsvTable::read(input));
  std::optional<fs::path> target;
  if (output) {
    target = *output;
  } else if (c.out) {
    fs::create_directories(*c.out);
    target = fs::path(*c.out) / (fs::path(input).stem().string() + ".svg");
  }
  if (!target) {
    std::cout << svg;
    return 0;
  }
  std::ofstream f(*target, std::ios::binary | std::ios::trunc);
  if (!f) throw InputError(fmt::format("cannot write '{}'", target->string()));
  f << svg;
  std::cerr << fmt::format("wrote {}\n", target->string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parafrac: dimensions of graphs and ranges of stable processes with drift"};
  app.require_subcommand(1);

  Common common;
  ProcessFlags proc;

  auto* simulate = app.add_subcommand("simulate", "sample paths on the configured time set");
  add_common(simulate, common);
  add_process(simulate, proc);

  std::string cloud_kind = "graph";
  std::optional<std::string> input;
  std::string convention = "diam";
  auto* boxcount = app.add_subcommand("boxcount", "box-counting dimension of graphs or ranges");
  add_common(boxcount, common);
  add_process(boxcount, proc);
  boxcount->add_option("--cloud", cloud_kind, "graph, parabolic or range")
      ->check(CLI::IsMember({"graph", "parabolic", "range"}));
  boxcount->add_option("--input", input, "point CSV (first column 't' marks a graph)")->check(CLI::ExistingFile);
  boxcount->add_option("--convention", convention, "diam or time gauge")->check(CLI::IsMember({"diam", "time"}));

  FormulaFlags ff;
  auto* formula = app.add_subcommand("formula", "closed-form dimension table");
  add_common(formula, common);
  add_process(formula, proc);
  formula->add_option("--phi", ff.phi, "parabolic dimension of the drift graph");
  formula->add_option("--holder-beta", ff.holder_beta, "Holder exponent of the drift");
  formula->add_option("--hurst", ff.hurst, "Hurst index for the fractional Brownian table");
  formula->add_flag("--self-check", ff.self_check, "sweep branch boundaries and generic points");

  KernelFlags kf;
  const std::map<std::string, bool> kernel_names{{"K", false}, {"kappa", true}};
  const std::map<std::string, bool> variables{{"tau", true}, {"delta", false}};
  auto* kernel = app.add_subcommand("kernel-probe", "Monte Carlo difference kernels and envelope slopes");
  add_common(kernel, common);
  add_process(kernel, proc);
  kernel->add_option("--kernel", kf.kappa, "K or kappa")->transform(CLI::CheckedTransformer(kernel_names));
  kernel->add_option("--variable", kf.in_tau, "sweep tau or delta")->transform(CLI::CheckedTransformer(variables));
  kernel->add_option("--beta", kf.beta, "kernel exponent");
  kernel->add_option("--scales", kf.scales, "sweep exponents j (values 2^-j)");
  kernel->add_option("--tau", kf.tau, "fixed |tau| for delta sweeps and point queries");
  kernel->add_option("--delta-norm", kf.delta_norm, "fixed |delta| for tau sweeps and point queries");
  kernel->add_option("--n-mc", kf.n_mc, "Monte Carlo draws");
  kernel->add_flag("--point", kf.point, "evaluate one kernel value at (--tau, --delta-norm)");

  EnergyFlags ef;
  const std::map<std::string, EnergyKernel> energy_kernels{
      {"euclidean", EnergyKernel::euclidean_beta}, {"K", EnergyKernel::K_beta}, {"kappa", EnergyKernel::kappa_beta}};
  auto* energy = app.add_subcommand("energy", "Riesz energy partial sums and capacity threshold");
  add_common(energy, common);
  add_process(energy, proc);
  energy->add_option("--kernel", ef.kernel, "euclidean, K or kappa")
      ->transform(CLI::CheckedTransformer(energy_kernels));
  energy->add_option("--measure", ef.measure, "graph or time")->check(CLI::IsMember({"graph", "time"}));
  energy->add_option("--betas", ef.betas, "sorted exponent grid")->delimiter(',');
  energy->add_option("--mesh", ef.mesh, "mesh levels of the partial sums");
  energy->add_option("--resolution", ef.resolution, "bisection resolution");

  auto* experiment = app.add_subcommand("experiment", "run a configured experiment and write its CSVs");
  add_common(experiment, common);
  experiment->get_option("--config")->required();

  std::string plot_input;
  std::optional<std::string> plot_output;
  auto* plot = app.add_subcommand("plot", "SVG plot of a CSV written by the toolkit");
  add_common(plot, common);
  plot->add_option("--input", plot_input, "ledger, energy, kernel sweep or results CSV")
      ->required()
      ->check(CLI::ExistingFile);
  plot->add_option("-o,--output", plot_output, "SVG file (default: stdout or --out DIR)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    if (*simulate) return cmd_simulate(common, proc);
    if (*boxcount) return cmd_boxcount(common, proc, cloud_kind, input, convention);
    if (*formula) return cmd_formula(common, proc, ff);
    if (*kernel) return cmd_kernel(common, proc, kf);
    if (*energy) return cmd_energy(common, proc, ef);
    if (*experiment) return cmd_experiment(common);
    if (*plot) return cmd_plot(common, plot_input, plot_output);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ParameterError& e) {
    std::cerr << "invalid parameter: " << e.what() << '\n';
    return kExitValidation;
  } catch (const InputError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitValidation;
}
