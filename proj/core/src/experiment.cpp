#include "parafrac/experiment.hpp"

#include <atomic>
#include <cmath>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "parafrac/errors.hpp"
#include "parafrac/rng.hpp"
#include "parafrac/stats.hpp"

namespace parafrac {
namespace {

const std::vector<std::string> kResultsHeader{"config_hash", "kind", "replica", "seed",
                                              "status",      "value", "std_error", "detail"};

double known_dim(const ExperimentConfig& c) {
  if (c.time_set.kind == TimeSetKind::interval) return 1.0;
  return std::log(2.0) / std::log(1.0 / c.time_set.ratio);
}

bool is_counting(ExperimentKind k) {
  return k == ExperimentKind::graph_dim || k == ExperimentKind::range_dim ||
         k == ExperimentKind::parabolic_dim || k == ExperimentKind::hitcount;
}

bool flat_drift(const ExperimentConfig& c) {
  return c.drift.kind == DriftKind::zero || c.drift.kind == DriftKind::constant;
}

FormulaResult graph_oracle(const ExperimentConfig& c) {
  const double dim_t = known_dim(c);
  const double phi = constant_drift_phi(c.process.alpha, dim_t).value();
  return graph_dim_with_drift({c.process.alpha, c.process.d, dim_t, phi, std::nullopt});
}

FormulaResult range_oracle(const ExperimentConfig& c) {
  return process_range_dim(c.process.alpha, c.process.d, known_dim(c));
}

std::string window_text(const std::vector<int>& w) {
  return w.empty() ? std::string() : fmt::format("window={}..{}", w.front(), w.back());
}

// Runs replicas on a worker pool and hands finished rows to `emit` strictly in
// replica order.
template <class Work, class Emit>
void ordered_replicas(std::size_t n, unsigned threads, Work work, Emit emit) {
  std::vector<std::optional<ReplicaResult>> done(n);
  std::mutex m;
  std::size_t next_emit = 0;
  auto finish = [&](std::size_t i, ReplicaResult r) {
    std::lock_guard lock(m);
    done[i] = std::move(r);
    while (next_emit < n && done[next_emit]) {
      emit(*done[next_emit]);
      ++next_emit;
    }
  };
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    for (std::size_t i = next++; i < n; i = next++) finish(i, work(i));
  };
  if (threads == 1) {
    loop();
    return;
  }
  std::vector<std::jthread> workers;
  for (unsigned w = 0; w < threads; ++w) workers.emplace_back(loop);
}

std::vector<std::string> replica_row(const std::string& hash, ExperimentKind kind,
                                     const ReplicaResult& r) {
  return {hash,
          std::string(to_string(kind)),
          std::to_string(r.index),
          std::to_string(r.seed),
          r.ok ? "ok" : "failed",
          r.ok ? csv_number(r.value) : "",
          r.ok ? csv_number(r.std_error) : "",
          r.detail};
}

void run_counting(const ExperimentConfig& cfg, RunRecord& rec, std::ostream* stream) {
  const auto ts = cfg.build_time_set();
  const auto grid = ts.grid();
  const auto drift = cfg.build_drift();
  const auto levels = cfg.effective_levels();
  const unsigned inner = cfg.replicas == 1 ? cfg.threads : 1U;
  const double cell_alpha = cfg.kind == ExperimentKind::parabolic_dim ? cfg.process.alpha : 1.0;
  std::vector<std::optional<ScalingLedger>> ledgers(cfg.replicas);

  auto work = [&](std::size_t i) {
    ReplicaResult r;
    r.index = i;
    r.seed = mix_seed(cfg.seed, i);
    try {
      const auto path = simulate_path(cfg.process, grid, r.seed, inner);
      if (cfg.kind == ExperimentKind::hitcount) {
        const auto fit = hit_count_fit(path, levels);
        r.value = fit.delta;
        std::string means;
        for (double m : fit.means) means += (means.empty() ? "" : " ") + csv_number(m);
        r.detail = "means=" + means;
      } else {
        const auto cloud = cfg.kind == ExperimentKind::range_dim ? range_cloud(path, drift)
                                                                 : graph_cloud(path, drift);
        auto ledger = occupancy(cloud, cell_alpha, levels, inner);
        const auto est = estimate_dimension(ledger, cfg.convention);
        r.value = est.value;
        r.std_error = est.std_error;
        r.detail = window_text(est.window);
        ledgers[i] = std::move(ledger);
      }
      r.ok = true;
    } catch (const std::exception& e) {
      r.ok = false;
      r.detail = e.what();
    }
    return r;
  };
  auto& results = rec.tables["results"];
  ordered_replicas(cfg.replicas, cfg.threads, work, [&](const ReplicaResult& r) {
    auto row = replica_row(rec.config_hash, rec.kind, r);
    if (stream) *stream << CsvTable::row_line(row) << std::flush;
    results.add_row(std::move(row));
    rec.replicas.push_back(r);
  });

  if (cfg.kind != ExperimentKind::hitcount) {
    CsvTable t({"config_hash", "replica", "alpha", "k", "time_side", "space_side", "N_k"});
    for (std::size_t i = 0; i < ledgers.size(); ++i) {
      if (!ledgers[i]) continue;
      const auto& l = *ledgers[i];
      for (std::size_t j = 0; j < l.levels.size(); ++j) {
        t.add_row({rec.config_hash, std::to_string(i), csv_number(l.alpha), std::to_string(l.levels[j]),
                   csv_number(l.time_side(j)), csv_number(l.space_side(j)), std::to_string(l.counts[j])});
      }
      rec.ledgers.push_back(l);
    }
    rec.tables["ledger"] = std::move(t);
  }
}

void run_kernel(const ExperimentConfig& cfg, RunRecord& rec) {
  const auto& k = cfg.kernel;
  ReplicaResult r;
  r.seed = mix_seed(cfg.seed, 0);
  CsvTable t({"config_hash", "kernel", "variable", "alpha", "d", "beta", "tau", "delta_norm",
              "estimate", "stderr", "clip_rate"});
  try {
    const KernelSampler sampler(cfg.process, k.n_mc, r.seed, cfg.threads);
    std::vector<double> xs, ys;
    bool clipped = false;
    for (int j : k.scales) {
      const double s = std::ldexp(1.0, -j);
      const double tau = k.in_tau ? s : k.tau;
      const double dn = k.in_tau ? k.delta_norm : s;
      std::vector<double> delta(static_cast<std::size_t>(cfg.process.d), 0.0);
      delta[0] = dn;
      const auto est = k.kappa ? sampler.kernel_kappa(k.beta, tau, delta)
                               : sampler.kernel_K(k.beta, tau, delta);
      clipped = clipped || !est.valid;
      t.add_row({rec.config_hash, k.kappa ? "kappa" : "K", k.in_tau ? "tau" : "delta",
                 csv_number(cfg.process.alpha), std::to_string(cfg.process.d), csv_number(k.beta),
                 csv_number(tau), csv_number(dn), csv_number(est.value), csv_number(est.std_error),
                 csv_number(est.clip_rate)});
      xs.push_back(std::log2(s));
      ys.push_back(std::log2(est.value));
    }
    const auto fit = stats::least_squares(xs, ys);
    r.value = fit.slope;
    r.std_error = fit.slope_stderr;
    r.ok = !clipped;
    r.detail = clipped ? "clip rate exceeds 1e-4 at some scale" : "";
  } catch (const std::exception& e) {
    r.ok = false;
    r.detail = e.what();
  }
  rec.replicas.push_back(r);
  rec.tables["results"].add_row(replica_row(rec.config_hash, rec.kind, r));
  rec.tables["kernel_sweep"] = std::move(t);
}

void run_energy(const ExperimentConfig& cfg, RunRecord& rec) {
  const auto ts = cfg.build_time_set();
  const auto drift = cfg.build_drift();
  const bool clip = cfg.energy.kernel != EnergyKernel::euclidean_beta;
  std::vector<DiscreteMeasure> family;
  if (cfg.energy.graph_measure) {
    for (std::size_t i = 0; i < cfg.replicas; ++i) {
      const auto path = simulate_path(cfg.process, ts.grid(), mix_seed(cfg.seed, i), cfg.threads);
      family.push_back(graph_measure(path, drift));
    }
  } else {
    family.push_back(frostman_candidate(ts, drift, clip));
  }
  EnergyOptions opt;
  opt.levels = cfg.energy.levels;
  opt.alpha = cfg.process.alpha;
  opt.kernel_mc = cfg.energy.kernel_mc;
  opt.seed = cfg.seed;
  opt.threads = cfg.threads;
  const auto res = capacity_threshold(family, cfg.energy.kernel, cfg.energy.betas, opt,
                                      cfg.energy.resolution);
  ReplicaResult r;
  r.seed = cfg.seed;
  r.ok = true;
  r.value = res.beta_star.value_or(NAN);
  r.detail = res.beta_star ? fmt::format("family={}", family.size()) : res.message;
  rec.replicas.push_back(r);
  rec.tables["results"].add_row(replica_row(rec.config_hash, rec.kind, r));
  CsvTable t({"config_hash", "beta", "level", "partial_sum", "growth_ratio", "verdict"});
  for (const auto& rep : res.reports) {
    for (std::size_t j = 0; j < rep.levels.size(); ++j) {
      t.add_row({rec.config_hash, csv_number(rep.beta), std::to_string(rep.levels[j]),
                 csv_number(rep.partial_sums[j]), csv_number(rep.growth_ratio),
                 std::string(to_string(rep.verdict))});
    }
  }
  rec.energy = res.reports;
  rec.tables["energy"] = std::move(t);
}

void add_formula(CsvTable& t, const std::string& hash, const FormulaResult& f) {
  auto opt = [](const std::optional<double>& v) { return v ? csv_number(*v) : std::string(); };
  t.add_row({hash, f.theorem_tag, f.branch, csv_number(f.inputs.alpha), std::to_string(f.inputs.d),
             csv_number(f.inputs.dim_t), opt(f.inputs.phi_alpha), opt(f.inputs.holder_beta),
             csv_number(f.lo), csv_number(f.hi)});
}

void run_formula(const ExperimentConfig& cfg, RunRecord& rec) {
  const double a = cfg.process.alpha;
  const int d = cfg.process.d;
  const double dim_t = known_dim(cfg);
  const double phi = cfg.formula.phi_alpha.value_or(constant_drift_phi(a, dim_t).value());
  CsvTable t({"config_hash", "theorem_tag", "branch", "alpha", "d", "dim_t", "phi_alpha",
              "holder_beta", "lo", "hi"});
  const auto& h = rec.config_hash;
  const FormulaInputs in{a, d, dim_t, phi, cfg.formula.holder_beta};
  add_formula(t, h, constant_drift_phi(a, dim_t));
  add_formula(t, h, process_graph_phi(a, dim_t));
  add_formula(t, h, process_range_dim(a, d, dim_t));
  add_formula(t, h, graph_dim_with_drift(in));
  add_formula(t, h, range_dim_with_drift(in));
  add_formula(t, h, apriori_bounds(a, d, phi));
  if (a <= 1.0) add_formula(t, h, improvement_bound(a, d, phi));
  if (cfg.formula.holder_beta) {
    const double b = *cfg.formula.holder_beta;
    add_formula(t, h, holder_phi_upper(a, d, dim_t, b));
    const auto bb = brownian_holder_bounds(d, dim_t, b);
    add_formula(t, h, bb.graph);
    add_formula(t, h, bb.range);
  }
  if (cfg.formula.hurst) add_formula(t, h, fbm_graph_phi(*cfg.formula.hurst, dim_t));
  rec.tables["formula"] = std::move(t);
}

}  // namespace

double default_tolerance(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::graph_dim:
    case ExperimentKind::range_dim:
    case ExperimentKind::kernel_sweep: return 0.1;
    case ExperimentKind::parabolic_dim: return 0.12;
    case ExperimentKind::energy_threshold:
    case ExperimentKind::hitcount: return 0.15;
    case ExperimentKind::formula_table: return 0.0;
  }
  return 0.1;
}

std::optional<FormulaResult> experiment_oracle(const ExperimentConfig& c) {
  switch (c.kind) {
    case ExperimentKind::graph_dim:
      if (flat_drift(c)) return graph_oracle(c);
      return std::nullopt;
    case ExperimentKind::parabolic_dim:
      if (flat_drift(c)) return process_graph_phi(c.process.alpha, known_dim(c));
      return std::nullopt;
    case ExperimentKind::range_dim:
      if (flat_drift(c)) return range_oracle(c);
      return std::nullopt;
    case ExperimentKind::kernel_sweep: {
      double e = 0.0;
      try {
        e = envelope_exponent(c.kernel.kappa, c.kernel.in_tau, c.process.alpha, c.process.d, c.kernel.beta);
      } catch (const NotApplicableError&) {
        return std::nullopt;
      }
      FormulaInputs in{c.process.alpha, c.process.d, 1.0, std::nullopt, std::nullopt};
      return FormulaResult{e, INFINITY, "kernel_envelope", c.kernel.in_tau ? "tau" : "delta", in};
    }
    case ExperimentKind::energy_threshold: {
      if (!flat_drift(c)) return std::nullopt;
      if (c.energy.kernel == EnergyKernel::kappa_beta) return range_oracle(c);
      if (c.energy.graph_measure || c.energy.kernel == EnergyKernel::K_beta) return graph_oracle(c);
      const double dt = known_dim(c);
      return FormulaResult{dt, dt, "time_set_dim", "single",
                           FormulaInputs{c.process.alpha, c.process.d, dt, std::nullopt, std::nullopt}};
    }
    case ExperimentKind::hitcount:
    case ExperimentKind::formula_table: return std::nullopt;
  }
  return std::nullopt;
}

RunRecord run_experiment(const ExperimentConfig& config, bool write_files) {
  config.validate();
  RunRecord rec;
  rec.config_hash = config.hash();
  rec.kind = config.kind;
  rec.tolerance = config.tolerance.value_or(default_tolerance(config.kind));
  rec.oracle = experiment_oracle(config);
  rec.tables["results"] = CsvTable(kResultsHeader);

  namespace fs = std::filesystem;
  std::ofstream stream;
  if (write_files) {
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec) throw InputError(fmt::format("cannot create '{}': {}", config.out_dir, ec.message()));
    std::ofstream(fs::path(config.out_dir) / "config.ini", std::ios::binary | std::ios::trunc)
        << config.canonical();
    if (config.kind != ExperimentKind::formula_table) {
      stream.open(fs::path(config.out_dir) / "results.csv", std::ios::binary | std::ios::trunc);
      if (!stream) throw InputError(fmt::format("cannot write results in '{}'", config.out_dir));
      stream << CsvTable::header_line(kResultsHeader);
    }
  }
  std::ostream* out = stream.is_open() ? &stream : nullptr;

  if (is_counting(config.kind)) {
    run_counting(config, rec, out);
  } else if (config.kind == ExperimentKind::kernel_sweep) {
    run_kernel(config, rec);
  } else if (config.kind == ExperimentKind::energy_threshold) {
    run_energy(config, rec);
  } else {
    run_formula(config, rec);
  }

  if (config.kind == ExperimentKind::formula_table) {
    rec.tables.erase("results");
  } else {
    std::vector<double> values;
    for (const auto& r : rec.replicas) {
      if (r.ok && std::isfinite(r.value)) values.push_back(r.value);
    }
    rec.n_ok = values.size();
    const auto ms = stats::mean_stderr(values);
    rec.mean = values.empty() ? NAN : ms.mean;
    rec.std_error = values.empty() ? NAN : ms.std_error;
    rec.runtime_failure = config.kind != ExperimentKind::energy_threshold &&
                          static_cast<double>(rec.n_ok) < 0.8 * static_cast<double>(rec.replicas.size());
    if (config.kind == ExperimentKind::hitcount) {
      rec.pass = !values.empty() && rec.mean <= rec.tolerance;
    } else if (rec.oracle) {
      if (values.empty()) {
        rec.pass = false;
      } else if (rec.oracle->is_value()) {
        rec.pass = std::abs(rec.mean - rec.oracle->value()) <= rec.tolerance;
      } else {
        rec.pass = rec.mean >= rec.oracle->lo - rec.tolerance && rec.mean <= rec.oracle->hi + rec.tolerance;
      }
    } else if (config.kind == ExperimentKind::energy_threshold && values.empty()) {
      rec.pass = false;
    }
    std::string detail = fmt::format("n_ok={}", rec.n_ok);
    if (rec.oracle) {
      detail += rec.oracle->is_value()
                    ? fmt::format(";oracle={}", csv_number(rec.oracle->value()))
                    : fmt::format(";oracle_lo={};oracle_hi={}", csv_number(rec.oracle->lo),
                                  csv_number(rec.oracle->hi));
      detail += fmt::format(";oracle_tag={}", rec.oracle->theorem_tag);
    }
    detail += fmt::format(";tolerance={}", csv_number(rec.tolerance));
    const std::string status = rec.runtime_failure ? "runtime_failure"
                               : !rec.pass         ? "n/a"
                               : *rec.pass         ? "pass"
                                                   : "fail";
    std::vector<std::string> agg{rec.config_hash, std::string(to_string(rec.kind)), "aggregate", "", status,
                                 values.empty() ? "" : csv_number(rec.mean),
                                 values.empty() ? "" : csv_number(rec.std_error), detail};
    if (out) {
      // Counting kinds stream their replica rows as they finish.
      if (!is_counting(config.kind)) {
        for (const auto& row : rec.tables["results"].rows()) *out << CsvTable::row_line(row);
      }
      *out << CsvTable::row_line(agg);
    }
    rec.tables["results"].add_row(std::move(agg));
  }

  if (write_files) {
    for (const auto& [stem, table] : rec.tables) {
      if (stem == "results") continue;
      table.write((fs::path(config.out_dir) / (stem + ".csv")).string());
    }
  }
  return rec;
}

int exit_code(const RunRecord& record) {
  if (record.runtime_failure) return 3;
  if (record.pass && !*record.pass) return 1;
  return 0;
}

}  // namespace parafrac
