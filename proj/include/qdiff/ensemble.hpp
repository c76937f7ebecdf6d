#pragma once

// Experiment orchestration: dephasing-rate sweeps, disorder ensembles and
// finite-size sweeps, with CSV and manifest output.
//
// Output layout of one experiment directory:
//   manifest                      JSON run manifest
//   gamma=<value>/avg.csv         ensemble mean (identical to the single run when R = 1)
//   gamma=<value>/real=<k>.csv    one file per realization
//   gamma=<value>/profiles=<k>.csv  diagonal snapshots, when requested

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "qdiff/analysis.hpp"
#include "qdiff/config.hpp"
#include "qdiff/csv.hpp"
#include "qdiff/evolution.hpp"
#include "qdiff/version.hpp"

namespace qdiff {

struct RunOptions {
  std::size_t workers = 1;
  std::optional<std::filesystem::path> out_dir;  // no files when unset
  EvolveOptions evolve;
};

struct GammaOutcome {
  double gamma = 0.0;
  bool ok = true;
  std::string error;
  std::vector<Trajectory> realizations;
  EnsembleTrajectory average;
  SaturationReport saturation;
  std::optional<FitResult> fit;
  std::string fit_error;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> notes;
  std::vector<GammaOutcome> outcomes;
  double wall_seconds = 0.0;
  std::string started_at;
  json manifest;

  bool ok() const {
    return std::all_of(outcomes.begin(), outcomes.end(), [](const auto& o) { return o.ok; });
  }
  const GammaOutcome& at_gamma(double gamma) const {
    for (const auto& o : outcomes) {
      if (o.gamma == gamma) return o;
    }
    throw ConfigError("no outcome for gamma " + short_double(gamma));
  }
};

inline std::string gamma_dir(double gamma) { return "gamma=" + short_double(gamma); }

inline json fit_to_json(const FitResult& f) {
  return json{{"exponent", f.exponent},
              {"prefactor", f.prefactor},
              {"stderr_exponent", f.stderr_exponent},
              {"stderr_log_prefactor", f.stderr_log_prefactor},
              {"t_lo", f.window.t_lo},
              {"t_hi", f.window.t_hi},
              {"r_squared", f.r_squared},
              {"n_points", f.n_points}};
}

inline json saturation_to_json(const SaturationReport& s) {
  return json{{"detected", s.detected}, {"t_sat", s.t_sat}, {"sigma2_sat", s.sigma2_sat}};
}

/// Worker pool over independent tasks; each task index runs exactly once.
template <class Task>
void parallel_for(std::size_t count, std::size_t workers, Task&& task) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) task(i);
    });
  }
}

namespace detail {

inline std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline Trajectory run_single(const ExperimentConfig& config, const Hamiltonian& h, double gamma,
                             const TimeGrid& grid, const ObserverSet& observers,
                             const EvolveOptions& options) {
  const auto site = config.lattice().center();
  if (gamma == 0.0 && config.spectral_fast_path) {
    return schrodinger_evolve(h, site, grid, observers);
  }
  return evolve(h, NoiseSpec{gamma}, site, grid, observers, options);
}

}  // namespace detail

inline json build_manifest(const ExperimentResult& r,
                           const std::optional<std::filesystem::path>& out_dir) {
  json results = json::array();
  for (const auto& o : r.outcomes) {
    json entry{{"gamma", o.gamma}, {"directory", gamma_dir(o.gamma)}, {"status", o.ok ? "ok" : "failed"}};
    if (!o.ok) entry["error"] = o.error;
    if (o.ok) {
      entry["saturation"] = saturation_to_json(o.saturation);
      entry["fit"] = o.fit ? fit_to_json(*o.fit) : json(nullptr);
      if (!o.fit_error.empty()) entry["fit_error"] = o.fit_error;
      double trace = 0.0, herm = 0.0;
      for (const auto& s : o.average.mean.samples) {
        trace = std::max(trace, s.trace_defect);
        herm = std::max(herm, s.hermiticity_defect);
      }
      entry["max_trace_defect"] = trace;
      entry["max_hermiticity_defect"] = herm;
      if (out_dir) {
        json files{{"avg", gamma_dir(o.gamma) + "/avg.csv"}};
        json reals = json::array();
        for (std::size_t k = 0; k < o.realizations.size(); ++k) {
          reals.push_back(gamma_dir(o.gamma) + "/real=" + std::to_string(k) + ".csv");
        }
        files["realizations"] = reals;
        if (r.config.record_profiles) {
          json profs = json::array();
          for (std::size_t k = 0; k < o.realizations.size(); ++k) {
            profs.push_back(gamma_dir(o.gamma) + "/profiles=" + std::to_string(k) + ".csv");
          }
          files["profiles"] = profs;
        }
        entry["files"] = files;
      }
    }
    results.push_back(entry);
  }
  return json{{"schema", kConfigSchema},
              {"software", std::string("qdiff ") + kVersion},
              {"config", to_json(r.config)},
              {"effective_sites", r.config.effective_sites()},
              {"seeds", r.seeds},
              {"seed_policy", "realization k uses base_seed + k; the same seeds are reused for every gamma"},
              {"notes", r.notes},
              {"started_at", r.started_at},
              {"wall_seconds", r.wall_seconds},
              {"results", results},
              {"refits", json::array()}};
}

inline void write_experiment_files(const ExperimentResult& r, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  for (const auto& o : r.outcomes) {
    if (!o.ok) continue;
    const auto sub = dir / gamma_dir(o.gamma);
    fs::create_directories(sub, ec);
    if (ec) throw IoError("cannot create " + sub.string() + ": " + ec.message());
    write_file(sub / "avg.csv", [&](std::ostream& out) { write_ensemble_csv(out, o.average); });
    for (std::size_t k = 0; k < o.realizations.size(); ++k) {
      write_file(sub / ("real=" + std::to_string(k) + ".csv"),
                 [&](std::ostream& out) { write_trajectory_csv(out, o.realizations[k]); });
      if (r.config.record_profiles) {
        write_file(sub / ("profiles=" + std::to_string(k) + ".csv"),
                   [&](std::ostream& out) { write_profiles_csv(out, o.realizations[k]); });
      }
    }
  }
  write_file(dir / "manifest", [&](std::ostream& out) { out << r.manifest.dump(2) << '\n'; });
}

/// Runs every (gamma, realization) pair, averages per gamma, then fits the
/// exponent of the averaged variance. Evolution failures mark that gamma as
/// failed and leave the other results intact.
inline ExperimentResult run_experiment(const ExperimentConfig& config, RunOptions options = {}) {
  config.validate();
  const auto clock_start = std::chrono::steady_clock::now();
  ExperimentResult result;
  result.config = config;
  result.started_at = detail::utc_now();
  if (config.effective_sites() != config.sites) {
    result.notes.push_back("requested " + std::to_string(config.sites) + " sites; ran " +
                           std::to_string(config.effective_sites()) +
                           " so that the launch site is the unique center");
  }
  const auto spec = config.lattice();
  const auto grid = config.grid();
  const ObserverSet observers{spec, config.record_profiles, config.profile_stride};
  const auto reals = config.realizations;
  for (std::size_t k = 0; k < reals; ++k) {
    result.seeds.push_back(config.potential.kind == PotentialKind::disordered ? config.seed_for(k) : 0);
  }
  std::vector<Hamiltonian> hamiltonians;
  hamiltonians.reserve(reals);
  for (std::size_t k = 0; k < reals; ++k) hamiltonians.push_back(build_hamiltonian(config.build_potential(k)));

  result.outcomes.resize(config.gammas.size());
  std::vector<std::string> errors(config.gammas.size() * reals);
  for (std::size_t g = 0; g < config.gammas.size(); ++g) {
    result.outcomes[g].gamma = config.gammas[g];
    result.outcomes[g].realizations.resize(reals);
  }
  parallel_for(config.gammas.size() * reals, options.workers, [&](std::size_t task) {
    const std::size_t g = task / reals, k = task % reals;
    try {
      result.outcomes[g].realizations[k] =
          detail::run_single(config, hamiltonians[k], config.gammas[g], grid, observers, options.evolve);
    } catch (const std::exception& e) {
      errors[task] = "realization " + std::to_string(k) + ": " + e.what();
    }
  });

  for (std::size_t g = 0; g < config.gammas.size(); ++g) {
    auto& o = result.outcomes[g];
    for (std::size_t k = 0; k < reals; ++k) {
      if (!errors[g * reals + k].empty()) {
        o.ok = false;
        if (!o.error.empty()) o.error += "; ";
        o.error += errors[g * reals + k];
      }
    }
    if (!o.ok) continue;
    o.average = ensemble_average(o.realizations);
    const auto t = o.average.mean.times();
    const auto s2 = o.average.mean.sigma2();
    o.saturation = detect_saturation(t, s2);
    FitWindow window = default_fit_window(o.saturation, grid.t_end(), config.fit.t_lo);
    if (config.fit.t_hi) window.t_hi = *config.fit.t_hi;
    try {
      o.fit = fit_power_law(t, s2, window);
    } catch (const ConfigError& e) {
      o.fit_error = e.what();
    }
  }
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
  result.manifest = build_manifest(result, options.out_dir);
  if (options.out_dir) write_experiment_files(result, *options.out_dir);
  return result;
}

struct SizeEntry {
  std::size_t sites = 0;
  double gamma = 0.0;
  SaturationReport saturation;
  // Detrended variance of sigma2 after the noiseless saturation time of this size.
  double fluctuation = 0.0;
};

struct FiniteSizeSweep {
  std::vector<SizeEntry> entries;
  std::vector<ExperimentResult> runs;
  std::vector<std::string> warnings;

  // Plateau values for one gamma, in size order; NaN where none was detected.
  std::vector<double> plateaus(double gamma) const {
    std::vector<double> out;
    for (const auto& e : entries) {
      if (e.gamma == gamma) {
        out.push_back(e.saturation.detected ? e.saturation.sigma2_sat
                                            : std::numeric_limits<double>::quiet_NaN());
      }
    }
    return out;
  }

  bool plateau_increasing(double gamma) const {
    const auto p = plateaus(gamma);
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (std::isnan(p[i])) return false;
      if (i > 0 && !(p[i] > p[i - 1])) return false;
    }
    return true;
  }
};

/// Repeats `config` for each lattice size. The post-saturation window for
/// the fluctuation measure starts at the gamma = 0 saturation time of the same
/// size when gamma = 0 is part of the sweep, otherwise at each run's own.
inline FiniteSizeSweep finite_size_sweep(const ExperimentConfig& config,
                                         const std::vector<std::size_t>& sizes,
                                         RunOptions options = {}) {
  if (sizes.empty()) throw ConfigError("finite-size sweep needs at least one size");
  FiniteSizeSweep sweep;
  for (auto n : sizes) {
    auto c = config;
    c.sites = n;
    RunOptions o = options;
    if (options.out_dir) o.out_dir = *options.out_dir / ("sites=" + std::to_string(c.effective_sites()));
    sweep.runs.push_back(run_experiment(c, o));
    const auto& run = sweep.runs.back();
    std::optional<double> reference;
    for (const auto& out : run.outcomes) {
      if (out.gamma == 0.0 && out.ok && out.saturation.detected) reference = out.saturation.t_sat;
    }
    for (const auto& out : run.outcomes) {
      SizeEntry e;
      e.sites = c.effective_sites();
      e.gamma = out.gamma;
      if (!out.ok) {
        sweep.warnings.push_back("sites=" + std::to_string(e.sites) + " gamma=" +
                                 short_double(out.gamma) + " failed: " + out.error);
        e.fluctuation = std::numeric_limits<double>::quiet_NaN();
        sweep.entries.push_back(e);
        continue;
      }
      e.saturation = out.saturation;
      const auto from = reference ? *reference : (out.saturation.detected ? out.saturation.t_sat : 0.0);
      e.fluctuation = (reference || out.saturation.detected)
                          ? tail_fluctuation(out.average.mean.times(), out.average.mean.sigma2(), from)
                          : std::numeric_limits<double>::quiet_NaN();
      sweep.entries.push_back(e);
    }
  }
  if (config.potential.kind == PotentialKind::periodic) {
    for (double g : config.gammas) {
      if (!sweep.plateau_increasing(g)) {
        sweep.warnings.push_back("plateau does not increase monotonically with size at gamma=" +
                                 short_double(g));
      }
    }
  }
  if (options.out_dir) {
    json entries = json::array();
    for (const auto& e : sweep.entries) {
      entries.push_back({{"sites", e.sites},
                         {"gamma", e.gamma},
                         {"saturation", saturation_to_json(e.saturation)},
                         {"fluctuation", std::isnan(e.fluctuation) ? json(nullptr) : json(e.fluctuation)}});
    }
    const json j{{"software", std::string("qdiff ") + kVersion},
                 {"config", to_json(config)},
                 {"sizes", sizes},
                 {"entries", entries},
                 {"warnings", sweep.warnings}};
    std::filesystem::create_directories(*options.out_dir);
    write_file(*options.out_dir / "sweep", [&](std::ostream& out) { out << j.dump(2) << '\n'; });
  }
  return sweep;
}

}  // namespace qdiff
