#pragma once

// Experiment configuration: a versioned JSON document with nested sections
// for the lattice, the potential, the time grid and the fit window.
//
//   {
//     "schema": 1,
//     "name": "periodic-v0.5",
//     "lattice":   {"sites": 201, "half_width": 10, "force_odd": true},
//     "potential": {"kind": "periodic", "amplitude": 0.5},
//     "gammas": [0, 0.01, 0.04, 0.1],
//     "realizations": 1,
//     "base_seed": 1,
//     "time": {"t_end": 100, "dt": 0.01, "samples": 400, "spacing": "log"},
//     "observables": {"profiles": false, "profile_stride": 10},
//     "fit": {"t_lo": 1.0, "t_hi": null},
//     "spectral_fast_path": true
//   }

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qdiff/error.hpp"
#include "qdiff/evolution.hpp"
#include "qdiff/lattice.hpp"

namespace qdiff {

using json = nlohmann::json;

inline constexpr int kConfigSchema = 1;

struct PotentialConfig {
  PotentialKind kind = PotentialKind::zero;
  double amplitude = 0.0;
  double delta = 0.0;
  double beta = kGoldenBeta;
  double phi = 0.0;
  double w_a = 0.5;
  double w_b = -0.5;
  std::optional<double> v_min;
  std::optional<double> v_max;
};

enum class GridSpacing { log, linear };

struct TimeConfig {
  double t_end = 100.0;
  double dt = 0.01;
  std::size_t samples = 400;
  GridSpacing spacing = GridSpacing::log;
};

struct FitConfig {
  double t_lo = 1.0;
  std::optional<double> t_hi;  // unset: end at the detected saturation time
};

struct ExperimentConfig {
  int schema = kConfigSchema;
  std::string name = "experiment";
  std::size_t sites = 201;
  std::size_t half_width = 10;
  bool force_odd = true;
  PotentialConfig potential;
  std::vector<double> gammas{0.0};
  std::size_t realizations = 1;
  std::uint64_t base_seed = 1;
  TimeConfig time;
  bool record_profiles = false;
  std::size_t profile_stride = 10;
  FitConfig fit;
  bool spectral_fast_path = true;

  // Lattice actually simulated; even sizes become N + 1 when force_odd is set.
  std::size_t effective_sites() const {
    return (force_odd && sites % 2 == 0) ? sites + 1 : sites;
  }
  LatticeSpec lattice() const { return LatticeSpec(effective_sites(), half_width); }

  TimeGrid grid() const {
    return time.spacing == GridSpacing::log
               ? TimeGrid::log_spaced(time.t_end, time.samples, time.dt)
               : TimeGrid::linear(time.t_end, time.samples, time.dt);
  }

  void validate() const {
    if (schema != kConfigSchema) {
      throw ConfigError("unsupported config schema " + std::to_string(schema) + " (expected " +
                        std::to_string(kConfigSchema) + ")");
    }
    (void)lattice();
    if (realizations < 1) throw ConfigError("realizations must be >= 1");
    if (realizations > 1 && potential.kind != PotentialKind::disordered) {
      throw ConfigError("more than one realization only makes sense for a disordered potential");
    }
    if (gammas.empty()) throw ConfigError("gammas must list at least one dephasing rate");
    for (double g : gammas) NoiseSpec{g}.validate();
    for (std::size_t i = 0; i < gammas.size(); ++i) {
      for (std::size_t j = i + 1; j < gammas.size(); ++j) {
        if (gammas[i] == gammas[j]) throw ConfigError("gammas must be distinct");
      }
    }
    if (potential.kind == PotentialKind::triangular && (!potential.v_min || !potential.v_max)) {
      throw ConfigError("triangular potential requires explicit potential.v_min and potential.v_max");
    }
    (void)grid();
    if (fit.t_hi && !(fit.t_lo < *fit.t_hi)) throw ConfigError("fit.t_lo must be below fit.t_hi");
    if (profile_stride < 1) throw ConfigError("observables.profile_stride must be >= 1");
    (void)build_potential(0);
  }

  PotentialProfile build_potential(std::size_t realization) const {
    const auto spec = lattice();
    switch (potential.kind) {
      case PotentialKind::zero: return zero_potential(spec);
      case PotentialKind::constant: return constant_potential(spec, potential.amplitude);
      case PotentialKind::periodic: return periodic_potential(spec, potential.amplitude);
      case PotentialKind::disordered:
        return disordered_potential(spec, potential.amplitude, seed_for(realization));
      case PotentialKind::fibonacci: return fibonacci_potential(spec, potential.w_a, potential.w_b);
      case PotentialKind::harper:
        return harper_potential(spec, potential.delta, potential.beta, potential.phi);
      case PotentialKind::triangular:
        if (!potential.v_min || !potential.v_max) {
          throw ConfigError("triangular potential requires explicit v_min and v_max");
        }
        return triangular_potential(spec, *potential.v_min, *potential.v_max);
    }
    throw ConfigError("unhandled potential kind");
  }

  std::uint64_t seed_for(std::size_t realization) const { return base_seed + realization; }
};

namespace detail {

template <class T>
void read_opt(const json& j, const char* key, T& into) {
  if (j.contains(key) && !j.at(key).is_null()) into = j.at(key).get<T>();
}

inline void reject_unknown(const json& j, std::initializer_list<const char*> known,
                           const std::string& where) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || item.key() == k;
    if (!ok) throw ConfigError("unknown key '" + item.key() + "' in " + where);
  }
}

}  // namespace detail

inline json to_json(const ExperimentConfig& c) {
  json pot = {{"kind", std::string(to_string(c.potential.kind))}};
  switch (c.potential.kind) {
    case PotentialKind::constant:
    case PotentialKind::periodic:
    case PotentialKind::disordered: pot["amplitude"] = c.potential.amplitude; break;
    case PotentialKind::harper:
      pot["delta"] = c.potential.delta;
      pot["beta"] = c.potential.beta;
      pot["phi"] = c.potential.phi;
      break;
    case PotentialKind::fibonacci:
      pot["w_a"] = c.potential.w_a;
      pot["w_b"] = c.potential.w_b;
      break;
    case PotentialKind::triangular:
      pot["v_min"] = c.potential.v_min ? json(*c.potential.v_min) : json(nullptr);
      pot["v_max"] = c.potential.v_max ? json(*c.potential.v_max) : json(nullptr);
      break;
    case PotentialKind::zero: break;
  }
  return json{
      {"schema", c.schema},
      {"name", c.name},
      {"lattice", {{"sites", c.sites}, {"half_width", c.half_width}, {"force_odd", c.force_odd}}},
      {"potential", pot},
      {"gammas", c.gammas},
      {"realizations", c.realizations},
      {"base_seed", c.base_seed},
      {"time",
       {{"t_end", c.time.t_end},
        {"dt", c.time.dt},
        {"samples", c.time.samples},
        {"spacing", c.time.spacing == GridSpacing::log ? "log" : "linear"}}},
      {"observables", {{"profiles", c.record_profiles}, {"profile_stride", c.profile_stride}}},
      {"fit", {{"t_lo", c.fit.t_lo}, {"t_hi", c.fit.t_hi ? json(*c.fit.t_hi) : json(nullptr)}}},
      {"spectral_fast_path", c.spectral_fast_path},
  };
}

inline ExperimentConfig config_from_json(const json& j) {
  try {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    detail::reject_unknown(j,
                           {"schema", "name", "lattice", "potential", "gammas", "realizations",
                            "base_seed", "time", "observables", "fit", "spectral_fast_path",
                            "description"},
                           "config");
    ExperimentConfig c;
    if (!j.contains("schema")) throw ConfigError("config is missing the 'schema' field");
    c.schema = j.at("schema").get<int>();
    detail::read_opt(j, "name", c.name);
    if (j.contains("lattice")) {
      const auto& l = j.at("lattice");
      detail::reject_unknown(l, {"sites", "half_width", "force_odd"}, "lattice");
      detail::read_opt(l, "sites", c.sites);
      detail::read_opt(l, "half_width", c.half_width);
      detail::read_opt(l, "force_odd", c.force_odd);
    }
    if (j.contains("potential")) {
      const auto& p = j.at("potential");
      detail::reject_unknown(p, {"kind", "amplitude", "delta", "beta", "phi", "w_a", "w_b", "v_min", "v_max"},
                             "potential");
      c.potential.kind = parse_potential_kind(p.at("kind").get<std::string>());
      detail::read_opt(p, "amplitude", c.potential.amplitude);
      detail::read_opt(p, "delta", c.potential.delta);
      detail::read_opt(p, "beta", c.potential.beta);
      detail::read_opt(p, "phi", c.potential.phi);
      detail::read_opt(p, "w_a", c.potential.w_a);
      detail::read_opt(p, "w_b", c.potential.w_b);
      if (p.contains("v_min") && !p.at("v_min").is_null()) c.potential.v_min = p.at("v_min").get<double>();
      if (p.contains("v_max") && !p.at("v_max").is_null()) c.potential.v_max = p.at("v_max").get<double>();
    }
    detail::read_opt(j, "gammas", c.gammas);
    detail::read_opt(j, "realizations", c.realizations);
    detail::read_opt(j, "base_seed", c.base_seed);
    if (j.contains("time")) {
      const auto& t = j.at("time");
      detail::reject_unknown(t, {"t_end", "dt", "samples", "spacing"}, "time");
      detail::read_opt(t, "t_end", c.time.t_end);
      detail::read_opt(t, "dt", c.time.dt);
      detail::read_opt(t, "samples", c.time.samples);
      if (t.contains("spacing")) {
        const auto s = t.at("spacing").get<std::string>();
        if (s == "log") c.time.spacing = GridSpacing::log;
        else if (s == "linear") c.time.spacing = GridSpacing::linear;
        else throw ConfigError("time.spacing must be 'log' or 'linear'");
      }
    }
    if (j.contains("observables")) {
      const auto& o = j.at("observables");
      detail::reject_unknown(o, {"profiles", "profile_stride"}, "observables");
      detail::read_opt(o, "profiles", c.record_profiles);
      detail::read_opt(o, "profile_stride", c.profile_stride);
    }
    if (j.contains("fit")) {
      const auto& f = j.at("fit");
      detail::reject_unknown(f, {"t_lo", "t_hi"}, "fit");
      detail::read_opt(f, "t_lo", c.fit.t_lo);
      if (f.contains("t_hi") && !f.at("t_hi").is_null()) c.fit.t_hi = f.at("t_hi").get<double>();
    }
    detail::read_opt(j, "spectral_fast_path", c.spectral_fast_path);
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace qdiff
