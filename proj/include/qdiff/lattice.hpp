#pragma once

// Lattice geometry, on-site potential families and the tight-binding Hamiltonian.
//
// Sites are indexed 0..N-1. The launch site c = floor(N/2) is the lattice
// center, and the potential-carrying sublattice occupies [c-L, c+L]. Every
// generator writes zeros outside that range.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "qdiff/error.hpp"
#include "qdiff/rng.hpp"

namespace qdiff {

class LatticeSpec {
 public:
  LatticeSpec(std::size_t total_sites, std::size_t half_width)
      : sites_(total_sites), half_width_(half_width) {
    if (total_sites == 0) throw ConfigError("lattice must have at least one site");
    if (2 * half_width + 1 > total_sites) {
      throw ConfigError("sublattice of " + std::to_string(2 * half_width + 1) +
                        " sites does not fit in a lattice of " +
                        std::to_string(total_sites) + " sites");
    }
  }

  std::size_t sites() const noexcept { return sites_; }
  std::size_t half_width() const noexcept { return half_width_; }
  std::size_t center() const noexcept { return sites_ / 2; }
  std::size_t sublattice_size() const noexcept { return 2 * half_width_ + 1; }
  std::size_t first_sublattice_site() const noexcept { return center() - half_width_; }
  std::size_t last_sublattice_site() const noexcept { return center() + half_width_; }

  bool in_sublattice(std::size_t site) const noexcept {
    return site >= first_sublattice_site() && site <= last_sublattice_site();
  }

  // Signed offset of `site` from the center.
  std::ptrdiff_t relative(std::size_t site) const noexcept {
    return static_cast<std::ptrdiff_t>(site) - static_cast<std::ptrdiff_t>(center());
  }

  friend bool operator==(const LatticeSpec&, const LatticeSpec&) = default;

 private:
  std::size_t sites_;
  std::size_t half_width_;
};

enum class PotentialKind { zero, constant, periodic, disordered, fibonacci, harper, triangular };

inline std::string_view to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::zero: return "zero";
    case PotentialKind::constant: return "constant";
    case PotentialKind::periodic: return "periodic";
    case PotentialKind::disordered: return "disordered";
    case PotentialKind::fibonacci: return "fibonacci";
    case PotentialKind::harper: return "harper";
    case PotentialKind::triangular: return "triangular";
  }
  return "unknown";
}

inline PotentialKind parse_potential_kind(std::string_view name) {
  for (auto kind : {PotentialKind::zero, PotentialKind::constant, PotentialKind::periodic,
                    PotentialKind::disordered, PotentialKind::fibonacci, PotentialKind::harper,
                    PotentialKind::triangular}) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("unknown potential kind '" + std::string(name) + "'");
}

// Generation parameters; only those relevant to the kind are set.
struct PotentialParams {
  std::optional<double> amplitude;  // V (periodic, disordered, constant)
  std::optional<std::uint64_t> seed;
  std::optional<double> delta;  // Harper strength in units of the hopping
  std::optional<double> beta;
  std::optional<double> phi;
  std::optional<double> w_a;
  std::optional<double> w_b;
  std::optional<int> generation;  // Fibonacci generation l
  std::optional<double> v_min;
  std::optional<double> v_max;
};

struct PotentialProfile {
  LatticeSpec lattice;
  PotentialKind kind;
  PotentialParams params;
  std::vector<double> values;
};

inline constexpr double kGoldenBeta = 0.6180339887498949;  // (sqrt(5) - 1) / 2

namespace detail {

inline PotentialProfile empty_profile(const LatticeSpec& spec, PotentialKind kind) {
  return PotentialProfile{spec, kind, {}, std::vector<double>(spec.sites(), 0.0)};
}

inline void require_nonnegative(double value, const char* name) {
  if (!(value >= 0.0)) throw ConfigError(std::string(name) + " must be non-negative");
}

}  // namespace detail

inline PotentialProfile zero_potential(const LatticeSpec& spec) {
  return detail::empty_profile(spec, PotentialKind::zero);
}

inline PotentialProfile constant_potential(const LatticeSpec& spec, double amplitude) {
  auto profile = detail::empty_profile(spec, PotentialKind::constant);
  profile.params.amplitude = amplitude;
  for (auto i = spec.first_sublattice_site(); i <= spec.last_sublattice_site(); ++i) {
    profile.values[i] = amplitude;
  }
  return profile;
}

/// Alternating sublattice: W = V * (-1)^(i - c), so the launch site sits on +V.
inline PotentialProfile periodic_potential(const LatticeSpec& spec, double amplitude) {
  detail::require_nonnegative(amplitude, "periodic amplitude");
  auto profile = detail::empty_profile(spec, PotentialKind::periodic);
  profile.params.amplitude = amplitude;
  for (auto i = spec.first_sublattice_site(); i <= spec.last_sublattice_site(); ++i) {
    profile.values[i] = (spec.relative(i) % 2 == 0) ? amplitude : -amplitude;
  }
  return profile;
}

/// Independent +V / -V draws per sublattice site. Site k (counted from the
/// left sublattice edge) takes the top bit of draw k of the seed's stream.
inline PotentialProfile disordered_potential(const LatticeSpec& spec, double amplitude,
                                             std::uint64_t seed) {
  detail::require_nonnegative(amplitude, "disorder amplitude");
  auto profile = detail::empty_profile(spec, PotentialKind::disordered);
  profile.params.amplitude = amplitude;
  profile.params.seed = seed;
  const SplitMix64 stream(seed);
  const auto first = spec.first_sublattice_site();
  for (std::size_t k = 0; k < spec.sublattice_size(); ++k) {
    profile.values[first + k] = (stream.at(k) >> 63) ? amplitude : -amplitude;
  }
  return profile;
}

/// Letter count of Fibonacci generation l (1, 1, 2, 3, 5, ...).
inline std::size_t fibonacci_length(int generation) {
  if (generation < 1) throw ConfigError("Fibonacci generation must be >= 1");
  std::size_t prev = 1, cur = 1;
  for (int l = 2; l < generation; ++l) {
    const auto next = prev + cur;
    prev = cur;
    cur = next;
  }
  return generation == 1 ? prev : cur;
}

/// Generation l of the substitution A -> B, B -> AB seeded with "A".
inline std::string fibonacci_sequence(int generation) {
  if (generation < 1) throw ConfigError("Fibonacci generation must be >= 1");
  std::string word = "A";
  for (int l = 1; l < generation; ++l) {
    std::string next;
    next.reserve(word.size() * 2);
    for (char letter : word) next += (letter == 'A') ? "B" : "AB";
    word = std::move(next);
  }
  return word;
}

// Smallest generation whose word has exactly `length` letters.
inline int fibonacci_generation_for_length(std::size_t length) {
  std::size_t below = 0;
  for (int l = 1;; ++l) {
    const auto len = fibonacci_length(l);
    if (len == length) return l;
    if (len > length) {
      throw ConfigError("Fibonacci sublattice needs a Fibonacci site count; " +
                        std::to_string(length) + " is not one (nearest valid sizes: " +
                        std::to_string(below) + " and " + std::to_string(len) + ")");
    }
    below = len;
  }
}

inline PotentialProfile fibonacci_potential(const LatticeSpec& spec, double w_a, double w_b) {
  const int generation = fibonacci_generation_for_length(spec.sublattice_size());
  const auto word = fibonacci_sequence(generation);
  auto profile = detail::empty_profile(spec, PotentialKind::fibonacci);
  profile.params.w_a = w_a;
  profile.params.w_b = w_b;
  profile.params.generation = generation;
  const auto first = spec.first_sublattice_site();
  for (std::size_t k = 0; k < word.size(); ++k) {
    profile.values[first + k] = word[k] == 'A' ? w_a : w_b;
  }
  return profile;
}

/// Aubry-Andre modulation W = delta * cos(2 pi beta i + phi), i relative to the center.
inline PotentialProfile harper_potential(const LatticeSpec& spec, double delta,
                                         double beta = kGoldenBeta, double phi = 0.0) {
  detail::require_nonnegative(delta, "Harper strength");
  auto profile = detail::empty_profile(spec, PotentialKind::harper);
  profile.params.delta = delta;
  profile.params.beta = beta;
  profile.params.phi = phi;
  for (auto i = spec.first_sublattice_site(); i <= spec.last_sublattice_site(); ++i) {
    const auto r = static_cast<double>(spec.relative(i));
    profile.values[i] = delta * std::cos(2.0 * std::numbers::pi * beta * r + phi);
  }
  return profile;
}

/// Symmetric linear ramp: v_min on both sublattice edges, v_max on the center site.
inline PotentialProfile triangular_potential(const LatticeSpec& spec, double v_min,
                                             double v_max) {
  if (!(v_max >= v_min)) throw ConfigError("triangular potential needs v_max >= v_min");
  // 2L+1 is odd by construction of LatticeSpec, so the apex is a single site.
  auto profile = detail::empty_profile(spec, PotentialKind::triangular);
  profile.params.v_min = v_min;
  profile.params.v_max = v_max;
  const auto half = static_cast<double>(spec.half_width());
  for (auto i = spec.first_sublattice_site(); i <= spec.last_sublattice_site(); ++i) {
    const auto distance = static_cast<double>(std::abs(spec.relative(i)));
    profile.values[i] = half == 0.0 ? v_max : v_max - (v_max - v_min) * distance / half;
  }
  return profile;
}

/// Real symmetric tridiagonal operator. `bonds[k]` couples sites k and k+1.
struct Hamiltonian {
  std::vector<double> diagonal;
  std::vector<double> bonds;

  std::size_t size() const noexcept { return diagonal.size(); }
};

// Default hopping element: H contains -t with t = -1 between nearest neighbours.
inline constexpr double kHopping = 1.0;

inline Hamiltonian build_hamiltonian(const PotentialProfile& profile, double hopping = kHopping) {
  Hamiltonian h;
  h.diagonal = profile.values;
  h.bonds.assign(profile.values.empty() ? 0 : profile.values.size() - 1, hopping);
  return h;
}

/// Two-column text export: site index and on-site value.
inline void write_profile(std::ostream& out, const PotentialProfile& profile) {
  out << "# site,V  kind=" << to_string(profile.kind) << '\n';
  char buf[64];
  for (std::size_t i = 0; i < profile.values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, profile.values[i]);
    out << buf;
  }
}

}  // namespace qdiff
