#pragma once

// Figure-reproduction presets. Each preset is a config document; overrides
// of the form `key.path=value` are applied to the document before parsing,
// so anything a config file can say a preset override can say too.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qdiff/config.hpp"

namespace qdiff {

struct Preset {
  std::string name;
  std::string description;
  json document;
  // Finite-size presets run the same config once per lattice size.
  std::vector<std::size_t> sizes;
  // Set when the paper leaves parameters open and the preset is a reconstruction.
  bool reconstruction = false;
  // Quantity the figure plots against time.
  std::string plotted = "sigma2";
};

namespace detail {

inline json base_document(std::string name, json potential) {
  return json{{"schema", kConfigSchema},
              {"name", std::move(name)},
              {"lattice", {{"sites", 201}, {"half_width", 10}, {"force_odd", true}}},
              {"potential", std::move(potential)},
              {"gammas", {0.0, 0.01, 0.04, 0.1}},
              {"realizations", 1},
              {"base_seed", 1},
              {"time", {{"t_end", 100.0}, {"dt", 0.01}, {"samples", 400}, {"spacing", "log"}}}};
}

}  // namespace detail

inline std::vector<std::string> preset_names() {
  return {"fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8",
          "fig9", "fig10", "fig11", "fig12", "fig13"};
}

inline Preset make_preset(std::string_view name) {
  Preset p;
  p.name = std::string(name);
  if (name == "fig2" || name == "fig3") {
    const double v = name == "fig2" ? 0.5 : 1.5;
    p.description = "periodic sublattice, V=" + short_double(v) + ", L=10";
    p.document = detail::base_document(p.name, {{"kind", "periodic"}, {"amplitude", v}});
  } else if (name == "fig4" || name == "fig5") {
    const double v = name == "fig4" ? 0.5 : 0.8;
    p.description = "disordered sublattice, V=" + short_double(v) + ", 50 realizations";
    p.document = detail::base_document(p.name, {{"kind", "disordered"}, {"amplitude", v}});
    p.document["realizations"] = 50;
  } else if (name == "fig6") {
    p.description = "Fibonacci sublattice of 55 sites, W_A=+0.5, W_B=-0.5";
    p.document = detail::base_document(p.name, {{"kind", "fibonacci"}, {"w_a", 0.5}, {"w_b", -0.5}});
    p.document["lattice"]["half_width"] = 27;
  } else if (name == "fig7" || name == "fig8" || name == "fig9") {
    const double delta = name == "fig7" ? 0.5 : name == "fig8" ? 1.5 : 2.5;
    p.description = "Harper sublattice, delta/J=" + short_double(delta);
    p.document = detail::base_document(
        p.name, {{"kind", "harper"}, {"delta", delta}, {"beta", kGoldenBeta}, {"phi", 0.0}});
  } else if (name == "fig10") {
    p.description = "finite-size sweep, periodic V=0.5, sizes 200 to 600 run as odd sizes";
    p.document = detail::base_document(p.name, {{"kind", "periodic"}, {"amplitude", 0.5}});
    p.document["time"]["t_end"] = 400.0;
    p.document["time"]["samples"] = 600;
    p.sizes = {200, 300, 400, 500, 600};
  } else if (name == "fig11" || name == "fig13") {
    p.description =
        "triangular sublattice in a larger lattice (reconstruction: v_min, v_max and the lattice "
        "size are not given and must be supplied)";
    p.document = detail::base_document(
        p.name, {{"kind", "triangular"}, {"v_min", nullptr}, {"v_max", nullptr}});
    // Lattice and horizon of the configuration the acceptance gate exercises
    // (v_min=0, v_max=10): long enough for the weak-noise QTR pulse to decay.
    p.document["time"]["t_end"] = 1000.0;
    p.document["time"]["samples"] = 1000;
    p.reconstruction = true;
    if (name == "fig13") {
      p.document["time"]["spacing"] = "linear";
      p.plotted = "qtr_right";
    }
  } else if (name == "fig12") {
    p.description = "constant sublattice V=1.0, boundary coherence";
    p.document = detail::base_document(p.name, {{"kind", "constant"}, {"amplitude", 1.0}});
    p.document["time"]["spacing"] = "linear";
    p.plotted = "qtr_right";
  } else {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown preset '" + std::string(name) + "' (known: " + known + ")");
  }
  return p;
}

/// Applies one `a.b.c=value` override. The value is parsed as JSON when it
/// parses, otherwise taken as a string.
inline void apply_override(json& document, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override '" + std::string(assignment) + "' is not of the form key.path=value");
  }
  const std::string path(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &document;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const auto key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("override path '" + path + "' has an empty component");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    if (!node->contains(key)) (*node)[key] = json::object();
    node = &(*node)[key];
    if (!node->is_object()) throw ConfigError("override path '" + path + "' descends into a non-object");
    start = dot + 1;
  }
}

inline ExperimentConfig preset_config(const Preset& preset,
                                      const std::vector<std::string>& overrides = {}) {
  json doc = preset.document;
  for (const auto& o : overrides) apply_override(doc, o);
  return config_from_json(doc);
}

}  // namespace qdiff
