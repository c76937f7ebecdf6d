// qdiff command-line front end.
//
//   qdiff run <config> [--workers K] [--out DIR] [--dry-run]
//   qdiff fit <csv> --window t_lo:t_hi [--manifest PATH]
//   qdiff plot <spec.json | experiment-dir> [--y COLUMN] [--layout grid|overlay]
//   qdiff preset <name> [key.path=value ...] [--workers K] [--out DIR] [--dry-run] [--print]
//
// Exit codes: 0 ok, 2 configuration error, 3 numeric diagnostic, 4 I/O failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qdiff/qdiff.hpp"

namespace fs = std::filesystem;
using namespace qdiff;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

fs::path output_root() {
  const char* env = std::getenv("QDIFF_OUTPUT_ROOT");
  return env && *env ? fs::path(env) : fs::path("runs");
}

void print_derived(const ExperimentConfig& c) {
  const auto spec = c.lattice();
  const auto grid = c.grid();
  std::cout << "name           " << c.name << '\n'
            << "sites          " << spec.sites();
  if (spec.sites() != c.sites) std::cout << " (requested " << c.sites << ")";
  std::cout << '\n'
            << "sublattice     [" << spec.first_sublattice_site() << ", " << spec.last_sublattice_site()
            << "], center " << spec.center() << '\n'
            << "potential      " << to_string(c.potential.kind) << '\n'
            << "gammas         ";
  for (double g : c.gammas) std::cout << short_double(g) << ' ';
  std::cout << '\n'
            << "realizations   " << c.realizations << " (seeds " << c.seed_for(0) << ".."
            << c.seed_for(c.realizations - 1) << ")\n"
            << "time grid      " << grid.size() << " samples to t=" << short_double(grid.t_end())
            << ", dt=" << short_double(grid.dt()) << ", " << grid.steps().back() << " steps\n";
}

void print_table(const ExperimentResult& r) {
  std::printf("%-8s %-7s %-10s %-10s %-20s %-9s %s\n", "gamma", "status", "nu", "stderr", "window",
              "t_sat", "sigma2_sat");
  for (const auto& o : r.outcomes) {
    if (!o.ok) {
      std::printf("%-8s %-7s %s\n", short_double(o.gamma).c_str(), "failed", o.error.c_str());
      continue;
    }
    char window[64] = "-";
    char nu[32] = "-", se[32] = "-";
    if (o.fit) {
      std::snprintf(window, sizeof window, "[%.3g, %.3g]", o.fit->window.t_lo, o.fit->window.t_hi);
      std::snprintf(nu, sizeof nu, "%.4f", o.fit->exponent);
      std::snprintf(se, sizeof se, "%.2e", o.fit->stderr_exponent);
    }
    char tsat[32] = "-", ssat[32] = "-";
    if (o.saturation.detected) {
      std::snprintf(tsat, sizeof tsat, "%.3g", o.saturation.t_sat);
      std::snprintf(ssat, sizeof ssat, "%.4g", o.saturation.sigma2_sat);
    }
    std::printf("%-8s %-7s %-10s %-10s %-20s %-9s %s\n", short_double(o.gamma).c_str(), "ok", nu, se,
                window, tsat, ssat);
    if (!o.fit_error.empty()) std::printf("         fit: %s\n", o.fit_error.c_str());
  }
}

int finish(const ExperimentResult& r, const fs::path& out) {
  print_table(r);
  std::cout << "wrote " << out.string() << '\n';
  return r.ok() ? 0 : kExitNumeric;
}

int run_config(const ExperimentConfig& config, std::size_t workers, const std::string& out_flag,
               bool dry_run, const std::vector<std::size_t>& sizes = {}) {
  print_derived(config);
  if (dry_run) return 0;
  const fs::path out = out_flag.empty() ? output_root() / config.name : fs::path(out_flag);
  if (!sizes.empty()) {
    const auto sweep = finite_size_sweep(config, sizes, RunOptions{workers, out, {}});
    std::printf("%-7s %-8s %-9s %-12s %s\n", "sites", "gamma", "t_sat", "sigma2_sat", "fluctuation");
    for (const auto& e : sweep.entries) {
      std::printf("%-7zu %-8s %-9.3g %-12.5g %.4g\n", e.sites, short_double(e.gamma).c_str(),
                  e.saturation.detected ? e.saturation.t_sat : NAN,
                  e.saturation.detected ? e.saturation.sigma2_sat : NAN, e.fluctuation);
    }
    for (const auto& w : sweep.warnings) std::cerr << "warning: " << w << '\n';
    std::cout << "wrote " << out.string() << '\n';
    for (const auto& r : sweep.runs) {
      if (!r.ok()) return kExitNumeric;
    }
    return 0;
  }
  return finish(run_experiment(config, RunOptions{workers, out, {}}), out);
}

FitWindow parse_window(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("--window must be t_lo:t_hi");
  auto number = [&](std::string_view s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw ConfigError("--window bound '" + std::string(s) + "' is not a number");
    }
    return v;
  };
  const std::string_view all(text);
  return {number(all.substr(0, colon)), number(all.substr(colon + 1))};
}

int cmd_fit(const std::string& csv_path, const std::string& window_text, const std::string& manifest_flag) {
  const auto window = parse_window(window_text);
  const auto table = CsvTable::read(csv_path);
  const auto& t = table.column("t");
  const auto& s2 = table.column("sigma2");
  if (t.empty() || window.t_hi < t.front() || window.t_lo > t.back()) {
    throw ConfigError("fit window lies outside the data span");
  }
  const auto fit = fit_power_law(t, s2, window);
  std::printf("nu = %.17g\nstderr = %.17g\nprefactor = %.17g\nr_squared = %.17g\nn_points = %zu\n",
              fit.exponent, fit.stderr_exponent, fit.prefactor, fit.r_squared, fit.n_points);

  fs::path manifest = manifest_flag;
  if (manifest.empty()) {
    const auto guess = fs::absolute(csv_path).parent_path().parent_path() / "manifest";
    if (fs::exists(guess)) manifest = guess;
  }
  if (!manifest.empty()) {
    json m;
    {
      std::ifstream in(manifest);
      if (!in) throw IoError("cannot read manifest " + manifest.string());
      try {
        in >> m;
      } catch (const json::exception& e) {
        throw IoError("unreadable manifest " + manifest.string() + ": " + e.what());
      }
    }
    json entry = fit_to_json(fit);
    entry["csv"] = fs::relative(fs::absolute(csv_path), fs::absolute(manifest).parent_path()).string();
    m["refits"].push_back(entry);
    write_file(manifest, [&](std::ostream& out) { out << m.dump(2) << '\n'; });
    std::cout << "appended to " << manifest.string() << '\n';
  }
  return 0;
}

int cmd_plot(const std::string& target, const std::string& y, const std::string& layout) {
  PlotSpec spec;
  if (fs::is_directory(target)) {
    spec = plot_spec_from_manifest(target, y.empty() ? "sigma2" : y);
  } else {
    std::ifstream in(target);
    if (!in) throw IoError("cannot read plot spec " + target);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw ConfigError("malformed plot spec " + target + ": " + e.what());
    }
    spec = plot_spec_from_json(j, fs::path(target).parent_path());
    if (!y.empty()) spec.y = y;
  }
  if (layout == "overlay") spec.layout = PlotLayout::overlay;
  else if (layout == "grid") spec.layout = PlotLayout::grid;
  else if (!layout.empty()) throw ConfigError("--layout must be grid or overlay");
  render_svg_file(spec);
  std::cout << "wrote " << spec.output.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wave-packet diffusion in tight-binding lattices under dephasing noise"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string config_path, out_dir, csv_path, window, manifest, plot_target, y_column, layout, preset_name;
  std::size_t workers = 1;
  bool dry_run = false, print_only = false;
  std::vector<std::string> overrides;

  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", config_path, "config file (JSON)")->required();
  run->add_option("--workers", workers, "concurrent evolutions")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "output directory (default $QDIFF_OUTPUT_ROOT/<name>)");
  run->add_flag("--dry-run", dry_run, "validate and print derived parameters only");

  auto* fit = app.add_subcommand("fit", "refit the exponent of a trajectory CSV");
  fit->add_option("csv", csv_path, "CSV with t and sigma2 columns")->required();
  fit->add_option("--window", window, "fit window t_lo:t_hi")->required();
  fit->add_option("--manifest", manifest, "manifest to append the refit to");

  auto* plot = app.add_subcommand("plot", "render an SVG plot");
  plot->add_option("spec", plot_target, "plot spec (JSON) or experiment directory")->required();
  plot->add_option("--y", y_column, "column to plot (default sigma2)");
  plot->add_option("--layout", layout, "grid or overlay");

  auto* preset = app.add_subcommand("preset", "run a figure preset");
  preset->add_option("name", preset_name, "fig2 ... fig13")->required();
  preset->add_option("overrides", overrides, "key.path=value overrides");
  preset->add_option("--workers", workers, "concurrent evolutions")->check(CLI::PositiveNumber);
  preset->add_option("--out", out_dir, "output directory (default $QDIFF_OUTPUT_ROOT/<name>)");
  preset->add_flag("--dry-run", dry_run, "validate and print derived parameters only");
  preset->add_flag("--print", print_only, "print the resolved config document and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return run_config(load_config(config_path), workers, out_dir, dry_run);
    if (*fit) return cmd_fit(csv_path, window, manifest);
    if (*plot) return cmd_plot(plot_target, y_column, layout);
    if (*preset) {
      const auto p = make_preset(preset_name);
      const auto config = preset_config(p, overrides);
      if (print_only) {
        std::cout << to_json(config).dump(2) << '\n';
        return 0;
      }
      if (p.reconstruction) {
        std::cout << "note: " << p.name << " is a reconstruction; parameters are user supplied\n";
      }
      return run_config(config, workers, out_dir, dry_run, p.sizes);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  }
  return 0;
}
