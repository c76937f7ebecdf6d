#pragma once

// Comma-separated trajectory files. Values are written with 17 significant
// digits so that a write/read cycle reproduces every double exactly.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qdiff/analysis.hpp"
#include "qdiff/error.hpp"
#include "qdiff/observables.hpp"

namespace qdiff {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Shortest representation that parses back to the same double; used in paths.
inline std::string short_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline constexpr const char* kTrajectoryHeader = "t,sigma2,P_L,qtr_left,qtr_right,trace_defect,purity";

inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << kTrajectoryHeader << '\n';
  for (const auto& s : traj.samples) {
    out << format_double(s.t) << ',' << format_double(s.sigma2) << ',' << format_double(s.p_l)
        << ',' << format_double(s.qtr_left) << ',' << format_double(s.qtr_right) << ','
        << format_double(s.trace_defect) << ',' << format_double(s.purity) << '\n';
  }
}

inline void write_ensemble_csv(std::ostream& out, const EnsembleTrajectory& avg) {
  out << kTrajectoryHeader << ",sigma2_sem,P_L_sem,qtr_left_sem,qtr_right_sem\n";
  for (std::size_t i = 0; i < avg.mean.samples.size(); ++i) {
    const auto& s = avg.mean.samples[i];
    out << format_double(s.t) << ',' << format_double(s.sigma2) << ',' << format_double(s.p_l)
        << ',' << format_double(s.qtr_left) << ',' << format_double(s.qtr_right) << ','
        << format_double(s.trace_defect) << ',' << format_double(s.purity) << ','
        << format_double(avg.sigma2_sem[i]) << ',' << format_double(avg.p_l_sem[i]) << ','
        << format_double(avg.qtr_left_sem[i]) << ',' << format_double(avg.qtr_right_sem[i])
        << '\n';
  }
}

inline void write_profiles_csv(std::ostream& out, const Trajectory& traj) {
  out << "t,site,rho_nn\n";
  for (const auto& p : traj.profiles) {
    for (std::size_t n = 0; n < p.populations.size(); ++n) {
      out << format_double(p.t) << ',' << n << ',' << format_double(p.populations[n]) << '\n';
    }
  }
}

/// Column-addressable numeric table read back from CSV.
class CsvTable {
 public:
  static CsvTable parse(std::istream& in) {
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw IoError("CSV input is empty");
    for (auto& name : split(line)) {
      table.index_[name] = table.names_.size();
      table.names_.push_back(name);
      table.columns_.emplace_back();
    }
    std::size_t row = 1;
    while (std::getline(in, line)) {
      ++row;
      if (line.empty() || line == "\r") continue;
      const auto cells = split(line);
      if (cells.size() != table.names_.size()) {
        throw IoError("CSV row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                      " fields, header has " + std::to_string(table.names_.size()));
      }
      for (std::size_t c = 0; c < cells.size(); ++c) {
        double v = 0.0;
        const auto& cell = cells[c];
        const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
          throw IoError("CSV row " + std::to_string(row) + ": '" + cell + "' is not a number");
        }
        table.columns_[c].push_back(v);
      }
    }
    return table;
  }

  static CsvTable read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return parse(in);
  }

  bool has(std::string_view name) const { return index_.count(std::string(name)) != 0; }

  const std::vector<double>& column(std::string_view name) const {
    const auto it = index_.find(std::string(name));
    if (it == index_.end()) throw IoError("CSV has no column '" + std::string(name) + "'");
    return columns_[it->second];
  }

  std::size_t rows() const { return columns_.empty() ? 0 : columns_.front().size(); }

 private:
  static std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
      out.push_back(cell);
    }
    return out;
  }

  std::vector<std::string> names_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::vector<double>> columns_;
};

template <class Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  writer(out);
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace qdiff
