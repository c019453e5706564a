#ifndef TASOLVE_IO_HPP_
#define TASOLVE_IO_HPP_

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <system_error>
#include <vector>

#include "tasolve/assignment.hpp"
#include "tasolve/models.hpp"
#include "tasolve/network.hpp"
#include "tasolve/solvers.hpp"

namespace tasolve {

/// Shortest decimal string that parses back to the same double.
inline std::string format_double(double v) {
  if (v == 0.0) return "0";  // folds -0
  if (std::isnan(v)) return "nan";
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error("cannot format number");
  return std::string(buf, end);
}

/// Writes to a sibling temporary and renames it into place, so readers never
/// see a partial file.
inline void write_file_atomic(const std::filesystem::path& file, const std::string& content) {
  std::filesystem::path tmp = file;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error("cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, file, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error("cannot rename into " + file.string());
  }
}

namespace detail {

template <typename Tag>
std::string series_csv(const PathSeries<Tag>& s, const Network& net, const char* column) {
  std::string out = std::string("path_id,timestep,") + column + "\n";
  for (std::size_t p = 0; p < s.paths(); ++p) {
    const std::string id = std::to_string(net.paths()[p].id);
    for (std::size_t k = 0; k < s.steps(); ++k) {
      out += id + ',' + std::to_string(k) + ',' + format_double(s(p, k)) + '\n';
    }
  }
  return out;
}

}  // namespace detail

inline std::string assignment_csv(const DemandAssignment& h, const Network& net) {
  return detail::series_csv(h, net, "value_vph");
}

inline std::string path_costs_csv(const PathCosts& c, const Network& net) {
  return detail::series_csv(c, net, "cost_seconds");
}

/// Occupancy at the start of each step plus that step's flows (vehicles).
/// Only (link, path) pairs where the path uses the link are listed.
inline std::string state_csv(const StateTrajectory& traj, const Network& net) {
  std::string out = "link_id,path_id,timestep,vehicles,inflow,outflow\n";
  for (std::size_t l = 0; l < traj.links(); ++l) {
    for (std::size_t p = 0; p < traj.paths(); ++p) {
      const auto& pl = net.path_links(p);
      if (std::find(pl.begin(), pl.end(), l) == pl.end()) continue;
      const std::string prefix =
          std::to_string(net.links()[l].id) + ',' + std::to_string(net.paths()[p].id) + ',';
      for (std::size_t k = 0; k < traj.steps(); ++k) {
        out += prefix + std::to_string(k) + ',' + format_double(traj.vehicles(l, p, k)) + ',' +
               format_double(traj.inflow(l, p, k)) + ',' + format_double(traj.outflow(l, p, k)) +
               '\n';
      }
    }
  }
  return out;
}

inline std::string iterations_csv(const std::vector<IterationRecord>& log) {
  std::string out = "k,gap,step,wall_ms\n";
  for (const auto& r : log) {
    out += std::to_string(r.k) + ',' + format_double(r.gap) + ',' + format_double(r.step) + ',' +
           format_double(r.wall_ms) + '\n';
  }
  return out;
}

/// `state` may be shorter than `flow` or empty; missing cells stay blank.
inline std::string metrics_csv(std::span<const double> flow, std::span<const double> state) {
  std::string out = "timestep,d_wardrop_flow,d_wardrop_state\n";
  for (std::size_t k = 0; k < flow.size(); ++k) {
    out += std::to_string(k) + ',' + format_double(flow[k]) + ',';
    if (k < state.size()) out += format_double(state[k]);
    out += '\n';
  }
  return out;
}

}  // namespace tasolve

#endif  // TASOLVE_IO_HPP_
