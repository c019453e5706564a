#ifndef TASOLVE_NETWORK_HPP_
#define TASOLVE_NETWORK_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tasolve/grid.hpp"

namespace tasolve {

/// Raised on configuration or precondition failures.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kNoIndex = std::numeric_limits<std::size_t>::max();

struct Link {
  int id = 0;
  int from_node = 0;
  int to_node = 0;
  double length_m = 0.0;
  double capacity_vph = 0.0;
  double free_flow_speed_kph = 0.0;
  std::optional<double> jam_density_vpkm;  // only read by the CTM
  double bpr_gamma = 0.15;                 // only read by the static model

  double free_flow_speed_mps() const { return free_flow_speed_kph / 3.6; }
  /// Seconds.
  double free_flow_time() const { return length_m / free_flow_speed_mps(); }
  /// Vehicles per kilometre at which flow reaches capacity.
  double critical_density() const { return capacity_vph / free_flow_speed_kph; }
};

struct Path {
  int id = 0;
  std::vector<int> links;  // link ids, in travel order
  int od = 0;
};

/// Piecewise-constant OD demand rate (veh/h), one value per timestep.
struct DemandProfile {
  std::vector<double> values;
  double dt = 5.0;

  std::size_t steps() const { return values.size(); }
  double horizon() const { return dt * static_cast<double>(values.size()); }
};

struct ODPair {
  int id = 0;
  int origin_node = 0;
  int destination_node = 0;
  std::vector<int> paths;  // path ids
  DemandProfile demand;
};

enum class Severity { kError, kWarning };

struct Diagnostic {
  Severity severity = Severity::kError;
  std::string entity;  // "link", "path", "od" or "network"
  int id = 0;
  std::string message;

  std::string to_string() const {
    return std::string(severity == Severity::kError ? "error: " : "warning: ") +
           entity + " " + std::to_string(id) + ": " + message;
  }
};

inline bool has_errors(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags) {
    if (d.severity == Severity::kError) return true;
  }
  return false;
}

/// Binary link-by-path incidence matrix.
class IncidenceMatrix {
 public:
  IncidenceMatrix(std::size_t links, std::size_t paths)
      : links_(links), paths_(paths), bits_(links * paths, 0) {}

  std::size_t links() const { return links_; }
  std::size_t paths() const { return paths_; }
  bool operator()(std::size_t link, std::size_t path) const {
    return bits_[link * paths_ + path] != 0;
  }
  void set(std::size_t link, std::size_t path) { bits_[link * paths_ + path] = 1; }

  std::size_t column_sum(std::size_t path) const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < links_; ++l) n += (*this)(l, path) ? 1 : 0;
    return n;
  }

  friend bool operator==(const IncidenceMatrix&, const IncidenceMatrix&) = default;

 private:
  std::size_t links_;
  std::size_t paths_;
  std::vector<std::uint8_t> bits_;
};

/// Directed link graph with OD pairs and explicitly enumerated paths.
///
/// Entities are addressed by position ("index") internally; ids are the
/// user-facing labels from the scenario file. Unresolvable ids map to
/// kNoIndex and are reported by validate().
class Network {
 public:
  Network() = default;
  Network(std::vector<Link> links, std::vector<ODPair> ods, std::vector<Path> paths)
      : links_(std::move(links)), ods_(std::move(ods)), paths_(std::move(paths)) {
    for (std::size_t i = 0; i < links_.size(); ++i) link_by_id_.emplace(links_[i].id, i);
    for (std::size_t i = 0; i < paths_.size(); ++i) path_by_id_.emplace(paths_[i].id, i);
    for (std::size_t i = 0; i < ods_.size(); ++i) od_by_id_.emplace(ods_[i].id, i);

    path_links_.resize(paths_.size());
    path_od_.resize(paths_.size(), kNoIndex);
    for (std::size_t p = 0; p < paths_.size(); ++p) {
      for (int id : paths_[p].links) path_links_[p].push_back(find(link_by_id_, id));
      path_od_[p] = find(od_by_id_, paths_[p].od);
    }
    od_paths_.resize(ods_.size());
    for (std::size_t w = 0; w < ods_.size(); ++w) {
      for (int id : ods_[w].paths) od_paths_[w].push_back(find(path_by_id_, id));
    }
  }

  const std::vector<Link>& links() const { return links_; }
  const std::vector<ODPair>& ods() const { return ods_; }
  const std::vector<Path>& paths() const { return paths_; }
  std::size_t num_links() const { return links_.size(); }
  std::size_t num_paths() const { return paths_.size(); }
  std::size_t num_ods() const { return ods_.size(); }

  std::size_t link_index(int id) const { return find(link_by_id_, id); }
  std::size_t path_index(int id) const { return find(path_by_id_, id); }
  std::size_t od_index(int id) const { return find(od_by_id_, id); }

  /// Link indices of path `p`, in travel order.
  const std::vector<std::size_t>& path_links(std::size_t p) const { return path_links_[p]; }
  const std::vector<std::size_t>& od_paths(std::size_t w) const { return od_paths_[w]; }
  std::size_t path_od(std::size_t p) const { return path_od_[p]; }

  double free_flow_path_time(std::size_t p) const {
    double t = 0.0;
    for (std::size_t l : path_links_[p]) t += links_[l].free_flow_time();
    return t;
  }

  /// Time grid shared by every demand profile. Requires at least one OD.
  TimeGrid time_grid() const {
    if (ods_.empty()) return {};
    return {ods_.front().demand.dt, ods_.front().demand.steps()};
  }

 private:
  static std::size_t find(const std::unordered_map<int, std::size_t>& m, int id) {
    auto it = m.find(id);
    return it == m.end() ? kNoIndex : it->second;
  }

  std::vector<Link> links_;
  std::vector<ODPair> ods_;
  std::vector<Path> paths_;
  std::unordered_map<int, std::size_t> link_by_id_;
  std::unordered_map<int, std::size_t> path_by_id_;
  std::unordered_map<int, std::size_t> od_by_id_;
  std::vector<std::vector<std::size_t>> path_links_;
  std::vector<std::vector<std::size_t>> od_paths_;
  std::vector<std::size_t> path_od_;
};

/// Checks every structural invariant of the network. Warnings (unused links)
/// do not make a network invalid; see has_errors().
inline std::vector<Diagnostic> validate(const Network& net) {
  std::vector<Diagnostic> out;
  auto error = [&](const char* entity, int id, std::string msg) {
    out.push_back({Severity::kError, entity, id, std::move(msg)});
  };

  std::set<int> seen;
  for (const Link& l : net.links()) {
    if (!seen.insert(l.id).second) error("link", l.id, "duplicate link id");
    if (!(l.length_m > 0)) error("link", l.id, "length must be positive");
    if (!(l.capacity_vph > 0)) error("link", l.id, "capacity must be positive");
    if (!(l.free_flow_speed_kph > 0)) error("link", l.id, "free-flow speed must be positive");
    if (l.jam_density_vpkm && l.free_flow_speed_kph > 0 &&
        !(*l.jam_density_vpkm > l.critical_density())) {
      error("link", l.id, "jam density must exceed critical density");
    }
    if (l.bpr_gamma < 0) error("link", l.id, "BPR gamma must be nonnegative");
  }

  seen.clear();
  std::vector<bool> used(net.num_links(), false);
  for (std::size_t p = 0; p < net.num_paths(); ++p) {
    const Path& path = net.paths()[p];
    if (!seen.insert(path.id).second) error("path", path.id, "duplicate path id");
    if (path.links.empty()) {
      error("path", path.id, "path has no links");
      continue;
    }
    const auto& idx = net.path_links(p);
    bool resolved = true;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] == kNoIndex) {
        error("path", path.id, "unknown link id " + std::to_string(path.links[i]));
        resolved = false;
      } else {
        used[idx[i]] = true;
      }
    }
    std::set<int> distinct(path.links.begin(), path.links.end());
    if (distinct.size() != path.links.size()) error("path", path.id, "path repeats a link");
    if (!resolved) continue;
    for (std::size_t i = 0; i + 1 < idx.size(); ++i) {
      if (net.links()[idx[i]].to_node != net.links()[idx[i + 1]].from_node) {
        error("path", path.id, "path not connected");
        break;
      }
    }
    const std::size_t w = net.path_od(p);
    if (w == kNoIndex) {
      error("path", path.id, "unknown OD id " + std::to_string(path.od));
      continue;
    }
    const ODPair& od = net.ods()[w];
    if (net.links()[idx.front()].from_node != od.origin_node) {
      error("path", path.id, "path does not start at OD origin");
    }
    if (net.links()[idx.back()].to_node != od.destination_node) {
      error("path", path.id, "path does not end at OD destination");
    }
  }

  seen.clear();
  for (std::size_t w = 0; w < net.num_ods(); ++w) {
    const ODPair& od = net.ods()[w];
    if (!seen.insert(od.id).second) error("od", od.id, "duplicate OD id");
    if (od.paths.empty()) error("od", od.id, "OD has no paths");
    for (std::size_t i = 0; i < od.paths.size(); ++i) {
      const std::size_t p = net.od_paths(w)[i];
      if (p == kNoIndex) {
        error("od", od.id, "unknown path id " + std::to_string(od.paths[i]));
      } else if (net.paths()[p].od != od.id) {
        error("od", od.id, "path " + std::to_string(od.paths[i]) + " belongs to another OD");
      }
    }
    if (!(od.demand.dt > 0)) error("od", od.id, "demand timestep must be positive");
    for (double v : od.demand.values) {
      if (!(v >= 0) || !std::isfinite(v)) {
        error("od", od.id, "demand must be finite and nonnegative");
        break;
      }
    }
    if (od.demand.values.empty()) error("od", od.id, "demand profile is empty");
    const TimeGrid grid = net.time_grid();
    if (od.demand.dt != grid.dt || od.demand.steps() != grid.steps) {
      error("od", od.id, "demand grid differs from other ODs");
    }
  }
  // Every path must be listed by the OD it names.
  for (std::size_t p = 0; p < net.num_paths(); ++p) {
    const std::size_t w = net.path_od(p);
    if (w == kNoIndex) continue;
    const auto& listed = net.od_paths(w);
    if (std::find(listed.begin(), listed.end(), p) == listed.end()) {
      error("path", net.paths()[p].id, "path not listed by its OD");
    }
  }

  for (std::size_t l = 0; l < net.num_links(); ++l) {
    if (!used[l]) {
      out.push_back({Severity::kWarning, "link", net.links()[l].id, "link not used by any path"});
    }
  }
  return out;
}

inline IncidenceMatrix build_incidence(const Network& net) {
  IncidenceMatrix delta(net.num_links(), net.num_paths());
  for (std::size_t p = 0; p < net.num_paths(); ++p) {
    for (std::size_t l : net.path_links(p)) delta.set(l, p);
  }
  return delta;
}

}  // namespace tasolve

#endif  // TASOLVE_NETWORK_HPP_
