#ifndef TASOLVE_SOLVERS_HPP_
#define TASOLVE_SOLVERS_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "tasolve/assignment.hpp"
#include "tasolve/cost.hpp"
#include "tasolve/network.hpp"

namespace tasolve {

inline constexpr double kTieTolerance = 1e-9;  // relative, on costs

/// Each OD's demand split evenly over its cost-minimal paths at every step.
inline DemandAssignment all_or_nothing(const PathCosts& c, const Network& net) {
  DemandAssignment y(c.paths(), c.steps(), c.dt);
  for (std::size_t w = 0; w < net.num_ods(); ++w) {
    const auto& paths = net.od_paths(w);
    const auto& demand = net.ods()[w].demand.values;
    for (std::size_t k = 0; k < c.steps(); ++k) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t p : paths) best = std::min(best, c(p, k));
      const double slack = kTieTolerance * std::abs(best);
      std::size_t ties = 0;
      for (std::size_t p : paths) ties += c(p, k) - best <= slack ? 1 : 0;
      const double share = demand[k] / static_cast<double>(ties);
      for (std::size_t p : paths) y(p, k) = c(p, k) - best <= slack ? share : 0.0;
    }
  }
  return y;
}

/// |<c, y - h>| / <y, c>; zero when <y, c> is zero.
inline double relative_gap(const PathCosts& c, const DemandAssignment& h,
                           const DemandAssignment& y) {
  const double denom = inner_product(y, c);
  if (denom == 0.0) return 0.0;
  return std::abs(inner_product(y, c) - inner_product(h, c)) / denom;
}

enum class SolverMethod { kFrankWolfe, kMsa, kEpm, kMsaThenEpm };

inline std::string_view to_string(SolverMethod m) {
  switch (m) {
    case SolverMethod::kFrankWolfe: return "fw";
    case SolverMethod::kMsa: return "msa";
    case SolverMethod::kEpm: return "epm";
    case SolverMethod::kMsaThenEpm: return "msa_then_epm";
  }
  return "?";
}

inline std::optional<SolverMethod> parse_solver_method(std::string_view s) {
  if (s == "fw") return SolverMethod::kFrankWolfe;
  if (s == "msa") return SolverMethod::kMsa;
  if (s == "epm") return SolverMethod::kEpm;
  if (s == "msa_then_epm") return SolverMethod::kMsaThenEpm;
  return std::nullopt;
}

struct SolverOptions {
  double eps = 1e-4;
  int max_iters = 1000;
  double tau0 = 1e-2;  // EPM step size
  double sigma = 0.5;  // EPM step shrink factor
  double mu = 0.1;     // EPM relative-change threshold
  int msa_warmup_iters = 50;
  int stall_window = 50;
  double stall_tolerance = 1e-12;
  int line_search_iters = 40;
};

enum class Termination { kGapMet, kMaxIters, kStalled };

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::kGapMet: return "gap_met";
    case Termination::kMaxIters: return "max_iters";
    case Termination::kStalled: return "stalled";
  }
  return "?";
}

struct IterationRecord {
  int k = 0;
  double gap = 0.0;
  double step = 0.0;  // alpha for FW, 1/k for MSA, tau for EPM
  double wall_ms = 0.0;
};

struct SolverReport {
  std::vector<IterationRecord> iterations;
  DemandAssignment final_assignment;
  PathCosts final_costs;  // F(final_assignment)
  bool converged = false;
  Termination termination = Termination::kMaxIters;

  double final_gap() const { return iterations.empty() ? 0.0 : iterations.back().gap; }
};

namespace detail {

/// Shared bookkeeping of the generic fixed-point loop.
class IterationLog {
 public:
  explicit IterationLog(const SolverOptions& opts)
      : opts_(opts), start_(std::chrono::steady_clock::now()) {}

  void record(int k, double gap, double step) {
    const auto now = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(now - start_).count();
    if (!log_.empty() && std::abs(gap - log_.back().gap) <= opts_.stall_tolerance) {
      ++flat_;
    } else {
      flat_ = 0;
    }
    log_.push_back({k, gap, step, ms});
  }

  std::optional<Termination> verdict(int k) const {
    if (log_.back().gap <= opts_.eps) return Termination::kGapMet;
    if (flat_ >= opts_.stall_window) return Termination::kStalled;
    if (k >= opts_.max_iters) return Termination::kMaxIters;
    return std::nullopt;
  }

  std::vector<IterationRecord> take() { return std::move(log_); }

 private:
  const SolverOptions& opts_;
  std::chrono::steady_clock::time_point start_;
  std::vector<IterationRecord> log_;
  int flat_ = 0;
};

inline SolverReport finish(IterationLog& log, Termination t, DemandAssignment h, PathCosts c) {
  SolverReport r;
  r.iterations = log.take();
  r.final_assignment = std::move(h);
  r.final_costs = std::move(c);
  r.termination = t;
  r.converged = t == Termination::kGapMet;
  return r;
}

template <typename Tag>
PathSeries<Tag> lerp(const PathSeries<Tag>& a, const PathSeries<Tag>& b, double alpha) {
  PathSeries<Tag> out = a;
  auto o = out.values.flat();
  const auto fb = b.values.flat();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += alpha * (fb[i] - o[i]);
  return out;
}

}  // namespace detail

/// Default starting point: all-or-nothing on free-flow costs.
inline DemandAssignment initial_assignment(const Network& net) {
  return all_or_nothing(free_flow_costs(net), net);
}

/// Method of successive averages: h <- (1 - 1/k) h + (1/k) y.
template <typename CostFn>
SolverReport msa_solve(const Network& net, const CostFn& F, const SolverOptions& opts,
                       std::optional<DemandAssignment> start = std::nullopt) {
  DemandAssignment h = start ? std::move(*start) : initial_assignment(net);
  detail::IterationLog log(opts);
  for (int k = 1;; ++k) {
    PathCosts c = F(h);
    const DemandAssignment y = all_or_nothing(c, net);
    const double step = 1.0 / static_cast<double>(k);
    log.record(k, relative_gap(c, h, y), step);
    if (auto t = log.verdict(k)) return detail::finish(log, *t, std::move(h), std::move(c));
    h = detail::lerp(h, y, step);
  }
}

/// Extra-projection (extragradient) method:
///   z = P(h - tau c(h)),  h <- P(h - tau c(z)).
/// tau shrinks by sigma whenever the relative gap grows by more than a
/// fraction mu over the previous iteration.
template <typename CostFn>
SolverReport epm_solve(const Network& net, const CostFn& F, const SolverOptions& opts,
                       std::optional<DemandAssignment> start = std::nullopt) {
  DemandAssignment h = start ? std::move(*start) : initial_assignment(net);
  const double dt = h.dt;
  double tau = opts.tau0;
  double previous_gap = -1.0;
  detail::IterationLog log(opts);

  auto descent = [&](const DemandAssignment& from, const PathCosts& c) {
    Grid point = from.values;
    auto pf = point.flat();
    const auto cf = c.values.flat();
    for (std::size_t i = 0; i < pf.size(); ++i) pf[i] -= tau * cf[i];
    return project(point, dt, net);
  };

  for (int k = 1;; ++k) {
    PathCosts c = F(h);
    const double gap = relative_gap(c, h, all_or_nothing(c, net));
    if (previous_gap > 0.0 && gap >= previous_gap &&
        (gap - previous_gap) / previous_gap > opts.mu) {
      tau *= opts.sigma;
    }
    previous_gap = gap;
    log.record(k, gap, tau);
    if (auto t = log.verdict(k)) return detail::finish(log, *t, std::move(h), std::move(c));
    const DemandAssignment z = descent(h, c);
    h = descent(h, F(z));
  }
}

/// Frank-Wolfe with exact line search on the Beckmann objective. The chord
/// derivative d/dalpha = <F(h + alpha (y - h)), y - h> is bisected on [0, 1].
/// Requires the static model, where F is the gradient of that objective.
inline SolverReport fw_solve(const ModelManager& F, const SolverOptions& opts,
                             std::optional<DemandAssignment> start = std::nullopt) {
  if (F.config().model != TrafficModel::kStatic) {
    throw Error("FW requires static model");
  }
  const Network& net = F.network();
  DemandAssignment h = start ? std::move(*start) : initial_assignment(net);
  detail::IterationLog log(opts);

  for (int k = 1;; ++k) {
    PathCosts c = F(h);
    const DemandAssignment y = all_or_nothing(c, net);
    const double gap = relative_gap(c, h, y);

    DemandAssignment direction = y;
    {
      auto d = direction.values.flat();
      const auto hf = h.values.flat();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] -= hf[i];
    }
    auto slope = [&](double alpha) {
      return inner_product(F(detail::lerp(h, y, alpha)), direction);
    };
    double alpha = 1.0;
    if (slope(1.0) > 0.0) {
      double lo = 0.0;
      double hi = 1.0;
      for (int i = 0; i < opts.line_search_iters; ++i) {
        const double mid = 0.5 * (lo + hi);
        (slope(mid) > 0.0 ? hi : lo) = mid;
      }
      alpha = 0.5 * (lo + hi);
    }

    log.record(k, gap, alpha);
    if (auto t = log.verdict(k)) return detail::finish(log, *t, std::move(h), std::move(c));
    h = detail::lerp(h, y, alpha);
  }
}

/// MSA for a warm-up budget, then EPM from the MSA iterate. The iteration
/// log is the concatenation of both phases.
template <typename CostFn>
SolverReport msa_then_epm_solve(const Network& net, const CostFn& F, const SolverOptions& opts,
                                std::optional<DemandAssignment> start = std::nullopt) {
  SolverOptions warm = opts;
  warm.max_iters = std::max(1, opts.msa_warmup_iters);
  SolverReport first = msa_solve(net, F, warm, std::move(start));
  if (first.converged) return first;
  SolverOptions rest = opts;
  rest.max_iters = std::max(1, opts.max_iters - static_cast<int>(first.iterations.size()));
  SolverReport second = epm_solve(net, F, rest, first.final_assignment);
  const int offset = static_cast<int>(first.iterations.size());
  const double ms_offset = first.iterations.empty() ? 0.0 : first.iterations.back().wall_ms;
  for (auto& rec : second.iterations) {
    rec.k += offset;
    rec.wall_ms += ms_offset;
  }
  first.iterations.insert(first.iterations.end(), second.iterations.begin(),
                          second.iterations.end());
  second.iterations = std::move(first.iterations);
  return second;
}

/// Dispatches on `method`.
inline SolverReport solve(const ModelManager& F, SolverMethod method, const SolverOptions& opts,
                          std::optional<DemandAssignment> start = std::nullopt) {
  const Network& net = F.network();
  switch (method) {
    case SolverMethod::kFrankWolfe: return fw_solve(F, opts, std::move(start));
    case SolverMethod::kMsa: return msa_solve(net, F, opts, std::move(start));
    case SolverMethod::kEpm: return epm_solve(net, F, opts, std::move(start));
    case SolverMethod::kMsaThenEpm: return msa_then_epm_solve(net, F, opts, std::move(start));
  }
  throw Error("unknown solver method");
}

}  // namespace tasolve

#endif  // TASOLVE_SOLVERS_HPP_
