#pragma once

// Reference implementations used only by tests. Each one is written from
// the operation's definition, not from the library code it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hywm/hywm.hpp"

namespace oracle {

inline double metric(const hywm::MetricTrace& m, double t) {
  const double wave = m.amplitude * std::sin(2.0 * std::numbers::pi * t / m.period + m.phase);
  const double noise = m.noise_sigma > 0 ? m.noise_sigma * hywm::detail::gaussian(m.seed, static_cast<std::uint64_t>(std::floor(t))) : 0.0;
  return std::clamp(m.base + wave + noise, 0.0, 1.0);
}

inline double cost(const hywm::ResourceDescriptor& r, double t, double alpha, double beta) {
  return alpha * metric(r.net_trace, t) + beta * metric(r.sys_trace, t);
}

/// Mean cost of one resource over hours [0, horizon) sampled `per_hour`
/// times per hour.
inline double horizon_mean(const hywm::ResourceDescriptor& r, std::size_t horizon, std::size_t per_hour, double alpha,
                           double beta) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t h = 0; h < horizon; ++h)
    for (std::size_t k = 0; k < per_hour; ++k, ++n) sum += cost(r, 3600.0 * h + 3600.0 * k / per_hour, alpha, beta);
  return sum / static_cast<double>(n);
}

/// Minimum, over every k-element subset of the pool, of the subset's mean
/// horizon cost. Returns the value and every subset achieving it.
struct SubsetMinimum {
  double value = std::numeric_limits<double>::infinity();
  std::vector<std::vector<std::string>> argmins;
  std::size_t subsets = 0;
};

inline SubsetMinimum min_subset_mean(std::span<const hywm::ResourceDescriptor> pool, std::size_t k,
                                     std::size_t horizon, std::size_t per_hour, double alpha, double beta) {
  std::vector<double> means;
  for (const auto& r : pool) means.push_back(horizon_mean(r, horizon, per_hour, alpha, beta));
  SubsetMinimum out;
  const auto n = pool.size();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != k) continue;
    ++out.subsets;
    double sum = 0.0;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) {
        sum += means[i];
        ids.push_back(pool[i].id);
      }
    const double mean = sum / static_cast<double>(k);
    std::sort(ids.begin(), ids.end());
    if (mean < out.value - 1e-15) {
      out.value = mean;
      out.argmins = {ids};
    } else if (std::abs(mean - out.value) <= 1e-15) {
      out.argmins.push_back(ids);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

inline double transfer(std::uint64_t bytes, const hywm::ResourceDescriptor& a, const hywm::ResourceDescriptor& b) {
  if (a.site == b.site) return 0.0;
  return static_cast<double>(bytes) / std::min(a.bandwidth, b.bandwidth) + std::max(a.latency, b.latency);
}

inline double run_time(double work, const hywm::ResourceDescriptor& r, double start) {
  return work / (r.cpu_rate * (1.0 - 0.9 * metric(r.sys_trace, start)));
}

struct Slot {
  double start = 0.0;
  double end = 0.0;
};

/// List-scheduling replay of a sim problem. Repeatedly commits the globally
/// earliest possible start: for every resource, the best waiting task is the
/// one ready first (lower index on ties) among those ready by the time the
/// resource can start anything; a task is a candidate once all its producers
/// have been committed.
inline std::vector<Slot> simulate(const hywm::SimProblem& p) {
  const auto n = p.tasks.size();
  std::vector<std::optional<Slot>> slots(n);
  std::vector<double> free_at(p.pool.size(), p.t0);

  auto ready_time = [&](std::size_t i) -> std::optional<double> {
    const auto& t = p.tasks[i];
    double ready = p.t0;
    for (const auto& d : t.deps) {
      if (!slots[d.producer]) return std::nullopt;
      ready = std::max(ready, slots[d.producer]->end + transfer(d.bytes, p.pool[p.tasks[d.producer].resource], p.pool[t.resource]));
    }
    for (const auto& s : t.staged) ready = std::max(ready, p.t0 + transfer(s.bytes, p.pool[s.source], p.pool[t.resource]));
    return ready;
  };

  for (std::size_t committed = 0; committed < n; ++committed) {
    std::optional<std::size_t> best_task;
    double best_start = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < p.pool.size(); ++r) {
      std::vector<std::pair<double, std::size_t>> waiting;
      for (std::size_t i = 0; i < n; ++i) {
        if (slots[i] || p.tasks[i].resource != r) continue;
        if (auto ready = ready_time(i)) waiting.push_back({*ready, i});
      }
      if (waiting.empty()) continue;
      std::sort(waiting.begin(), waiting.end());
      const double start = std::max(free_at[r], waiting.front().first);
      // Every waiting task ready by `start` competes; the earliest ready wins.
      const auto pick = waiting.front().second;
      if (start < best_start) {
        best_start = start;
        best_task = pick;
      }
    }
    if (!best_task) throw std::runtime_error("oracle: no runnable task");
    const auto& task = p.tasks[*best_task];
    const double end = best_start + run_time(task.spec.work, p.pool[task.resource], best_start);
    slots[*best_task] = Slot{best_start, end};
    free_at[task.resource] = end;
  }
  std::vector<Slot> out;
  for (const auto& s : slots) out.push_back(*s);
  return out;
}

inline double makespan(const std::vector<Slot>& slots, double t0) {
  double end = t0;
  for (const auto& s : slots) end = std::max(end, s.end);
  return end - t0;
}

/// Sim problem for a plan, built straight from the plan's assignments:
/// producers feed consumers; an input file sits on the first quorum member
/// and is staged when its consumer runs elsewhere.
inline hywm::SimProblem problem_from_plan(const hywm::ConcretePlan& plan, const hywm::AbstractSubWorkflow& w,
                                          std::span<const hywm::ResourceDescriptor> pool, double t0) {
  auto where = [&](const std::string& res) {
    for (std::size_t i = 0; i < pool.size(); ++i)
      if (pool[i].id == res) return i;
    throw std::runtime_error("oracle: unknown resource " + res);
  };
  auto position = [&](const std::string& task) {
    return static_cast<std::size_t>(std::find(plan.order.begin(), plan.order.end(), task) - plan.order.begin());
  };
  hywm::SimProblem p{pool, {}, t0};
  for (const auto& id : plan.order) {
    hywm::SimTask t;
    for (const auto& spec : w.tasks)
      if (spec.id == id) t.spec = spec;
    t.resource = where(plan.assignments.at(id));
    p.tasks.push_back(t);
  }
  for (const auto& d : w.data_deps) p.tasks[position(d.consumer)].deps.push_back({position(d.producer), d.bytes});
  const auto home = where(plan.quorum.members.front());
  for (const auto& in : w.inputs) {
    auto& t = p.tasks[position(in.consumer)];
    if (t.resource != home) t.staged.push_back({home, in.bytes});
  }
  return p;
}

/// Best makespan over every task-to-member assignment, replayed with the
/// oracle simulator.
inline double optimal_makespan(const hywm::AbstractSubWorkflow& w, const hywm::Quorum& quorum,
                               std::span<const hywm::ResourceDescriptor> pool, double t0) {
  const auto order = hywm::topological_order(w);
  const auto m = quorum.members.size();
  std::size_t total = 1;
  for (std::size_t i = 0; i < order.size(); ++i) total *= m;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t code = 0; code < total; ++code) {
    hywm::ConcretePlan plan;
    plan.subworkflow_id = w.id;
    plan.order = order;
    plan.quorum = quorum;
    auto c = code;
    for (const auto& id : order) {
      plan.assignments[id] = quorum.members[c % m];
      c /= m;
    }
    best = std::min(best, makespan(oracle::simulate(problem_from_plan(plan, w, pool, t0)), t0));
  }
  return best;
}

// ---------------------------------------------------------------------------
// Policy decision
// ---------------------------------------------------------------------------

/// Rank of an SLA enum value inside its declaration order.
inline int rank_of(const std::string& key, const std::string& v) {
  static const std::map<std::string, std::vector<std::string>> orders = {
      {"resource_level", {"L1", "L2", "L3"}},
      {"performance", {"Fast", "Standard", "Economy"}},
      {"service_level", {"EcgOnly", "EcgDetect", "EcgVhs"}},
  };
  const auto& o = orders.at(key);
  return static_cast<int>(std::find(o.begin(), o.end(), v) - o.begin());
}

template <class T>
bool holds(hywm::CompareOp op, const T& a, const T& b) {
  switch (op) {
    case hywm::CompareOp::Eq: return a == b;
    case hywm::CompareOp::Ne: return a != b;
    case hywm::CompareOp::Le: return a <= b;
    case hywm::CompareOp::Ge: return a >= b;
  }
  return false;
}

inline bool predicate_holds(const hywm::Predicate& p, const hywm::Sla& sla, const hywm::InformationBase& info) {
  const auto& lit = p.literal;
  if (p.key == "user_id") return holds(p.op, sla.user_id, std::get<std::string>(lit));
  if (p.key == "resource_level" || p.key == "performance" || p.key == "service_level") {
    std::string actual;
    if (p.key == "resource_level") actual = std::string(hywm::to_string(*sla.resource_level));
    if (p.key == "performance") actual = std::string(hywm::to_string(*sla.performance));
    if (p.key == "service_level") actual = std::string(hywm::to_string(*sla.service_level));
    return holds(p.op, rank_of(p.key, actual), rank_of(p.key, std::get<std::string>(lit)));
  }
  const auto v = info.get(p.key);
  auto as_double = [](const hywm::Value& x) -> std::optional<double> {
    if (const auto* i = std::get_if<std::int64_t>(&x)) return static_cast<double>(*i);
    if (const auto* d = std::get_if<double>(&x)) return *d;
    return std::nullopt;
  };
  if (auto a = as_double(v)) {
    if (auto b = as_double(lit)) return holds(p.op, *a, *b);
    return false;
  }
  if (v.index() != lit.index()) return false;
  if (const auto* s = std::get_if<std::string>(&v)) return holds(p.op, *s, std::get<std::string>(lit));
  return holds(p.op, std::get<bool>(v), std::get<bool>(lit));
}

/// Highest-priority satisfied policy of `kind`; ties to the smaller id.
inline std::optional<hywm::Policy> best_policy(hywm::PolicyKind kind, const hywm::Sla& sla,
                                               const std::vector<hywm::Policy>& repo, const hywm::InformationBase& info) {
  std::optional<hywm::Policy> best;
  for (const auto& p : repo) {
    if (p.kind != kind) continue;
    bool ok = true;
    for (const auto& pred : p.condition) ok = ok && predicate_holds(pred, sla, info);
    if (!ok) continue;
    if (!best || p.priority > best->priority || (p.priority == best->priority && p.id < best->id)) best = p;
  }
  return best;
}

}  // namespace oracle
