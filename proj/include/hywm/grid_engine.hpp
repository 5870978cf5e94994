#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hywm/detail/rng.hpp"
#include "hywm/errors.hpp"
#include "hywm/resource_manager.hpp"
#include "hywm/sim_kernel.hpp"
#include "hywm/workflow_model.hpp"

// The low-level engine: catalog generation, abstract-to-concrete mapping
// and plan execution on the sim kernel.
namespace hywm {

struct Catalogs {
  struct Site {
    std::string name;
    std::vector<std::string> resources;
    bool operator==(const Site&) const = default;
  };
  struct Entry {
    std::string item;  // transformation name or file id
    std::string resource;
    bool operator==(const Entry&) const = default;
  };

  Quorum quorum;
  std::vector<Site> sites;
  std::vector<Entry> transformations;
  std::vector<Entry> replicas;

  bool has_transformation(std::string_view name, std::string_view resource) const {
    return std::any_of(transformations.begin(), transformations.end(),
                       [&](const Entry& e) { return e.item == name && e.resource == resource; });
  }

  const std::string& submit_resource() const { return quorum.members.front(); }
};

/// Every distinct transformation is installed on every quorum member; input
/// files start on the first member, which plays the submit host.
inline Catalogs generate_catalogs(const AbstractSubWorkflow& subwf, const Quorum& quorum,
                                  std::span<const ResourceDescriptor> pool) {
  if (quorum.members.empty()) throw EmptyQuorum();
  Catalogs c;
  c.quorum = quorum;
  std::map<std::string, std::vector<std::string>> by_site;
  for (const auto& id : quorum.members) by_site[find_resource(pool, id).site].push_back(id);
  for (auto& [site, members] : by_site) c.sites.push_back({site, std::move(members)});

  std::set<std::string> transformations;
  for (const auto& t : subwf.tasks) transformations.insert(t.transformation);
  for (const auto& name : transformations)
    for (const auto& id : quorum.members) c.transformations.push_back({name, id});
  for (const auto& in : subwf.inputs) c.replicas.push_back({in.file, quorum.members.front()});
  return c;
}

enum class SchedulerKind { MinEFT, RoundRobin, Random };

inline std::string_view to_string(SchedulerKind k) {
  switch (k) {
    case SchedulerKind::MinEFT: return "MinEFT";
    case SchedulerKind::RoundRobin: return "RoundRobin";
    case SchedulerKind::Random: return "Random";
  }
  return "?";
}

inline std::optional<SchedulerKind> parse_scheduler_kind(std::string_view s) {
  for (auto k : {SchedulerKind::MinEFT, SchedulerKind::RoundRobin, SchedulerKind::Random})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

struct Transfer {
  std::string item;  // "producer->consumer" for dependencies, file id for inputs
  std::string src;
  std::string dst;
  std::uint64_t bytes = 0;
  bool operator==(const Transfer&) const = default;
};

struct ConcretePlan {
  std::string subworkflow_id;
  std::vector<std::string> order;               // topological visit order
  std::map<std::string, std::string> assignments;  // task -> resource
  std::vector<Transfer> transfers;
  Quorum quorum;
  SchedulerKind scheduler = SchedulerKind::MinEFT;
  std::uint64_t seed = 0;
  bool operator==(const ConcretePlan&) const = default;
};

inline json plan_to_json(const ConcretePlan& plan) {
  json j;
  j["subworkflow"] = plan.subworkflow_id;
  j["scheduler"] = std::string(to_string(plan.scheduler));
  j["seed"] = plan.seed;
  j["quorum"] = {{"level", std::string(to_string(plan.quorum.level))},
                 {"members", plan.quorum.members},
                 {"decided_at", plan.quorum.decided_at},
                 {"random_draw", plan.quorum.random_draw}};
  j["assignments"] = json::object();
  for (const auto& [task, res] : plan.assignments) j["assignments"][task] = res;
  j["transfers"] = json::array();
  for (const auto& t : plan.transfers)
    j["transfers"].push_back({{"item", t.item}, {"src", t.src}, {"dst", t.dst}, {"bytes", t.bytes}});
  return j;
}

namespace detail {

inline std::size_t pool_index(std::span<const ResourceDescriptor> pool, std::string_view id) {
  for (std::size_t i = 0; i < pool.size(); ++i)
    if (pool[i].id == id) return i;
  throw UnknownKey("resource '" + std::string(id) + "'");
}

}  // namespace detail

/// Maps the abstract DAG onto the quorum recorded in `catalogs`.
///
/// Tasks are visited in topological order. MinEFT picks the member with the
/// smallest estimated finish time (member free time, input arrival, and
/// execution time at the estimated start), lower resource id on ties.
/// RoundRobin walks the quorum in order. Random draws uniformly, keyed on
/// (seed, visit position).
inline ConcretePlan map_workflow(const AbstractSubWorkflow& subwf, const Catalogs& catalogs,
                                 std::span<const ResourceDescriptor> pool, SchedulerKind scheduler,
                                 std::uint64_t seed, double t0) {
  if (catalogs.quorum.members.empty()) throw EmptyQuorum();
  ConcretePlan plan;
  plan.subworkflow_id = subwf.id;
  plan.order = topological_order(subwf);
  plan.quorum = catalogs.quorum;
  plan.scheduler = scheduler;
  plan.seed = seed;

  const auto& members = catalogs.quorum.members;
  std::map<std::string, double> free_at, finish_at;
  for (const auto& m : members) free_at[m] = t0;
  std::map<std::string, std::vector<const InputFile*>> inputs_of;
  for (const auto& in : subwf.inputs) inputs_of[in.consumer].push_back(&in);
  std::map<std::string, std::vector<const DataDep*>> deps_of;
  for (const auto& d : subwf.data_deps) deps_of[d.consumer].push_back(&d);
  auto replica_of = [&](const std::string& file) -> const std::string& {
    for (const auto& r : catalogs.replicas)
      if (r.item == file) return r.resource;
    return catalogs.submit_resource();
  };

  std::size_t rr_cursor = 0;
  for (std::size_t pos = 0; pos < plan.order.size(); ++pos) {
    const auto& task = *subwf.find(plan.order[pos]);
    std::vector<std::string> candidates;
    for (const auto& m : members)
      if (catalogs.has_transformation(task.transformation, m)) candidates.push_back(m);
    if (candidates.empty()) throw InfeasibleMapping(task.id, task.transformation);

    std::string chosen;
    switch (scheduler) {
      case SchedulerKind::MinEFT: {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& m : candidates) {
          const auto& dst = find_resource(pool, m);
          double ready = t0;
          for (const auto* d : deps_of[task.id]) {
            const auto& src = find_resource(pool, plan.assignments.at(d->producer));
            ready = std::max(ready, finish_at.at(d->producer) + transfer_time(d->bytes, src, dst));
          }
          for (const auto* in : inputs_of[task.id])
            ready = std::max(ready, t0 + transfer_time(in->bytes, find_resource(pool, replica_of(in->file)), dst));
          const double start = std::max(ready, free_at[m]);
          const double finish = start + exec_time(task, dst, start);
          if (finish < best || (finish == best && m < chosen)) {
            best = finish;
            chosen = m;
          }
        }
        free_at[chosen] = best;
        finish_at[task.id] = best;
        break;
      }
      case SchedulerKind::RoundRobin: {
        for (std::size_t step = 0; step < members.size(); ++step) {
          const auto& m = members[(rr_cursor + step) % members.size()];
          if (!catalogs.has_transformation(task.transformation, m)) continue;
          chosen = m;
          rr_cursor = (rr_cursor + step + 1) % members.size();
          break;
        }
        break;
      }
      case SchedulerKind::Random:
        chosen = candidates[detail::pick_index(seed, pos, candidates.size())];
        break;
    }
    plan.assignments[task.id] = chosen;
  }

  for (const auto& d : subwf.data_deps) {
    const auto& src = plan.assignments.at(d.producer);
    const auto& dst = plan.assignments.at(d.consumer);
    if (src != dst) plan.transfers.push_back({d.producer + "->" + d.consumer, src, dst, d.bytes});
  }
  for (const auto& in : subwf.inputs) {
    const auto& src = replica_of(in.file);
    const auto& dst = plan.assignments.at(in.consumer);
    if (src != dst) plan.transfers.push_back({in.file, src, dst, in.bytes});
  }
  return plan;
}

struct SubWorkflowResult {
  double makespan = 0.0;  // measured from t0
  double t0 = 0.0;
  EventLog records;
  ConcretePlan plan;
};

/// Builds the sim-kernel problem for a plan; tasks keep the plan's
/// topological order.
inline SimProblem build_sim_problem(const ConcretePlan& plan, const AbstractSubWorkflow& subwf,
                                    std::span<const ResourceDescriptor> pool, double t0) {
  SimProblem problem{pool, {}, t0};
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < plan.order.size(); ++i) index[plan.order[i]] = i;
  for (const auto& id : plan.order) {
    SimTask t;
    t.spec = *subwf.find(id);
    t.resource = detail::pool_index(pool, plan.assignments.at(id));
    problem.tasks.push_back(std::move(t));
  }
  for (const auto& d : subwf.data_deps) problem.tasks[index.at(d.consumer)].deps.push_back({index.at(d.producer), d.bytes});
  for (const auto& in : subwf.inputs) {
    // Files already on the consumer's resource need no staging.
    auto src = plan.quorum.members.front();
    for (const auto& tr : plan.transfers)
      if (tr.item == in.file && tr.dst == plan.assignments.at(in.consumer)) src = tr.src;
    const auto src_index = detail::pool_index(pool, src);
    auto& task = problem.tasks[index.at(in.consumer)];
    if (src_index != task.resource) task.staged.push_back({src_index, in.bytes});
  }
  return problem;
}

inline SubWorkflowResult execute_plan(const ConcretePlan& plan, const AbstractSubWorkflow& subwf,
                                      std::span<const ResourceDescriptor> pool, double t0) {
  const auto problem = build_sim_problem(plan, subwf, pool, t0);
  SubWorkflowResult result;
  result.t0 = t0;
  result.records = simulate(problem);
  result.makespan = makespan_of(result.records, t0);
  result.plan = plan;
  return result;
}

}  // namespace hywm
