#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hywm/detail/format.hpp"
#include "hywm/detail/json_reader.hpp"
#include "hywm/errors.hpp"
#include "hywm/hybrid_engine.hpp"
#include "hywm/policy_manager.hpp"
#include "hywm/resource_manager.hpp"

namespace hywm {

// ---------------------------------------------------------------------------
// Allocation-cost table
// ---------------------------------------------------------------------------

struct QuorumSummary {
  QuorumLevel level = QuorumLevel::L1;
  std::vector<std::string> members;
  double mean_cost = 0.0;
};

/// Mean allocation cost of each resource over every sample instant of the
/// horizon, in pool order.
inline std::vector<double> horizon_mean_costs(std::span<const ResourceDescriptor> pool, std::size_t horizon_hours,
                                              std::size_t samples_per_hour, const AllocationCostParams& params) {
  const auto instants = sample_instants(horizon_hours, samples_per_hour);
  std::vector<double> out;
  for (const auto& r : pool) {
    double sum = 0.0;
    for (double t : instants) sum += allocation_cost(r, t, params);
    out.push_back(sum / static_cast<double>(instants.size()));
  }
  return out;
}

/// Quorums of every level, ranked by horizon-mean cost (lower resource id on
/// ties), so the L1 quorum is the cheapest subset of its size over the
/// horizon.
inline std::vector<QuorumSummary> quorum_summary(std::span<const ResourceDescriptor> pool, std::size_t horizon_hours,
                                                 std::size_t samples_per_hour, const AllocationCostParams& params) {
  if (pool.empty()) throw EmptyPool();
  const auto means = horizon_mean_costs(pool, horizon_hours, samples_per_hour, params);
  std::size_t i = 0;
  const auto ranked = rank_by(pool, [&](const ResourceDescriptor&) { return means[i++]; });
  std::vector<QuorumSummary> out;
  for (auto level : {QuorumLevel::L1, QuorumLevel::L2, QuorumLevel::L3}) {
    QuorumSummary s{level, {}, 0.0};
    const auto n = quorum_size(level, ranked.size());
    for (std::size_t k = 0; k < n; ++k) {
      s.members.push_back(ranked[k].id);
      s.mean_cost += ranked[k].cost;
    }
    s.mean_cost /= static_cast<double>(n);
    out.push_back(std::move(s));
  }
  return out;
}

inline std::string quorum_summary_csv(const std::vector<QuorumSummary>& rows) {
  std::ostringstream out;
  out << "level,size,mean_cost,members\n";
  for (const auto& r : rows) {
    out << to_string(r.level) << ',' << r.members.size() << ',' << detail::fixed6(r.mean_cost) << ',';
    for (std::size_t i = 0; i < r.members.size(); ++i) out << (i ? ";" : "") << r.members[i];
    out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Experiment specs
// ---------------------------------------------------------------------------

enum class ExperimentKind { CostTable, PolicyComparison };

/// One named configuration of a comparison study: the SLA submitted, and
/// the subset of the repository the decision point may choose from.
struct PolicySetConfig {
  std::string name;
  Sla sla;
  std::vector<std::string> policy_ids;  // empty = whole repository
};

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::PolicyComparison;
  std::size_t replicates = 1;
  std::uint64_t base_seed = 0;
  std::size_t horizon_hours = 24;
  std::size_t samples_per_hour = 60;
  AllocationCostParams cost_params;
  std::vector<PolicySetConfig> configs;
};

inline ExperimentSpec parse_experiment_spec(const json& doc, const std::string& source = "experiment") {
  detail::JsonReader root(doc, source + ":$");
  root.expect_object({"kind", "replicates", "base_seed", "horizon", "samples_per_hour", "alpha", "beta", "configs"});
  ExperimentSpec spec;
  const auto kind = root.at("kind").as_string();
  if (kind == "cost_table") {
    spec.kind = ExperimentKind::CostTable;
  } else if (kind == "policy_comparison") {
    spec.kind = ExperimentKind::PolicyComparison;
  } else {
    root.at("kind").fail("expected cost_table or policy_comparison");
  }
  if (auto r = root.find("replicates")) {
    spec.replicates = r->as_unsigned();
    if (spec.replicates < 1) r->fail("must be >= 1");
  }
  if (auto r = root.find("base_seed")) spec.base_seed = r->as_unsigned();
  if (auto r = root.find("horizon")) {
    spec.horizon_hours = r->as_unsigned();
    if (spec.horizon_hours < 1) r->fail("must be >= 1");
  }
  if (auto r = root.find("samples_per_hour")) {
    spec.samples_per_hour = r->as_unsigned();
    if (spec.samples_per_hour < 1) r->fail("must be >= 1");
  }
  if (auto r = root.find("alpha")) spec.cost_params.alpha = r->as_number();
  if (auto r = root.find("beta")) spec.cost_params.beta = r->as_number();
  if (!spec.cost_params.valid()) root.fail("alpha and beta must be >= 0 with a positive sum");

  if (auto cs = root.find("configs")) {
    cs->expect_array();
    std::set<std::string> names;
    for (std::size_t i = 0; i < cs->size(); ++i) {
      auto c = cs->at(i);
      c.expect_object({"name", "sla", "policies"});
      PolicySetConfig cfg;
      cfg.name = c.at("name").as_identifier();
      if (!names.insert(cfg.name).second) c.at("name").fail("duplicate config name");
      cfg.sla = parse_sla(c.at("sla").raw(), c.at("sla").path());
      if (auto ps = c.find("policies")) {
        ps->expect_array();
        for (std::size_t k = 0; k < ps->size(); ++k) cfg.policy_ids.push_back(ps->at(k).as_identifier());
      }
      spec.configs.push_back(std::move(cfg));
    }
  }
  if (spec.kind == ExperimentKind::PolicyComparison && spec.configs.size() < 2)
    root.fail("policy_comparison needs at least 2 configs");
  return spec;
}

// ---------------------------------------------------------------------------
// Policy comparison
// ---------------------------------------------------------------------------

struct ExperimentRow {
  std::string config;
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  double completion = 0.0;
};

struct SummaryRow {
  std::string config;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for one replicate
  double min = 0.0;
  double max = 0.0;
};

struct ComparisonResult {
  std::vector<ExperimentRow> rows;  // sorted by (config order, replicate)
  std::vector<SummaryRow> summary;  // in config order
  std::optional<std::string> error;  // first failing replicate, if any
};

/// The repository restricted to `ids`, in the order given.
inline std::vector<Policy> select_policies(const std::vector<Policy>& repo, const std::vector<std::string>& ids) {
  if (ids.empty()) return repo;
  std::vector<Policy> out;
  for (const auto& id : ids) {
    auto it = std::find_if(repo.begin(), repo.end(), [&](const Policy& p) { return p.id == id; });
    if (it == repo.end()) throw UnknownKey("policy '" + id + "'");
    out.push_back(*it);
  }
  return out;
}

/// Replicate r starts at r * horizon / replicates so replicates sample the
/// load traces across the horizon.
inline double replicate_start(const ExperimentSpec& spec, std::size_t r) {
  return static_cast<double>(r) * 3600.0 * static_cast<double>(spec.horizon_hours) /
         static_cast<double>(spec.replicates);
}

inline std::vector<SummaryRow> summarize(const std::vector<ExperimentRow>& rows,
                                         const std::vector<std::string>& config_order) {
  std::vector<SummaryRow> out;
  for (const auto& name : config_order) {
    std::vector<double> xs;
    for (const auto& r : rows)
      if (r.config == name) xs.push_back(r.completion);
    if (xs.empty()) continue;
    SummaryRow s{name, 0.0, 0.0, *std::min_element(xs.begin(), xs.end()), *std::max_element(xs.begin(), xs.end())};
    for (double x : xs) s.mean += x;
    s.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
      for (double x : xs) s.stddev += (x - s.mean) * (x - s.mean);
      s.stddev = std::sqrt(s.stddev / static_cast<double>(xs.size() - 1));
    }
    out.push_back(s);
  }
  return out;
}

/// Runs every (config, replicate) pair; pairs are independent and execute
/// concurrently when `parallel` is set. Rows come back sorted regardless of
/// completion order. A failing pair keeps the rows sorted before it and
/// records the error.
inline ComparisonResult run_policy_comparison(const ExperimentSpec& spec, const WorkflowBundle& bundle,
                                              const std::vector<Policy>& repo, const InformationBase& info,
                                              std::span<const ResourceDescriptor> pool, const RunConfig& base_config,
                                              bool parallel = true) {
  struct Job {
    std::size_t config;
    std::size_t replicate;
  };
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < spec.configs.size(); ++c)
    for (std::size_t r = 0; r < spec.replicates; ++r) jobs.push_back({c, r});

  auto run_one = [&](const Job& job) -> ExperimentRow {
    const auto& cfg = spec.configs[job.config];
    RunConfig rc = base_config;
    rc.seed = spec.base_seed + job.replicate;
    rc.start_time = replicate_start(spec, job.replicate);
    const auto record = run_workflow(bundle, cfg.sla, select_policies(repo, cfg.policy_ids), info, pool, rc);
    return {cfg.name, job.replicate, rc.seed, record.completion_time};
  };

  std::vector<std::optional<ExperimentRow>> results(jobs.size());
  std::vector<std::string> errors(jobs.size());
  auto guarded = [&](std::size_t i) {
    try {
      results[i] = run_one(jobs[i]);
    } catch (const std::exception& e) {
      errors[i] = describe(e);
    }
  };
  if (parallel) {
    std::vector<std::future<void>> futures;
    for (std::size_t i = 0; i < jobs.size(); ++i) futures.push_back(std::async(std::launch::async, guarded, i));
    for (auto& f : futures) f.get();
  } else {
    for (std::size_t i = 0; i < jobs.size(); ++i) guarded(i);
  }

  // jobs are already in (config, replicate) order
  ComparisonResult out;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!results[i]) {
      const auto& cfg = spec.configs[jobs[i].config];
      out.error = cfg.name + " replicate " + std::to_string(jobs[i].replicate) + ": " + errors[i];
      break;
    }
    out.rows.push_back(*results[i]);
  }
  std::vector<std::string> order;
  for (const auto& c : spec.configs) order.push_back(c.name);
  if (!out.error) out.summary = summarize(out.rows, order);
  return out;
}

/// Long-form CSV; a failed study ends with an error row.
inline std::string comparison_rows_csv(const ComparisonResult& r) {
  std::ostringstream out;
  out << "config,replicate,seed,completion_s\n";
  for (const auto& row : r.rows)
    out << row.config << ',' << row.replicate << ',' << row.seed << ',' << detail::fixed6(row.completion) << '\n';
  if (r.error) {
    std::string msg = *r.error;
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    out << "ERROR,,," << msg << '\n';
  }
  return out.str();
}

inline std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  out << "config,mean,stddev,min,max\n";
  for (const auto& s : rows)
    out << s.config << ',' << detail::fixed6(s.mean) << ',' << detail::fixed6(s.stddev) << ',' << detail::fixed6(s.min)
        << ',' << detail::fixed6(s.max) << '\n';
  return out.str();
}

}  // namespace hywm
