#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "hywm/detail/format.hpp"
#include "hywm/detail/json_reader.hpp"
#include "hywm/detail/rng.hpp"
#include "hywm/ecg.hpp"
#include "hywm/errors.hpp"
#include "hywm/grid_engine.hpp"
#include "hywm/policy_manager.hpp"
#include "hywm/resource_manager.hpp"
#include "hywm/strategy_registry.hpp"
#include "hywm/workflow_model.hpp"

// The high-level interpreter. It decides and enforces the policy set for a
// run, then walks the node graph: local nodes run in-process, grid nodes go
// through quorum selection, catalog generation, mapping and simulated
// execution.
namespace hywm {

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct VhsCandidate {
  double bpm = 60.0;
  double irregularity = 0.0;
  double st_offset = 0.0;
  bool operator==(const VhsCandidate&) const = default;
};

struct PatientSource {
  std::optional<ecg::SynthParams> synth;  // either synthesized ...
  std::vector<double> samples;            // ... or loaded from a sample file
  double duration = 10.0;
  double rate = 250.0;
};

struct RunConfig {
  std::uint64_t seed = 0;
  double start_time = 0.0;
  PatientSource patient;
  std::map<std::string, Value> user_inputs;
  std::vector<VhsCandidate> vhs_grid;
  ecg::Thresholds thresholds;
};

namespace detail {

inline std::vector<double> load_samples(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw SchemaError(file.string(), "cannot open sample file");
  std::vector<double> out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.empty() || line[0] == '#') continue;
    try {
      out.push_back(std::stod(line));
    } catch (const std::exception&) {
      throw SchemaError(file.string() + ":" + std::to_string(n), "not a number");
    }
  }
  return out;
}

}  // namespace detail

/// `base_dir` resolves a relative patient sample file.
inline RunConfig parse_run_config(const json& doc, const std::string& source = "run-config",
                                  const std::filesystem::path& base_dir = {}) {
  detail::JsonReader root(doc, source + ":$");
  root.expect_object({"seed", "start_time", "patient", "user_inputs", "vhs_grid", "thresholds"});
  RunConfig cfg;
  cfg.seed = root.at("seed").as_unsigned();
  if (auto t = root.find("start_time")) {
    cfg.start_time = t->as_number();
    if (cfg.start_time < 0) t->fail("start_time must be >= 0");
  }

  auto p = root.at("patient");
  p.expect_object({"bpm", "irregularity", "st_offset", "noise", "seed", "duration", "rate", "file"});
  if (auto r = p.find("rate")) cfg.patient.rate = r->as_number();
  if (cfg.patient.rate < 50) p.fail("rate must be >= 50 Hz");
  if (auto f = p.find("file")) {
    cfg.patient.samples = detail::load_samples(base_dir / f->as_string());
    cfg.patient.duration = static_cast<double>(cfg.patient.samples.size()) / cfg.patient.rate;
  } else {
    ecg::SynthParams s;
    s.bpm = p.at("bpm").as_number();
    if (!(s.bpm > 0)) p.at("bpm").fail("bpm must be > 0");
    if (auto v = p.find("irregularity")) s.irregularity = v->as_number();
    if (s.irregularity < 0 || s.irregularity > 1) p.fail("irregularity must lie in [0, 1]");
    if (auto v = p.find("st_offset")) s.st_offset = v->as_number();
    if (auto v = p.find("noise")) s.noise = v->as_number();
    if (s.noise < 0) p.fail("noise must be >= 0");
    if (auto v = p.find("seed")) s.seed = v->as_unsigned();
    if (auto v = p.find("duration")) cfg.patient.duration = v->as_number();
    if (!(cfg.patient.duration > 0)) p.fail("duration must be > 0");
    cfg.patient.synth = s;
  }

  if (auto u = root.find("user_inputs")) {
    if (!u->raw().is_object()) u->fail("expected an object");
    for (const auto& [key, _] : u->raw().items()) cfg.user_inputs[key] = value_from_json(u->at(key));
  }
  if (auto g = root.find("vhs_grid")) {
    g->expect_array();
    for (std::size_t i = 0; i < g->size(); ++i) {
      auto c = g->at(i);
      c.expect_object({"bpm", "irregularity", "st_offset"});
      VhsCandidate cand{c.at("bpm").as_number(), c.at("irregularity").as_number(), c.at("st_offset").as_number()};
      if (!(cand.bpm > 0)) c.at("bpm").fail("bpm must be > 0");
      cfg.vhs_grid.push_back(cand);
    }
  }
  if (auto th = root.find("thresholds")) {
    th->expect_object({"fibrillation_hz", "ischemia_st", "arrhythmia_cv"});
    if (auto v = th->find("fibrillation_hz")) cfg.thresholds.fibrillation_hz = v->as_number();
    if (auto v = th->find("ischemia_st")) cfg.thresholds.ischemia_st = v->as_number();
    if (auto v = th->find("arrhythmia_cv")) cfg.thresholds.arrhythmia_cv = v->as_number();
  }
  return cfg;
}

/// The patient's input signal, synthesized or as loaded.
inline ecg::Signal patient_signal(const RunConfig& cfg) {
  if (cfg.patient.synth) return ecg::synthesize(*cfg.patient.synth, cfg.patient.duration, cfg.patient.rate);
  return ecg::Signal{cfg.patient.samples, cfg.patient.rate, {}};
}

/// VHS candidates are synthesized noise-free with the patient's timing and
/// seed, so a candidate equal to the patient's parameters reproduces its
/// features exactly.
inline ecg::Signal candidate_signal(const VhsCandidate& c, const RunConfig& cfg) {
  ecg::SynthParams p{c.bpm, c.irregularity, c.st_offset, 0.0, cfg.patient.synth ? cfg.patient.synth->seed : cfg.seed};
  return ecg::synthesize(p, cfg.patient.duration, cfg.patient.rate);
}

// ---------------------------------------------------------------------------
// Execution state
// ---------------------------------------------------------------------------

using BoardValue = std::variant<Value, ecg::Signal, ecg::Features>;

/// One sub-workflow handed to the grid engine.
struct Submission {
  std::string node_id;
  std::size_t iteration = 0;  // loop iteration, 1-based; 0 outside loops
  SubWorkflowResult result;
};

struct VhsResult {
  std::size_t best_index = 0;  // 0-based position in the grid
  VhsCandidate best_params;
  double best_distance = 0.0;
  std::size_t iterations = 0;
  std::vector<double> distances;  // one per evaluated candidate
};

struct ExecutionContext {
  std::string run_id;
  Sla sla;
  ConfigRegistry registry;
  const RunConfig* config = nullptr;
  std::span<const ResourceDescriptor> pool;
  const std::map<std::string, AbstractSubWorkflow>* subworkflows = nullptr;
  std::map<std::string, ecg::Signal> data;  // input data document
  std::map<std::string, BoardValue> blackboard;
  double now = 0.0;
  std::vector<Submission> submissions;
  std::optional<VhsResult> vhs;

  template <class T>
  const T& read(const std::string& key) const {
    auto it = blackboard.find(key);
    if (it == blackboard.end()) throw MissingInput(key);
    const T* v = std::get_if<T>(&it->second);
    if (v == nullptr) throw TypeMismatch(key, "blackboard entry has an unexpected type");
    return *v;
  }
};

using LocalFunction = std::function<std::string(ExecutionContext&)>;
using RuleTable = std::function<std::string(ExecutionContext&)>;

struct Strategies {
  StrategyRegistry<LocalFunction> functions;
  StrategyRegistry<RuleTable> rule_tables;

  /// Functions and rule tables used by the shipped heart-disease workflow.
  static Strategies builtin() {
    Strategies s;
    s.functions.add("extract-features", [](ExecutionContext& ctx) {
      const auto& sig = ctx.read<ecg::Signal>("patient.ecg");
      const auto f = ecg::extract_features(sig.samples, sig.rate);
      ctx.blackboard["ecg.features"] = f;
      std::ostringstream out;
      out << "rr_mean=" << detail::fixed6(f.rr_mean) << " rr_std=" << detail::fixed6(f.rr_std)
          << " dominant_freq=" << detail::fixed6(f.dominant_freq) << " st_deviation=" << detail::fixed6(f.st_deviation);
      return out.str();
    });
    s.functions.add("long-term-analysis", [](ExecutionContext& ctx) {
      const auto& sig = ctx.read<ecg::Signal>("patient.ecg");
      const auto beats = ecg::detect_beats(sig.samples, sig.rate);
      const double minutes = static_cast<double>(sig.samples.size()) / sig.rate / 60.0;
      const double bpm = minutes > 0 ? static_cast<double>(beats.size()) / minutes : 0.0;
      ctx.blackboard["arrhythmia.mean_bpm"] = Value(bpm);
      return "beats=" + std::to_string(beats.size()) + " mean_bpm=" + detail::fixed6(bpm);
    });
    s.functions.add("noop", [](ExecutionContext&) { return std::string("noop"); });
    s.rule_tables.add("ecg-disease", [](ExecutionContext& ctx) {
      const auto d = ecg::estimate_disease(ctx.read<ecg::Features>("ecg.features"), ctx.config->thresholds);
      const std::string label(ecg::to_string(d));
      ctx.blackboard["diagnosis"] = Value(label);
      return label;
    });
    return s;
  }
};

// ---------------------------------------------------------------------------
// Grid dispatch
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t kResourceDrawStream = 0x7265736f75726365ULL;

/// Decides the quorum from the enforced registry at the current time,
/// generates catalogs, maps with the enforced scheduler and executes.
/// Advances the context clock by the makespan.
inline const Submission& dispatch_subworkflow(ExecutionContext& ctx, const std::string& node_id,
                                              const std::string& subworkflow_id, std::size_t iteration = 0) {
  auto it = ctx.subworkflows->find(subworkflow_id);
  if (it == ctx.subworkflows->end()) throw MissingInput("subworkflow '" + subworkflow_id + "'");
  const auto& subwf = it->second;
  const auto k = static_cast<std::uint64_t>(ctx.submissions.size());

  const AllocationCostParams params{ctx.registry.get_real("resource.alpha"), ctx.registry.get_real("resource.beta")};
  if (!params.valid()) throw Error("resource.alpha + resource.beta must be > 0");
  const auto& level = ctx.registry.get_string("resource.level");
  const Quorum quorum = level == "Random"
                            ? random_quorum(ctx.pool, ctx.now, params, detail::hash_combine(ctx.config->seed ^ kResourceDrawStream, k))
                            : generate_arq(ctx.pool, *parse_quorum_level(level), ctx.now, params);

  const auto catalogs = generate_catalogs(subwf, quorum, ctx.pool);
  const auto scheduler = *parse_scheduler_kind(ctx.registry.get_string("scheduler.kind"));
  const auto seed = detail::hash_combine(static_cast<std::uint64_t>(ctx.registry.get_integer("scheduler.seed")), k);
  const auto plan = map_workflow(subwf, catalogs, ctx.pool, scheduler, seed, ctx.now);
  auto result = execute_plan(plan, subwf, ctx.pool, ctx.now);
  ctx.now += result.makespan;
  ctx.submissions.push_back({node_id, iteration, std::move(result)});
  return ctx.submissions.back();
}

/// Iterates the candidate grid in order. Each iteration dispatches the VHS
/// sub-workflow, then compares the candidate's synthesized features with the
/// patient's. Stops at the first candidate within `tolerance`, after
/// `max_iter` candidates, or at the end of the grid.
inline VhsResult run_vhs_loop(const ecg::Features& patient, ExecutionContext& ctx, const std::string& node_id,
                              const std::string& subworkflow_id, std::int64_t max_iter, double tolerance) {
  const auto& grid = ctx.config->vhs_grid;
  if (grid.empty()) throw EmptyParameterGrid();
  if (max_iter < 1) throw Error("vhs.max_iter must be >= 1");
  VhsResult out;
  const auto limit = std::min<std::size_t>(grid.size(), static_cast<std::size_t>(max_iter));
  for (std::size_t i = 0; i < limit; ++i) {
    dispatch_subworkflow(ctx, node_id, subworkflow_id, i + 1);
    const auto sig = candidate_signal(grid[i], *ctx.config);
    const double d = ecg::feature_distance(ecg::extract_features(sig.samples, sig.rate), patient);
    out.distances.push_back(d);
    out.iterations = i + 1;
    if (i == 0 || d < out.best_distance) {
      out.best_distance = d;
      out.best_index = i;
      out.best_params = grid[i];
    }
    if (d <= tolerance) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Node execution
// ---------------------------------------------------------------------------

struct NodeOutcome {
  std::string node_id;
  NodeKind kind = NodeKind::Terminal;
  double start = 0.0;
  double end = 0.0;
  std::string executor;  // "local" or "grid"
  std::string summary;
  std::optional<std::string> branch;     // Decision outcome label
  std::vector<std::size_t> submissions;  // indices into ExecutionContext::submissions
};

/// Loop bounds: the registry value when a policy set it, else the node's.
inline std::pair<std::int64_t, double> loop_bounds(const LoopPayload& loop, const ConfigRegistry& reg) {
  const auto max_iter = reg.is_default("vhs.max_iter") ? loop.max_iterations : reg.get_integer("vhs.max_iter");
  const auto tol = reg.is_default("vhs.tolerance") ? loop.tolerance : reg.get_real("vhs.tolerance");
  return {max_iter, tol};
}

inline NodeOutcome execute_node(const Node& node, ExecutionContext& ctx, const Strategies& strategies) {
  NodeOutcome out;
  out.node_id = node.id;
  out.kind = node.kind();
  out.start = ctx.now;
  out.executor = "local";
  const auto first_submission = ctx.submissions.size();
  try {
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, LocalTaskPayload>) {
            out.summary = strategies.functions.get(p.function)(ctx);
            ctx.now += p.duration;
          } else if constexpr (std::is_same_v<T, GridPayload>) {
            out.executor = "grid";
            const auto& sub = dispatch_subworkflow(ctx, node.id, p.subworkflow);
            out.summary = "makespan=" + detail::fixed6(sub.result.makespan) +
                          " quorum=" + std::to_string(sub.result.plan.quorum.members.size());
            if (!p.function.empty()) out.summary += " " + strategies.functions.get(p.function)(ctx);
          } else if constexpr (std::is_same_v<T, DecisionPayload>) {
            out.branch = strategies.rule_tables.get(p.rule_table)(ctx);
            out.summary = "branch=" + *out.branch;
          } else if constexpr (std::is_same_v<T, LoopPayload>) {
            out.executor = "grid";
            const auto [max_iter, tol] = loop_bounds(p, ctx.registry);
            const auto& patient = ctx.read<ecg::Features>("ecg.features");
            ctx.vhs = run_vhs_loop(patient, ctx, node.id, p.subworkflow, max_iter, tol);
            ctx.blackboard["vhs.best_index"] = Value(static_cast<std::int64_t>(ctx.vhs->best_index));
            out.summary = "iterations=" + std::to_string(ctx.vhs->iterations) + " best_index=" +
                          std::to_string(ctx.vhs->best_index) + " best_distance=" + detail::fixed6(ctx.vhs->best_distance);
          } else if constexpr (std::is_same_v<T, DataRetrievalPayload>) {
            auto it = ctx.data.find(p.key);
            if (it == ctx.data.end()) throw MissingInput(p.key);
            ctx.blackboard[p.key] = it->second;
            out.summary = p.key + ": " + std::to_string(it->second.samples.size()) + " samples @ " +
                          detail::fixed6(it->second.rate) + " Hz";
          } else if constexpr (std::is_same_v<T, UserInputPayload>) {
            auto it = ctx.config->user_inputs.find(p.key);
            if (it == ctx.config->user_inputs.end()) throw MissingInput(p.key);
            ctx.blackboard[p.key] = it->second;
            out.summary = p.key + "=" + to_display(it->second);
          } else {
            out.summary = "completed";
          }
        },
        node.payload);
  } catch (const std::exception& e) {
    std::throw_with_nested(NodeError(node.id, e.what()));
  }
  out.end = ctx.now;
  for (auto i = first_submission; i < ctx.submissions.size(); ++i) out.submissions.push_back(i);
  return out;
}

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

/// A workflow graph plus the sub-workflows its grid and loop nodes name.
struct WorkflowBundle {
  WorkflowGraph graph;
  std::map<std::string, AbstractSubWorkflow> subworkflows;
};

/// Loads a workflow document; sub-workflow `X` is read from `X.json` next to it.
inline WorkflowBundle load_workflow_bundle(const std::filesystem::path& workflow_file) {
  WorkflowBundle b;
  b.graph = parse_workflow(detail::load_json_file(workflow_file), workflow_file.string());
  const auto dir = workflow_file.parent_path();
  for (const auto& n : b.graph.nodes) {
    std::string id;
    if (const auto* g = std::get_if<GridPayload>(&n.payload)) id = g->subworkflow;
    if (const auto* l = std::get_if<LoopPayload>(&n.payload)) id = l->subworkflow;
    if (id.empty() || b.subworkflows.contains(id)) continue;
    const auto file = dir / (id + ".json");
    auto sub = parse_subworkflow(detail::load_json_file(file), file.string());
    if (sub.id != id) throw SchemaError(file.string() + ":$.id", "expected id '" + id + "'");
    b.subworkflows.emplace(id, std::move(sub));
  }
  return b;
}

struct RunRecord {
  std::string run_id;
  Sla sla;  // expanded
  PolicySet policies;
  ConfigRegistry registry;
  EnforcementReport enforcement;
  std::vector<NodeOutcome> outcomes;
  std::vector<Submission> submissions;
  std::optional<VhsResult> vhs;
  std::set<std::string> pruned;  // nodes above the enforced service level
  double completion_time = 0.0;

  const NodeOutcome* outcome(const std::string& node_id) const {
    for (const auto& o : outcomes)
      if (o.node_id == node_id) return &o;
    return nullptr;
  }
};

inline std::string make_run_id(const WorkflowGraph& g, std::uint64_t seed) { return g.id + "-" + std::to_string(seed); }

/// Expand the SLA, decide and enforce the policy set, then interpret the
/// graph from its entry. Nodes tagged above the enforced app.workflow level
/// are pruned. Nodes run one at a time in breadth-first order (ascending id
/// among siblings); a Decision follows only its chosen branch, a Loop skips
/// its back-edge, and a Terminal ends the run.
inline RunRecord run_workflow(const WorkflowBundle& bundle, const Sla& sla_doc, const std::vector<Policy>& repo,
                              const InformationBase& info, std::span<const ResourceDescriptor> pool,
                              const RunConfig& config, const Strategies& strategies = Strategies::builtin()) {
  const auto& graph = bundle.graph;
  RunRecord record;
  record.run_id = make_run_id(graph, config.seed);
  try {
    record.sla = expand_soft_label(sla_doc);
    if (!record.sla.is_explicit()) throw SchemaError("sla", "incomplete SLA");
    record.policies = decide_policy(record.sla, repo, info);
    record.registry = ConfigRegistry::with_defaults(record.sla, config.seed);
    record.enforcement = enforce(record.policies, record.registry);

    ExecutionContext ctx;
    ctx.run_id = record.run_id;
    ctx.sla = record.sla;
    ctx.registry = record.registry;
    ctx.config = &config;
    ctx.pool = pool;
    ctx.subworkflows = &bundle.subworkflows;
    ctx.now = config.start_time;
    ctx.data["patient.ecg"] = patient_signal(config);

    const auto level = *parse_service_level(ctx.registry.get_string("app.workflow"));
    auto active = [&](const std::string& id) { return graph.find(id)->service_level <= level; };
    for (const auto& n : graph.nodes)
      if (!active(n.id)) record.pruned.insert(n.id);

    std::deque<std::string> queue;
    std::set<std::string> visited;
    if (active(graph.entry)) queue.push_back(graph.entry);
    while (!queue.empty()) {
      const auto id = queue.front();
      queue.pop_front();
      if (!visited.insert(id).second) continue;
      const Node& node = *graph.find(id);
      auto outcome = execute_node(node, ctx, strategies);

      std::vector<std::string> next;
      if (node.kind() == NodeKind::Terminal) {
        record.outcomes.push_back(std::move(outcome));
        break;
      } else if (const auto* d = std::get_if<DecisionPayload>(&node.payload)) {
        auto b = d->branches.find(*outcome.branch);
        if (b == d->branches.end()) throw NodeError(id, "no branch for outcome '" + *outcome.branch + "'");
        if (active(b->second)) {
          next.push_back(b->second);
        } else {
          outcome.summary += " (target '" + b->second + "' pruned)";
        }
      } else {
        next = graph.successors(id);
        if (const auto* l = std::get_if<LoopPayload>(&node.payload)) std::erase(next, l->back_edge);
      }
      for (const auto& n : next)
        if (active(n) && !visited.contains(n)) queue.push_back(n);
      record.outcomes.push_back(std::move(outcome));
    }

    record.submissions = std::move(ctx.submissions);
    record.vhs = ctx.vhs;
    if (!record.outcomes.empty()) record.completion_time = record.outcomes.back().end - record.outcomes.front().start;
  } catch (const std::exception& e) {
    std::throw_with_nested(RunError(record.run_id, e.what()));
  }
  return record;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline json run_record_to_json(const RunRecord& r) {
  json j;
  j["run_id"] = r.run_id;
  j["sla"] = sla_to_json(r.sla);
  j["policy_set"] = {{"app", r.policies.app.id}, {"resource", r.policies.resource.id}, {"workflow", r.policies.workflow.id}};
  j["config"] = r.registry.to_json_doc();
  j["enforcement"]["writes"] = json::array();
  for (const auto& w : r.enforcement.writes)
    j["enforcement"]["writes"].push_back({{"key", w.key}, {"value", to_json(w.value)}, {"policy", w.policy}});
  j["enforcement"]["overrides"] = json::array();
  for (const auto& o : r.enforcement.overrides)
    j["enforcement"]["overrides"].push_back({{"key", o.key}, {"earlier", o.earlier_policy}, {"later", o.later_policy}});
  j["pruned"] = r.pruned;
  j["nodes"] = json::array();
  for (const auto& o : r.outcomes) {
    json n = {{"node", o.node_id}, {"kind", std::string(to_string(o.kind))}, {"start", o.start}, {"end", o.end},
              {"executor", o.executor}, {"summary", o.summary}, {"submissions", o.submissions}};
    if (o.branch) n["branch"] = *o.branch;
    j["nodes"].push_back(std::move(n));
  }
  j["submissions"] = json::array();
  for (const auto& s : r.submissions)
    j["submissions"].push_back({{"node", s.node_id}, {"iteration", s.iteration}, {"t0", s.result.t0},
                                {"makespan", s.result.makespan}, {"plan", plan_to_json(s.result.plan)}});
  if (r.vhs) {
    j["vhs"] = {{"iterations", r.vhs->iterations}, {"best_index", r.vhs->best_index},
                {"best_distance", r.vhs->best_distance}, {"distances", r.vhs->distances},
                {"best_params", {{"bpm", r.vhs->best_params.bpm}, {"irregularity", r.vhs->best_params.irregularity},
                                 {"st_offset", r.vhs->best_params.st_offset}}}};
  }
  j["completion_time"] = r.completion_time;
  return j;
}

inline std::string node_timings_csv(const RunRecord& r) {
  std::ostringstream out;
  out << "node,kind,start,end\n";
  for (const auto& o : r.outcomes)
    out << o.node_id << ',' << to_string(o.kind) << ',' << detail::fixed6(o.start) << ',' << detail::fixed6(o.end) << '\n';
  return out.str();
}

/// Sim-kernel log of every submission; task ids are prefixed
/// `<node>#<submission index>/`.
inline std::string task_log_csv(const RunRecord& r) {
  std::ostringstream out;
  out << "task,resource,start,end\n";
  for (std::size_t i = 0; i < r.submissions.size(); ++i) {
    const auto& s = r.submissions[i];
    for (const auto& t : s.result.records)
      out << s.node_id << '#' << i << '/' << t.task << ',' << t.resource << ',' << detail::fixed6(t.start) << ','
          << detail::fixed6(t.end) << '\n';
  }
  return out.str();
}

}  // namespace hywm
