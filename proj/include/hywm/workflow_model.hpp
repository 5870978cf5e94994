#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "hywm/detail/json_reader.hpp"
#include "hywm/errors.hpp"

// Two workflow levels: the high-level node graph that the hybrid engine
// interprets locally, and the abstract task DAGs handed to the grid engine.
namespace hywm {

using detail::json;

/// Application service levels, ordered by coverage.
enum class ServiceLevel { EcgOnly, EcgDetect, EcgVhs };

inline std::string_view to_string(ServiceLevel s) {
  switch (s) {
    case ServiceLevel::EcgOnly: return "EcgOnly";
    case ServiceLevel::EcgDetect: return "EcgDetect";
    case ServiceLevel::EcgVhs: return "EcgVhs";
  }
  return "?";
}

inline std::optional<ServiceLevel> parse_service_level(std::string_view s) {
  if (s == "EcgOnly") return ServiceLevel::EcgOnly;
  if (s == "EcgDetect") return ServiceLevel::EcgDetect;
  if (s == "EcgVhs") return ServiceLevel::EcgVhs;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// High-level graph
// ---------------------------------------------------------------------------

enum class NodeKind { LocalTask, GridSubWorkflow, Decision, Loop, DataRetrieval, UserInput, Terminal };

inline std::string_view to_string(NodeKind k) {
  switch (k) {
    case NodeKind::LocalTask: return "LocalTask";
    case NodeKind::GridSubWorkflow: return "GridSubWorkflow";
    case NodeKind::Decision: return "Decision";
    case NodeKind::Loop: return "Loop";
    case NodeKind::DataRetrieval: return "DataRetrieval";
    case NodeKind::UserInput: return "UserInput";
    case NodeKind::Terminal: return "Terminal";
  }
  return "?";
}

inline std::optional<NodeKind> parse_node_kind(std::string_view s) {
  for (auto k : {NodeKind::LocalTask, NodeKind::GridSubWorkflow, NodeKind::Decision, NodeKind::Loop,
                 NodeKind::DataRetrieval, NodeKind::UserInput, NodeKind::Terminal}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

struct LocalTaskPayload {
  std::string function;
  double duration = 0.0;  // seconds of local compute charged to the run
  bool operator==(const LocalTaskPayload&) const = default;
};

struct GridPayload {
  std::string subworkflow;
  std::string function;  // optional local post-processing of the grid output
  bool operator==(const GridPayload&) const = default;
};

struct DecisionPayload {
  std::string rule_table;
  std::map<std::string, std::string> branches;  // outcome label -> target node
  bool operator==(const DecisionPayload&) const = default;
};

struct LoopPayload {
  std::string subworkflow;
  std::int64_t max_iterations = 1;
  double tolerance = 0.0;
  std::string back_edge;  // target of the loop's back-edge; the loop itself by default
  bool operator==(const LoopPayload&) const = default;
};

struct DataRetrievalPayload {
  std::string key;
  bool operator==(const DataRetrievalPayload&) const = default;
};

struct UserInputPayload {
  std::string key;
  bool operator==(const UserInputPayload&) const = default;
};

struct TerminalPayload {
  bool operator==(const TerminalPayload&) const = default;
};

// Variant order matches NodeKind.
using NodePayload = std::variant<LocalTaskPayload, GridPayload, DecisionPayload, LoopPayload,
                                 DataRetrievalPayload, UserInputPayload, TerminalPayload>;

struct Node {
  std::string id;
  NodePayload payload;
  ServiceLevel service_level = ServiceLevel::EcgOnly;  // minimum level at which the node runs

  NodeKind kind() const noexcept { return static_cast<NodeKind>(payload.index()); }
  bool operator==(const Node&) const = default;
};

struct WorkflowGraph {
  std::string id;
  std::string entry;
  std::vector<Node> nodes;
  std::vector<std::pair<std::string, std::string>> edges;

  const Node* find(std::string_view node_id) const {
    for (const auto& n : nodes)
      if (n.id == node_id) return &n;
    return nullptr;
  }

  /// Successor ids in ascending order.
  std::vector<std::string> successors(std::string_view node_id) const {
    std::vector<std::string> out;
    for (const auto& [from, to] : edges)
      if (from == node_id) out.push_back(to);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  bool operator==(const WorkflowGraph&) const = default;
};

/// An edge that may close a cycle: anything leaving a Decision node, and a
/// Loop node's declared back-edge.
inline bool is_cycle_exempt(const WorkflowGraph& g, const std::string& from, const std::string& to) {
  const Node* n = g.find(from);
  if (n == nullptr) return false;
  if (n->kind() == NodeKind::Decision) return true;
  if (const auto* loop = std::get_if<LoopPayload>(&n->payload)) return to == loop->back_edge;
  return false;
}

struct Finding {
  enum class Kind { DuplicateNode, MissingEntry, DanglingEdge, Cycle, Unreachable, BadBranch, BadLoop };
  Kind kind;
  std::string subject;  // node id, or "from->to" for edges
  std::string detail;
  bool operator==(const Finding&) const = default;
};

inline std::string_view to_string(Finding::Kind k) {
  switch (k) {
    case Finding::Kind::DuplicateNode: return "DuplicateNode";
    case Finding::Kind::MissingEntry: return "MissingEntry";
    case Finding::Kind::DanglingEdge: return "DanglingEdge";
    case Finding::Kind::Cycle: return "Cycle";
    case Finding::Kind::Unreachable: return "Unreachable";
    case Finding::Kind::BadBranch: return "BadBranch";
    case Finding::Kind::BadLoop: return "BadLoop";
  }
  return "?";
}

struct ValidationReport {
  std::vector<Finding> findings;

  bool ok() const noexcept { return findings.empty(); }

  std::string summary() const {
    std::string out;
    for (const auto& f : findings) {
      if (!out.empty()) out += "; ";
      out += std::string(to_string(f.kind)) + "(" + f.subject + ")";
      if (!f.detail.empty()) out += " " + f.detail;
    }
    return out;
  }
};

inline ValidationReport validate_graph(const WorkflowGraph& g) {
  ValidationReport report;
  auto add = [&](Finding::Kind k, std::string subject, std::string detail = {}) {
    report.findings.push_back({k, std::move(subject), std::move(detail)});
  };

  std::set<std::string> ids;
  for (const auto& n : g.nodes)
    if (!ids.insert(n.id).second) add(Finding::Kind::DuplicateNode, n.id);
  if (!ids.contains(g.entry)) add(Finding::Kind::MissingEntry, g.entry);

  std::map<std::string, std::vector<std::string>> adjacency;  // all valid edges
  std::map<std::string, std::vector<std::string>> acyclic_part;
  for (const auto& [from, to] : g.edges) {
    if (!ids.contains(from) || !ids.contains(to)) {
      add(Finding::Kind::DanglingEdge, from + "->" + to,
          "references missing node '" + (ids.contains(from) ? to : from) + "'");
      continue;
    }
    adjacency[from].push_back(to);
    if (!is_cycle_exempt(g, from, to)) acyclic_part[from].push_back(to);
  }

  for (const auto& n : g.nodes) {
    const auto out = g.successors(n.id);
    auto has_edge = [&](const std::string& to) { return std::binary_search(out.begin(), out.end(), to); };
    if (const auto* d = std::get_if<DecisionPayload>(&n.payload)) {
      for (const auto& [label, target] : d->branches)
        if (!has_edge(target)) add(Finding::Kind::BadBranch, n.id, "branch '" + label + "' -> '" + target + "' has no edge");
    }
    if (const auto* l = std::get_if<LoopPayload>(&n.payload)) {
      if (!has_edge(l->back_edge)) add(Finding::Kind::BadLoop, n.id, "back-edge to '" + l->back_edge + "' missing");
    }
  }

  // Nodes on a cycle of the restricted graph, grouped by mutual reachability.
  auto reach = [&](const std::string& start) {
    std::set<std::string> seen;
    std::vector<std::string> stack = acyclic_part[start];
    while (!stack.empty()) {
      auto v = stack.back();
      stack.pop_back();
      if (!seen.insert(v).second) continue;
      for (const auto& w : acyclic_part[v]) stack.push_back(w);
    }
    return seen;
  };
  std::map<std::string, std::set<std::string>> reachable;
  for (const auto& id : ids) reachable[id] = reach(id);
  std::set<std::string> reported;
  for (const auto& id : ids) {
    if (!reachable[id].contains(id) || reported.contains(id)) continue;
    std::string members;
    for (const auto& other : ids) {
      if (reachable[id].contains(other) && reachable[other].contains(id)) {
        reported.insert(other);
        members += (members.empty() ? "" : ",") + other;
      }
    }
    add(Finding::Kind::Cycle, id, "cycle through {" + members + "}");
  }

  if (ids.contains(g.entry)) {
    std::set<std::string> seen{g.entry};
    std::vector<std::string> stack{g.entry};
    while (!stack.empty()) {
      auto v = stack.back();
      stack.pop_back();
      for (const auto& w : adjacency[v])
        if (seen.insert(w).second) stack.push_back(w);
    }
    for (const auto& n : g.nodes)
      if (!seen.contains(n.id)) add(Finding::Kind::Unreachable, n.id);
  }
  return report;
}

namespace detail {

inline NodePayload parse_payload(NodeKind kind, const JsonReader& p, const std::string& node_id) {
  static constexpr std::string_view kLevel = "service_level";
  switch (kind) {
    case NodeKind::LocalTask: {
      p.expect_object({"function", "duration", kLevel});
      LocalTaskPayload out{p.at("function").as_identifier(), 0.0};
      if (auto d = p.find("duration")) {
        out.duration = d->as_number();
        if (out.duration < 0) d->fail("duration must be >= 0");
      }
      return out;
    }
    case NodeKind::GridSubWorkflow: {
      p.expect_object({"subworkflow", "function", kLevel});
      GridPayload out{p.at("subworkflow").as_identifier(), {}};
      if (auto f = p.find("function")) out.function = f->as_identifier();
      return out;
    }
    case NodeKind::Decision: {
      p.expect_object({"rule_table", "branches", kLevel});
      DecisionPayload out{p.at("rule_table").as_identifier(), {}};
      auto branches = p.at("branches");
      if (!branches.raw().is_object() || branches.raw().empty()) branches.fail("expected a non-empty object");
      for (const auto& [label, _] : branches.raw().items())
        out.branches[label] = branches.at(label).as_identifier();
      return out;
    }
    case NodeKind::Loop: {
      p.expect_object({"subworkflow", "max_iterations", "tolerance", "back_edge", kLevel});
      LoopPayload out;
      out.subworkflow = p.at("subworkflow").as_identifier();
      out.max_iterations = p.at("max_iterations").as_integer();
      if (out.max_iterations < 1) p.at("max_iterations").fail("max_iterations must be >= 1");
      out.tolerance = p.at("tolerance").as_number();
      if (!(out.tolerance > 0)) p.at("tolerance").fail("tolerance must be > 0");
      out.back_edge = p.has("back_edge") ? p.at("back_edge").as_identifier() : node_id;
      return out;
    }
    case NodeKind::DataRetrieval:
      p.expect_object({"key", kLevel});
      return DataRetrievalPayload{p.at("key").as_identifier()};
    case NodeKind::UserInput:
      p.expect_object({"key", kLevel});
      return UserInputPayload{p.at("key").as_identifier()};
    case NodeKind::Terminal:
      p.expect_object({kLevel});
      return TerminalPayload{};
  }
  p.fail("unreachable");
}

inline json payload_to_json(const Node& n) {
  json p = json::object();
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, LocalTaskPayload>) {
          p["function"] = v.function;
          if (v.duration != 0.0) p["duration"] = v.duration;
        } else if constexpr (std::is_same_v<T, GridPayload>) {
          p["subworkflow"] = v.subworkflow;
          if (!v.function.empty()) p["function"] = v.function;
        } else if constexpr (std::is_same_v<T, DecisionPayload>) {
          p["rule_table"] = v.rule_table;
          p["branches"] = v.branches;
        } else if constexpr (std::is_same_v<T, LoopPayload>) {
          p["subworkflow"] = v.subworkflow;
          p["max_iterations"] = v.max_iterations;
          p["tolerance"] = v.tolerance;
          if (v.back_edge != n.id) p["back_edge"] = v.back_edge;
        } else if constexpr (std::is_same_v<T, DataRetrievalPayload> || std::is_same_v<T, UserInputPayload>) {
          p["key"] = v.key;
        }
      },
      n.payload);
  if (n.service_level != ServiceLevel::EcgOnly) p["service_level"] = std::string(to_string(n.service_level));
  return p;
}

}  // namespace detail

/// Parses and validates a workflow document. `source` prefixes error paths.
inline WorkflowGraph parse_workflow(const json& doc, const std::string& source = "workflow") {
  detail::JsonReader root(doc, source + ":$");
  root.expect_object({"id", "entry", "nodes", "edges"});
  WorkflowGraph g;
  g.id = root.at("id").as_identifier();
  g.entry = root.at("entry").as_identifier();

  std::set<std::string> ids;
  auto nodes = root.at("nodes").expect_array();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    auto n = nodes.at(i);
    n.expect_object({"id", "kind", "payload"});
    Node node;
    node.id = n.at("id").as_identifier();
    if (!ids.insert(node.id).second) n.at("id").fail("duplicate node id '" + node.id + "'");
    const auto kind_name = n.at("kind").as_string();
    const auto kind = parse_node_kind(kind_name);
    if (!kind) n.at("kind").fail("unknown node kind '" + kind_name + "'");
    auto payload = n.at("payload");
    node.payload = detail::parse_payload(*kind, payload, node.id);
    if (auto lvl = payload.find("service_level")) {
      auto parsed = parse_service_level(lvl->as_string());
      if (!parsed) lvl->fail("unknown service level '" + lvl->as_string() + "'");
      node.service_level = *parsed;
    }
    g.nodes.push_back(std::move(node));
  }

  auto edges = root.at("edges").expect_array();
  for (std::size_t i = 0; i < edges.size(); ++i) {
    auto e = edges.at(i);
    if (!e.raw().is_array() || e.raw().size() != 2) e.fail("edge must be a [from, to] pair");
    std::string ends[2];
    for (std::size_t k = 0; k < 2; ++k) {
      ends[k] = e.at(k).as_identifier();
      if (!ids.contains(ends[k])) e.at(k).fail("edge references unknown node '" + ends[k] + "'");
    }
    g.edges.emplace_back(ends[0], ends[1]);
  }
  if (!ids.contains(g.entry)) root.at("entry").fail("entry references unknown node '" + g.entry + "'");

  auto report = validate_graph(g);
  if (!report.ok()) root.fail("invalid graph: " + report.summary());
  return g;
}

inline json serialize_workflow(const WorkflowGraph& g) {
  json doc;
  doc["id"] = g.id;
  doc["entry"] = g.entry;
  doc["nodes"] = json::array();
  for (const auto& n : g.nodes)
    doc["nodes"].push_back({{"id", n.id}, {"kind", std::string(to_string(n.kind()))}, {"payload", detail::payload_to_json(n)}});
  doc["edges"] = json::array();
  for (const auto& [from, to] : g.edges) doc["edges"].push_back({from, to});
  return doc;
}

// ---------------------------------------------------------------------------
// Abstract sub-workflows
// ---------------------------------------------------------------------------

struct TaskSpec {
  std::string id;
  double work = 1.0;  // abstract work units
  std::string transformation;
  bool operator==(const TaskSpec&) const = default;
};

struct DataDep {
  std::string producer;
  std::string consumer;
  std::uint64_t bytes = 0;
  bool operator==(const DataDep&) const = default;
};

struct InputFile {
  std::string file;
  std::uint64_t bytes = 0;
  std::string consumer;
  bool operator==(const InputFile&) const = default;
};

struct AbstractSubWorkflow {
  std::string id;
  std::vector<TaskSpec> tasks;
  std::vector<DataDep> data_deps;
  std::vector<InputFile> inputs;

  const TaskSpec* find(std::string_view task_id) const {
    for (const auto& t : tasks)
      if (t.id == task_id) return &t;
    return nullptr;
  }

  bool operator==(const AbstractSubWorkflow&) const = default;
};

/// Producers before consumers; ready ties resolved by ascending task id.
inline std::vector<std::string> topological_order(const AbstractSubWorkflow& w) {
  std::map<std::string, int> indegree;
  std::map<std::string, std::vector<std::string>> consumers, producers;
  for (const auto& t : w.tasks) indegree[t.id] = 0;
  for (const auto& d : w.data_deps) {
    ++indegree[d.consumer];
    consumers[d.producer].push_back(d.consumer);
    producers[d.consumer].push_back(d.producer);
  }
  std::set<std::string> ready;
  for (const auto& [id, deg] : indegree)
    if (deg == 0) ready.insert(id);

  std::vector<std::string> order;
  while (!ready.empty()) {
    auto id = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(id);
    for (const auto& c : consumers[id])
      if (--indegree[c] == 0) ready.insert(c);
  }
  if (order.size() == indegree.size()) return order;

  // Every leftover task has a leftover producer, so walking producers from
  // the smallest leftover id must revisit a task.
  std::set<std::string> left;
  for (const auto& [id, deg] : indegree)
    if (deg > 0) left.insert(id);
  std::vector<std::string> walk{*left.begin()};
  while (true) {
    std::string next;
    for (const auto& p : producers[walk.back()])
      if (left.contains(p) && (next.empty() || p < next)) next = p;
    auto seen = std::find(walk.begin(), walk.end(), next);
    if (seen != walk.end()) {
      std::vector<std::string> cycle(seen, walk.end());
      std::reverse(cycle.begin(), cycle.end());
      std::rotate(cycle.begin(), std::min_element(cycle.begin(), cycle.end()), cycle.end());
      throw CycleError(std::move(cycle));
    }
    walk.push_back(next);
  }
}

inline AbstractSubWorkflow parse_subworkflow(const json& doc, const std::string& source = "subworkflow") {
  detail::JsonReader root(doc, source + ":$");
  root.expect_object({"id", "tasks", "data_deps", "inputs"});
  AbstractSubWorkflow w;
  w.id = root.at("id").as_identifier();

  std::set<std::string> ids;
  auto tasks = root.at("tasks").expect_array();
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    auto t = tasks.at(i);
    t.expect_object({"id", "work", "transformation"});
    TaskSpec spec{t.at("id").as_identifier(), t.at("work").as_number(), t.at("transformation").as_identifier()};
    if (!(spec.work > 0)) t.at("work").fail("work must be > 0");
    if (!ids.insert(spec.id).second) t.at("id").fail("duplicate task id '" + spec.id + "'");
    w.tasks.push_back(std::move(spec));
  }
  auto task_ref = [&](const detail::JsonReader& r) {
    auto id = r.as_identifier();
    if (!ids.contains(id)) r.fail("references unknown task '" + id + "'");
    return id;
  };
  auto deps = root.at("data_deps").expect_array();
  for (std::size_t i = 0; i < deps.size(); ++i) {
    auto d = deps.at(i);
    if (!d.raw().is_array() || d.raw().size() != 3) d.fail("data_dep must be [producer, consumer, bytes]");
    w.data_deps.push_back({task_ref(d.at(0)), task_ref(d.at(1)), d.at(2).as_unsigned()});
  }
  auto inputs = root.at("inputs").expect_array();
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    auto in = inputs.at(i);
    in.expect_object({"file", "bytes", "consumer"});
    w.inputs.push_back({in.at("file").as_identifier(), in.at("bytes").as_unsigned(), task_ref(in.at("consumer"))});
  }
  (void)topological_order(w);
  return w;
}

inline json serialize_subworkflow(const AbstractSubWorkflow& w) {
  json doc;
  doc["id"] = w.id;
  doc["tasks"] = json::array();
  for (const auto& t : w.tasks) doc["tasks"].push_back({{"id", t.id}, {"work", t.work}, {"transformation", t.transformation}});
  doc["data_deps"] = json::array();
  for (const auto& d : w.data_deps) doc["data_deps"].push_back({d.producer, d.consumer, d.bytes});
  doc["inputs"] = json::array();
  for (const auto& in : w.inputs) doc["inputs"].push_back({{"file", in.file}, {"bytes", in.bytes}, {"consumer", in.consumer}});
  return doc;
}

}  // namespace hywm
