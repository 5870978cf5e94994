#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hywm/detail/json_reader.hpp"
#include "hywm/errors.hpp"
#include "hywm/resource_manager.hpp"
#include "hywm/workflow_model.hpp"

// SLA model, policy repository, decision point (PDP), adaptive enforcement
// (PEP), the typed property information base, and the enforced runtime
// configuration registry.
namespace hywm {

// ---------------------------------------------------------------------------
// Typed scalar values
// ---------------------------------------------------------------------------

using Value = std::variant<bool, std::int64_t, double, std::string>;

enum class ValueType { Boolean, Integer, Real, String };

inline ValueType type_of(const Value& v) { return static_cast<ValueType>(v.index()); }

inline std::string_view to_string(ValueType t) {
  switch (t) {
    case ValueType::Boolean: return "boolean";
    case ValueType::Integer: return "integer";
    case ValueType::Real: return "real";
    case ValueType::String: return "string";
  }
  return "?";
}

inline json to_json(const Value& v) {
  return std::visit([](const auto& x) { return json(x); }, v);
}

inline std::string to_display(const Value& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  return to_json(v).dump();
}

inline Value value_from_json(const detail::JsonReader& r) {
  const auto& j = r.raw();
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  r.fail("expected a scalar (boolean, number or string)");
}

/// Integers widen to reals; every other type mismatch is reported.
inline std::optional<Value> coerce(const Value& v, ValueType target) {
  if (type_of(v) == target) return v;
  if (target == ValueType::Real && type_of(v) == ValueType::Integer)
    return static_cast<double>(std::get<std::int64_t>(v));
  return std::nullopt;
}

inline std::partial_ordering compare_values(const Value& a, const Value& b) {
  const bool a_num = type_of(a) == ValueType::Integer || type_of(a) == ValueType::Real;
  const bool b_num = type_of(b) == ValueType::Integer || type_of(b) == ValueType::Real;
  if (a_num && b_num) {
    auto as_double = [](const Value& v) {
      return type_of(v) == ValueType::Integer ? static_cast<double>(std::get<std::int64_t>(v)) : std::get<double>(v);
    };
    return as_double(a) <=> as_double(b);
  }
  if (a.index() != b.index()) return std::partial_ordering::unordered;
  return std::visit(
      [&](const auto& x) -> std::partial_ordering {
        using T = std::decay_t<decltype(x)>;
        return std::partial_ordering(x <=> std::get<T>(b));
      },
      a);
}

// ---------------------------------------------------------------------------
// SLA
// ---------------------------------------------------------------------------

enum class Performance { Fast, Standard, Economy };

inline std::string_view to_string(Performance p) {
  switch (p) {
    case Performance::Fast: return "Fast";
    case Performance::Standard: return "Standard";
    case Performance::Economy: return "Economy";
  }
  return "?";
}

inline std::optional<Performance> parse_performance(std::string_view s) {
  if (s == "Fast") return Performance::Fast;
  if (s == "Standard") return Performance::Standard;
  if (s == "Economy") return Performance::Economy;
  return std::nullopt;
}

/// A user's requirement triple, or a soft label that expands into one.
struct Sla {
  std::string user_id;
  std::optional<QuorumLevel> resource_level;
  std::optional<Performance> performance;
  std::optional<ServiceLevel> service_level;
  std::optional<std::string> soft_label;

  bool is_explicit() const noexcept { return resource_level && performance && service_level; }
  bool operator==(const Sla&) const = default;
};

struct SoftLabelExpansion {
  std::string_view label;
  QuorumLevel resource_level;
  Performance performance;
  ServiceLevel service_level;
};

inline constexpr SoftLabelExpansion kSoftLabels[] = {
    {"High Performance", QuorumLevel::L1, Performance::Fast, ServiceLevel::EcgVhs},
    {"Balanced", QuorumLevel::L2, Performance::Standard, ServiceLevel::EcgDetect},
    {"Low Cost", QuorumLevel::L3, Performance::Economy, ServiceLevel::EcgOnly},
};

/// Replaces the soft label with explicit fields. Fields that are already
/// explicit keep their values. An SLA without a soft label is returned as is.
inline Sla expand_soft_label(Sla sla) {
  if (!sla.soft_label) return sla;
  for (const auto& e : kSoftLabels) {
    if (e.label != *sla.soft_label) continue;
    if (!sla.resource_level) sla.resource_level = e.resource_level;
    if (!sla.performance) sla.performance = e.performance;
    if (!sla.service_level) sla.service_level = e.service_level;
    sla.soft_label.reset();
    return sla;
  }
  throw UnknownLabel(*sla.soft_label);
}

inline Sla parse_sla(const json& doc, const std::string& source = "sla") {
  detail::JsonReader root(doc, source + ":$");
  root.expect_object({"user_id", "soft_label", "resource_level", "performance", "service_level"});
  Sla sla;
  sla.user_id = root.at("user_id").as_identifier();
  if (auto r = root.find("soft_label")) sla.soft_label = r->as_string();
  if (auto r = root.find("resource_level")) {
    sla.resource_level = parse_quorum_level(r->as_string());
    if (!sla.resource_level) r->fail("unknown resource level '" + r->as_string() + "'");
  }
  if (auto r = root.find("performance")) {
    sla.performance = parse_performance(r->as_string());
    if (!sla.performance) r->fail("unknown performance '" + r->as_string() + "'");
  }
  if (auto r = root.find("service_level")) {
    sla.service_level = parse_service_level(r->as_string());
    if (!sla.service_level) r->fail("unknown service level '" + r->as_string() + "'");
  }
  if (!sla.soft_label && !sla.is_explicit())
    root.fail("SLA needs either soft_label or all of resource_level, performance, service_level");
  return sla;
}

inline json sla_to_json(const Sla& sla) {
  json j;
  j["user_id"] = sla.user_id;
  if (sla.soft_label) j["soft_label"] = *sla.soft_label;
  if (sla.resource_level) j["resource_level"] = std::string(to_string(*sla.resource_level));
  if (sla.performance) j["performance"] = std::string(to_string(*sla.performance));
  if (sla.service_level) j["service_level"] = std::string(to_string(*sla.service_level));
  return j;
}

// ---------------------------------------------------------------------------
// Information base
// ---------------------------------------------------------------------------

enum class PropertySource { Static, Runtime };

struct PropertySpec {
  ValueType type;
  Value default_value;
  PropertySource source = PropertySource::Runtime;
};

struct PropertyRecord {
  std::string key;
  Value value;
  PropertySource source;
  bool operator==(const PropertyRecord&) const = default;
};

/// Typed key-value store of grid properties consulted by policy conditions.
/// Single writer, many readers.
class InformationBase {
 public:
  InformationBase() = default;

  InformationBase(const InformationBase& other) {
    std::shared_lock lock(other.mutex_);
    schema_ = other.schema_;
    values_ = other.values_;
  }

  InformationBase& operator=(const InformationBase& other) {
    if (this == &other) return *this;
    InformationBase copy(other);
    std::unique_lock lock(mutex_);
    schema_ = std::move(copy.schema_);
    values_ = std::move(copy.values_);
    return *this;
  }

  static InformationBase with_default_schema() {
    InformationBase info;
    info.declare("grid.alert", {ValueType::Boolean, false, PropertySource::Runtime});
    info.declare("grid.load", {ValueType::Real, 0.0, PropertySource::Runtime});
    info.declare("pqrm.mode", {ValueType::String, std::string("normal"), PropertySource::Static});
    return info;
  }

  void declare(const std::string& key, PropertySpec spec) {
    if (type_of(spec.default_value) != spec.type) throw TypeMismatch(key, "default does not match declared type");
    std::unique_lock lock(mutex_);
    schema_[key] = std::move(spec);
  }

  bool declared(std::string_view key) const {
    std::shared_lock lock(mutex_);
    return schema_.find(std::string(key)) != schema_.end();
  }

  ValueType type(const std::string& key) const {
    std::shared_lock lock(mutex_);
    return spec_locked(key).type;
  }

  Value get(const std::string& key) const {
    std::shared_lock lock(mutex_);
    const auto& spec = spec_locked(key);
    auto it = values_.find(key);
    return it != values_.end() ? it->second : spec.default_value;
  }

  /// Replaces the value and returns the previous one.
  Value set(const std::string& key, const Value& value) {
    std::unique_lock lock(mutex_);
    const auto& spec = spec_locked(key);
    auto coerced = coerce(value, spec.type);
    if (!coerced)
      throw TypeMismatch(key, "expected " + std::string(to_string(spec.type)) + ", got " +
                                  std::string(to_string(type_of(value))));
    auto it = values_.find(key);
    Value previous = it != values_.end() ? it->second : spec.default_value;
    values_[key] = std::move(*coerced);
    return previous;
  }

  std::vector<PropertyRecord> records() const {
    std::shared_lock lock(mutex_);
    std::vector<PropertyRecord> out;
    for (const auto& [key, spec] : schema_) {
      auto it = values_.find(key);
      out.push_back({key, it != values_.end() ? it->second : spec.default_value, spec.source});
    }
    return out;
  }

 private:
  const PropertySpec& spec_locked(const std::string& key) const {
    auto it = schema_.find(key);
    if (it == schema_.end()) throw UnknownKey(key);
    return it->second;
  }

  mutable std::shared_mutex mutex_;
  std::map<std::string, PropertySpec> schema_;
  std::map<std::string, Value> values_;
};

inline Value property_get(const InformationBase& info, const std::string& key) { return info.get(key); }

inline Value property_set(InformationBase& info, const std::string& key, const Value& value) {
  return info.set(key, value);
}

// ---------------------------------------------------------------------------
// Policies
// ---------------------------------------------------------------------------

enum class PolicyKind { Resource, LowLevelWorkflow, AppService };

inline std::string_view to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::Resource: return "Resource";
    case PolicyKind::LowLevelWorkflow: return "LowLevelWorkflow";
    case PolicyKind::AppService: return "AppService";
  }
  return "?";
}

inline std::optional<PolicyKind> parse_policy_kind(std::string_view s) {
  for (auto k : {PolicyKind::Resource, PolicyKind::LowLevelWorkflow, PolicyKind::AppService})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

enum class CompareOp { Eq, Ne, Le, Ge };

inline std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return "==";
    case CompareOp::Ne: return "!=";
    case CompareOp::Le: return "<=";
    case CompareOp::Ge: return ">=";
  }
  return "?";
}

inline std::optional<CompareOp> parse_compare_op(std::string_view s) {
  for (auto op : {CompareOp::Eq, CompareOp::Ne, CompareOp::Le, CompareOp::Ge})
    if (to_string(op) == s) return op;
  return std::nullopt;
}

struct Predicate {
  std::string key;  // an SLA field name or an information-base property
  CompareOp op = CompareOp::Eq;
  Value literal;
  bool operator==(const Predicate&) const = default;
};

struct Action {
  std::string key;
  Value value;
  bool operator==(const Action&) const = default;
};

struct Policy {
  std::string id;
  PolicyKind kind = PolicyKind::Resource;
  std::int64_t priority = 0;
  std::vector<Predicate> condition;  // conjunction; empty matches every SLA
  std::vector<Action> actions;
  bool operator==(const Policy&) const = default;
};

/// One policy per kind: application service, resource, low-level workflow.
struct PolicySet {
  Policy app;
  Policy resource;
  Policy workflow;
  bool operator==(const PolicySet&) const = default;
};

namespace detail {

inline constexpr std::string_view kSlaKeys[] = {"user_id", "resource_level", "performance", "service_level"};

inline bool is_sla_key(std::string_view key) {
  return std::find(std::begin(kSlaKeys), std::end(kSlaKeys), key) != std::end(kSlaKeys);
}

/// Enumerated SLA fields compare by ordinal; nullopt for a bad literal.
inline std::optional<int> sla_ordinal(std::string_view key, std::string_view name) {
  if (key == "resource_level") {
    if (auto v = parse_quorum_level(name)) return static_cast<int>(*v);
  } else if (key == "performance") {
    if (auto v = parse_performance(name)) return static_cast<int>(*v);
  } else if (key == "service_level") {
    if (auto v = parse_service_level(name)) return static_cast<int>(*v);
  }
  return std::nullopt;
}

inline bool apply_op(CompareOp op, std::partial_ordering c) {
  switch (op) {
    case CompareOp::Eq: return c == 0;
    case CompareOp::Ne: return c != 0;
    case CompareOp::Le: return c <= 0;
    case CompareOp::Ge: return c >= 0;
  }
  return false;
}

}  // namespace detail

/// Evaluates one predicate against an expanded SLA and the information base
/// as it stands at call time.
inline bool evaluate(const Predicate& p, const Sla& sla, const InformationBase& info) {
  if (!detail::is_sla_key(p.key)) return detail::apply_op(p.op, compare_values(info.get(p.key), p.literal));
  const auto* literal = std::get_if<std::string>(&p.literal);
  if (literal == nullptr) throw TypeMismatch(p.key, "SLA fields compare against string literals");
  if (p.key == "user_id") return detail::apply_op(p.op, std::partial_ordering(sla.user_id <=> *literal));
  if (!sla.is_explicit()) throw Error("SLA must be expanded before policy decision");
  const auto rhs = detail::sla_ordinal(p.key, *literal);
  if (!rhs) throw TypeMismatch(p.key, "'" + *literal + "' is not a valid value");
  int lhs = 0;
  if (p.key == "resource_level") lhs = static_cast<int>(*sla.resource_level);
  if (p.key == "performance") lhs = static_cast<int>(*sla.performance);
  if (p.key == "service_level") lhs = static_cast<int>(*sla.service_level);
  return detail::apply_op(p.op, std::partial_ordering(lhs <=> *rhs));
}

inline bool satisfies(const Policy& policy, const Sla& sla, const InformationBase& info) {
  return std::all_of(policy.condition.begin(), policy.condition.end(),
                     [&](const Predicate& p) { return evaluate(p, sla, info); });
}

/// Policy Decision Point: per kind, the satisfied policy with the highest
/// priority; equal priorities go to the lexicographically smallest id.
inline PolicySet decide_policy(const Sla& sla, const std::vector<Policy>& repo, const InformationBase& info) {
  auto pick = [&](PolicyKind kind) -> const Policy& {
    const Policy* best = nullptr;
    for (const auto& p : repo) {
      if (p.kind != kind || !satisfies(p, sla, info)) continue;
      if (best == nullptr || p.priority > best->priority || (p.priority == best->priority && p.id < best->id))
        best = &p;
    }
    if (best == nullptr) throw NoMatchingPolicy(std::string(to_string(kind)));
    return *best;
  };
  return PolicySet{pick(PolicyKind::AppService), pick(PolicyKind::Resource), pick(PolicyKind::LowLevelWorkflow)};
}

inline std::vector<Policy> parse_policy_repo(const json& doc, const InformationBase& schema,
                                             const std::string& source = "repo") {
  detail::JsonReader root(doc, source + ":$");
  root.expect_array();
  std::vector<Policy> repo;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < root.size(); ++i) {
    auto r = root.at(i);
    r.expect_object({"id", "kind", "priority", "condition", "actions"});
    Policy p;
    p.id = r.at("id").as_identifier();
    if (!ids.insert(p.id).second) r.at("id").fail("duplicate policy id '" + p.id + "'");
    const auto kind = parse_policy_kind(r.at("kind").as_string());
    if (!kind) r.at("kind").fail("unknown policy kind '" + r.at("kind").as_string() + "'");
    p.kind = *kind;
    p.priority = r.at("priority").as_integer();

    auto cond = r.at("condition").expect_array();
    for (std::size_t k = 0; k < cond.size(); ++k) {
      auto c = cond.at(k);
      c.expect_object({"key", "op", "value"});
      Predicate pred;
      pred.key = c.at("key").as_identifier();
      const auto op = parse_compare_op(c.at("op").as_string());
      if (!op) c.at("op").fail("unknown operator '" + c.at("op").as_string() + "'");
      pred.op = *op;
      pred.literal = value_from_json(c.at("value"));
      if (detail::is_sla_key(pred.key)) {
        const auto* lit = std::get_if<std::string>(&pred.literal);
        if (lit == nullptr) c.at("value").fail("SLA field literal must be a string");
        if (pred.key != "user_id" && !detail::sla_ordinal(pred.key, *lit))
          c.at("value").fail("'" + *lit + "' is not a valid " + pred.key);
      } else if (schema.declared(pred.key)) {
        auto coerced = coerce(pred.literal, schema.type(pred.key));
        if (!coerced) c.at("value").fail("literal type does not match property '" + pred.key + "'");
        pred.literal = *coerced;
      } else {
        c.at("key").fail("unknown condition key '" + pred.key + "'");
      }
      p.condition.push_back(std::move(pred));
    }

    auto actions = r.at("actions").expect_array();
    if (actions.size() == 0) actions.fail("a policy needs at least one action");
    for (std::size_t k = 0; k < actions.size(); ++k) {
      auto a = actions.at(k);
      a.expect_object({"key", "value"});
      p.actions.push_back({a.at("key").as_identifier(), value_from_json(a.at("value"))});
    }
    repo.push_back(std::move(p));
  }
  return repo;
}

inline json policy_to_json(const Policy& p) {
  json j;
  j["id"] = p.id;
  j["kind"] = std::string(to_string(p.kind));
  j["priority"] = p.priority;
  j["condition"] = json::array();
  for (const auto& c : p.condition)
    j["condition"].push_back({{"key", c.key}, {"op", std::string(to_string(c.op))}, {"value", to_json(c.literal)}});
  j["actions"] = json::array();
  for (const auto& a : p.actions) j["actions"].push_back({{"key", a.key}, {"value", to_json(a.value)}});
  return j;
}

// ---------------------------------------------------------------------------
// Configuration registry and enforcement
// ---------------------------------------------------------------------------

struct ConfigKeySpec {
  ValueType type;
  std::vector<std::string> domain;  // allowed strings; empty means unrestricted
  std::optional<double> minimum;    // inclusive lower bound for numbers
  bool strictly_positive = false;
};

/// The closed vocabulary of enforceable configuration keys.
inline const std::map<std::string, ConfigKeySpec>& config_schema() {
  static const std::map<std::string, ConfigKeySpec> schema = {
      {"resource.level", {ValueType::String, {"L1", "L2", "L3", "Random"}, std::nullopt}},
      {"resource.alpha", {ValueType::Real, {}, 0.0}},
      {"resource.beta", {ValueType::Real, {}, 0.0}},
      {"scheduler.kind", {ValueType::String, {"MinEFT", "RoundRobin", "Random"}, std::nullopt}},
      {"scheduler.seed", {ValueType::Integer, {}, 0.0}},
      {"app.workflow", {ValueType::String, {"EcgOnly", "EcgDetect", "EcgVhs"}, std::nullopt}},
      {"vhs.max_iter", {ValueType::Integer, {}, 1.0}},
      {"vhs.tolerance", {ValueType::Real, {}, std::nullopt, true}},
  };
  return schema;
}

inline constexpr std::string_view kDefaultProvenance = "default";

class ConfigRegistry {
 public:
  struct Entry {
    Value value;
    std::string provenance;  // enforcing policy id, or "default"
    bool operator==(const Entry&) const = default;
  };

  /// Documented defaults: resource level and application workflow follow the
  /// SLA, alpha = beta = 0.5, MinEFT, scheduler.seed = run seed,
  /// vhs.max_iter = 4, vhs.tolerance = 0.05.
  static ConfigRegistry with_defaults(const Sla& sla, std::uint64_t seed) {
    if (!sla.is_explicit()) throw Error("SLA must be expanded before building the registry");
    ConfigRegistry reg;
    const std::string d(kDefaultProvenance);
    reg.set("resource.level", std::string(to_string(*sla.resource_level)), d);
    reg.set("resource.alpha", 0.5, d);
    reg.set("resource.beta", 0.5, d);
    reg.set("scheduler.kind", std::string("MinEFT"), d);
    reg.set("scheduler.seed", static_cast<std::int64_t>(seed & 0x7fffffffffffffffULL), d);
    reg.set("app.workflow", std::string(to_string(*sla.service_level)), d);
    reg.set("vhs.max_iter", std::int64_t{4}, d);
    reg.set("vhs.tolerance", 0.05, d);
    return reg;
  }

  /// Checks key, type and domain without writing; returns the stored form.
  static Value check(const std::string& key, const Value& value) {
    const auto& schema = config_schema();
    auto it = schema.find(key);
    if (it == schema.end()) throw UnknownConfigKey(key);
    const auto& spec = it->second;
    auto coerced = coerce(value, spec.type);
    if (!coerced)
      throw TypeMismatch(key, "expected " + std::string(to_string(spec.type)) + ", got " +
                                  std::string(to_string(type_of(value))));
    if (const auto* s = std::get_if<std::string>(&*coerced); s && !spec.domain.empty() &&
        std::find(spec.domain.begin(), spec.domain.end(), *s) == spec.domain.end())
      throw TypeMismatch(key, "'" + *s + "' is outside the allowed values");
    if (spec.type == ValueType::Integer || spec.type == ValueType::Real) {
      const double x = spec.type == ValueType::Integer ? static_cast<double>(std::get<std::int64_t>(*coerced))
                                                       : std::get<double>(*coerced);
      if ((spec.minimum && x < *spec.minimum) || (spec.strictly_positive && !(x > 0)))
        throw TypeMismatch(key, "value " + to_display(*coerced) + " is out of range");
    }
    return *coerced;
  }

  void set(const std::string& key, const Value& value, std::string provenance) {
    entries_[key] = Entry{check(key, value), std::move(provenance)};
  }

  bool contains(const std::string& key) const { return entries_.contains(key); }

  const Entry& entry(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw UnknownConfigKey(key);
    return it->second;
  }

  const Value& get(const std::string& key) const { return entry(key).value; }
  bool is_default(const std::string& key) const { return entry(key).provenance == kDefaultProvenance; }

  const std::string& get_string(const std::string& key) const { return std::get<std::string>(get(key)); }
  double get_real(const std::string& key) const { return std::get<double>(get(key)); }
  std::int64_t get_integer(const std::string& key) const { return std::get<std::int64_t>(get(key)); }

  const std::map<std::string, Entry>& entries() const noexcept { return entries_; }

  json to_json_doc() const {
    json j = json::object();
    for (const auto& [key, e] : entries_) j[key] = {{"value", to_json(e.value)}, {"provenance", e.provenance}};
    return j;
  }

  bool operator==(const ConfigRegistry&) const = default;

 private:
  std::map<std::string, Entry> entries_;
};

struct EnforcementReport {
  struct Write {
    std::string key;
    Value value;
    std::string policy;
  };
  struct Override {
    std::string key;
    std::string earlier_policy;
    std::string later_policy;
  };
  std::vector<Write> writes;
  std::vector<Override> overrides;
};

/// Adaptive enforcement: applies actions in the order app, resource,
/// workflow. A later write to a key already written in this pass wins and
/// is reported as an override. All actions are validated before any write.
inline EnforcementReport enforce(const PolicySet& set, ConfigRegistry& registry) {
  const Policy* order[] = {&set.app, &set.resource, &set.workflow};
  for (const auto* p : order)
    for (const auto& a : p->actions) (void)ConfigRegistry::check(a.key, a.value);

  EnforcementReport report;
  std::map<std::string, std::string> written_by;
  for (const auto* p : order) {
    for (const auto& a : p->actions) {
      if (auto it = written_by.find(a.key); it != written_by.end())
        report.overrides.push_back({a.key, it->second, p->id});
      registry.set(a.key, a.value, p->id);
      written_by[a.key] = p->id;
      report.writes.push_back({a.key, registry.get(a.key), p->id});
    }
  }
  return report;
}

}  // namespace hywm
