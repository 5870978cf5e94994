#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hywm/detail/format.hpp"
#include "hywm/detail/json_reader.hpp"
#include "hywm/detail/rng.hpp"
#include "hywm/errors.hpp"

// Simulated grid resource pool, allocation cost, ranking and Available
// Resource Quorum generation.
namespace hywm {

using detail::json;

/// Time-varying load indicator in [0, 1]: a sinusoid plus counter-based
/// gaussian noise keyed on (seed, whole second).
struct MetricTrace {
  double base = 0.0;
  double amplitude = 0.0;
  double period = 3600.0;  // seconds
  double phase = 0.0;      // radians
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  bool operator==(const MetricTrace&) const = default;
};

/// Width of the noise quantum in seconds: the noise term is constant within
/// each [k, k+1) interval.
inline constexpr double kNoiseQuantum = 1.0;

inline double metric_at(const MetricTrace& trace, double t) {
  double v = trace.base + trace.amplitude * std::sin(2.0 * std::numbers::pi * t / trace.period + trace.phase);
  if (trace.noise_sigma > 0.0) {
    const auto slot = static_cast<std::int64_t>(std::floor(t / kNoiseQuantum));
    v += detail::gaussian(trace.seed, static_cast<std::uint64_t>(slot)) * trace.noise_sigma;
  }
  return std::clamp(v, 0.0, 1.0);
}

struct ResourceDescriptor {
  std::string id;
  std::string site;
  double cpu_rate = 1.0;   // work units per second
  double bandwidth = 1.0;  // bytes per second
  double latency = 0.0;    // seconds
  MetricTrace net_trace;
  MetricTrace sys_trace;
  bool operator==(const ResourceDescriptor&) const = default;
};

using ResourcePool = std::vector<ResourceDescriptor>;

struct AllocationCostParams {
  double alpha = 0.5;
  double beta = 0.5;

  bool valid() const noexcept { return alpha >= 0 && beta >= 0 && alpha + beta > 0; }
};

/// Weighted network/system load of a resource at time t; lower is better.
inline double allocation_cost(const ResourceDescriptor& res, double t, const AllocationCostParams& params) {
  return params.alpha * metric_at(res.net_trace, t) + params.beta * metric_at(res.sys_trace, t);
}

struct RankedResource {
  std::string id;
  double cost = 0.0;
  bool operator==(const RankedResource&) const = default;
};

/// Ranks a pool ascending by `cost_of(resource)`, ids breaking ties.
template <class CostFn>
std::vector<RankedResource> rank_by(std::span<const ResourceDescriptor> pool, CostFn&& cost_of) {
  if (pool.empty()) throw EmptyPool();
  std::vector<RankedResource> ranked;
  ranked.reserve(pool.size());
  for (const auto& r : pool) ranked.push_back({r.id, cost_of(r)});
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.cost != b.cost ? a.cost < b.cost : a.id < b.id;
  });
  return ranked;
}

inline std::vector<RankedResource> rank_resources(std::span<const ResourceDescriptor> pool, double t,
                                                  const AllocationCostParams& params) {
  return rank_by(pool, [&](const ResourceDescriptor& r) { return allocation_cost(r, t, params); });
}

enum class QuorumLevel { L1, L2, L3 };

inline std::string_view to_string(QuorumLevel l) {
  switch (l) {
    case QuorumLevel::L1: return "L1";
    case QuorumLevel::L2: return "L2";
    case QuorumLevel::L3: return "L3";
  }
  return "?";
}

inline std::optional<QuorumLevel> parse_quorum_level(std::string_view s) {
  if (s == "L1") return QuorumLevel::L1;
  if (s == "L2") return QuorumLevel::L2;
  if (s == "L3") return QuorumLevel::L3;
  return std::nullopt;
}

/// L1 takes the top quarter, L2 the top half, L3 everything; L1 and L2
/// never drop below two members when the pool has two or more.
inline std::size_t quorum_size(QuorumLevel level, std::size_t pool_size) {
  auto tier = [&](std::size_t num, std::size_t den) {
    const std::size_t n = (num * pool_size + den - 1) / den;  // ceil
    return std::min(pool_size, std::max<std::size_t>(n, pool_size >= 2 ? 2 : 1));
  };
  switch (level) {
    case QuorumLevel::L1: return tier(1, 4);
    case QuorumLevel::L2: return tier(1, 2);
    case QuorumLevel::L3: return pool_size;
  }
  return pool_size;
}

struct Quorum {
  QuorumLevel level = QuorumLevel::L3;
  std::vector<std::string> members;  // ascending allocation cost at decided_at
  double decided_at = 0.0;
  bool random_draw = false;  // members drawn at random instead of by rank
  bool operator==(const Quorum&) const = default;
};

inline Quorum quorum_from_ranking(const std::vector<RankedResource>& ranked, QuorumLevel level, double t) {
  Quorum q{level, {}, t, false};
  const auto n = quorum_size(level, ranked.size());
  for (std::size_t i = 0; i < n; ++i) q.members.push_back(ranked[i].id);
  return q;
}

inline Quorum generate_arq(std::span<const ResourceDescriptor> pool, QuorumLevel level, double t,
                           const AllocationCostParams& params) {
  return quorum_from_ranking(rank_resources(pool, t, params), level, t);
}

/// Selection without a resource policy: an L1-sized quorum drawn uniformly
/// from the pool by (seed, draw), then listed by ascending cost so the
/// first member is still the cheapest of the drawn set.
inline Quorum random_quorum(std::span<const ResourceDescriptor> pool, double t, const AllocationCostParams& params,
                            std::uint64_t seed) {
  if (pool.empty()) throw EmptyPool();
  const auto n = quorum_size(QuorumLevel::L1, pool.size());
  std::vector<std::size_t> indices(pool.size());
  for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
  // Partial Fisher-Yates with counter-based draws.
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = i + detail::pick_index(seed, i, indices.size() - i);
    std::swap(indices[i], indices[j]);
  }
  std::vector<ResourceDescriptor> drawn;
  for (std::size_t i = 0; i < n; ++i) drawn.push_back(pool[indices[i]]);
  Quorum q = quorum_from_ranking(rank_resources(drawn, t, params), QuorumLevel::L1, t);
  q.random_draw = true;
  return q;
}

/// Mean allocation cost per hour. rows[h][c] is the mean over the
/// `samples_per_hour` instants h*3600 + k*3600/samples_per_hour.
struct CostTable {
  std::vector<std::string> resource_ids;
  std::vector<std::vector<double>> rows;
};

inline constexpr std::size_t kCostTableColumns = 6;

inline double sample_instant(std::size_t hour, std::size_t k, std::size_t samples_per_hour) {
  return 3600.0 * static_cast<double>(hour) + 3600.0 * static_cast<double>(k) / static_cast<double>(samples_per_hour);
}

/// All sample instants of a horizon, hour-major.
inline std::vector<double> sample_instants(std::size_t horizon_hours, std::size_t samples_per_hour) {
  std::vector<double> out;
  out.reserve(horizon_hours * samples_per_hour);
  for (std::size_t h = 0; h < horizon_hours; ++h)
    for (std::size_t k = 0; k < samples_per_hour; ++k) out.push_back(sample_instant(h, k, samples_per_hour));
  return out;
}

inline CostTable average_cost_table(std::span<const ResourceDescriptor> pool, std::size_t horizon_hours,
                                    std::size_t samples_per_hour, const AllocationCostParams& params) {
  if (horizon_hours < 1) throw SchemaError("horizon", "must be >= 1 hour");
  if (samples_per_hour < 1) throw SchemaError("samples_per_hour", "must be >= 1");
  // Columns: the six top-ranked resources at t = 0, in rank order.
  const auto ranked = rank_resources(pool, 0.0, params);
  CostTable table;
  std::vector<const ResourceDescriptor*> columns;
  for (std::size_t i = 0; i < std::min(kCostTableColumns, ranked.size()); ++i) {
    table.resource_ids.push_back(ranked[i].id);
    for (const auto& r : pool)
      if (r.id == ranked[i].id) columns.push_back(&r);
  }
  for (std::size_t h = 0; h < horizon_hours; ++h) {
    std::vector<double> row;
    for (const auto* r : columns) {
      double sum = 0.0;
      for (std::size_t k = 0; k < samples_per_hour; ++k)
        sum += allocation_cost(*r, sample_instant(h, k, samples_per_hour), params);
      row.push_back(sum / static_cast<double>(samples_per_hour));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

inline std::string cost_table_csv(const CostTable& table) {
  std::ostringstream out;
  out << "hour";
  for (const auto& id : table.resource_ids) out << ',' << id;
  out << '\n';
  for (std::size_t h = 0; h < table.rows.size(); ++h) {
    out << h;
    for (double v : table.rows[h]) out << ',' << detail::fixed6(v);
    out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Pool documents
// ---------------------------------------------------------------------------

namespace detail {

inline MetricTrace parse_trace(const JsonReader& r) {
  r.expect_object({"base", "amplitude", "period", "phase", "noise_sigma", "seed"});
  MetricTrace t;
  t.base = r.at("base").as_number();
  if (t.base < 0 || t.base > 1) r.at("base").fail("base must lie in [0, 1]");
  t.amplitude = r.at("amplitude").as_number();
  if (t.amplitude < 0) r.at("amplitude").fail("amplitude must be >= 0");
  t.period = r.at("period").as_number();
  if (!(t.period > 0)) r.at("period").fail("period must be > 0");
  t.phase = r.at("phase").as_number();
  t.noise_sigma = r.at("noise_sigma").as_number();
  if (t.noise_sigma < 0) r.at("noise_sigma").fail("noise_sigma must be >= 0");
  t.seed = r.at("seed").as_unsigned();
  return t;
}

inline json trace_to_json(const MetricTrace& t) {
  return {{"base", t.base}, {"amplitude", t.amplitude}, {"period", t.period},
          {"phase", t.phase}, {"noise_sigma", t.noise_sigma}, {"seed", t.seed}};
}

}  // namespace detail

inline ResourcePool parse_pool(const json& doc, const std::string& source = "pool") {
  detail::JsonReader root(doc, source + ":$");
  root.expect_array();
  ResourcePool pool;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < root.size(); ++i) {
    auto r = root.at(i);
    r.expect_object({"id", "site", "cpu_rate", "bandwidth", "latency", "net_trace", "sys_trace"});
    ResourceDescriptor d;
    d.id = r.at("id").as_identifier();
    if (!ids.insert(d.id).second) r.at("id").fail("duplicate resource id '" + d.id + "'");
    d.site = r.at("site").as_identifier();
    d.cpu_rate = r.at("cpu_rate").as_number();
    if (!(d.cpu_rate > 0)) r.at("cpu_rate").fail("cpu_rate must be > 0");
    d.bandwidth = r.at("bandwidth").as_number();
    if (!(d.bandwidth > 0)) r.at("bandwidth").fail("bandwidth must be > 0");
    d.latency = r.at("latency").as_number();
    if (d.latency < 0) r.at("latency").fail("latency must be >= 0");
    d.net_trace = detail::parse_trace(r.at("net_trace"));
    d.sys_trace = detail::parse_trace(r.at("sys_trace"));
    pool.push_back(std::move(d));
  }
  if (pool.empty()) throw EmptyPool();
  return pool;
}

inline json serialize_pool(std::span<const ResourceDescriptor> pool) {
  json doc = json::array();
  for (const auto& r : pool)
    doc.push_back({{"id", r.id}, {"site", r.site}, {"cpu_rate", r.cpu_rate}, {"bandwidth", r.bandwidth},
                   {"latency", r.latency}, {"net_trace", detail::trace_to_json(r.net_trace)},
                   {"sys_trace", detail::trace_to_json(r.sys_trace)}});
  return doc;
}

inline const ResourceDescriptor& find_resource(std::span<const ResourceDescriptor> pool, std::string_view id) {
  for (const auto& r : pool)
    if (r.id == id) return r;
  throw UnknownKey("resource '" + std::string(id) + "'");
}

}  // namespace hywm
