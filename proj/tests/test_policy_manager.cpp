#include <gtest/gtest.h>

#include <set>

#include "generators.hpp"
#include "hywm/policy_manager.hpp"
#include "oracles.hpp"
#include "shipped.hpp"

using namespace hywm;

namespace {

Sla explicit_sla(QuorumLevel r, Performance p, ServiceLevel s) { return Sla{"u", r, p, s, std::nullopt}; }

Policy policy(std::string id, PolicyKind kind, std::int64_t priority, std::vector<Predicate> cond,
              std::vector<Action> actions) {
  return Policy{std::move(id), kind, priority, std::move(cond), std::move(actions)};
}

std::vector<Policy> minimal_repo() {
  return {policy("RP-A", PolicyKind::Resource, 10, {{"resource_level", CompareOp::Eq, Value(std::string("L1"))}},
                 {{"resource.level", Value(std::string("L1"))}}),
          policy("WP-A", PolicyKind::LowLevelWorkflow, 0, {}, {{"scheduler.kind", Value(std::string("MinEFT"))}}),
          policy("HWP-A", PolicyKind::AppService, 0, {}, {{"app.workflow", Value(std::string("EcgVhs"))}})};
}

}  // namespace

TEST(SoftLabel, HighPerformance) {
  const auto s = expand_soft_label(Sla{"u", {}, {}, {}, "High Performance"});
  EXPECT_EQ(s.resource_level, QuorumLevel::L1);
  EXPECT_EQ(s.performance, Performance::Fast);
  EXPECT_EQ(s.service_level, ServiceLevel::EcgVhs);
  EXPECT_FALSE(s.soft_label);
}

TEST(SoftLabel, LowCost) {
  const auto s = expand_soft_label(Sla{"u", {}, {}, {}, "Low Cost"});
  EXPECT_EQ(s, explicit_sla(QuorumLevel::L3, Performance::Economy, ServiceLevel::EcgOnly));
}

TEST(SoftLabel, UnknownLabel) {
  EXPECT_THROW(expand_soft_label(Sla{"u", {}, {}, {}, "Cheapest"}), UnknownLabel);
}

TEST(SoftLabel, ExplicitFieldsAreKept) {
  const auto s = expand_soft_label(Sla{"u", QuorumLevel::L2, {}, {}, "High Performance"});
  EXPECT_EQ(s.resource_level, QuorumLevel::L2);
  EXPECT_EQ(s.performance, Performance::Fast);
}

TEST(SlaDocument, ParseAndRoundTrip) {
  const auto s = shipped::sla("balanced");
  EXPECT_EQ(s.soft_label, "Balanced");
  EXPECT_EQ(parse_sla(sla_to_json(s)), s);
  EXPECT_THROW(parse_sla(json::parse(R"({"user_id": "u", "resource_level": "L1"})")), SchemaError);
  EXPECT_THROW(parse_sla(json::parse(R"({"user_id": "u", "resource_level": "L9", "performance": "Fast",
                                         "service_level": "EcgOnly"})")),
               SchemaError);
}

TEST(DecidePolicy, SingleMatch) {
  const auto info = InformationBase::with_default_schema();
  const auto set = decide_policy(explicit_sla(QuorumLevel::L1, Performance::Fast, ServiceLevel::EcgVhs), minimal_repo(), info);
  EXPECT_EQ(set.resource.id, "RP-A");
}

TEST(DecidePolicy, HighestPriorityWins) {
  auto repo = minimal_repo();
  repo.push_back(policy("RP-Z", PolicyKind::Resource, 20, {}, {{"resource.level", Value(std::string("L2"))}}));
  const auto info = InformationBase::with_default_schema();
  EXPECT_EQ(decide_policy(explicit_sla(QuorumLevel::L1, Performance::Fast, ServiceLevel::EcgVhs), repo, info).resource.id,
            "RP-Z");
}

TEST(DecidePolicy, EqualPriorityBreaksToSmallerId) {
  auto repo = minimal_repo();
  repo.push_back(policy("RP-0", PolicyKind::Resource, 10, {}, {}));
  const auto info = InformationBase::with_default_schema();
  EXPECT_EQ(decide_policy(explicit_sla(QuorumLevel::L1, Performance::Fast, ServiceLevel::EcgVhs), repo, info).resource.id,
            "RP-0");
}

TEST(DecidePolicy, InformationBaseConditionFails) {
  auto repo = minimal_repo();
  repo[0].condition = {{"grid.alert", CompareOp::Eq, Value(false)}};
  auto info = InformationBase::with_default_schema();
  info.set("grid.alert", Value(true));
  try {
    decide_policy(explicit_sla(QuorumLevel::L1, Performance::Fast, ServiceLevel::EcgVhs), repo, info);
    FAIL();
  } catch (const NoMatchingPolicy& e) {
    EXPECT_EQ(e.kind(), "Resource");
  }
}

TEST(DecidePolicy, OrdinalComparisonOnSlaFields) {
  auto repo = minimal_repo();
  repo[0].condition = {{"service_level", CompareOp::Ge, Value(std::string("EcgDetect"))}};
  const auto info = InformationBase::with_default_schema();
  EXPECT_NO_THROW(decide_policy(explicit_sla(QuorumLevel::L3, Performance::Fast, ServiceLevel::EcgVhs), repo, info));
  EXPECT_THROW(decide_policy(explicit_sla(QuorumLevel::L3, Performance::Fast, ServiceLevel::EcgOnly), repo, info),
               NoMatchingPolicy);
}

TEST(DecidePolicy, AgreesWithBruteForceScan) {
  gen::Rng rng(21);
  for (int i = 0; i < 300; ++i) {
    const auto sla = gen::sla(rng);
    const auto repo = gen::repo(rng);
    const auto info = gen::info(rng);
    const auto set = decide_policy(sla, repo, info);
    EXPECT_EQ(set.resource.id, oracle::best_policy(PolicyKind::Resource, sla, repo, info)->id);
    EXPECT_EQ(set.workflow.id, oracle::best_policy(PolicyKind::LowLevelWorkflow, sla, repo, info)->id);
    EXPECT_EQ(set.app.id, oracle::best_policy(PolicyKind::AppService, sla, repo, info)->id);
    // Deterministic for identical inputs.
    EXPECT_EQ(decide_policy(sla, repo, info).resource.id, set.resource.id);
    for (const Policy* p : {&set.resource, &set.workflow, &set.app}) EXPECT_TRUE(satisfies(*p, sla, info));
  }
}

TEST(Enforce, WritesValueAndProvenance) {
  const auto sla = explicit_sla(QuorumLevel::L2, Performance::Fast, ServiceLevel::EcgVhs);
  auto reg = ConfigRegistry::with_defaults(sla, 1);
  EXPECT_EQ(reg.get_string("resource.level"), "L2");
  EXPECT_TRUE(reg.is_default("resource.level"));
  const auto set = decide_policy(explicit_sla(QuorumLevel::L1, Performance::Fast, ServiceLevel::EcgVhs), minimal_repo(),
                                 InformationBase::with_default_schema());
  enforce(set, reg);
  EXPECT_EQ(reg.get_string("resource.level"), "L1");
  EXPECT_EQ(reg.entry("resource.level").provenance, "RP-A");
}

TEST(Enforce, WorkflowPassOverridesAppPass) {
  PolicySet set{policy("APP", PolicyKind::AppService, 0, {}, {{"vhs.max_iter", Value(std::int64_t{8})}}),
                policy("RES", PolicyKind::Resource, 0, {}, {}),
                policy("WF", PolicyKind::LowLevelWorkflow, 0, {}, {{"vhs.max_iter", Value(std::int64_t{4})}})};
  auto reg = ConfigRegistry::with_defaults(explicit_sla(QuorumLevel::L1, Performance::Fast, ServiceLevel::EcgVhs), 0);
  const auto report = enforce(set, reg);
  EXPECT_EQ(reg.get_integer("vhs.max_iter"), 4);
  ASSERT_EQ(report.overrides.size(), 1u);
  EXPECT_EQ(report.overrides[0].key, "vhs.max_iter");
  EXPECT_EQ(report.overrides[0].earlier_policy, "APP");
  EXPECT_EQ(report.overrides[0].later_policy, "WF");
}

TEST(Enforce, UnknownKeyLeavesRegistryUntouched) {
  PolicySet set{policy("APP", PolicyKind::AppService, 0, {}, {{"app.workflow", Value(std::string("EcgOnly"))}}),
                policy("RES", PolicyKind::Resource, 0, {}, {}),
                policy("WF", PolicyKind::LowLevelWorkflow, 0, {}, {{"scheduler.flavor", Value(std::string("x"))}})};
  auto reg = ConfigRegistry::with_defaults(explicit_sla(QuorumLevel::L1, Performance::Fast, ServiceLevel::EcgVhs), 0);
  const auto before = reg;
  EXPECT_THROW(enforce(set, reg), UnknownConfigKey);
  EXPECT_EQ(reg, before);
}

TEST(Enforce, DomainAndRangeChecks) {
  auto reg = ConfigRegistry::with_defaults(explicit_sla(QuorumLevel::L1, Performance::Fast, ServiceLevel::EcgVhs), 0);
  EXPECT_THROW(reg.set("scheduler.kind", Value(std::string("Fastest")), "p"), TypeMismatch);
  EXPECT_THROW(reg.set("vhs.max_iter", Value(std::int64_t{0}), "p"), TypeMismatch);
  EXPECT_THROW(reg.set("vhs.tolerance", Value(0.0), "p"), TypeMismatch);
  EXPECT_THROW(reg.set("resource.alpha", Value(std::string("high")), "p"), TypeMismatch);
  reg.set("resource.alpha", Value(std::int64_t{1}), "p");
  EXPECT_EQ(reg.get_real("resource.alpha"), 1.0);
}

TEST(Enforce, IdempotentWithPolicyOrDefaultProvenance) {
  gen::Rng rng(22);
  for (int i = 0; i < 200; ++i) {
    const auto sla = gen::sla(rng);
    const auto repo = gen::repo(rng);
    const auto set = decide_policy(sla, repo, gen::info(rng));
    auto once = ConfigRegistry::with_defaults(sla, 3);
    enforce(set, once);
    auto twice = once;
    enforce(set, twice);
    EXPECT_EQ(once.to_json_doc().dump(), twice.to_json_doc().dump());
    const std::set<std::string> allowed{set.app.id, set.resource.id, set.workflow.id, std::string(kDefaultProvenance)};
    for (const auto& [key, e] : once.entries()) EXPECT_TRUE(allowed.contains(e.provenance)) << key << " " << e.provenance;
  }
}

TEST(InformationBase, SetGetAndTypes) {
  auto info = InformationBase::with_default_schema();
  EXPECT_EQ(property_get(info, "grid.alert"), Value(false));
  EXPECT_EQ(property_set(info, "grid.alert", Value(true)), Value(false));
  EXPECT_EQ(property_get(info, "grid.alert"), Value(true));
  EXPECT_THROW(property_set(info, "grid.alert", Value(std::int64_t{3})), TypeMismatch);
  EXPECT_THROW(property_get(info, "grid.nothing"), UnknownKey);
  property_set(info, "grid.load", Value(std::int64_t{1}));
  EXPECT_EQ(property_get(info, "grid.load"), Value(1.0));
}

TEST(PolicyRepository, ShippedRepositoryParses) {
  const auto info = InformationBase::with_default_schema();
  const auto repo = shipped::repo(info);
  std::set<std::string> ids;
  for (const auto& p : repo) ids.insert(p.id);
  for (const char* id : {"RP-A", "RP-R", "WP-A", "WP-B", "HWP-A", "HWP-B"}) EXPECT_TRUE(ids.contains(id)) << id;
  EXPECT_EQ(parse_policy_repo(json(std::vector<json>{policy_to_json(repo[0])}), info)[0].id, repo[0].id);
}

TEST(PolicyRepository, RejectsBadConditions) {
  const auto info = InformationBase::with_default_schema();
  auto doc = json::parse(R"([{"id": "P", "kind": "Resource", "priority": 1,
      "condition": [{"key": "grid.alert", "op": "==", "value": "yes"}], "actions": []}])");
  EXPECT_THROW(parse_policy_repo(doc, info), SchemaError);
  doc[0]["condition"][0] = json::parse(R"({"key": "moon.phase", "op": "==", "value": 1})");
  EXPECT_THROW(parse_policy_repo(doc, info), SchemaError);
  doc[0]["condition"][0] = json::parse(R"({"key": "resource_level", "op": "<", "value": "L1"})");
  EXPECT_THROW(parse_policy_repo(doc, info), SchemaError);
  doc[0]["condition"][0] = json::parse(R"({"key": "resource_level", "op": "<=", "value": "L7"})");
  EXPECT_THROW(parse_policy_repo(doc, info), SchemaError);
  doc[0]["kind"] = "Network";
  EXPECT_THROW(parse_policy_repo(doc, info), SchemaError);
}
