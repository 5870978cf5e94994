#include <gtest/gtest.h>

#include <set>

#include "hywm/hybrid_engine.hpp"
#include "shipped.hpp"

using namespace hywm;

namespace {

struct World {
  ResourcePool pool = shipped::pool();
  WorkflowBundle bundle = shipped::workflow();
  InformationBase info = InformationBase::with_default_schema();
  std::vector<Policy> repo = shipped::repo(info);
  RunConfig config = shipped::run_config();
};

Sla explicit_sla(QuorumLevel r, Performance p, ServiceLevel s) { return Sla{"u", r, p, s, std::nullopt}; }

ExecutionContext context(const World& w, const RunConfig& cfg, const Sla& sla) {
  ExecutionContext ctx;
  ctx.run_id = "t";
  ctx.sla = sla;
  ctx.registry = ConfigRegistry::with_defaults(sla, cfg.seed);
  ctx.config = &cfg;
  ctx.pool = w.pool;
  ctx.subworkflows = &w.bundle.subworkflows;
  ctx.data["patient.ecg"] = patient_signal(cfg);
  return ctx;
}

// Runs `fn`, expects it to throw `Outer`, and returns true when the nested
// cause is an `Inner`.
template <class Outer, class Inner, class Fn>
bool throws_nested(Fn fn) {
  try {
    fn();
  } catch (const Outer& e) {
    try {
      std::rethrow_if_nested(e);
    } catch (const Inner&) {
      return true;
    } catch (...) {
      return false;
    }
  } catch (...) {
  }
  return false;
}

ecg::Features features_of(const ecg::Signal& s) { return ecg::extract_features(s.samples, s.rate); }

}  // namespace

TEST(RunWorkflow, HighPerformanceRunsVhsLoop) {
  World w;
  const auto r = run_workflow(w.bundle, shipped::sla("high_performance"), w.repo, w.info, w.pool, w.config);
  EXPECT_EQ(r.run_id, "heart-disease-1");
  EXPECT_EQ(r.policies.resource.id, "RP-A");
  EXPECT_EQ(r.policies.workflow.id, "WP-A");
  EXPECT_EQ(r.policies.app.id, "HWP-A");
  ASSERT_NE(r.outcome("vhs"), nullptr);
  EXPECT_EQ(r.outcome("vhs")->kind, NodeKind::Loop);
  EXPECT_EQ(r.outcome("disease-estimation")->branch, "fibrillation");
  ASSERT_TRUE(r.vhs);
  EXPECT_EQ(r.vhs->best_index, 2u);
  EXPECT_EQ(r.vhs->best_distance, 0.0);
  EXPECT_EQ(r.vhs->iterations, 3u);
  EXPECT_TRUE(r.pruned.empty());
  EXPECT_EQ(r.outcome("normal"), nullptr);
}

TEST(RunWorkflow, LowCostPrunesEverythingAboveEcgOnly) {
  World w;
  const auto r = run_workflow(w.bundle, shipped::sla("low_cost"), w.repo, w.info, w.pool, w.config);
  EXPECT_EQ(r.registry.get_string("app.workflow"), "EcgOnly");
  EXPECT_EQ(r.pruned, (std::set<std::string>{"arrhythmia", "disease-estimation", "normal", "vhs"}));
  ASSERT_EQ(r.outcomes.size(), 2u);
  EXPECT_EQ(r.outcomes[0].node_id, "load-ecg");
  EXPECT_EQ(r.outcomes[1].node_id, "ecg-analysis");
  EXPECT_FALSE(r.vhs);
}

TEST(RunWorkflow, MissingWorkflowPolicyNamesTheRun) {
  World w;
  std::erase_if(w.repo, [](const Policy& p) { return p.kind == PolicyKind::LowLevelWorkflow; });
  try {
    run_workflow(w.bundle, shipped::sla("high_performance"), w.repo, w.info, w.pool, w.config);
    FAIL();
  } catch (const RunError& e) {
    EXPECT_EQ(e.run_id(), "heart-disease-1");
    try {
      std::rethrow_if_nested(e);
      FAIL();
    } catch (const NoMatchingPolicy& inner) {
      EXPECT_EQ(inner.kind(), "LowLevelWorkflow");
    }
  }
}

TEST(RunWorkflow, SequentialTimingAndProvenance) {
  World w;
  for (const char* name : {"high_performance", "balanced", "low_cost"}) {
    const auto r = run_workflow(w.bundle, shipped::sla(name), w.repo, w.info, w.pool, w.config);
    double sum = 0.0;
    std::set<std::size_t> used;
    for (std::size_t i = 0; i < r.outcomes.size(); ++i) {
      const auto& o = r.outcomes[i];
      if (i > 0) {
        EXPECT_EQ(o.start, r.outcomes[i - 1].end) << name;
      }
      sum += o.end - o.start;
      const bool grid = o.kind == NodeKind::GridSubWorkflow || o.kind == NodeKind::Loop;
      EXPECT_EQ(o.executor, grid ? "grid" : "local") << name << " " << o.node_id;
      EXPECT_EQ(!o.submissions.empty(), grid) << name << " " << o.node_id;
      for (auto s : o.submissions) {
        EXPECT_EQ(r.submissions[s].node_id, o.node_id);
        EXPECT_TRUE(used.insert(s).second);
      }
    }
    EXPECT_EQ(used.size(), r.submissions.size());
    EXPECT_NEAR(r.completion_time, sum, 1e-9) << name;
  }
}

TEST(RunWorkflow, Deterministic) {
  World w;
  const auto sla = shipped::sla("high_performance");
  const auto a = run_workflow(w.bundle, sla, w.repo, w.info, w.pool, w.config);
  const auto b = run_workflow(w.bundle, sla, w.repo, w.info, w.pool, w.config);
  EXPECT_EQ(run_record_to_json(a).dump(), run_record_to_json(b).dump());
  EXPECT_EQ(task_log_csv(a), task_log_csv(b));
  EXPECT_EQ(node_timings_csv(a), node_timings_csv(b));
}

TEST(ExecuteNode, DataRetrievalCopiesSignal) {
  World w;
  auto ctx = context(w, w.config, explicit_sla(QuorumLevel::L1, Performance::Fast, ServiceLevel::EcgVhs));
  const auto out = execute_node(*w.bundle.graph.find("load-ecg"), ctx, Strategies::builtin());
  EXPECT_EQ(ctx.read<ecg::Signal>("patient.ecg").samples.size(), 2500u);
  EXPECT_EQ(out.executor, "local");
  EXPECT_EQ(out.start, out.end);

  ctx.data.clear();
  ctx.blackboard.clear();
  EXPECT_TRUE((throws_nested<NodeError, MissingInput>(
      [&] { execute_node(*w.bundle.graph.find("load-ecg"), ctx, Strategies::builtin()); })));
}

TEST(ExecuteNode, UserInput) {
  World w;
  auto ctx = context(w, w.config, explicit_sla(QuorumLevel::L1, Performance::Fast, ServiceLevel::EcgVhs));
  const Node ask{"ask", UserInputPayload{"patient.id"}, ServiceLevel::EcgOnly};
  EXPECT_EQ(execute_node(ask, ctx, Strategies::builtin()).summary, "patient.id=P-0042");
  const Node missing{"ask", UserInputPayload{"patient.age"}, ServiceLevel::EcgOnly};
  EXPECT_TRUE((throws_nested<NodeError, MissingInput>([&] { execute_node(missing, ctx, Strategies::builtin()); })));
}

TEST(ExecuteNode, GridNodeOnWholePoolWithRoundRobin) {
  World w;
  auto ctx = context(w, w.config, explicit_sla(QuorumLevel::L3, Performance::Economy, ServiceLevel::EcgVhs));
  ctx.registry.set("scheduler.kind", Value(std::string("RoundRobin")), "test");
  execute_node(*w.bundle.graph.find("load-ecg"), ctx, Strategies::builtin());
  const double before = ctx.now;
  const auto out = execute_node(*w.bundle.graph.find("ecg-analysis"), ctx, Strategies::builtin());
  ASSERT_EQ(out.submissions.size(), 1u);
  const auto& plan = ctx.submissions[0].result.plan;
  EXPECT_EQ(plan.quorum.members.size(), w.pool.size());
  EXPECT_EQ(plan.scheduler, SchedulerKind::RoundRobin);
  EXPECT_EQ(out.end - before, ctx.submissions[0].result.makespan);
  EXPECT_NO_THROW(ctx.read<ecg::Features>("ecg.features"));
}

TEST(ExecuteNode, LocalTaskChargesDuration) {
  World w;
  auto ctx = context(w, w.config, explicit_sla(QuorumLevel::L1, Performance::Fast, ServiceLevel::EcgVhs));
  ctx.blackboard["patient.ecg"] = patient_signal(w.config);
  const auto out = execute_node(*w.bundle.graph.find("arrhythmia"), ctx, Strategies::builtin());
  EXPECT_EQ(out.end - out.start, 30.0);
  EXPECT_NE(out.summary.find("beats="), std::string::npos);
}

TEST(LoopBounds, RegistryOnlyWhenSetByPolicy) {
  const LoopPayload loop{"vhs", 4, 0.05, "vhs"};
  auto reg = ConfigRegistry::with_defaults(explicit_sla(QuorumLevel::L1, Performance::Fast, ServiceLevel::EcgVhs), 0);
  EXPECT_EQ(loop_bounds(loop, reg), (std::pair<std::int64_t, double>{4, 0.05}));
  reg.set("vhs.max_iter", Value(std::int64_t{9}), "HWP-X");
  EXPECT_EQ(loop_bounds(loop, reg), (std::pair<std::int64_t, double>{9, 0.05}));
}

TEST(VhsLoop, RecoversPlantedCandidate) {
  World w;
  auto cfg = w.config;
  cfg.patient.synth->bpm = 330;
  cfg.patient.synth->irregularity = 0.1;
  auto ctx = context(w, cfg, explicit_sla(QuorumLevel::L1, Performance::Fast, ServiceLevel::EcgVhs));
  const auto r = run_vhs_loop(features_of(patient_signal(cfg)), ctx, "vhs", "vhs", 8, 0.05);
  EXPECT_EQ(r.best_index, 3u);
  EXPECT_EQ(r.best_params, cfg.vhs_grid[3]);
  EXPECT_EQ(r.best_distance, 0.0);
  EXPECT_EQ(r.iterations, 4u);
  EXPECT_EQ(ctx.submissions.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(ctx.submissions[i].iteration, i + 1);
}

TEST(VhsLoop, HugeToleranceStopsAfterOne) {
  World w;
  auto ctx = context(w, w.config, explicit_sla(QuorumLevel::L1, Performance::Fast, ServiceLevel::EcgVhs));
  const auto r = run_vhs_loop(features_of(patient_signal(w.config)), ctx, "vhs", "vhs", 8, 1e9);
  EXPECT_EQ(r.iterations, 1u);
  EXPECT_EQ(r.best_index, 0u);
}

TEST(VhsLoop, MaxIterationsCapsSearch) {
  World w;
  auto ctx = context(w, w.config, explicit_sla(QuorumLevel::L1, Performance::Fast, ServiceLevel::EcgVhs));
  const auto r = run_vhs_loop(features_of(patient_signal(w.config)), ctx, "vhs", "vhs", 2, 0.05);
  EXPECT_EQ(r.iterations, 2u);
  EXPECT_EQ(r.distances.size(), 2u);
  EXPECT_GT(r.best_distance, 0.05);
}

TEST(VhsLoop, EmptyGrid) {
  World w;
  auto cfg = w.config;
  cfg.vhs_grid.clear();
  auto ctx = context(w, cfg, explicit_sla(QuorumLevel::L1, Performance::Fast, ServiceLevel::EcgVhs));
  EXPECT_THROW(run_vhs_loop(features_of(patient_signal(cfg)), ctx, "vhs", "vhs", 2, 0.05), EmptyParameterGrid);
}

TEST(RunConfig, PatientFromSampleFile) {
  const auto dir = std::filesystem::temp_directory_path() / "hywm_run_config_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "ecg.txt");
    f << "# header\n0.0\n1.5\n-0.25\n";
  }
  const auto cfg = parse_run_config(json::parse(R"({"seed": 2, "patient": {"file": "ecg.txt", "rate": 100}})"), "rc", dir);
  EXPECT_EQ(cfg.patient.samples, (std::vector<double>{0.0, 1.5, -0.25}));
  EXPECT_DOUBLE_EQ(cfg.patient.duration, 0.03);
  EXPECT_FALSE(cfg.patient.synth);
  std::filesystem::remove_all(dir);
}

TEST(RunConfig, RejectsBadFields) {
  try {
    parse_run_config(json::parse(R"({"seed": 1, "patient": {"bpm": -3}})"), "rc");
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.path(), "rc:$.patient.bpm");
  }
  EXPECT_THROW(parse_run_config(json::parse(R"({"seed": 1, "patient": {"bpm": 60}, "extra": 1})")), SchemaError);
}
