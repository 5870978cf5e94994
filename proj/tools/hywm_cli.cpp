// Command-line front end: run a workflow, reproduce the cost-table and
// policy-comparison studies, validate documents.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "hywm/hywm.hpp"

namespace fs = std::filesystem;

#ifndef HYWM_DATA_DIR
#define HYWM_DATA_DIR "data"
#endif

namespace {

const fs::path kData = HYWM_DATA_DIR;

struct Documents {
  std::string pool = (kData / "pool.json").string();
  std::string repo = (kData / "policies.json").string();
  std::string workflow = (kData / "workflows" / "heart_disease.json").string();
  std::string sla = (kData / "sla" / "high_performance.json").string();
  std::string run_config = (kData / "run_config.json").string();
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw hywm::SchemaError(path.string(), "cannot write file");
  out << content;
}

fs::path prepare_out_dir(const std::string& dir) {
  fs::create_directories(dir);
  return dir;
}

hywm::RunConfig load_run_config(const std::string& file) {
  return hywm::parse_run_config(hywm::detail::load_json_file(file), file, fs::path(file).parent_path());
}

std::vector<hywm::Policy> load_repo(const std::string& file, const hywm::InformationBase& info) {
  return hywm::parse_policy_repo(hywm::detail::load_json_file(file), info, file);
}

hywm::ResourcePool load_pool(const std::string& file) {
  return hywm::parse_pool(hywm::detail::load_json_file(file), file);
}

int cmd_run(const Documents& docs, const std::string& out_dir, std::optional<std::uint64_t> seed) {
  const auto info = hywm::InformationBase::with_default_schema();
  const auto pool = load_pool(docs.pool);
  const auto repo = load_repo(docs.repo, info);
  const auto bundle = hywm::load_workflow_bundle(docs.workflow);
  const auto sla = hywm::parse_sla(hywm::detail::load_json_file(docs.sla), docs.sla);
  auto config = load_run_config(docs.run_config);
  if (seed) config.seed = *seed;

  const auto record = hywm::run_workflow(bundle, sla, repo, info, pool, config);
  const auto dir = prepare_out_dir(out_dir);
  write_file(dir / "run_record.json", hywm::run_record_to_json(record).dump(2) + "\n");
  write_file(dir / "node_timings.csv", hywm::node_timings_csv(record));
  write_file(dir / "task_log.csv", hywm::task_log_csv(record));
  std::cout << record.run_id << ": " << record.outcomes.size() << " nodes, app.workflow="
            << record.registry.get_string("app.workflow") << ", completion "
            << hywm::detail::fixed6(record.completion_time) << " s\n";
  return 0;
}

int cmd_cost_table(const Documents& docs, const std::string& spec_file, const std::string& out_dir,
                   std::optional<std::size_t> horizon, std::optional<std::size_t> samples) {
  auto spec = hywm::parse_experiment_spec(hywm::detail::load_json_file(spec_file), spec_file);
  if (horizon) spec.horizon_hours = *horizon;
  if (samples) spec.samples_per_hour = *samples;
  const auto pool = load_pool(docs.pool);
  const auto table = hywm::average_cost_table(pool, spec.horizon_hours, spec.samples_per_hour, spec.cost_params);
  const auto summary = hywm::quorum_summary(pool, spec.horizon_hours, spec.samples_per_hour, spec.cost_params);
  const auto dir = prepare_out_dir(out_dir);
  write_file(dir / "cost_table.csv", hywm::cost_table_csv(table));
  write_file(dir / "quorum_summary.csv", hywm::quorum_summary_csv(summary));
  std::cout << hywm::quorum_summary_csv(summary);
  return 0;
}

int cmd_policy_comparison(const Documents& docs, const std::string& spec_file, const std::string& out_dir,
                          std::optional<std::size_t> replicates, std::optional<std::uint64_t> seed) {
  auto spec = hywm::parse_experiment_spec(hywm::detail::load_json_file(spec_file), spec_file);
  if (replicates) {
    if (*replicates < 1) throw hywm::SchemaError("--replicates", "must be >= 1");
    spec.replicates = *replicates;
  }
  if (seed) spec.base_seed = *seed;
  const auto info = hywm::InformationBase::with_default_schema();
  const auto pool = load_pool(docs.pool);
  const auto repo = load_repo(docs.repo, info);
  const auto bundle = hywm::load_workflow_bundle(docs.workflow);
  const auto config = load_run_config(docs.run_config);

  const auto result = hywm::run_policy_comparison(spec, bundle, repo, info, pool, config);
  const auto dir = prepare_out_dir(out_dir);
  write_file(dir / "completion.csv", hywm::comparison_rows_csv(result));
  if (result.error) throw hywm::Error(*result.error);
  write_file(dir / "summary.csv", hywm::summary_csv(result.summary));
  std::cout << hywm::summary_csv(result.summary);
  return 0;
}

int cmd_validate(const Documents& docs) {
  const auto info = hywm::InformationBase::with_default_schema();
  const auto pool = load_pool(docs.pool);
  std::cout << docs.pool << ": " << pool.size() << " resources\n";
  const auto repo = load_repo(docs.repo, info);
  std::cout << docs.repo << ": " << repo.size() << " policies\n";
  const auto bundle = hywm::load_workflow_bundle(docs.workflow);
  const auto report = hywm::validate_graph(bundle.graph);
  std::cout << docs.workflow << ": " << bundle.graph.nodes.size() << " nodes, " << bundle.subworkflows.size()
            << " sub-workflows, " << (report.ok() ? std::string("valid") : report.summary()) << "\n";
  (void)hywm::parse_sla(hywm::detail::load_json_file(docs.sla), docs.sla);
  std::cout << docs.sla << ": ok\n";
  const auto config = load_run_config(docs.run_config);
  std::cout << docs.run_config << ": " << config.vhs_grid.size() << " VHS candidates\n";
  return report.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Policy-driven hybrid workflow manager"};
  app.require_subcommand(1);

  Documents docs;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicates, horizon, samples;
  std::string comparison_spec = (kData / "experiments" / "policy_comparison.json").string();
  std::string cost_spec = (kData / "experiments" / "cost_table.json").string();

  auto add_docs = [&](CLI::App* sub, bool workflow_docs) {
    sub->add_option("--pool", docs.pool, "resource pool document")->capture_default_str();
    if (!workflow_docs) return;
    sub->add_option("--repo", docs.repo, "policy repository document")->capture_default_str();
    sub->add_option("--workflow", docs.workflow, "workflow graph document")->capture_default_str();
    sub->add_option("--sla", docs.sla, "SLA document")->capture_default_str();
    sub->add_option("--run-config", docs.run_config, "run configuration document")->capture_default_str();
  };

  auto* run = app.add_subcommand("run", "execute one workflow run");
  add_docs(run, true);
  run->add_option("--out-dir", out_dir)->capture_default_str();
  run->add_option("--seed", seed, "override the run-configuration seed");

  auto* experiment = app.add_subcommand("experiment", "reproduce a study");
  experiment->require_subcommand(1);
  auto* cost = experiment->add_subcommand("cost-table", "hourly mean allocation cost");
  add_docs(cost, false);
  cost->add_option("--experiment", cost_spec, "experiment spec")->capture_default_str();
  cost->add_option("--horizon", horizon, "hours");
  cost->add_option("--samples-per-hour", samples);
  cost->add_option("--out-dir", out_dir)->capture_default_str();

  auto* comparison = experiment->add_subcommand("policy-comparison", "completion time per policy set");
  add_docs(comparison, true);
  comparison->add_option("--experiment", comparison_spec, "experiment spec")->capture_default_str();
  comparison->add_option("--replicates", replicates);
  comparison->add_option("--seed", seed, "override the base seed");
  comparison->add_option("--out-dir", out_dir)->capture_default_str();

  auto* validate = app.add_subcommand("validate", "parse and validate documents only");
  add_docs(validate, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(docs, out_dir, seed);
    if (*cost) return cmd_cost_table(docs, cost_spec, out_dir, horizon, samples);
    if (*comparison) return cmd_policy_comparison(docs, comparison_spec, out_dir, replicates, seed);
    if (*validate) return cmd_validate(docs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << hywm::describe(e) << "\n";
    return 1;
  }
  return 0;
}
