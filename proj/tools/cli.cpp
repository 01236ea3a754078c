#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "schedpred/attributes.hpp"
#include "schedpred/compare.hpp"
#include "schedpred/cross_validation.hpp"
#include "schedpred/errors.hpp"
#include "schedpred/simulator.hpp"
#include "schedpred/stats.hpp"
#include "schedpred/synthetic.hpp"
#include "schedpred/trace_io.hpp"
#include "schedpred/version.hpp"

namespace schedpred::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Helpers ----------------------------------------------------------------------

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("cannot write " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

template <typename Fn>
void write_with(const fs::path& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary);
  fn(out);
  if (!out) throw Error("cannot write " + path.string());
}

json report_header(const std::string& command, std::uint64_t seed, const json& config) {
  return {{"tool", "schedpred"},
          {"version", kVersion},
          {"command", command},
          {"seed", seed},
          {"config", config}};
}

std::vector<std::string> path_strings(const std::vector<fs::path>& paths) {
  std::vector<std::string> out;
  for (const auto& p : paths) out.push_back(p.string());
  return out;
}

std::vector<fs::path> as_paths(const std::vector<std::string>& s) {
  return {s.begin(), s.end()};
}

const char* error_kind(const std::exception& e) {
  if (dynamic_cast<const MalformedRow*>(&e)) return "MalformedRow";
  if (dynamic_cast<const InvalidFraction*>(&e)) return "InvalidFraction";
  if (dynamic_cast<const ConfigError*>(&e)) return "ConfigError";
  if (dynamic_cast<const MissingSubmit*>(&e)) return "MissingSubmit";
  if (dynamic_cast<const EmptyInput*>(&e)) return "EmptyInput";
  if (dynamic_cast<const LengthMismatch*>(&e)) return "LengthMismatch";
  if (dynamic_cast<const DegenerateInput*>(&e)) return "DegenerateInput";
  if (dynamic_cast<const EmptyDataset*>(&e)) return "EmptyDataset";
  if (dynamic_cast<const ArityMismatch*>(&e)) return "ArityMismatch";
  if (dynamic_cast<const TooFewSamples*>(&e)) return "TooFewSamples";
  if (dynamic_cast<const SchemaMismatch*>(&e)) return "SchemaMismatch";
  if (dynamic_cast<const LedgerMismatch*>(&e)) return "LedgerMismatch";
  if (dynamic_cast<const InvalidTransition*>(&e)) return "InvalidTransition";
  return "Error";
}

/// Fills `value` from config[key] when the flag was not given.
template <typename T>
void merge(const json& config, const char* key, const CLI::App& app, const char* flag, T& value) {
  if (config.contains(key) && app.count(flag) == 0) value = config.at(key).get<T>();
}

template <typename Record, typename Stream>
void read_all(const std::vector<fs::path>& files, std::vector<Record>& out) {
  for (const auto& f : files) {
    try {
      Stream stream{LineSource(f)};
      while (auto r = stream.next()) out.push_back(std::move(*r));
    } catch (const MalformedRow& e) {
      throw MalformedRow(e.line(), f.string() + ": " + e.reason());
    }
  }
}

std::vector<fs::path> collect(const std::vector<std::string>& inputs) {
  auto files = expand_inputs(as_paths(inputs));
  if (files.empty()) throw EmptyInput("no input files");
  return files;
}

json optional_number(double v) { return std::isfinite(v) ? json(v) : json(); }

// analyze ----------------------------------------------------------------------

struct AnalyzeOptions {
  std::vector<std::string> task_events;
  std::vector<std::string> job_events;
  std::vector<std::string> usage;
  double sample_fraction = 1.0;
  std::uint64_t seed = 1;
  std::string out;
  std::string config;
};

void write_times_csv(const fs::path& path, const std::vector<TaskAttributes>& tasks) {
  write_with(path, [&](std::ostream& o) {
    o << "job_id,task_index,final_status,waiting_s,service_s\n";
    for (const auto& t : tasks) {
      o << t.job_id << ',' << t.task_index << ',' << to_string(t.final_status) << ','
        << static_cast<double>(t.waiting_time) / 1e6 << ','
        << static_cast<double>(t.service_time) / 1e6 << '\n';
    }
  });
}

void write_times_csv(const fs::path& path, const std::vector<JobAttributes>& jobs) {
  write_with(path, [&](std::ostream& o) {
    o << "job_id,final_status,waiting_s,service_s\n";
    for (const auto& j : jobs) {
      o << j.job_id << ',' << to_string(j.final_status) << ','
        << static_cast<double>(j.waiting_time) / 1e6 << ','
        << static_cast<double>(j.service_time) / 1e6 << '\n';
    }
  });
}

int cmd_analyze(const AnalyzeOptions& o, std::ostream& out) {
  const fs::path dir(o.out);
  fs::create_directories(dir);

  const auto task_files = sample_files(collect(o.task_events), o.sample_fraction, o.seed);
  std::vector<fs::path> job_files, usage_files;
  if (!o.job_events.empty()) job_files = sample_files(collect(o.job_events), o.sample_fraction, o.seed);
  if (!o.usage.empty()) usage_files = sample_files(collect(o.usage), o.sample_fraction, o.seed);

  std::vector<TaskEvent> task_events;
  std::vector<JobEvent> job_events;
  std::vector<UsageRecord> usage;
  read_all<TaskEvent, TaskEventStream>(task_files, task_events);
  read_all<JobEvent, JobEventStream>(job_files, job_events);
  read_all<UsageRecord, UsageStream>(usage_files, usage);

  const AttributeTables tables = build_attribute_tables(task_events, job_events, usage);
  if (tables.tasks.empty()) throw EmptyInput("no task with a Submit event in the input");

  json config = {{"task_events", o.task_events},
                 {"job_events", o.job_events},
                 {"usage", o.usage},
                 {"sample_fraction", o.sample_fraction}};
  json report = report_header("analyze", o.seed, config);
  report["inputs"] = {{"task_events", path_strings(task_files)},
                      {"job_events", path_strings(job_files)},
                      {"usage", path_strings(usage_files)}};
  report["records"] = {{"task_events", task_events.size()},
                       {"job_events", job_events.size()},
                       {"usage", usage.size()}};
  report["skipped_tasks"] = tables.skipped_tasks;
  report["task_summary"] = to_json(summarize(tables.tasks));
  report["job_summary"] = to_json(summarize(tables.jobs));

  write_with(dir / "task_attributes.csv",
             [&](std::ostream& s) { write_task_attributes_csv(s, tables.tasks); });
  write_with(dir / "job_attributes.csv",
             [&](std::ostream& s) { write_job_attributes_csv(s, tables.jobs); });
  write_times_csv(dir / "task_times.csv", tables.tasks);
  write_times_csv(dir / "job_times.csv", tables.jobs);
  write_json(dir / "analyze_report.json", report);
  out << "analyzed " << tables.tasks.size() << " tasks in " << tables.jobs.size() << " jobs -> "
      << dir.string() << "\n";
  return 0;
}

// train ------------------------------------------------------------------------

struct TrainOptions {
  std::string attributes;
  std::string level = "task";
  std::vector<std::string> models{"forest", "tree", "glm"};
  std::vector<std::string> features;
  std::size_t folds = 10;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  json model_params = json::object();
  std::string out;
  std::string config;
};

json screen(const Dataset& data) {
  const std::size_t d = data.n_features();
  ColumnMatrix design(data.size(), d);
  std::vector<double> label(data.labels().begin(), data.labels().end());
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t f = 0; f < d; ++f) design(i, f) = data.value(i, f);
  }
  json rows = json::array();
  for (std::size_t f = 0; f < d; ++f) {
    json row = {{"feature", data.schema().names[f]}, {"spearman_with_label", nullptr},
                {"vif", nullptr}, {"collinear", false}};
    try {
      row["spearman_with_label"] = spearman(design.column(f), label);
    } catch (const DegenerateInput&) {
    }
    try {
      const double v = vif(design, f);
      row["vif"] = optional_number(v);
      row["collinear"] = v > kVifThreshold;
    } catch (const DegenerateInput&) {
    }
    rows.push_back(row);
  }
  return rows;
}

int cmd_train(const TrainOptions& o, std::ostream& out) {
  const fs::path dir(o.out);
  std::ifstream in(o.attributes);
  if (!in) throw EmptyInput("cannot open attribute file " + o.attributes);

  Dataset data;
  if (o.level == "task") {
    const auto schema = o.features.empty() ? default_task_schema() : FeatureSchema{o.features};
    data = make_task_dataset(read_task_attributes_csv(in), schema);
  } else if (o.level == "job") {
    const auto schema = o.features.empty() ? default_job_schema() : FeatureSchema{o.features};
    data = make_job_dataset(read_job_attributes_csv(in), schema);
  } else {
    throw ConfigError("level must be task or job, got " + o.level);
  }
  if (data.empty()) throw EmptyDataset("attribute file has no rows");
  if (o.folds > data.size()) {
    throw TooFewSamples(std::to_string(o.folds) + " folds need at least " + std::to_string(o.folds) +
                        " samples, got " + std::to_string(data.size()));
  }

  std::vector<std::pair<std::string, ModelSpec>> specs;
  for (const auto& kind : o.models) {
    json spec_json = {{"kind", kind}, {"params", o.model_params.value(kind, json::object())}};
    ModelSpec spec = model_spec_from_json(spec_json);
    if (auto* f = std::get_if<ForestParams>(&spec)) f->seed = o.seed;
    specs.emplace_back(kind, spec);
  }
  fs::create_directories(dir);

  std::size_t n_fail = 0;
  for (int l : data.labels()) n_fail += l == kFailClass ? 1 : 0;

  json config = {{"attributes", o.attributes},
                 {"level", o.level},
                 {"features", to_json(data.schema())},
                 {"folds", o.folds}};
  json models = json::object();
  json importance = json::array();
  for (auto [kind, spec] : specs) {
    if (auto* f = std::get_if<ForestParams>(&spec)) f->workers = o.workers;
    const CvResult cv = cross_validate(data, o.folds, spec, o.seed);
    const auto model = train_model(spec, data);
    write_json(dir / ("model_" + kind + ".json"), model->to_json());
    models[kind] = {{"spec", to_json(spec)}, {"cross_validation", to_json(cv)}};
    if (const Forest* forest = model->forest()) {
      const auto scores = gini_importance(*forest);
      std::vector<std::size_t> order(scores.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
      write_with(dir / "importance.csv", [&](std::ostream& s) {
        s << "feature,mean_decrease_gini\n";
        for (std::size_t i : order) s << data.schema().names[i] << ',' << scores[i] << '\n';
      });
      for (std::size_t i : order) {
        importance.push_back({{"feature", data.schema().names[i]}, {"mean_decrease_gini", scores[i]}});
      }
    }
  }
  config["models"] = json::object();
  for (const auto& [kind, spec] : specs) config["models"][kind] = to_json(spec)["params"];

  json report = report_header("train", o.seed, config);
  report["n_samples"] = data.size();
  report["n_fail_class"] = n_fail;
  report["screen"] = screen(data);
  report["models"] = models;
  report["importance"] = importance;
  write_json(dir / "train_report.json", report);

  for (const auto& [kind, spec] : specs) {
    const auto& cv = models[kind]["cross_validation"];
    out << kind << ": accuracy " << cv["accuracy"].dump() << " precision " << cv["precision"].dump()
        << " recall " << cv["recall"].dump() << "\n";
  }
  return 0;
}

// simulate ---------------------------------------------------------------------

struct SimulateOptions {
  std::string workload;
  std::string builtin;
  std::string policy = "baseline";
  std::string model;
  std::size_t machines = 8;
  double capacity = 1.0;
  double retrain_interval_s = 600.0;
  std::uint64_t seed = 1;
  json sim = json::object();
  json workload_params = json::object();
  std::string out;
  std::string config;
};

int cmd_simulate(const SimulateOptions& o, std::ostream& out, std::ostream& err) {
  if (o.workload.empty() == o.builtin.empty()) {
    throw ConfigError("give exactly one of --workload and --builtin");
  }
  const fs::path dir(o.out);
  const SimConfig sim_config = sim_config_from_json(o.sim);
  const WorkloadGenParams gen = workload_gen_params_from_json(o.workload_params);
  const Workload workload = o.builtin.empty()
                                ? workload_from_json(read_json_file(o.workload))
                                : builtin_workload(workload_kind_from_string(o.builtin), o.seed, gen);
  if (!(o.retrain_interval_s > 0.0)) throw ConfigError("retrain interval must be positive");

  SchedulerPolicy policy;
  policy.kind = policy_kind_from_string(o.policy);
  policy.retrain_interval = std::llround(o.retrain_interval_s * 1e6);
  if (!o.model.empty()) {
    if (policy.kind != PolicyKind::Predictive) throw ConfigError("--model needs the predictive policy");
    policy.model = model_from_json(read_json_file(o.model));
  }

  const SimResult result =
      run_simulation(workload, make_machines(o.machines, o.capacity), policy, o.seed, sim_config);

  json config = {{"workload", o.workload},
                 {"builtin", o.builtin},
                 {"policy", o.policy},
                 {"model", o.model},
                 {"machines", o.machines},
                 {"capacity", o.capacity},
                 {"retrain_interval_s", o.retrain_interval_s},
                 {"sim", to_json(sim_config)},
                 {"workload_params", to_json(gen)}};
  json report = report_header("simulate", o.seed, config);
  report["workload"] = {{"kind", to_string(workload.kind)},
                        {"n_tasks", workload.tasks.size()},
                        {"n_jobs", workload.n_jobs()}};
  report["result"] = to_json(result);

  fs::create_directories(dir);
  write_json(dir / "workload.json", to_json(workload));
  write_with(dir / "ledger.csv", [&](std::ostream& s) { write_ledger_csv(s, result.ledger); });
  write_json(dir / "sim_report.json", report);
  if (result.infeasible > 0) {
    err << "warning: NoFeasibleMachine: " << result.infeasible
        << " task(s) exceed every machine's capacity and were marked Unscheduled\n";
  }
  out << o.policy << ": " << result.finished_tasks() << "/" << result.n_tasks << " tasks and "
      << result.finished_jobs() << "/" << result.n_jobs << " jobs finished -> " << dir.string()
      << "\n";
  return 0;
}

// compare ----------------------------------------------------------------------

struct CompareOptions {
  std::string baseline;
  std::string predictive;
  std::uint64_t seed = 1;
  std::string out;
  std::string config;
};

std::vector<LedgerEntry> load_ledger(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw EmptyInput("cannot open ledger " + path);
  return read_ledger_csv(in);
}

int cmd_compare(const CompareOptions& o, std::ostream& out) {
  const SimResult base = result_from_ledger(load_ledger(o.baseline), "baseline");
  const SimResult pred = result_from_ledger(load_ledger(o.predictive), "predictive");
  const Improvement imp = compare_results(base, pred);

  json report = report_header("compare", o.seed,
                              {{"baseline", o.baseline}, {"predictive", o.predictive}});
  report["baseline"] = to_json(base);
  report["predictive"] = to_json(pred);
  report["improvement"] = to_json(imp);
  const fs::path dir(o.out);
  fs::create_directories(dir);
  write_json(dir / "compare_report.json", report);
  out << "delta finished tasks " << imp.delta_finished_tasks << ", jobs " << imp.delta_finished_jobs
      << "\n";
  return 0;
}

// gen-trace --------------------------------------------------------------------

struct GenTraceOptions {
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string config;
};

int cmd_gen_trace(const GenTraceOptions& o, std::ostream& out) {
  SyntheticConfig config =
      o.config.empty() ? SyntheticConfig{} : synthetic_config_from_json(read_json_file(o.config));
  if (o.seed) config.seed = *o.seed;
  config.validate();
  const SyntheticTrace trace = generate_synthetic_trace(config);

  const fs::path dir(o.out);
  fs::create_directories(dir);
  write_with(dir / "task_events.csv", [&](std::ostream& s) {
    for (const auto& e : trace.task_events) write_task_event(s, e);
  });
  write_with(dir / "job_events.csv", [&](std::ostream& s) {
    for (const auto& e : trace.job_events) write_job_event(s, e);
  });
  write_with(dir / "task_usage.csv", [&](std::ostream& s) {
    for (const auto& u : trace.usage) write_usage(s, u);
  });
  json manifest = report_header("gen-trace", config.seed, to_json(config));
  manifest["files"] = {{"task_events.csv", trace.task_events.size()},
                       {"job_events.csv", trace.job_events.size()},
                       {"task_usage.csv", trace.usage.size()}};
  write_json(dir / "manifest.json", manifest);
  out << "wrote " << trace.task_events.size() << " task events for " << config.n_jobs << " jobs -> "
      << dir.string() << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Task/job failure analysis, prediction and scheduling simulation"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  AnalyzeOptions ao;
  auto* analyze = app.add_subcommand("analyze", "Status distribution and attribute tables of a trace");
  analyze->add_option("--task-events", ao.task_events, "Task event files or directories");
  analyze->add_option("--job-events", ao.job_events, "Job event files or directories");
  analyze->add_option("--usage", ao.usage, "Task usage files or directories");
  analyze->add_option("--sample-fraction", ao.sample_fraction, "Fraction of files to sample");
  analyze->add_option("--seed", ao.seed);
  analyze->add_option("--out", ao.out)->required();
  analyze->add_option("--config", ao.config, "JSON file with the same keys");

  TrainOptions to;
  auto* train = app.add_subcommand("train", "Cross-validate and fit failure predictors");
  train->add_option("--attributes", to.attributes, "Attribute CSV written by analyze");
  train->add_option("--level", to.level, "task or job");
  train->add_option("--models", to.models, "Any of forest, tree, glm")->delimiter(',');
  train->add_option("--features", to.features, "Feature columns")->delimiter(',');
  train->add_option("--folds", to.folds);
  train->add_option("--workers", to.workers, "Forest training threads");
  train->add_option("--seed", to.seed);
  train->add_option("--out", to.out)->required();
  train->add_option("--config", to.config, "JSON file with the same keys plus model_params");

  SimulateOptions so;
  auto* simulate = app.add_subcommand("simulate", "Run the cluster simulator");
  simulate->add_option("--workload", so.workload, "Workload JSON file");
  simulate->add_option("--builtin", so.builtin, "single, batch or mix");
  simulate->add_option("--policy", so.policy, "baseline or predictive");
  simulate->add_option("--model", so.model, "Initial model JSON for the predictive policy");
  simulate->add_option("--machines", so.machines);
  simulate->add_option("--capacity", so.capacity);
  simulate->add_option("--retrain-interval-s", so.retrain_interval_s);
  simulate->add_option("--seed", so.seed);
  simulate->add_option("--out", so.out)->required();
  simulate->add_option("--config", so.config, "JSON file with the same keys plus sim, workload_params");

  CompareOptions co;
  auto* compare = app.add_subcommand("compare", "Compare baseline and predictive ledgers");
  compare->add_option("--baseline", co.baseline)->required();
  compare->add_option("--predictive", co.predictive)->required();
  compare->add_option("--seed", co.seed);
  compare->add_option("--out", co.out)->required();
  compare->add_option("--config", co.config);

  GenTraceOptions go;
  std::uint64_t gen_seed = 0;
  auto* gen = app.add_subcommand("gen-trace", "Write a synthetic trace");
  gen->add_option("--config", go.config, "SyntheticConfig JSON");
  gen->add_option("--seed", gen_seed, "Overrides the config seed");
  gen->add_option("--out", go.out)->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*analyze) {
      if (!ao.config.empty()) {
        const json c = read_json_file(ao.config);
        merge(c, "task_events", *analyze, "--task-events", ao.task_events);
        merge(c, "job_events", *analyze, "--job-events", ao.job_events);
        merge(c, "usage", *analyze, "--usage", ao.usage);
        merge(c, "sample_fraction", *analyze, "--sample-fraction", ao.sample_fraction);
        merge(c, "seed", *analyze, "--seed", ao.seed);
      }
      if (ao.task_events.empty()) throw EmptyInput("no input files");
      return cmd_analyze(ao, out);
    }
    if (*train) {
      if (!to.config.empty()) {
        const json c = read_json_file(to.config);
        merge(c, "attributes", *train, "--attributes", to.attributes);
        merge(c, "level", *train, "--level", to.level);
        merge(c, "models", *train, "--models", to.models);
        merge(c, "features", *train, "--features", to.features);
        merge(c, "folds", *train, "--folds", to.folds);
        merge(c, "seed", *train, "--seed", to.seed);
        if (c.contains("model_params")) to.model_params = c.at("model_params");
      }
      if (to.attributes.empty()) throw ConfigError("--attributes is required");
      return cmd_train(to, out);
    }
    if (*simulate) {
      if (!so.config.empty()) {
        const json c = read_json_file(so.config);
        merge(c, "workload", *simulate, "--workload", so.workload);
        merge(c, "builtin", *simulate, "--builtin", so.builtin);
        merge(c, "policy", *simulate, "--policy", so.policy);
        merge(c, "model", *simulate, "--model", so.model);
        merge(c, "machines", *simulate, "--machines", so.machines);
        merge(c, "capacity", *simulate, "--capacity", so.capacity);
        merge(c, "retrain_interval_s", *simulate, "--retrain-interval-s", so.retrain_interval_s);
        merge(c, "seed", *simulate, "--seed", so.seed);
        if (c.contains("sim")) so.sim = c.at("sim");
        if (c.contains("workload_params")) so.workload_params = c.at("workload_params");
      }
      return cmd_simulate(so, out, err);
    }
    if (*compare) {
      if (!co.config.empty()) {
        const json c = read_json_file(co.config);
        merge(c, "seed", *compare, "--seed", co.seed);
      }
      return cmd_compare(co, out);
    }
    if (gen->count("--seed") > 0) go.seed = gen_seed;
    return cmd_gen_trace(go, out);
  } catch (const std::exception& e) {
    err << "error: " << error_kind(e) << ": " << e.what() << "\n";
    return 1;
  }
}

}  // namespace schedpred::cli
