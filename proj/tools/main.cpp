// hpcfd command-line front end: generate-workload, simulate, featurize,
// train, evaluate, classify. All commands are deterministic for a fixed
// config and seeds.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hpcfd/classify.hpp"
#include "hpcfd/csv.hpp"
#include "hpcfd/evaluate.hpp"
#include "hpcfd/features.hpp"
#include "hpcfd/ingest.hpp"
#include "hpcfd/labeling.hpp"
#include "hpcfd/model_io.hpp"
#include "hpcfd/workload.hpp"

namespace {

using namespace hpcfd;

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  if (text.empty()) return items;
  for (const auto& item : split_csv(text)) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::optional<std::string> non_empty(const std::string& s) {
  return s.empty() ? std::nullopt : std::make_optional(s);
}

std::string fmt(double v, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

// --- shared trace -> labeled vectors pipeline --------------------------------

struct PipelineOptions {
  std::string node_csv;
  std::string core_csv;
  std::string schedule_path;
  std::string alloc_path;
  std::string counters;
  std::string drop;
  int window = 60;
  int step = 10;

  void add_options(CLI::App* cmd) {
    cmd->add_option("--node-csv", node_csv, "node-level trace CSV");
    cmd->add_option("--core-csv", core_csv, "per-core trace CSV");
    cmd->add_option("--schedule", schedule_path,
                    "fault schedule CSV (omitted: everything is healthy)");
    cmd->add_option("--alloc", alloc_path,
                    "allocation schedule CSV (omitted: nothing allocated)");
    cmd->add_option("--counters", counters, "comma-separated monotonic counter metrics");
    cmd->add_option("--drop", drop, "comma-separated metrics to drop before processing");
    cmd->add_option("--window", window, "aggregation window in seconds")
        ->capture_default_str();
    cmd->add_option("--step", step, "step between windows in seconds")
        ->capture_default_str();
  }
};

struct Pipeline {
  Trace post;
  FaultSchedule schedule;
  ingest::AllocationSchedule allocation;
  features::WindowSpec window_spec;
  std::set<std::string> counter_set;
};

Pipeline run_pipeline(const PipelineOptions& options) {
  Pipeline p;
  p.window_spec = features::WindowSpec{options.window, options.step};
  p.window_spec.validate();

  const Trace raw =
      ingest::load_trace(non_empty(options.node_csv), non_empty(options.core_csv));
  if (!options.schedule_path.empty()) {
    auto in = open_input(options.schedule_path);
    p.schedule = FaultSchedule::from_csv(in);
  }
  if (!options.alloc_path.empty()) {
    auto in = open_input(options.alloc_path);
    p.allocation = ingest::AllocationSchedule::from_csv(in);
  }

  ingest::PostProcessConfig config;
  for (const auto& name : split_list(options.counters)) config.counter_metrics.insert(name);
  for (const auto& name : split_list(options.drop)) config.drop_metrics.insert(name);
  p.counter_set = config.counter_metrics;
  p.post = ingest::post_process(raw, config, p.allocation).first;
  return p;
}

std::vector<features::FeatureVector> labeled_vectors(const Pipeline& p) {
  auto vectors = features::stream_feature_vectors(p.post, p.window_spec, p.post.core_ids());
  labeling::apply_labels(vectors, p.schedule, p.window_spec);
  return vectors;
}

// --- forest parameter flags ---------------------------------------------------

struct ForestFlags {
  int trees = 100;
  int features_per_split = 0;
  bool no_bootstrap = false;
  int max_depth = 0;
  int min_samples_split = 2;
  std::uint64_t seed = 1;

  void add_options(CLI::App* cmd) {
    cmd->add_option("--trees", trees, "trees in the forest")->capture_default_str();
    cmd->add_option("--features-per-split", features_per_split,
                    "features tried per split (0 = ceil(sqrt(d)))")
        ->capture_default_str();
    cmd->add_flag("--no-bootstrap", no_bootstrap, "train each tree on the full sample");
    cmd->add_option("--max-depth", max_depth, "maximum tree depth (0 = unlimited)")
        ->capture_default_str();
    cmd->add_option("--min-samples-split", min_samples_split,
                    "minimum node size eligible for a split")
        ->capture_default_str();
    cmd->add_option("--seed", seed, "training seed")->capture_default_str();
  }

  classify::ForestParams to_params() const {
    classify::ForestParams params;
    params.n_trees = trees;
    params.features_per_split = features_per_split;
    params.bootstrap = !no_bootstrap;
    params.seed = seed;
    if (max_depth > 0) params.tree.max_depth = max_depth;
    params.tree.min_samples_split = min_samples_split;
    return params;
  }
};

// --- subcommands ---------------------------------------------------------------

void cmd_generate_workload(const std::string& out_path, std::int64_t total_seconds,
                           int cores, std::uint64_t seed, const std::string& fault_dur,
                           const std::string& fault_inter, const std::string& bench_dur,
                           const std::string& bench_inter, const std::string& classes) {
  workload::WorkloadParams params;
  params.total_seconds = total_seconds;
  params.core_count = cores;
  params.fault_duration = workload::parse_distribution(fault_dur);
  params.fault_interarrival = workload::parse_distribution(fault_inter);
  params.bench_duration = workload::parse_distribution(bench_dur);
  params.bench_interarrival = workload::parse_distribution(bench_inter);
  params.fault_classes.clear();
  for (const auto& name : split_list(classes)) {
    params.fault_classes.push_back(parse_fault_class(name));
  }

  Rng rng(seed);
  const auto tasks = workload::generate_workload(params, rng);
  auto out = open_output(out_path);
  workload::write_workload_csv(tasks, out);

  std::cout << "workload: " << out_path << "\n"
            << "tasks: " << tasks.size() << "\n"
            << "total_seconds: " << params.total_seconds << "\n"
            << "cores: " << params.core_count << "\n"
            << "seed: " << seed << "\n"
            << "fault_duration: " << workload::to_string(params.fault_duration) << "\n"
            << "fault_interarrival: " << workload::to_string(params.fault_interarrival)
            << "\n"
            << "bench_duration: " << workload::to_string(params.bench_duration) << "\n"
            << "bench_interarrival: " << workload::to_string(params.bench_interarrival)
            << "\n";
}

void cmd_simulate(const std::string& workload_path, const std::string& out_prefix,
                  const std::string& out_stream, std::int64_t total_seconds, int cores,
                  int node_metrics, int core_metrics, std::uint64_t seed,
                  const std::string& node_spec_path, const std::string& signatures_path) {
  auto workload_in = open_input(workload_path);
  const auto tasks = workload::read_workload_csv(workload_in);

  if (total_seconds <= 0) {
    for (const auto& task : tasks) {
      total_seconds = std::max(total_seconds, task.start + task.duration);
    }
    if (total_seconds <= 0) {
      throw std::runtime_error("simulate: empty workload needs an explicit --total-seconds");
    }
  }

  workload::NodeSpec spec;
  if (!node_spec_path.empty()) {
    auto in = open_input(node_spec_path);
    spec = workload::node_spec_from_json(in);
  } else {
    spec = workload::default_node_spec(cores, node_metrics, core_metrics);
  }
  workload::SignatureSpec signatures;
  if (!signatures_path.empty()) {
    auto in = open_input(signatures_path);
    signatures = workload::signatures_from_json(in);
  } else {
    signatures = workload::default_signatures();
  }

  Rng rng(seed);
  const auto result = workload::simulate_trace(tasks, total_seconds, spec, signatures, rng);

  {
    auto out = open_output(out_prefix + ".node.csv");
    ingest::write_node_csv(result.trace, out);
  }
  {
    auto out = open_output(out_prefix + ".core.csv");
    ingest::write_core_csv(result.trace, out);
  }
  {
    auto out = open_output(out_prefix + ".schedule.csv");
    result.schedule.to_csv(out);
  }
  {
    auto out = open_output(out_prefix + ".alloc.csv");
    result.allocation.to_csv(out);
  }
  if (!out_stream.empty()) {
    auto out = open_output(out_stream);
    write_stream_csv(result.trace, out);
  }

  std::string counters;
  for (const auto& name : spec.counter_names()) {
    counters += counters.empty() ? name : "," + name;
  }
  std::cout << "trace: " << out_prefix << ".node.csv + " << out_prefix << ".core.csv\n"
            << "schedule: " << out_prefix << ".schedule.csv\n"
            << "allocation: " << out_prefix << ".alloc.csv\n"
            << "seconds: " << total_seconds << "\n"
            << "cores: " << spec.core_count << "\n"
            << "metrics: " << spec.metrics.size() << "\n"
            << "counters: " << counters << "\n";
}

void cmd_featurize(const PipelineOptions& options, const std::string& method_name,
                   bool one_core, std::uint64_t sample_seed, const std::string& out_path) {
  const LabelMethod method = parse_label_method(method_name);
  const Pipeline p = run_pipeline(options);
  if (p.post.core_ids().empty()) {
    throw std::runtime_error("featurize: trace has no cores");
  }
  const auto layout = features::FeatureLayout::for_trace(p.post);

  auto out = open_output(out_path);
  features::write_feature_csv_header(layout, out);

  std::size_t count = 0;
  std::size_t ambiguous = 0;
  const auto emit = [&](const features::FeatureVector& fv) {
    features::write_feature_csv_row(fv, method, out);
    ++count;
    if (fv.ambiguous) ++ambiguous;
  };

  if (one_core) {
    auto vectors = labeled_vectors(p);
    for (const auto& fv : features::sample_one_core_per_window(vectors, sample_seed)) {
      emit(fv);
    }
  } else {
    features::for_each_feature_vector(
        p.post, p.window_spec, p.post.core_ids(), [&](features::FeatureVector&& fv) {
          const features::Window window{fv.window_end - p.window_spec.length_seconds,
                                        fv.window_end};
          const auto labels = labeling::per_second_labels(p.schedule, fv.core_id, window);
          fv.label_mode = labeling::label_mode(labels);
          fv.label_recent = labeling::label_recent(labels);
          fv.ambiguous = labeling::is_ambiguous(labels);
          emit(fv);
        });
  }

  std::cout << "vectors: " << count << "\n"
            << "ambiguous_fraction: "
            << fmt(count ? static_cast<double>(ambiguous) / count : 0.0) << "\n";
}

void cmd_train(const std::string& features_path, const std::string& out_path,
               const ForestFlags& flags, bool exclude_ambiguous,
               const std::string& method_name, const std::string& resource_type,
               const PipelineOptions& metadata_options) {
  const LabelMethod method = parse_label_method(method_name);
  auto in = open_input(features_path);
  auto file = features::read_feature_csv(in);
  if (exclude_ambiguous) file.vectors = labeling::filter_ambiguous(file.vectors);
  if (file.vectors.empty()) throw std::runtime_error("train: no training vectors");

  const auto data = evaluate::to_dataset(file.vectors, method);
  const auto forest = classify::train_forest(data, flags.to_params());

  classify::ModelFile model;
  model.metadata.window =
      features::WindowSpec{metadata_options.window, metadata_options.step};
  model.metadata.label_method = method;
  for (const auto& name : split_list(metadata_options.counters)) {
    model.metadata.counter_metrics.insert(name);
  }
  model.models.emplace(resource_type, forest);
  model.feature_names.emplace(resource_type, file.feature_names);
  auto out = open_output(out_path);
  classify::save_model(model, out);

  // Top-10 importances.
  const auto importances = forest.feature_importances();
  std::vector<std::size_t> order(importances.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (importances[a] != importances[b]) return importances[a] > importances[b];
    return file.feature_names[a] < file.feature_names[b];
  });
  std::cout << "model: " << out_path << "\n"
            << "vectors: " << file.vectors.size() << "\n"
            << "features: " << importances.size() << "\n"
            << "top_importances:\n";
  for (std::size_t i = 0; i < std::min<std::size_t>(10, order.size()); ++i) {
    std::cout << "  " << file.feature_names[order[i]] << " "
              << fmt(importances[order[i]]) << "\n";
  }
}

struct EvaluateConfigResult {
  LabelMethod method;
  evaluate::FoldMode order;
  bool exclude_ambiguous;
  evaluate::EvaluationReport report;
};

void cmd_evaluate(const PipelineOptions& options, const ForestFlags& flags, int k,
                  const std::string& labelings, const std::string& orders,
                  const std::string& ambiguous, std::uint64_t shuffle_seed, bool one_core,
                  std::uint64_t sample_seed, const std::string& average_name,
                  bool measure, const std::string& out_prefix) {
  const evaluate::Average average = average_name == "weighted"
                                        ? evaluate::Average::weighted
                                        : evaluate::Average::macro;
  if (average_name != "macro" && average_name != "weighted") {
    throw std::runtime_error("evaluate: --average must be macro or weighted");
  }

  const Pipeline p = run_pipeline(options);
  auto vectors = labeled_vectors(p);
  if (one_core) vectors = features::sample_one_core_per_window(vectors, sample_seed);

  std::vector<EvaluateConfigResult> results;
  for (const auto& method_name : split_list(labelings)) {
    const LabelMethod method = parse_label_method(method_name);
    for (const auto& order_name : split_list(orders)) {
      evaluate::FoldMode mode;
      if (order_name == "time") {
        mode = evaluate::FoldMode::time_ordered;
      } else if (order_name == "shuffled") {
        mode = evaluate::FoldMode::shuffled;
      } else {
        throw std::runtime_error("evaluate: unknown order '" + order_name + "'");
      }
      for (const auto& amb : split_list(ambiguous)) {
        bool exclude;
        if (amb == "keep") {
          exclude = false;
        } else if (amb == "drop") {
          exclude = true;
        } else {
          throw std::runtime_error("evaluate: --ambiguous entries must be keep or drop");
        }
        const std::size_t n =
            exclude ? labeling::filter_ambiguous(vectors).size() : vectors.size();
        const auto plan = evaluate::plan_folds(n, k, mode, shuffle_seed);
        results.push_back({method, mode, exclude,
                           evaluate::cross_validate(vectors, flags.to_params(), plan,
                                                    method, exclude, average)});
      }
    }
  }

  evaluate::Timing timing;
  if (measure) {
    const auto data = evaluate::to_dataset(vectors, results.front().method);
    const auto model = classify::train_forest(data, flags.to_params());
    timing = evaluate::measure_overhead(p.post, p.window_spec, model);
    auto out = open_output(out_prefix + "_timing.txt");
    out << "featurize_ms_per_window " << fmt(timing.featurize_ms_per_window, 4) << "\n"
        << "predict_ms_per_vector " << fmt(timing.predict_ms_per_vector, 6) << "\n";
  }

  std::ostringstream summary;
  summary << "labeling order ambiguous overall_fscore\n";
  for (const auto& r : results) {
    summary << to_string(r.method) << ' ' << evaluate::to_string(r.order) << ' '
            << (r.exclude_ambiguous ? "drop" : "keep") << ' '
            << fmt(r.report.aggregate.overall_fscore, 4) << "\n";
  }
  {
    auto out = open_output(out_prefix + "_summary.txt");
    out << summary.str();
  }
  std::cout << summary.str();

  {
    auto out = open_output(out_prefix + "_perclass.csv");
    out << "labeling,order,ambiguous,class,precision,recall,fscore,support\n";
    for (const auto& r : results) {
      for (std::size_t c = 0; c < kFaultClassCount; ++c) {
        const auto& score = r.report.aggregate.per_class[c];
        if (score.support == 0) continue;
        out << to_string(r.method) << ',' << evaluate::to_string(r.order) << ','
            << (r.exclude_ambiguous ? "drop" : "keep") << ','
            << kFaultClassNames[c] << ',' << fmt(score.precision) << ','
            << fmt(score.recall) << ',' << fmt(score.fscore) << ',' << score.support
            << "\n";
      }
    }
  }

  {
    nlohmann::ordered_json report;
    report["k"] = k;
    report["average"] = average_name;
    nlohmann::ordered_json configs = nlohmann::ordered_json::array();
    for (const auto& r : results) {
      nlohmann::ordered_json jc;
      jc["labeling"] = std::string(to_string(r.method));
      jc["order"] = std::string(evaluate::to_string(r.order));
      jc["ambiguous"] = r.exclude_ambiguous ? "drop" : "keep";
      jc["overall_fscore"] = r.report.aggregate.overall_fscore;
      nlohmann::ordered_json per_class;
      for (std::size_t c = 0; c < kFaultClassCount; ++c) {
        const auto& score = r.report.aggregate.per_class[c];
        per_class[std::string(kFaultClassNames[c])] = {{"precision", score.precision},
                                                       {"recall", score.recall},
                                                       {"fscore", score.fscore},
                                                       {"support", score.support}};
      }
      jc["per_class"] = std::move(per_class);
      jc["confusion"] = r.report.confusion;
      nlohmann::ordered_json folds = nlohmann::ordered_json::array();
      for (const auto& fold : r.report.fold_reports) {
        folds.push_back(fold.overall_fscore);
      }
      jc["fold_overall_fscores"] = std::move(folds);
      configs.push_back(std::move(jc));
    }
    report["configs"] = std::move(configs);
    report["timing"] = {{"featurize_ms_per_window", timing.featurize_ms_per_window},
                        {"predict_ms_per_vector", timing.predict_ms_per_vector}};
    auto out = open_output(out_prefix + "_report.json");
    out << report.dump(1) << "\n";
  }
}

void cmd_classify(const std::string& model_path, const std::string& alloc_path,
                  const std::string& resource_type) {
  auto model_in = open_input(model_path);
  const auto model_file = classify::load_model(model_in);
  const auto it = model_file.models.find(resource_type);
  if (it == model_file.models.end()) {
    throw std::runtime_error("classify: model file has no '" + resource_type + "' model");
  }
  const classify::ForestModel& forest = it->second;
  const auto layout = features::FeatureLayout::from_feature_names(
      model_file.feature_names.at(resource_type));

  ingest::AllocationSchedule allocation;
  if (!alloc_path.empty()) {
    auto in = open_input(alloc_path);
    allocation = ingest::AllocationSchedule::from_csv(in);
  }

  const auto strip_derivs = [](const std::vector<std::string>& names) {
    std::vector<std::string> base;
    for (const auto& name : names) {
      if (!name.ends_with(ingest::kDerivSuffix)) base.push_back(name);
    }
    return base;
  };
  features::OnlinePostProcessor post(strip_derivs(layout.node_metrics),
                                     strip_derivs(layout.core_metrics),
                                     model_file.metadata.counter_metrics, allocation);

  std::optional<features::StreamingFeaturizer> featurizer;
  StreamReader reader(std::cin);
  bool header_written = false;
  while (auto sample = reader.next()) {
    const MetricSample processed = post.process(*sample);
    if (!featurizer) {
      std::vector<int> cores;
      for (const auto& [key, value] : processed.core_values) {
        if (cores.empty() || cores.back() != key.first) cores.push_back(key.first);
      }
      featurizer.emplace(layout, model_file.metadata.window, cores);
    }
    for (const auto& fv : featurizer->push(processed)) {
      if (!header_written) {
        std::cout << "window_end,core,label\n";
        header_written = true;
      }
      const int predicted = forest.predict(fv.values);
      std::cout << fv.window_end << ',' << fv.core_id << ','
                << forest.class_names()[static_cast<std::size_t>(predicted)] << "\n";
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hpcfd: streaming fault classification for HPC node telemetry"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI config file ([subcommand] sections; flags override)");

  // generate-workload
  auto* gen = app.add_subcommand("generate-workload",
                                 "sample a benchmark + fault-injection workload file");
  std::string gen_out;
  std::int64_t gen_total = 7200;
  int gen_cores = 4;
  std::uint64_t gen_seed = 1;
  std::string gen_fault_dur = "johnsonsu(0,1.5,180,60)";
  std::string gen_fault_inter = "expweibull(1.5,2,340)";
  std::string gen_bench_dur = "normal(150,10)";
  std::string gen_bench_inter = "normal(200,12)";
  std::string gen_classes = "leak,memeater,ddot,dial,cpufreq,pagefail,ioerr,copy";
  gen->add_option("--out", gen_out, "output workload CSV")->required();
  gen->add_option("--total-seconds", gen_total)->capture_default_str();
  gen->add_option("--cores", gen_cores)->capture_default_str();
  gen->add_option("--seed", gen_seed)->capture_default_str();
  gen->add_option("--fault-duration-dist", gen_fault_dur)->capture_default_str();
  gen->add_option("--fault-interarrival-dist", gen_fault_inter)->capture_default_str();
  gen->add_option("--bench-duration-dist", gen_bench_dur)->capture_default_str();
  gen->add_option("--bench-interarrival-dist", gen_bench_inter)->capture_default_str();
  gen->add_option("--fault-classes", gen_classes)->capture_default_str();
  gen->callback([&] {
    cmd_generate_workload(gen_out, gen_total, gen_cores, gen_seed, gen_fault_dur,
                          gen_fault_inter, gen_bench_dur, gen_bench_inter, gen_classes);
  });

  // simulate
  auto* sim = app.add_subcommand("simulate",
                                 "synthesize a metric trace from a workload file");
  std::string sim_workload, sim_prefix, sim_stream, sim_node_spec, sim_signatures;
  std::int64_t sim_total = 0;
  int sim_cores = 4, sim_node_metrics = 13, sim_core_metrics = 6;
  std::uint64_t sim_seed = 1;
  sim->add_option("--workload", sim_workload, "workload CSV")->required();
  sim->add_option("--out-prefix", sim_prefix,
                  "prefix for .node.csv/.core.csv/.schedule.csv/.alloc.csv")
      ->required();
  sim->add_option("--out-stream", sim_stream, "also write a tall stream CSV");
  sim->add_option("--total-seconds", sim_total, "trace length (0 = last task end)")
      ->capture_default_str();
  sim->add_option("--cores", sim_cores)->capture_default_str();
  sim->add_option("--node-metrics", sim_node_metrics)->capture_default_str();
  sim->add_option("--core-metrics", sim_core_metrics)->capture_default_str();
  sim->add_option("--seed", sim_seed)->capture_default_str();
  sim->add_option("--node-spec", sim_node_spec, "node spec JSON (overrides counts)");
  sim->add_option("--signatures", sim_signatures, "fault signature JSON");
  sim->callback([&] {
    cmd_simulate(sim_workload, sim_prefix, sim_stream, sim_total, sim_cores,
                 sim_node_metrics, sim_core_metrics, sim_seed, sim_node_spec,
                 sim_signatures);
  });

  // featurize
  auto* feat = app.add_subcommand("featurize",
                                  "turn a trace into labeled windowed feature vectors");
  PipelineOptions feat_options;
  feat_options.add_options(feat);
  std::string feat_method = "mode", feat_out;
  bool feat_one_core = false;
  std::uint64_t feat_sample_seed = 1;
  feat->add_option("--label-method", feat_method, "mode or recent")->capture_default_str();
  feat->add_flag("--one-core-per-window", feat_one_core,
                 "keep one random core's vector per window");
  feat->add_option("--sample-seed", feat_sample_seed)->capture_default_str();
  feat->add_option("--out", feat_out, "output feature CSV")->required();
  feat->callback([&] {
    cmd_featurize(feat_options, feat_method, feat_one_core, feat_sample_seed, feat_out);
  });

  // train
  auto* train = app.add_subcommand("train", "train a random forest from a feature file");
  std::string train_features, train_out, train_method = "mode", train_type = "core";
  bool train_exclude = false;
  ForestFlags train_flags;
  PipelineOptions train_metadata;  // window/step/counters recorded in the model
  train->add_option("--features", train_features, "feature CSV")->required();
  train->add_option("--out", train_out, "output model JSON")->required();
  train_flags.add_options(train);
  train->add_flag("--exclude-ambiguous", train_exclude, "drop ambiguous vectors");
  train->add_option("--label-method", train_method, "mode or recent (metadata)")
      ->capture_default_str();
  train->add_option("--resource-type", train_type)->capture_default_str();
  train->add_option("--window", train_metadata.window, "window seconds (metadata)")
      ->capture_default_str();
  train->add_option("--step", train_metadata.step, "step seconds (metadata)")
      ->capture_default_str();
  train->add_option("--counters", train_metadata.counters,
                    "counter metrics (metadata for streaming classify)");
  train->callback([&] {
    cmd_train(train_features, train_out, train_flags, train_exclude, train_method,
              train_type, train_metadata);
  });

  // evaluate
  auto* eval = app.add_subcommand(
      "evaluate", "cross-validate a classifier over a trace and write reports");
  PipelineOptions eval_options;
  eval_options.add_options(eval);
  ForestFlags eval_flags;
  eval_flags.add_options(eval);
  int eval_k = 5;
  std::string eval_labelings = "mode";
  std::string eval_orders = "time,shuffled";
  std::string eval_ambiguous = "keep,drop";
  std::string eval_average = "macro";
  std::string eval_prefix;
  std::uint64_t eval_shuffle_seed = 7, eval_sample_seed = 1;
  bool eval_one_core = false, eval_measure = false;
  eval->add_option("--k", eval_k, "cross-validation folds")->capture_default_str();
  eval->add_option("--labelings", eval_labelings, "comma list of mode,recent")
      ->capture_default_str();
  eval->add_option("--orders", eval_orders, "comma list of time,shuffled")
      ->capture_default_str();
  eval->add_option("--ambiguous", eval_ambiguous, "comma list of keep,drop")
      ->capture_default_str();
  eval->add_option("--shuffle-seed", eval_shuffle_seed)->capture_default_str();
  eval->add_flag("--one-core-per-window", eval_one_core,
                 "keep one random core's vector per window");
  eval->add_option("--sample-seed", eval_sample_seed)->capture_default_str();
  eval->add_option("--average", eval_average, "macro or weighted")->capture_default_str();
  eval->add_flag("--measure-overhead", eval_measure,
                 "also measure featurize/predict wall-clock (non-deterministic output)");
  eval->add_option("--out-prefix", eval_prefix, "prefix for report files")->required();
  eval->callback([&] {
    cmd_evaluate(eval_options, eval_flags, eval_k, eval_labelings, eval_orders,
                 eval_ambiguous, eval_shuffle_seed, eval_one_core, eval_sample_seed,
                 eval_average, eval_measure, eval_prefix);
  });

  // classify
  auto* cls = app.add_subcommand(
      "classify", "label a live metric stream (stdin) with a trained model");
  std::string cls_model, cls_alloc, cls_type = "core";
  cls->add_option("--model", cls_model, "model JSON")->required();
  cls->add_option("--alloc", cls_alloc, "allocation schedule CSV");
  cls->add_option("--resource-type", cls_type)->capture_default_str();
  cls->callback([&] { cmd_classify(cls_model, cls_alloc, cls_type); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
