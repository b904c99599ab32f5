#include "hpcfd/workload.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "hpcfd/csv.hpp"

namespace hpcfd::workload {

namespace {

using json = nlohmann::ordered_json;

constexpr int kResampleCap = 1000;

double benchmark_load_factor(const std::string& program) {
  if (program == "dgemm") return 1.2;
  if (program == "hpcc") return 1.0;
  if (program == "stream") return 0.9;
  if (program == "hpl") return 1.1;
  return 1.0;
}

/// Samples a duration/interval in whole seconds, resampling non-positive
/// draws up to a cap.
std::int64_t sample_positive_seconds(const DistributionSpec& dist, Rng& rng) {
  for (int attempt = 0; attempt < kResampleCap; ++attempt) {
    const std::int64_t v = std::llround(sample(dist, rng));
    if (v >= 1) return v;
  }
  throw std::runtime_error("workload: distribution " + to_string(dist) +
                           " keeps yielding non-positive values");
}

std::string scope_string(const std::optional<int>& core) {
  return core ? "core:" + std::to_string(*core) : "node";
}

std::optional<int> parse_scope(const std::string& text, int line) {
  if (text == "node") return std::nullopt;
  if (text.rfind("core:", 0) == 0) {
    return static_cast<int>(parse_int_field(text.substr(5), line));
  }
  throw std::runtime_error("line " + std::to_string(line) + ": unknown scope '" + text + "'");
}

}  // namespace

void validate(const DistributionSpec& dist) {
  std::visit(
      [](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, JohnsonSu>) {
          if (d.delta <= 0 || d.lambda <= 0) {
            throw std::invalid_argument("johnsonsu: delta and lambda must be positive");
          }
        } else if constexpr (std::is_same_v<T, ExponentiatedWeibull>) {
          if (d.alpha <= 0 || d.k <= 0 || d.lambda <= 0) {
            throw std::invalid_argument("expweibull: all parameters must be positive");
          }
        } else {
          if (d.sigma <= 0) {
            throw std::invalid_argument("normal: sigma must be positive");
          }
        }
      },
      dist);
}

double sample(const DistributionSpec& dist, Rng& rng) {
  validate(dist);
  return std::visit(
      [&rng](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, JohnsonSu>) {
          const double z = rng.normal();
          return d.xi + d.lambda * std::sinh((z - d.gamma) / d.delta);
        } else if constexpr (std::is_same_v<T, ExponentiatedWeibull>) {
          const double u = rng.uniform();
          return d.lambda * std::pow(-std::log1p(-std::pow(u, 1.0 / d.alpha)), 1.0 / d.k);
        } else {
          return d.mu + d.sigma * rng.normal();
        }
      },
      dist);
}

double exponentiated_weibull_cdf(const ExponentiatedWeibull& dist, double x) {
  if (x <= 0) return 0.0;
  return std::pow(1.0 - std::exp(-std::pow(x / dist.lambda, dist.k)), dist.alpha);
}

DistributionSpec parse_distribution(const std::string& text) {
  const std::size_t open = text.find('(');
  if (open == std::string::npos || text.back() != ')') {
    throw std::invalid_argument("distribution '" + text +
                                "': expected name(p1,p2,...)");
  }
  const std::string name = text.substr(0, open);
  const std::string body = text.substr(open + 1, text.size() - open - 2);
  std::vector<double> params;
  for (const auto& field : split_csv(body)) {
    params.push_back(parse_double_field(field, 0));
  }

  DistributionSpec dist;
  if (name == "johnsonsu") {
    if (params.size() != 4) {
      throw std::invalid_argument("johnsonsu takes (gamma,delta,xi,lambda)");
    }
    dist = JohnsonSu{params[0], params[1], params[2], params[3]};
  } else if (name == "expweibull") {
    if (params.size() != 3) {
      throw std::invalid_argument("expweibull takes (alpha,k,lambda)");
    }
    dist = ExponentiatedWeibull{params[0], params[1], params[2]};
  } else if (name == "normal") {
    if (params.size() != 2) {
      throw std::invalid_argument("normal takes (mu,sigma)");
    }
    dist = NormalDist{params[0], params[1]};
  } else {
    throw std::invalid_argument("unknown distribution '" + name + "'");
  }
  validate(dist);
  return dist;
}

std::string to_string(const DistributionSpec& dist) {
  return std::visit(
      [](const auto& d) -> std::string {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, JohnsonSu>) {
          return "johnsonsu(" + format_double(d.gamma) + "," + format_double(d.delta) +
                 "," + format_double(d.xi) + "," + format_double(d.lambda) + ")";
        } else if constexpr (std::is_same_v<T, ExponentiatedWeibull>) {
          return "expweibull(" + format_double(d.alpha) + "," + format_double(d.k) + "," +
                 format_double(d.lambda) + ")";
        } else {
          return "normal(" + format_double(d.mu) + "," + format_double(d.sigma) + ")";
        }
      },
      dist);
}

void WorkloadParams::validate() const {
  if (total_seconds <= 0) {
    throw std::invalid_argument("workload params: total_seconds must be positive");
  }
  if (core_count <= 0) {
    throw std::invalid_argument("workload params: core_count must be positive");
  }
  if (fault_classes.empty()) {
    throw std::invalid_argument("workload params: no fault classes");
  }
  for (const FaultClass fault : fault_classes) {
    if (fault == FaultClass::healthy) {
      throw std::invalid_argument("workload params: healthy is not injectable");
    }
  }
  workload::validate(fault_duration);
  workload::validate(fault_interarrival);
  workload::validate(bench_duration);
  workload::validate(bench_interarrival);
}

std::vector<WorkloadTask> generate_workload(const WorkloadParams& params, Rng& rng) {
  params.validate();
  std::vector<WorkloadTask> tasks;

  // Fault tasks: arrivals first, then per-fault draws; durations clip to the
  // next arrival (and the horizon) so executions never overlap.
  std::vector<std::int64_t> fault_starts{0};
  while (true) {
    const std::int64_t next =
        fault_starts.back() + sample_positive_seconds(params.fault_interarrival, rng);
    if (next >= params.total_seconds) break;
    fault_starts.push_back(next);
  }
  for (std::size_t i = 0; i < fault_starts.size(); ++i) {
    const std::int64_t start = fault_starts[i];
    const std::int64_t next =
        i + 1 < fault_starts.size() ? fault_starts[i + 1] : params.total_seconds;
    std::int64_t duration = sample_positive_seconds(params.fault_duration, rng);
    duration = std::min({duration, next - start, params.total_seconds - start});

    WorkloadTask task;
    task.kind = TaskKind::fault;
    const FaultClass fault = params.fault_classes[rng.below(params.fault_classes.size())];
    task.program = std::string(to_string(fault));
    if (is_core_scoped(fault)) {
      task.core = static_cast<int>(rng.below(static_cast<std::uint64_t>(params.core_count)));
    }
    task.start = start;
    task.duration = duration;
    task.low_intensity = rng.bernoulli(0.5);
    tasks.push_back(std::move(task));
  }

  // Benchmark tasks: same arrival process, overlaps allowed, clipped only to
  // the horizon.
  std::vector<std::int64_t> bench_starts{0};
  while (true) {
    const std::int64_t next =
        bench_starts.back() + sample_positive_seconds(params.bench_interarrival, rng);
    if (next >= params.total_seconds) break;
    bench_starts.push_back(next);
  }
  for (const std::int64_t start : bench_starts) {
    WorkloadTask task;
    task.kind = TaskKind::benchmark;
    std::int64_t duration = sample_positive_seconds(params.bench_duration, rng);
    task.duration = std::min(duration, params.total_seconds - start);
    task.program = kBenchmarkPrograms[rng.below(kBenchmarkPrograms.size())];
    if (rng.bernoulli(0.5)) {
      task.core = static_cast<int>(rng.below(static_cast<std::uint64_t>(params.core_count)));
    }
    task.start = start;
    tasks.push_back(std::move(task));
  }

  std::sort(tasks.begin(), tasks.end(), [](const WorkloadTask& a, const WorkloadTask& b) {
    if (a.start != b.start) return a.start < b.start;
    if (a.kind != b.kind) return a.kind == TaskKind::fault;
    if (a.program != b.program) return a.program < b.program;
    return a.core.value_or(-1) < b.core.value_or(-1);
  });
  return tasks;
}

void write_workload_csv(const std::vector<WorkloadTask>& tasks, std::ostream& out) {
  out << "start,duration,kind,program,scope,low_intensity\n";
  for (const auto& task : tasks) {
    out << task.start << ',' << task.duration << ','
        << (task.kind == TaskKind::fault ? "fault" : "benchmark") << ',' << task.program
        << ',' << scope_string(task.core) << ',' << (task.low_intensity ? 1 : 0) << '\n';
  }
}

std::vector<WorkloadTask> read_workload_csv(std::istream& in) {
  CsvReader reader(in);
  std::vector<std::string> fields;
  if (!reader.next_row(fields) ||
      fields != std::vector<std::string>{"start", "duration", "kind", "program", "scope",
                                         "low_intensity"}) {
    throw std::runtime_error(
        "workload file: expected header start,duration,kind,program,scope,low_intensity");
  }
  std::vector<WorkloadTask> tasks;
  while (reader.next_row(fields)) {
    if (fields.size() != 6) {
      throw std::runtime_error("workload file line " + std::to_string(reader.line()) +
                               ": expected 6 fields");
    }
    WorkloadTask task;
    task.start = parse_int_field(fields[0], reader.line());
    task.duration = parse_int_field(fields[1], reader.line());
    if (fields[2] == "fault") {
      task.kind = TaskKind::fault;
    } else if (fields[2] == "benchmark") {
      task.kind = TaskKind::benchmark;
    } else {
      throw std::runtime_error("workload file line " + std::to_string(reader.line()) +
                               ": unknown kind '" + fields[2] + "'");
    }
    task.program = fields[3];
    task.core = parse_scope(fields[4], reader.line());
    task.low_intensity = parse_int_field(fields[5], reader.line()) != 0;
    if (task.duration <= 0) {
      throw std::runtime_error("workload file line " + std::to_string(reader.line()) +
                               ": duration must be positive");
    }
    tasks.push_back(std::move(task));
  }
  return tasks;
}

std::vector<std::string> NodeSpec::counter_names() const {
  std::vector<std::string> names;
  for (const auto& def : metrics) {
    if (def.kind == MetricKind::counter) names.push_back(def.name);
  }
  return names;
}

void NodeSpec::validate() const {
  if (core_count <= 0) throw std::invalid_argument("node spec: core_count must be positive");
  std::vector<std::string> seen;
  for (const auto& def : metrics) {
    if (def.name.empty() || def.name.find(',') != std::string::npos ||
        def.name.find('|') != std::string::npos) {
      throw std::invalid_argument("node spec: metric name '" + def.name + "' is invalid");
    }
    if (def.name == ingest::kAllocatedMetric) {
      throw std::invalid_argument("node spec: 'allocated' is reserved");
    }
    if (def.name.ends_with(ingest::kDerivSuffix)) {
      throw std::invalid_argument("node spec: '.deriv' suffix is reserved");
    }
    if (def.noise < 0) {
      throw std::invalid_argument("node spec: negative noise for " + def.name);
    }
    seen.push_back(def.name);
  }
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
    throw std::invalid_argument("node spec: duplicate metric name");
  }
}

NodeSpec default_node_spec(int core_count, int node_metric_count, int core_metric_count) {
  const std::vector<MetricDef> node_base = {
      {"mem_used_mb", MetricScope::node, MetricKind::gauge, 32000, 150, 4000},
      {"mem_free_mb", MetricScope::node, MetricKind::gauge, 96000, 150, -4000},
      {"mem_bandwidth_mbs", MetricScope::node, MetricKind::gauge, 5000, 250, 2500},
      {"swap_rate_kbs", MetricScope::node, MetricKind::gauge, 20, 2, 10},
      {"page_fail_rate", MetricScope::node, MetricKind::gauge, 0.5, 0.15, 0.2},
      {"io_read_mbs", MetricScope::node, MetricKind::gauge, 80, 10, 45},
      {"io_write_mbs", MetricScope::node, MetricKind::gauge, 60, 8, 35},
      {"io_error_rate", MetricScope::node, MetricKind::gauge, 0.05, 0.02, 0.01},
      {"io_latency_ms", MetricScope::node, MetricKind::gauge, 4, 0.5, 1},
      {"cpu_temp_c", MetricScope::node, MetricKind::gauge, 45, 1.5, 12},
      {"power_w", MetricScope::node, MetricKind::gauge, 220, 8, 90},
      {"ctx_switches_total", MetricScope::node, MetricKind::counter, 3000, 300, 1500},
      {"interrupts_total", MetricScope::node, MetricKind::counter, 2000, 200, 900},
  };
  const std::vector<MetricDef> core_base = {
      {"freq_mhz", MetricScope::core, MetricKind::gauge, 2400, 25, 180},
      {"user_pct", MetricScope::core, MetricKind::gauge, 15, 4, 55},
      {"ipc", MetricScope::core, MetricKind::gauge, 1.2, 0.08, 0.5},
      {"cache_miss_pct", MetricScope::core, MetricKind::gauge, 8, 1.5, 6},
      {"flops_gflops", MetricScope::core, MetricKind::gauge, 4, 0.8, 18},
      {"alu_util_pct", MetricScope::core, MetricKind::gauge, 12, 3, 40},
  };
  if (node_metric_count < static_cast<int>(node_base.size()) ||
      core_metric_count < static_cast<int>(core_base.size())) {
    throw std::invalid_argument(
        "default_node_spec: need at least " + std::to_string(node_base.size()) +
        " node and " + std::to_string(core_base.size()) + " core metrics");
  }

  NodeSpec spec;
  spec.core_count = core_count;
  spec.metrics = node_base;
  for (int i = 0; i < node_metric_count - static_cast<int>(node_base.size()); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "node_aux_%03d", i);
    spec.metrics.push_back({name, MetricScope::node, MetricKind::gauge,
                            100.0 + 3.0 * i, 5.0 + (i % 7),
                            (i % 3 == 0) ? 10.0 + (i % 11) : 0.0});
  }
  spec.metrics.insert(spec.metrics.end(), core_base.begin(), core_base.end());
  for (int i = 0; i < core_metric_count - static_cast<int>(core_base.size()); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "core_aux_%03d", i);
    spec.metrics.push_back({name, MetricScope::core, MetricKind::gauge,
                            50.0 + 2.0 * i, 3.0 + (i % 5),
                            (i % 4 == 0) ? 8.0 + (i % 9) : 0.0});
  }
  spec.validate();
  return spec;
}

namespace {

std::string_view scope_name(MetricScope scope) {
  return scope == MetricScope::node ? "node" : "core";
}

MetricScope parse_metric_scope(const std::string& text) {
  if (text == "node") return MetricScope::node;
  if (text == "core") return MetricScope::core;
  throw std::runtime_error("node spec: unknown scope '" + text + "'");
}

std::string_view kind_name(MetricKind kind) {
  return kind == MetricKind::gauge ? "gauge" : "counter";
}

MetricKind parse_metric_kind(const std::string& text) {
  if (text == "gauge") return MetricKind::gauge;
  if (text == "counter") return MetricKind::counter;
  throw std::runtime_error("node spec: unknown kind '" + text + "'");
}

std::string_view model_name(PerturbationModel model) {
  switch (model) {
    case PerturbationModel::offset: return "offset";
    case PerturbationModel::factor: return "factor";
    case PerturbationModel::trend: return "trend";
    case PerturbationModel::spike: return "spike";
    case PerturbationModel::square: return "square";
  }
  return "offset";
}

PerturbationModel parse_model(const std::string& text) {
  if (text == "offset") return PerturbationModel::offset;
  if (text == "factor") return PerturbationModel::factor;
  if (text == "trend") return PerturbationModel::trend;
  if (text == "spike") return PerturbationModel::spike;
  if (text == "square") return PerturbationModel::square;
  throw std::runtime_error("signature spec: unknown perturbation model '" + text + "'");
}

}  // namespace

NodeSpec node_spec_from_json(std::istream& in) {
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("node spec: invalid JSON: ") + e.what());
  }
  NodeSpec spec;
  spec.core_count = j.at("core_count").get<int>();
  for (const auto& jm : j.at("metrics")) {
    MetricDef def;
    def.name = jm.at("name").get<std::string>();
    def.scope = parse_metric_scope(jm.at("scope").get<std::string>());
    def.kind = parse_metric_kind(jm.at("kind").get<std::string>());
    def.baseline = jm.at("baseline").get<double>();
    def.noise = jm.at("noise").get<double>();
    def.load_response = jm.at("load_response").get<double>();
    spec.metrics.push_back(std::move(def));
  }
  spec.validate();
  return spec;
}

void node_spec_to_json(const NodeSpec& spec, std::ostream& out) {
  json j;
  j["core_count"] = spec.core_count;
  json metrics = json::array();
  for (const auto& def : spec.metrics) {
    json jm;
    jm["name"] = def.name;
    jm["scope"] = std::string(scope_name(def.scope));
    jm["kind"] = std::string(kind_name(def.kind));
    jm["baseline"] = def.baseline;
    jm["noise"] = def.noise;
    jm["load_response"] = def.load_response;
    metrics.push_back(std::move(jm));
  }
  j["metrics"] = std::move(metrics);
  out << j.dump(1) << '\n';
}

void SignatureSpec::validate(const NodeSpec& spec) const {
  std::map<std::string, MetricScope> scopes;
  for (const auto& def : spec.metrics) scopes.emplace(def.name, def.scope);
  for (const auto& [fault, signature] : signatures) {
    if (fault == FaultClass::healthy) {
      throw std::invalid_argument("signature spec: healthy has no signature");
    }
    if (signature.intensity <= 0 || signature.low_intensity_factor <= 0) {
      throw std::invalid_argument("signature spec: non-positive intensity for " +
                                  std::string(to_string(fault)));
    }
    for (const auto& p : signature.perturbations) {
      const auto it = scopes.find(p.metric);
      if (it != scopes.end() && is_core_scoped(fault) && it->second == MetricScope::node) {
        throw std::invalid_argument("signature spec: core-scoped fault " +
                                    std::string(to_string(fault)) +
                                    " may not perturb node metric " + p.metric);
      }
      if (p.model == PerturbationModel::spike &&
          (p.probability <= 0.0 || p.probability > 1.0)) {
        throw std::invalid_argument("signature spec: spike probability out of (0,1]");
      }
      if (p.model == PerturbationModel::square && (p.period <= 0 || p.duty <= 0 ||
                                                   p.duty > p.period)) {
        throw std::invalid_argument("signature spec: square wave needs 0 < duty <= period");
      }
      if (!std::isfinite(p.magnitude)) {
        throw std::invalid_argument("signature spec: non-finite magnitude");
      }
    }
  }
}

SignatureSpec default_signatures() {
  SignatureSpec spec;
  const auto add = [&spec](FaultClass fault, std::vector<Perturbation> perturbations) {
    FaultSignature signature;
    signature.perturbations = std::move(perturbations);
    spec.signatures.emplace(fault, std::move(signature));
  };

  // Magnitudes sized so that even a low-intensity fault covering only half a
  // window shifts its tell-tale metric past the healthy-under-load range.
  add(FaultClass::leak, {{"mem_used_mb", PerturbationModel::trend, 25.0, 0, 0, 0},
                         {"mem_free_mb", PerturbationModel::trend, -25.0, 0, 0, 0},
                         {"swap_rate_kbs", PerturbationModel::offset, 500.0, 0, 0, 0}});
  add(FaultClass::memeater,
      {{"mem_used_mb", PerturbationModel::offset, 2500.0, 0, 0, 0},
       {"mem_used_mb", PerturbationModel::trend, 4.0, 0, 0, 0},
       {"mem_bandwidth_mbs", PerturbationModel::offset, 20000.0, 0, 0, 0}});
  add(FaultClass::ddot, {{"cache_miss_pct", PerturbationModel::factor, 10.0, 0, 0, 0},
                         {"flops_gflops", PerturbationModel::factor, 0.3, 0, 0, 0},
                         {"ipc", PerturbationModel::factor, 0.45, 0, 0, 0}});
  add(FaultClass::dial, {{"alu_util_pct", PerturbationModel::offset, 300.0, 0, 0, 0},
                         {"flops_gflops", PerturbationModel::factor, 1.6, 0, 0, 0},
                         {"user_pct", PerturbationModel::factor, 1.5, 0, 0, 0}});
  add(FaultClass::cpufreq, {{"freq_mhz", PerturbationModel::factor, 0.5, 0, 0, 0}});
  add(FaultClass::pagefail,
      {{"page_fail_rate", PerturbationModel::spike, 35.0, 0.5, 0, 0},
       {"user_pct", PerturbationModel::factor, 0.85, 0, 0, 0}});
  add(FaultClass::ioerr, {{"io_error_rate", PerturbationModel::spike, 6.0, 0.3, 0, 0}});
  add(FaultClass::copy, {{"io_write_mbs", PerturbationModel::square, 380.0, 0, 10, 8},
                         {"io_read_mbs", PerturbationModel::square, 380.0, 0, 10, 8},
                         {"io_latency_ms", PerturbationModel::factor, 1.9, 0, 0, 0}});
  return spec;
}

SignatureSpec signatures_from_json(std::istream& in) {
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("signature spec: invalid JSON: ") + e.what());
  }
  SignatureSpec spec;
  for (const auto& [name, js] : j.at("signatures").items()) {
    FaultSignature signature;
    signature.intensity = js.value("intensity", 1.0);
    signature.low_intensity_factor = js.value("low_intensity_factor", 0.7);
    for (const auto& jp : js.at("perturbations")) {
      Perturbation p;
      p.metric = jp.at("metric").get<std::string>();
      p.model = parse_model(jp.at("model").get<std::string>());
      p.magnitude = jp.at("magnitude").get<double>();
      p.probability = jp.value("probability", 0.0);
      p.period = jp.value("period", 0);
      p.duty = jp.value("duty", 0);
      signature.perturbations.push_back(std::move(p));
    }
    spec.signatures.emplace(parse_fault_class(name), std::move(signature));
  }
  return spec;
}

void signatures_to_json(const SignatureSpec& spec, std::ostream& out) {
  json signatures;
  for (const auto& [fault, signature] : spec.signatures) {
    json js;
    js["intensity"] = signature.intensity;
    js["low_intensity_factor"] = signature.low_intensity_factor;
    json perturbations = json::array();
    for (const auto& p : signature.perturbations) {
      json jp;
      jp["metric"] = p.metric;
      jp["model"] = std::string(model_name(p.model));
      jp["magnitude"] = p.magnitude;
      if (p.model == PerturbationModel::spike) jp["probability"] = p.probability;
      if (p.model == PerturbationModel::square) {
        jp["period"] = p.period;
        jp["duty"] = p.duty;
      }
      perturbations.push_back(std::move(jp));
    }
    js["perturbations"] = std::move(perturbations);
    signatures[std::string(to_string(fault))] = std::move(js);
  }
  json j;
  j["signatures"] = std::move(signatures);
  out << j.dump(1) << '\n';
}

SimulationResult simulate_trace(const std::vector<WorkloadTask>& tasks,
                                std::int64_t total_seconds, const NodeSpec& spec,
                                const SignatureSpec& signatures, Rng& rng) {
  spec.validate();
  signatures.validate(spec);
  if (total_seconds <= 0) {
    throw std::invalid_argument("simulate_trace: total_seconds must be positive");
  }

  std::vector<FaultEntry> fault_entries;
  std::vector<const WorkloadTask*> benchmarks;
  for (const auto& task : tasks) {
    if (task.start < 0 || task.duration <= 0 ||
        task.start + task.duration > total_seconds) {
      throw std::invalid_argument("simulate_trace: task '" + task.program +
                                  "' lies outside the trace span");
    }
    if (task.core && (*task.core < 0 || *task.core >= spec.core_count)) {
      throw std::invalid_argument("simulate_trace: task core out of range");
    }
    if (task.kind == TaskKind::fault) {
      FaultEntry entry;
      entry.fault = parse_fault_class(task.program);
      entry.core = task.core;
      entry.start = task.start;
      entry.end = task.start + task.duration;
      entry.low_intensity = task.low_intensity;
      fault_entries.push_back(entry);
    } else {
      benchmarks.push_back(&task);
    }
  }
  FaultSchedule schedule(std::move(fault_entries));  // validates non-overlap

  ingest::AllocationSchedule allocation;
  for (const WorkloadTask* task : benchmarks) {
    allocation.intervals.push_back({task->core, task->start, task->start + task->duration});
  }

  // Split the catalog per scope, preserving catalog order for the rng stream.
  std::vector<const MetricDef*> node_defs;
  std::vector<const MetricDef*> core_defs;
  for (const auto& def : spec.metrics) {
    (def.scope == MetricScope::node ? node_defs : core_defs).push_back(&def);
  }

  // Perturbation lookup per (class, catalog metric).
  const auto compile = [&](const std::vector<const MetricDef*>& defs) {
    std::vector<std::array<std::vector<const Perturbation*>, kFaultClassCount>> lookup(
        defs.size());
    for (std::size_t m = 0; m < defs.size(); ++m) {
      for (const auto& [fault, signature] : signatures.signatures) {
        for (const auto& p : signature.perturbations) {
          if (p.metric == defs[m]->name) {
            lookup[m][static_cast<std::size_t>(fault)].push_back(&p);
          }
        }
      }
    }
    return lookup;
  };
  const auto node_perts = compile(node_defs);
  const auto core_perts = compile(core_defs);

  const std::size_t n = static_cast<std::size_t>(total_seconds);
  std::vector<std::vector<double>> node_columns(node_defs.size(), std::vector<double>(n));
  std::vector<std::vector<std::vector<double>>> core_columns(
      static_cast<std::size_t>(spec.core_count),
      std::vector<std::vector<double>>(core_defs.size(), std::vector<double>(n)));

  std::vector<double> node_counter_acc(node_defs.size(), 0.0);
  std::vector<std::vector<double>> core_counter_acc(
      static_cast<std::size_t>(spec.core_count),
      std::vector<double>(core_defs.size(), 0.0));

  // Benchmark activity walker.
  std::vector<const WorkloadTask*> by_start = benchmarks;
  std::sort(by_start.begin(), by_start.end(),
            [](const WorkloadTask* a, const WorkloadTask* b) { return a->start < b->start; });
  std::vector<const WorkloadTask*> active;
  std::size_t next_bench = 0;

  const auto& entries = schedule.entries();
  std::size_t fault_idx = 0;

  std::vector<double> core_load(static_cast<std::size_t>(spec.core_count), 0.0);

  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t t = static_cast<std::int64_t>(i);

    while (next_bench < by_start.size() && by_start[next_bench]->start <= t) {
      active.push_back(by_start[next_bench++]);
    }
    std::erase_if(active, [t](const WorkloadTask* b) { return b->start + b->duration <= t; });
    double node_load = 0.0;
    std::fill(core_load.begin(), core_load.end(), 0.0);
    for (const WorkloadTask* b : active) {
      const double factor = benchmark_load_factor(b->program);
      node_load = std::max(node_load, factor);
      if (b->core) {
        core_load[static_cast<std::size_t>(*b->core)] =
            std::max(core_load[static_cast<std::size_t>(*b->core)], factor);
      } else {
        for (double& load : core_load) load = std::max(load, factor);
      }
    }

    while (fault_idx < entries.size() && entries[fault_idx].end <= t) ++fault_idx;
    const FaultEntry* fault =
        (fault_idx < entries.size() && entries[fault_idx].start <= t) ? &entries[fault_idx]
                                                                      : nullptr;
    const FaultSignature* signature = nullptr;
    double effect = 0.0;
    if (fault) {
      const auto it = signatures.signatures.find(fault->fault);
      if (it != signatures.signatures.end()) {
        signature = &it->second;
        effect = signature->intensity *
                 (fault->low_intensity ? signature->low_intensity_factor : 1.0);
      }
    }

    const auto perturb = [&](double value, const std::vector<const Perturbation*>& perts) {
      for (const Perturbation* p : perts) {
        switch (p->model) {
          case PerturbationModel::offset:
            value += p->magnitude * effect;
            break;
          case PerturbationModel::factor:
            value *= 1.0 + (p->magnitude - 1.0) * effect;
            break;
          case PerturbationModel::trend:
            value += p->magnitude * effect * static_cast<double>(t - fault->start);
            break;
          case PerturbationModel::spike:
            // Intensity scales the spike rate, not the amplitude: a weaker
            // fault fails less often but each event costs the same.
            if (rng.uniform() < p->probability * effect) value += p->magnitude;
            break;
          case PerturbationModel::square:
            if ((t - fault->start) % p->period < p->duty) value += p->magnitude * effect;
            break;
        }
      }
      return value;
    };

    for (std::size_t m = 0; m < node_defs.size(); ++m) {
      const MetricDef& def = *node_defs[m];
      double value = def.baseline + def.noise * rng.normal();
      if (node_load > 0.0) value += def.load_response * node_load;
      if (signature && !fault->core) {
        value = perturb(value, node_perts[m][static_cast<std::size_t>(fault->fault)]);
      }
      if (def.kind == MetricKind::counter) {
        node_counter_acc[m] += std::max(0.0, value);
        value = node_counter_acc[m];
      }
      node_columns[m][i] = value;
    }

    for (int c = 0; c < spec.core_count; ++c) {
      const bool fault_covers_core = signature && (!fault->core || *fault->core == c);
      for (std::size_t m = 0; m < core_defs.size(); ++m) {
        const MetricDef& def = *core_defs[m];
        double value = def.baseline + def.noise * rng.normal();
        const double load = core_load[static_cast<std::size_t>(c)];
        if (load > 0.0) value += def.load_response * load;
        if (fault_covers_core) {
          value = perturb(value, core_perts[m][static_cast<std::size_t>(fault->fault)]);
        }
        if (def.kind == MetricKind::counter) {
          auto& acc = core_counter_acc[static_cast<std::size_t>(c)][m];
          acc += std::max(0.0, value);
          value = acc;
        }
        core_columns[static_cast<std::size_t>(c)][m][i] = value;
      }
    }
  }

  // Assemble sorted columns for the trace.
  std::vector<std::size_t> node_order(node_defs.size());
  for (std::size_t m = 0; m < node_order.size(); ++m) node_order[m] = m;
  std::sort(node_order.begin(), node_order.end(), [&](std::size_t a, std::size_t b) {
    return node_defs[a]->name < node_defs[b]->name;
  });
  std::vector<std::size_t> core_order(core_defs.size());
  for (std::size_t m = 0; m < core_order.size(); ++m) core_order[m] = m;
  std::sort(core_order.begin(), core_order.end(), [&](std::size_t a, std::size_t b) {
    return core_defs[a]->name < core_defs[b]->name;
  });

  std::vector<std::string> node_names;
  std::vector<std::vector<double>> sorted_node_columns;
  for (std::size_t m : node_order) {
    node_names.push_back(node_defs[m]->name);
    sorted_node_columns.push_back(std::move(node_columns[m]));
  }
  std::vector<std::string> core_names;
  for (std::size_t m : core_order) core_names.push_back(core_defs[m]->name);
  std::vector<int> core_ids(static_cast<std::size_t>(spec.core_count));
  for (int c = 0; c < spec.core_count; ++c) core_ids[static_cast<std::size_t>(c)] = c;
  std::vector<std::vector<std::vector<double>>> sorted_core_columns(core_ids.size());
  for (std::size_t c = 0; c < core_ids.size(); ++c) {
    for (std::size_t m : core_order) {
      sorted_core_columns[c].push_back(std::move(core_columns[c][m]));
    }
  }

  SimulationResult result;
  result.trace = Trace::build(0, n, std::move(node_names), std::move(sorted_node_columns),
                              std::move(core_ids), std::move(core_names),
                              std::move(sorted_core_columns));
  result.schedule = std::move(schedule);
  result.allocation = std::move(allocation);
  return result;
}

}  // namespace hpcfd::workload
