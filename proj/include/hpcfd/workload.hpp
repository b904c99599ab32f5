#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hpcfd/fault.hpp"
#include "hpcfd/ingest.hpp"
#include "hpcfd/rng.hpp"
#include "hpcfd/trace.hpp"

namespace hpcfd::workload {

struct JohnsonSu {
  double gamma = 0;
  double delta = 1;   // > 0
  double xi = 0;
  double lambda = 1;  // > 0
};

struct ExponentiatedWeibull {
  double alpha = 1;   // > 0
  double k = 1;       // > 0
  double lambda = 1;  // > 0
};

struct NormalDist {
  double mu = 0;
  double sigma = 1;  // > 0
};

using DistributionSpec = std::variant<JohnsonSu, ExponentiatedWeibull, NormalDist>;

void validate(const DistributionSpec& dist);

/// Johnson SU via xi + lambda*sinh((z - gamma)/delta) with z standard normal;
/// exponentiated Weibull via inverse CDF; normal via Box-Muller. Deterministic
/// per rng state.
double sample(const DistributionSpec& dist, Rng& rng);

/// Analytic exponentiated Weibull CDF F(x) = (1 - exp(-(x/lambda)^k))^alpha.
double exponentiated_weibull_cdf(const ExponentiatedWeibull& dist, double x);

/// Textual form `johnsonsu(g,d,xi,l)`, `expweibull(a,k,l)` or `normal(mu,s)`.
DistributionSpec parse_distribution(const std::string& text);
std::string to_string(const DistributionSpec& dist);

enum class TaskKind { benchmark, fault };

/// One scheduled task; fault tasks never overlap each other in time.
struct WorkloadTask {
  TaskKind kind = TaskKind::benchmark;
  std::string program;
  std::optional<int> core;  // empty = node scope
  std::int64_t start = 0;
  std::int64_t duration = 0;
  bool low_intensity = false;
};

inline constexpr std::array<const char*, 4> kBenchmarkPrograms = {"dgemm", "hpcc",
                                                                  "stream", "hpl"};

struct WorkloadParams {
  std::int64_t total_seconds = 7200;
  int core_count = 4;
  DistributionSpec fault_duration = JohnsonSu{0.0, 1.5, 180.0, 60.0};
  DistributionSpec fault_interarrival = ExponentiatedWeibull{1.5, 2.0, 340.0};
  DistributionSpec bench_duration = NormalDist{150.0, 10.0};
  DistributionSpec bench_interarrival = NormalDist{200.0, 12.0};
  std::vector<FaultClass> fault_classes = all_fault_programs();

  void validate() const;
};

/// Draws fault arrivals (first start at 0, spaced by inter-arrival samples)
/// and durations clipped so faults never overlap or exceed the horizon, plus
/// benchmark tasks sized so the default distributions keep roughly 75% of the
/// trace busy. Programs, cores (for core-scoped faults) and the low-intensity
/// flag are drawn uniformly.
std::vector<WorkloadTask> generate_workload(const WorkloadParams& params, Rng& rng);

void write_workload_csv(const std::vector<WorkloadTask>& tasks, std::ostream& out);
std::vector<WorkloadTask> read_workload_csv(std::istream& in);

// --- node model -------------------------------------------------------------

enum class MetricScope { node, core };
enum class MetricKind { gauge, counter };

/// Baseline behavior of one metric: value = baseline + noise*N(0,1) plus
/// load_response scaled by the active benchmark's load factor; counters
/// accumulate the (clamped non-negative) per-second value.
struct MetricDef {
  std::string name;
  MetricScope scope = MetricScope::node;
  MetricKind kind = MetricKind::gauge;
  double baseline = 0;
  double noise = 0;
  double load_response = 0;
};

struct NodeSpec {
  int core_count = 4;
  std::vector<MetricDef> metrics;

  std::vector<std::string> counter_names() const;
  void validate() const;
};

/// Catalog with the signature-bearing metrics first (13 node, 6 core) and
/// noise-only/load-only filler metrics up to the requested counts.
NodeSpec default_node_spec(int core_count, int node_metric_count = 13,
                           int core_metric_count = 6);

NodeSpec node_spec_from_json(std::istream& in);
void node_spec_to_json(const NodeSpec& spec, std::ostream& out);

// --- fault signatures ---------------------------------------------------------

enum class PerturbationModel { offset, factor, trend, spike, square };

/// How one metric is disturbed while a fault is active. `magnitude` is an
/// additive offset (offset/trend-per-second/spike/square) or the
/// multiplicative factor. Spikes fire each second with `probability`; square
/// waves are on for `duty` of every `period` seconds.
struct Perturbation {
  std::string metric;
  PerturbationModel model = PerturbationModel::offset;
  double magnitude = 0;
  double probability = 0;
  int period = 0;
  int duty = 0;
};

struct FaultSignature {
  std::vector<Perturbation> perturbations;
  double intensity = 1.0;
  double low_intensity_factor = 0.7;
};

struct SignatureSpec {
  std::map<FaultClass, FaultSignature> signatures;

  void validate(const NodeSpec& spec) const;
};

SignatureSpec default_signatures();
SignatureSpec signatures_from_json(std::istream& in);
void signatures_to_json(const SignatureSpec& spec, std::ostream& out);

// --- simulator ----------------------------------------------------------------

struct SimulationResult {
  Trace trace;
  FaultSchedule schedule;
  ingest::AllocationSchedule allocation;
};

/// Synthesizes a per-second trace for the workload: stationary noise plus
/// benchmark load shifts, with each fault task applying its signature to its
/// scope. The returned schedule and allocation mirror the workload exactly;
/// everything is deterministic per seed and seeds change only the noise, never
/// the timeline.
SimulationResult simulate_trace(const std::vector<WorkloadTask>& tasks,
                                std::int64_t total_seconds, const NodeSpec& spec,
                                const SignatureSpec& signatures, Rng& rng);

}  // namespace hpcfd::workload
