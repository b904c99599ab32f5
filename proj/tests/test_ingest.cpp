#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "hpcfd/ingest.hpp"

using namespace hpcfd;
using testutil::make_trace;

namespace {

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("parse_trace transcribes per-core rows") {
  std::istringstream in("time,core,m1\n0,0,1.5\n1,0,2.5\n");
  const auto samples = ingest::parse_trace(in);
  REQUIRE(samples.size() == 2);
  CHECK(samples[0].node_values.empty());
  CHECK(samples[0].core_values.at({0, "m1"}) == 1.5);
  CHECK(samples[1].core_values.at({0, "m1"}) == 2.5);
}

TEST_CASE("parse_trace merges cores sharing a timestamp") {
  std::istringstream in("time,core,m1\n0,0,1\n0,1,2\n1,0,3\n1,1,4\n");
  const auto samples = ingest::parse_trace(in);
  REQUIRE(samples.size() == 2);
  CHECK(samples[0].core_values.at({0, "m1"}) == 1);
  CHECK(samples[0].core_values.at({1, "m1"}) == 2);
}

TEST_CASE("parse_trace: empty body yields empty sequence") {
  std::istringstream in("time,m1\n");
  CHECK(ingest::parse_trace(in).empty());
}

TEST_CASE("parse_trace error paths name the line") {
  SUBCASE("duplicate timestamp, same core") {
    std::istringstream in("time,core,m1\n0,0,1\n0,0,2\n");
    const auto message = error_of([&] { ingest::parse_trace(in); });
    CHECK(message.find("duplicate timestamp") != std::string::npos);
    CHECK(message.find("line 3") != std::string::npos);
  }
  SUBCASE("duplicate timestamp, node file") {
    std::istringstream in("time,m1\n5,1\n5,2\n");
    CHECK(error_of([&] { ingest::parse_trace(in); }).find("duplicate") !=
          std::string::npos);
  }
  SUBCASE("non-monotonic timestamp") {
    std::istringstream in("time,m1\n1,1\n0,2\n");
    CHECK(error_of([&] { ingest::parse_trace(in); }).find("non-monotonic") !=
          std::string::npos);
  }
  SUBCASE("unparseable numeric") {
    std::istringstream in("time,m1\n0,abc\n");
    const auto message = error_of([&] { ingest::parse_trace(in); });
    CHECK(message.find("unparseable") != std::string::npos);
    CHECK(message.find("line 2") != std::string::npos);
  }
  SUBCASE("missing value is an error, not imputed") {
    std::istringstream in("time,m1,m2\n0,1,\n");
    CHECK(!error_of([&] { ingest::parse_trace(in); }).empty());
  }
  SUBCASE("short row") {
    std::istringstream in("time,m1,m2\n0,1\n");
    CHECK(error_of([&] { ingest::parse_trace(in); }).find("expected 3 fields") !=
          std::string::npos);
  }
  SUBCASE("non-finite value") {
    std::istringstream in("time,m1\n0,inf\n");
    CHECK(!error_of([&] { ingest::parse_trace(in); }).empty());
  }
  SUBCASE("missing time column") {
    std::istringstream in("m1,m2\n1,2\n");
    CHECK(!error_of([&] { ingest::parse_trace(in); }).empty());
  }
}

TEST_CASE("trace round-trips through CSV value for value") {
  const Trace trace = make_trace({{"m1", {1.5, 2.25, -3.125}}, {"m2", {0.1, 0.2, 0.3}}},
                                 {0, 2}, {{"c1", {{1, 2, 3}, {4, 5, 6}}}}, 7);
  std::ostringstream node_csv, core_csv;
  ingest::write_node_csv(trace, node_csv);
  ingest::write_core_csv(trace, core_csv);

  std::istringstream node_in(node_csv.str()), core_in(core_csv.str());
  const Trace node_part = Trace::from_samples(ingest::parse_trace(node_in));
  const Trace core_part = Trace::from_samples(ingest::parse_trace(core_in));
  const Trace merged = Trace::merge(node_part, core_part);

  REQUIRE(merged.length() == trace.length());
  REQUIRE(merged.node_metric_names() == trace.node_metric_names());
  REQUIRE(merged.core_metric_names() == trace.core_metric_names());
  REQUIRE(merged.core_ids() == trace.core_ids());
  CHECK(merged.start_time() == 7);
  for (std::size_t m = 0; m < trace.node_metric_names().size(); ++m) {
    for (std::size_t i = 0; i < trace.length(); ++i) {
      CHECK(merged.node_column(m)[i] == trace.node_column(m)[i]);
    }
  }
  for (std::size_t c = 0; c < trace.core_ids().size(); ++c) {
    for (std::size_t i = 0; i < trace.length(); ++i) {
      CHECK(merged.core_column(c, 0)[i] == trace.core_column(c, 0)[i]);
    }
  }
}

TEST_CASE("from_samples rejects gaps and inconsistent metric sets") {
  MetricSample a, b;
  a.timestamp = 0;
  a.node_values["m"] = 1;
  b.timestamp = 2;  // gap
  b.node_values["m"] = 2;
  CHECK_THROWS(Trace::from_samples({a, b}));

  b.timestamp = 1;
  b.node_values["extra"] = 3;
  CHECK_THROWS(Trace::from_samples({a, b}));
}

TEST_CASE("remove_constant_metrics drops exactly the constants") {
  const Trace trace = make_trace({{"varying", {1, 2, 3}}, {"const7", {7, 7, 7}}}, {0},
                                 {{"core_const", {{2, 2, 2}}}, {"core_var", {{1, 1, 9}}}});
  const auto [reduced, removed] = ingest::remove_constant_metrics(trace);
  CHECK(removed == std::set<std::string>{"const7", "core_const"});
  CHECK(reduced.node_metric_names() == std::vector<std::string>{"varying"});
  CHECK(reduced.core_metric_names() == std::vector<std::string>{"core_var"});

  SUBCASE("idempotent") {
    const auto [again, removed_again] = ingest::remove_constant_metrics(reduced);
    CHECK(removed_again.empty());
    CHECK(again.node_metric_names() == reduced.node_metric_names());
  }
}

TEST_CASE("remove_constant_metrics: core metric constant only across all cores") {
  // Same value within each core but different across cores: not constant.
  const Trace trace = make_trace({}, {0, 1}, {{"m", {{5, 5}, {6, 6}}}});
  const auto [reduced, removed] = ingest::remove_constant_metrics(trace);
  CHECK(removed.empty());
  CHECK(reduced.core_metric_names() == std::vector<std::string>{"m"});
}

TEST_CASE("remove_constant_metrics: single-sample trace removes everything") {
  const Trace trace = make_trace({{"a", {1}}, {"b", {2}}});
  const auto [reduced, removed] = ingest::remove_constant_metrics(trace);
  CHECK(removed.size() == 2);
  CHECK(reduced.node_metric_names().empty());
}

TEST_CASE("remove_constant_metrics: all varying is identity") {
  const Trace trace = make_trace({{"a", {1, 2}}, {"b", {2, 1}}});
  const auto [reduced, removed] = ingest::remove_constant_metrics(trace);
  CHECK(removed.empty());
  CHECK(reduced.node_metric_names().size() == 2);
}

TEST_CASE("differentiate_counters") {
  ingest::PostProcessConfig config;
  config.counter_metrics = {"ctr"};

  SUBCASE("increments with zero first sample") {
    const Trace trace = make_trace({{"ctr", {10, 12, 15}}});
    const Trace out = ingest::differentiate_counters(trace, config);
    CHECK(out.node_column(0)[0] == 0);
    CHECK(out.node_column(0)[1] == 2);
    CHECK(out.node_column(0)[2] == 3);
  }
  SUBCASE("constant counter goes to zero") {
    const Trace trace = make_trace({{"ctr", {5, 5, 5}}});
    const Trace out = ingest::differentiate_counters(trace, config);
    for (double v : out.node_column(0)) CHECK(v == 0);
  }
  SUBCASE("counter reset clamps to zero") {
    // Reset-aware oracle: diff = max(0, v(t) - v(t-1)), 0 at t=0.
    const std::vector<double> raw = {100, 3};
    std::vector<double> expected(raw.size(), 0.0);
    for (std::size_t i = 1; i < raw.size(); ++i) {
      expected[i] = std::max(0.0, raw[i] - raw[i - 1]);
    }
    CHECK(expected == std::vector<double>{0, 0});

    const Trace trace = make_trace({{"ctr", {100, 3}}});
    const Trace out = ingest::differentiate_counters(trace, config);
    CHECK(out.node_column(0)[0] == expected[0]);
    CHECK(out.node_column(0)[1] == expected[1]);
  }
  SUBCASE("unknown counter is an error") {
    const Trace trace = make_trace({{"m", {1, 2}}});
    CHECK_THROWS(ingest::differentiate_counters(trace, config));
  }
  SUBCASE("applies per core") {
    const Trace trace = make_trace({}, {0, 1}, {{"ctr", {{0, 4, 8}, {1, 1, 2}}}});
    const Trace out = ingest::differentiate_counters(trace, config);
    CHECK(out.core_column(0, 0)[1] == 4);
    CHECK(out.core_column(1, 0)[2] == 1);
  }
}

TEST_CASE("double differentiation of a linear counter is zero from t=2") {
  ingest::PostProcessConfig config;
  config.counter_metrics = {"ctr"};
  const Trace trace = make_trace({{"ctr", {10, 17, 24, 31, 38}}});
  const Trace once = ingest::differentiate_counters(trace, config);
  const Trace twice = ingest::differentiate_counters(once, config);
  CHECK(twice.node_column(0)[1] == 7);  // first diff appears once at t=1
  for (std::size_t i = 2; i < twice.length(); ++i) {
    CHECK(twice.node_column(0)[i] == 0);
  }
}

TEST_CASE("append_allocated_metric") {
  // Eight samples spanning t = 10..17.
  const Trace trace = make_trace({{"m", {1, 2, 3, 4, 5, 6, 7, 8}}}, {0, 3},
                                 {{"c", {{1, 1, 1, 1, 1, 1, 1, 1},
                                         {2, 2, 2, 2, 2, 2, 2, 2}}}},
                                 10);

  SUBCASE("interval membership") {
    ingest::AllocationSchedule schedule;
    schedule.intervals.push_back({std::nullopt, 10, 20});
    const Trace out = ingest::append_allocated_metric(trace, schedule);
    const auto idx = out.node_metric_index("allocated");
    REQUIRE(idx);
    CHECK(out.node_column(*idx)[5] == 1.0);  // t = 15
  }
  SUBCASE("empty schedule is identically zero") {
    const Trace out = ingest::append_allocated_metric(trace, {});
    const auto idx = out.node_metric_index("allocated");
    REQUIRE(idx);
    for (double v : out.node_column(*idx)) CHECK(v == 0.0);
    const auto core_idx = out.core_metric_index("allocated");
    REQUIRE(core_idx);
    for (double v : out.core_column(0, *core_idx)) CHECK(v == 0.0);
  }
  SUBCASE("core-scoped interval covers only its core") {
    ingest::AllocationSchedule schedule;
    schedule.intervals.push_back({3, 10, 15});
    const Trace out = ingest::append_allocated_metric(trace, schedule);
    const auto idx = out.core_metric_index("allocated");
    REQUIRE(idx);
    const auto core3 = out.core_index(3);
    const auto core0 = out.core_index(0);
    CHECK(out.core_column(*core3, *idx)[2] == 1.0);  // t = 12
    CHECK(out.core_column(*core0, *idx)[2] == 0.0);
    // The node-level metric reflects that something is allocated.
    CHECK(out.node_column(*out.node_metric_index("allocated"))[2] == 1.0);
  }
  SUBCASE("existing allocated metric is an error") {
    const Trace bad = make_trace({{"allocated", {0, 0}}});
    CHECK_THROWS(ingest::append_allocated_metric(bad, {}));
  }
}

TEST_CASE("append_first_derivatives") {
  SUBCASE("finite differences with zero first sample") {
    const Trace trace = make_trace({{"m", {1, 4, 4}}});
    const Trace out = ingest::append_first_derivatives(trace);
    const auto idx = out.node_metric_index("m.deriv");
    REQUIRE(idx);
    CHECK(out.node_column(*idx)[0] == 0);
    CHECK(out.node_column(*idx)[1] == 3);
    CHECK(out.node_column(*idx)[2] == 0);
    CHECK(out.node_metric_index("m"));  // original retained
  }
  SUBCASE("applying twice is an error") {
    const Trace trace = make_trace({{"m", {1, 2}}});
    const Trace once = ingest::append_first_derivatives(trace);
    CHECK_THROWS(ingest::append_first_derivatives(once));
  }
  SUBCASE("allocated gets a derivative too") {
    ingest::AllocationSchedule schedule;
    schedule.intervals.push_back({std::nullopt, 1, 3});
    const Trace trace = make_trace({{"m", {5, 6, 7}}});
    const Trace out =
        ingest::append_first_derivatives(ingest::append_allocated_metric(trace, schedule));
    const auto idx = out.node_metric_index("allocated.deriv");
    REQUIRE(idx);
    CHECK(out.node_column(*idx)[0] == 0);
    CHECK(out.node_column(*idx)[1] == 1);
    CHECK(out.node_column(*idx)[2] == 0);
  }
}

TEST_CASE("post_process metric count is 2 x (surviving + allocated) per scope") {
  const Trace trace = make_trace(
      {{"a", {1, 2, 3}}, {"b", {3, 2, 1}}, {"const", {4, 4, 4}}, {"ctr", {0, 5, 9}}},
      {0, 1}, {{"x", {{1, 2, 3}, {3, 2, 1}}}, {"y_const", {{2, 2, 2}, {2, 2, 2}}}});
  ingest::PostProcessConfig config;
  config.counter_metrics = {"ctr"};
  const auto [out, removed] = ingest::post_process(trace, config, {});

  CHECK(removed == std::set<std::string>{"const", "y_const"});
  // Node: {a, b, ctr} surviving + allocated, each with a derivative.
  CHECK(out.node_metric_names().size() == 2 * (3 + 1));
  // Core: {x} surviving + allocated, each with a derivative.
  CHECK(out.core_metric_names().size() == 2 * (1 + 1));
}

TEST_CASE("post_process honors drop_metrics") {
  const Trace trace = make_trace({{"keep", {1, 2}}, {"drop_me", {5, 9}}});
  ingest::PostProcessConfig config;
  config.drop_metrics = {"drop_me"};
  const auto [out, removed] = ingest::post_process(trace, config, {});
  CHECK(!out.node_metric_index("drop_me"));
  CHECK(!out.node_metric_index("drop_me.deriv"));
  CHECK(out.node_metric_index("keep"));
}

TEST_CASE("post_process config rejects counter/drop overlap") {
  ingest::PostProcessConfig config;
  config.counter_metrics = {"m"};
  config.drop_metrics = {"m"};
  CHECK_THROWS(config.validate());
}

TEST_CASE("allocation schedule CSV round-trip") {
  ingest::AllocationSchedule schedule;
  schedule.intervals.push_back({std::nullopt, 0, 10});
  schedule.intervals.push_back({2, 5, 12});
  std::ostringstream out;
  schedule.to_csv(out);
  std::istringstream in(out.str());
  const auto parsed = ingest::AllocationSchedule::from_csv(in);
  REQUIRE(parsed.intervals.size() == 2);
  CHECK(!parsed.intervals[0].core);
  CHECK(parsed.intervals[1].core == 2);
  CHECK(parsed.intervals[1].start == 5);
}
