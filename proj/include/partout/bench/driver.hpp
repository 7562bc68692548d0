#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "partout/sparql/query.hpp"

namespace partout::bench {

struct BenchConfig {
  std::uint32_t concurrency = 1;
  std::chrono::milliseconds interval{1000};
  std::uint32_t repetitions = 1;
  std::chrono::milliseconds timeout{60000};
};

/// What one query execution reports back.
struct Measurement {
  std::uint64_t rows = 0;
  std::uint64_t remote_pages = 0;
};

enum class Outcome : std::uint8_t { Ok, Timeout, Failed };

struct BenchRow {
  std::size_t query_id = 0;
  std::uint32_t run = 0;
  std::uint32_t concurrency = 0;
  Outcome outcome = Outcome::Ok;
  double response_ms = 0;
  Measurement measurement;
};

using QueryRunner = std::function<Measurement(const sparql::Query&)>;

/// Starts run r at r * interval (or when run r-1 ends, if later). Each run
/// opens `concurrency` client sessions that issue every query in order.
/// Rows are ordered by run, query id, session.
std::vector<BenchRow> run_bench(const std::vector<sparql::Query>& queries, const BenchConfig& cfg,
                                const QueryRunner& runner);

/// `query_id,run,concurrency,response_ms,rows,remote_pages`; timeouts and
/// failures put `timeout` / `error` in response_ms and leave the counters empty.
void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

}  // namespace partout::bench
