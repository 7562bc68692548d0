#include "partout/bench/driver.hpp"

#include <algorithm>
#include <future>
#include <mutex>
#include <ostream>
#include <thread>

#include <fmt/format.h>

#include "partout/error.hpp"

namespace partout::bench {

std::vector<BenchRow> run_bench(const std::vector<sparql::Query>& queries, const BenchConfig& cfg,
                                const QueryRunner& runner) {
  if (cfg.concurrency == 0) throw Error("concurrency must be at least 1");
  if (cfg.interval.count() <= 0) throw Error("interval must be positive");
  using Clock = std::chrono::steady_clock;
  std::vector<BenchRow> rows;
  std::mutex rows_mutex;
  std::vector<std::future<Measurement>> abandoned;
  std::vector<std::size_t> session_of;
  auto start = Clock::now();
  for (std::uint32_t run = 0; run < cfg.repetitions; ++run) {
    std::this_thread::sleep_until(start + run * cfg.interval);
    std::vector<std::thread> sessions;
    for (std::uint32_t s = 0; s < cfg.concurrency; ++s) {
      sessions.emplace_back([&, run, s] {
        for (std::size_t id = 0; id < queries.size(); ++id) {
          BenchRow row{id, run, cfg.concurrency, Outcome::Ok, 0, {}};
          auto begin = Clock::now();
          auto pending = std::async(std::launch::async, runner, std::cref(queries[id]));
          if (pending.wait_for(cfg.timeout) == std::future_status::timeout) {
            row.outcome = Outcome::Timeout;
            std::lock_guard lock(rows_mutex);
            abandoned.push_back(std::move(pending));
          } else {
            try {
              row.measurement = pending.get();
            } catch (const std::exception&) {
              row.outcome = Outcome::Failed;
            }
          }
          row.response_ms = std::chrono::duration<double, std::milli>(Clock::now() - begin).count();
          std::lock_guard lock(rows_mutex);
          rows.push_back(row);
          session_of.push_back(s);
        }
      });
    }
    for (auto& t : sessions) t.join();
  }
  for (auto& f : abandoned) f.wait();
  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(rows[a].run, rows[a].query_id, session_of[a]) <
           std::tie(rows[b].run, rows[b].query_id, session_of[b]);
  });
  std::vector<BenchRow> sorted;
  for (auto i : order) sorted.push_back(rows[i]);
  return sorted;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "query_id,run,concurrency,response_ms,rows,remote_pages\n";
  for (const auto& r : rows) {
    switch (r.outcome) {
      case Outcome::Ok:
        out << fmt::format("{},{},{},{:.3f},{},{}\n", r.query_id, r.run, r.concurrency, r.response_ms,
                           r.measurement.rows, r.measurement.remote_pages);
        break;
      case Outcome::Timeout:
        out << fmt::format("{},{},{},timeout,,\n", r.query_id, r.run, r.concurrency);
        break;
      case Outcome::Failed:
        out << fmt::format("{},{},{},error,,\n", r.query_id, r.run, r.concurrency);
        break;
    }
  }
}

}  // namespace partout::bench
