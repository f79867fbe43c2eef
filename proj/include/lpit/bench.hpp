#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "lpit/problem.hpp"
#include "lpit/solvers.hpp"

namespace lpit {

inline constexpr std::string_view kVersion = "lpit 1.0.0";

inline constexpr std::string_view kTrialsHeader =
    "algorithm,p,m,n,r,trial,seed,re,success,iterations,wall_time_s,termination";
inline constexpr std::string_view kAggregateHeader = "algorithm,p,r,success_rate,mean_re,mean_iters";

struct SweepConfig {
  std::size_t m = 256;
  std::size_t n = 1024;
  std::vector<std::size_t> r_values;
  std::vector<double> p_values{0.7};  // used by IT cells only
  std::vector<Algorithm> algorithms{Algorithm::IT};
  std::size_t trials = 20;
  double success_threshold = 1e-3;
  std::uint64_t master_seed = 1;
  SignalDistribution signal = SignalDistribution::Gaussian;
  SolverConfig solver;          // template; algorithm, p and sparsity_r are set per cell
  std::size_t jobs = 0;         // 0 = hardware concurrency
  bool record_wall_time = true;  // false writes 0 so trial files are byte-stable

  void validate() const {
    using detail::require;
    require(m > 0 && m < n, "SweepConfig: need 0 < m < n");
    require(trials >= 1, "SweepConfig: trials must be >= 1");
    require(!r_values.empty(), "SweepConfig: r list is empty");
    for (std::size_t r : r_values)
      require(r >= 1 && r < m, "SweepConfig: each r must satisfy 1 <= r < m (got r=" + std::to_string(r) +
                                   ", m=" + std::to_string(m) + ")");
    require(!algorithms.empty(), "SweepConfig: algorithm list is empty");
    const bool has_it = std::find(algorithms.begin(), algorithms.end(), Algorithm::IT) != algorithms.end();
    if (has_it) {
      require(!p_values.empty(), "SweepConfig: p list is empty");
      for (double p : p_values) require(p > 0.0 && p < 1.0, "SweepConfig: each p must lie in (0,1)");
    }
    require(success_threshold > 0.0, "SweepConfig: success_threshold must be positive");
    SolverConfig probe = solver;
    probe.sparsity_r = 1;
    probe.validate(n);
  }
};

struct TrialRecord {
  Algorithm algorithm = Algorithm::IT;
  std::optional<double> p;
  std::size_t m = 0, n = 0, r = 0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  double relative_error = 0.0;
  bool success = false;
  std::size_t iterations = 0;
  double wall_time = 0.0;
  std::string termination;
};

struct CellSummary {
  Algorithm algorithm = Algorithm::IT;
  std::optional<double> p;
  std::size_t r = 0;
  double success_rate = 0.0;
  double mean_re = 0.0;
  double mean_iters = 0.0;
};

struct BenchmarkReport {
  SweepConfig config;
  std::vector<TrialRecord> trials;
  std::vector<CellSummary> cells;
  std::vector<std::pair<double, double>> area_by_p;  // sweep_p only
  std::optional<double> best_p;
};

namespace detail {

struct CellKey {
  Algorithm algorithm;
  std::optional<double> p;
  std::size_t r;
};

inline std::vector<CellKey> enumerate_cells(const SweepConfig& cfg) {
  std::vector<CellKey> cells;
  for (Algorithm a : cfg.algorithms) {
    if (a == Algorithm::IT) {
      for (double p : cfg.p_values)
        for (std::size_t r : cfg.r_values) cells.push_back({a, p, r});
    } else {
      for (std::size_t r : cfg.r_values) cells.push_back({a, std::nullopt, r});
    }
  }
  return cells;
}

inline TrialRecord run_trial(const SweepConfig& cfg, const CellKey& cell, std::size_t trial) {
  TrialRecord rec;
  rec.algorithm = cell.algorithm;
  rec.p = cell.p;
  rec.m = cfg.m;
  rec.n = cfg.n;
  rec.r = cell.r;
  rec.trial = trial;
  // Seed depends on (r, trial) only, so every algorithm sees the same instances.
  rec.seed = derive_seed(cfg.master_seed, {cell.r, trial});

  const auto t0 = std::chrono::steady_clock::now();
  try {
    const ProblemInstance inst = generate_instance(cfg.m, cfg.n, cell.r, rec.seed, cfg.signal);
    SolverConfig sc = cfg.solver;
    sc.algorithm = cell.algorithm;
    if (cell.p) sc.p = *cell.p;
    sc.sparsity_r = cell.r;
    sc.record_trace = false;
    const SolveResult res = solve(inst.a, inst.b, sc);
    rec.iterations = res.iterations;
    rec.termination = std::string(to_string(res.termination));
    if (res.termination == Termination::DegenerateInput) {
      rec.relative_error = 1.0;
      rec.success = false;
    } else {
      rec.relative_error = relative_error(res.solution, inst.x0);
      rec.success = rec.relative_error <= cfg.success_threshold;
    }
  } catch (const std::exception& e) {
    rec.relative_error = 1.0;
    rec.success = false;
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), ',', ';');
    rec.termination = "error: " + msg;
  }
  if (!std::isfinite(rec.relative_error)) {
    rec.relative_error = 1.0;
    rec.success = false;
  }
  if (cfg.record_wall_time)
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

inline bool same_cell(const TrialRecord& t, const CellSummary& c) {
  return t.algorithm == c.algorithm && t.r == c.r && t.p == c.p;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_p(const std::optional<double>& p) { return p ? format_double(*p) : std::string(); }

inline std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace detail

// Per-cell means in order of first appearance. Sums run in trial-row order,
// so re-aggregating a reloaded trials file gives the same bits.
inline std::vector<CellSummary> aggregate(const std::vector<TrialRecord>& trials) {
  std::vector<CellSummary> cells;
  std::vector<std::size_t> counts;
  for (const auto& t : trials) {
    auto it = std::find_if(cells.begin(), cells.end(), [&](const CellSummary& c) { return detail::same_cell(t, c); });
    if (it == cells.end()) {
      cells.push_back({t.algorithm, t.p, t.r, 0.0, 0.0, 0.0});
      counts.push_back(0);
      it = cells.end() - 1;
    }
    const auto k = static_cast<std::size_t>(it - cells.begin());
    it->success_rate += t.success ? 1.0 : 0.0;
    it->mean_re += t.relative_error;
    it->mean_iters += static_cast<double>(t.iterations);
    ++counts[k];
  }
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const auto c = static_cast<double>(counts[k]);
    cells[k].success_rate /= c;
    cells[k].mean_re /= c;
    cells[k].mean_iters /= c;
  }
  return cells;
}

// Runs every (cell, trial) pair on a worker pool. Results land in a slot
// fixed by task index, so output does not depend on the number of workers.
inline BenchmarkReport run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const auto cells = detail::enumerate_cells(cfg);
  const std::size_t total = cells.size() * cfg.trials;

  BenchmarkReport report;
  report.config = cfg;
  report.trials.resize(total);

  std::size_t jobs = cfg.jobs != 0 ? cfg.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, total);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t task = next.fetch_add(1); task < total; task = next.fetch_add(1))
      report.trials[task] = detail::run_trial(cfg, cells[task / cfg.trials], task % cfg.trials);
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(jobs);
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  report.cells = aggregate(report.trials);
  return report;
}

// Area under a success-rate curve over the r grid (trapezoid rule).
inline double success_area(const std::vector<CellSummary>& curve) {
  if (curve.size() == 1) return curve.front().success_rate;
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i)
    area += 0.5 * (curve[i].success_rate + curve[i - 1].success_rate) *
            static_cast<double>(curve[i].r - curve[i - 1].r);
  return area;
}

// IT-only sweep over the p list; picks the p with the largest area under its
// success curve (first one wins ties).
inline BenchmarkReport sweep_p(SweepConfig cfg) {
  detail::require(!cfg.p_values.empty(), "sweep_p: p list is empty");
  detail::require(cfg.algorithms.size() == 1 && cfg.algorithms.front() == Algorithm::IT,
                  "sweep_p: algorithms must be exactly {it}");
  std::sort(cfg.r_values.begin(), cfg.r_values.end());
  BenchmarkReport report = run_sweep(cfg);
  double best_area = -1.0;
  for (double p : cfg.p_values) {
    std::vector<CellSummary> curve;
    for (const auto& c : report.cells)
      if (c.p && *c.p == p) curve.push_back(c);
    const double area = success_area(curve);
    report.area_by_p.emplace_back(p, area);
    if (area > best_area) {
      best_area = area;
      report.best_p = p;
    }
  }
  return report;
}

inline std::string format_trials_csv(const std::vector<TrialRecord>& trials) {
  using detail::format_double;
  std::string out(kTrialsHeader);
  out += '\n';
  for (const auto& t : trials) {
    out += to_string(t.algorithm);
    out += ',' + detail::format_p(t.p);
    out += ',' + std::to_string(t.m) + ',' + std::to_string(t.n) + ',' + std::to_string(t.r);
    out += ',' + std::to_string(t.trial) + ',' + std::to_string(t.seed);
    out += ',' + format_double(t.relative_error);
    out += t.success ? ",1" : ",0";
    out += ',' + std::to_string(t.iterations);
    out += ',' + format_double(t.wall_time);
    out += ',' + t.termination;
    out += '\n';
  }
  return out;
}

inline std::string format_aggregate_csv(const std::vector<CellSummary>& cells) {
  using detail::format_double;
  std::string out(kAggregateHeader);
  out += '\n';
  for (const auto& c : cells) {
    out += to_string(c.algorithm);
    out += ',' + detail::format_p(c.p);
    out += ',' + std::to_string(c.r);
    out += ',' + format_double(c.success_rate);
    out += ',' + format_double(c.mean_re);
    out += ',' + format_double(c.mean_iters);
    out += '\n';
  }
  return out;
}

inline std::vector<TrialRecord> parse_trials_csv(std::string_view text) {
  std::vector<TrialRecord> out;
  std::istringstream in{std::string(text)};
  std::string line;
  detail::require(std::getline(in, line) && line == kTrialsHeader, "trials csv: unexpected header");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (int k = 0; k < 11; ++k) {
      const auto comma = line.find(',', start);
      detail::require(comma != std::string::npos, "trials csv: too few fields on line " + std::to_string(lineno));
      f.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    f.push_back(line.substr(start));
    TrialRecord t;
    t.algorithm = parse_algorithm(f[0]);
    if (!f[1].empty()) t.p = std::stod(f[1]);
    t.m = std::stoull(f[2]);
    t.n = std::stoull(f[3]);
    t.r = std::stoull(f[4]);
    t.trial = std::stoull(f[5]);
    t.seed = std::stoull(f[6]);
    t.relative_error = std::stod(f[7]);
    t.success = f[8] == "1";
    t.iterations = std::stoull(f[9]);
    t.wall_time = std::stod(f[10]);
    t.termination = f[11];
    out.push_back(std::move(t));
  }
  return out;
}

inline nlohmann::json metadata_json(const BenchmarkReport& report) {
  const SweepConfig& c = report.config;
  nlohmann::json algs = nlohmann::json::array();
  for (Algorithm a : c.algorithms) algs.push_back(std::string(to_string(a)));
  nlohmann::json j;
  j["version"] = std::string(kVersion);
  j["timestamp_utc"] = detail::utc_timestamp();
  j["rng"] = {{"generator", std::string(kGeneratorId)},
              {"normal_method", std::string(kNormalMethodId)},
              {"child_seed", "splitmix64 chain over (master_seed, r, trial)"}};
  j["config"] = {{"m", c.m},
                 {"n", c.n},
                 {"r_values", c.r_values},
                 {"p_values", c.p_values},
                 {"algorithms", algs},
                 {"trials", c.trials},
                 {"success_threshold", c.success_threshold},
                 {"master_seed", c.master_seed},
                 {"signal", std::string(to_string(c.signal))},
                 {"eta", c.solver.eta},
                 {"tolerance", c.solver.tolerance},
                 {"max_iterations", c.solver.max_iterations},
                 {"epsilon_scale", c.solver.epsilon_scale},
                 {"epsilon_floor", c.solver.epsilon_floor},
                 {"record_wall_time", c.record_wall_time}};
  if (c.solver.fixed_lambda) j["config"]["fixed_lambda"] = *c.solver.fixed_lambda;
  j["trial_count"] = report.trials.size();
  j["cell_count"] = report.cells.size();
  if (!report.area_by_p.empty()) {
    nlohmann::json areas = nlohmann::json::array();
    for (const auto& [p, area] : report.area_by_p) areas.push_back({{"p", p}, {"area", area}});
    j["area_by_p"] = areas;
  }
  if (report.best_p) j["best_p"] = *report.best_p;
  return j;
}

struct ReportPaths {
  std::filesystem::path trials;
  std::filesystem::path aggregate;
  std::filesystem::path metadata;
};

// Writes trials.csv, aggregate.csv and metadata.json into `dir`.
inline ReportPaths write_report(const BenchmarkReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
  ReportPaths paths{dir / "trials.csv", dir / "aggregate.csv", dir / "metadata.json"};
  write_file(paths.trials, format_trials_csv(report.trials));
  write_file(paths.aggregate, format_aggregate_csv(report.cells));
  write_file(paths.metadata, metadata_json(report).dump(2) + "\n");
  return paths;
}

inline std::string format_summary(const BenchmarkReport& report) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-6s %-6s %6s %9s %12s %11s\n", "alg", "p", "r", "success", "mean_re", "mean_iters");
  out += buf;
  for (const auto& c : report.cells) {
    const std::string p = c.p ? detail::format_double(*c.p) : "-";
    std::snprintf(buf, sizeof buf, "%-6s %-6s %6zu %9.3f %12.4e %11.1f\n", std::string(to_string(c.algorithm)).c_str(),
                  p.c_str(), c.r, c.success_rate, c.mean_re, c.mean_iters);
    out += buf;
  }
  for (const auto& [p, area] : report.area_by_p) {
    std::snprintf(buf, sizeof buf, "area(p=%g) = %.4f\n", p, area);
    out += buf;
  }
  if (report.best_p) {
    std::snprintf(buf, sizeof buf, "best p = %g\n", *report.best_p);
    out += buf;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Flat "key = value" sweep configuration.

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto piece = trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::size_t to_size(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  unsigned long long out = 0;
  try {
    out = std::stoull(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  require(pos == v.size() && !v.empty() && v[0] != '-', "config: '" + key + "' expects a nonnegative integer, got '" + v + "'");
  return static_cast<std::size_t>(out);
}

inline double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  require(pos == v.size() && !v.empty(), "config: '" + key + "' expects a number, got '" + v + "'");
  return out;
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ContractViolation("config: '" + key + "' expects true|false, got '" + v + "'");
}

}  // namespace detail

// Integer list: comma separated items, each either a value or start:stop:step
// (stop inclusive), e.g. "10:100:4" or "1,2,5".
inline std::vector<std::size_t> parse_size_list(std::string_view text) {
  std::vector<std::size_t> out;
  for (const auto& item : detail::split_list(text)) {
    const auto c1 = item.find(':');
    if (c1 == std::string::npos) {
      out.push_back(detail::to_size("r", item));
      continue;
    }
    const auto c2 = item.find(':', c1 + 1);
    detail::require(c2 != std::string::npos, "range '" + item + "' must be start:stop:step");
    const std::size_t lo = detail::to_size("r", detail::trim(item.substr(0, c1)));
    const std::size_t hi = detail::to_size("r", detail::trim(item.substr(c1 + 1, c2 - c1 - 1)));
    const std::size_t step = detail::to_size("r", detail::trim(item.substr(c2 + 1)));
    detail::require(step > 0 && lo <= hi, "range '" + item + "' is empty or has zero step");
    for (std::size_t v = lo; v <= hi; v += step) out.push_back(v);
  }
  return out;
}

inline std::vector<double> parse_double_list(std::string_view text) {
  std::vector<double> out;
  for (const auto& item : detail::split_list(text)) out.push_back(detail::to_double("p", item));
  return out;
}

inline std::vector<Algorithm> parse_algorithm_list(std::string_view text) {
  std::vector<Algorithm> out;
  for (const auto& item : detail::split_list(text)) out.push_back(parse_algorithm(item));
  return out;
}

// Applies one key to the config. Unknown keys are errors.
inline void apply_sweep_setting(SweepConfig& cfg, const std::string& key, const std::string& value) {
  using namespace detail;
  if (key == "m") cfg.m = to_size(key, value);
  else if (key == "n") cfg.n = to_size(key, value);
  else if (key == "r") cfg.r_values = parse_size_list(value);
  else if (key == "p") cfg.p_values = parse_double_list(value);
  else if (key == "algorithms") cfg.algorithms = parse_algorithm_list(value);
  else if (key == "trials") cfg.trials = to_size(key, value);
  else if (key == "success_threshold") cfg.success_threshold = to_double(key, value);
  else if (key == "seed") cfg.master_seed = to_size(key, value);
  else if (key == "signal") cfg.signal = parse_signal_distribution(value);
  else if (key == "jobs") cfg.jobs = to_size(key, value);
  else if (key == "record_wall_time") cfg.record_wall_time = to_bool(key, value);
  else if (key == "eta") cfg.solver.eta = to_double(key, value);
  else if (key == "tol") cfg.solver.tolerance = to_double(key, value);
  else if (key == "max_iters") cfg.solver.max_iterations = to_size(key, value);
  else if (key == "epsilon_scale") cfg.solver.epsilon_scale = to_double(key, value);
  else if (key == "epsilon_floor") cfg.solver.epsilon_floor = to_double(key, value);
  else if (key == "fixed_lambda") cfg.solver.fixed_lambda = to_double(key, value);
  else throw ContractViolation("config: unknown key '" + key + "'");
}

inline void parse_sweep_config(std::string_view text, SweepConfig& cfg) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    detail::require(eq != std::string::npos, "config line " + std::to_string(lineno) + ": expected key = value");
    apply_sweep_setting(cfg, detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
  }
}

}  // namespace lpit
