#include "sbmlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <thread>

#include <json.hpp>

#include "sbmlab/detection.hpp"
#include "sbmlab/errors.hpp"
#include "sbmlab/it_recovery.hpp"
#include "sbmlab/lowdeg.hpp"
#include "sbmlab/recovery.hpp"
#include "sbmlab/rng.hpp"

namespace sbmlab {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Shortest round-trip text for a double; locale-independent and stable.
std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_int(int64_t v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_tokens(const std::string& s) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (pos < s.size()) {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    size_t end = pos;
    while (end < s.size() && s[end] != ' ' && s[end] != '\t') ++end;
    if (end > pos) out.push_back(s.substr(pos, end - pos));
    pos = end;
  }
  return out;
}

int64_t parse_int(const std::string& tok, const std::string& key) {
  int64_t v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw ConfigError("config key '" + key + "': bad integer '" + tok + "'");
  return v;
}

uint64_t parse_uint(const std::string& tok, const std::string& key) {
  uint64_t v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw ConfigError("config key '" + key + "': bad unsigned integer '" + tok + "'");
  return v;
}

double parse_real(const std::string& tok, const std::string& key) {
  double v = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw ConfigError("config key '" + key + "': bad number '" + tok + "'");
  return v;
}

bool known_algorithm(const std::string& name) {
  return std::find(kAlgorithmNames.begin(), kAlgorithmNames.end(), name) !=
         kAlgorithmNames.end();
}

// The requested algorithm set filtered into canonical order.
std::vector<std::string> canonical_algorithms(const SweepSpec& spec) {
  std::vector<std::string> out;
  for (const char* name : kAlgorithmNames)
    if (std::find(spec.algorithms.begin(), spec.algorithms.end(), name) !=
        spec.algorithms.end())
      out.push_back(name);
  return out;
}

// Per-trial metric name for an algorithm (detect records a 0/1 declaration).
std::string metric_name(const std::string& algo) {
  if (algo == "below_ks" || algo == "above_ks" || algo == "inefficient")
    return "align_" + algo;
  if (algo == "detect") return "detect_sbm";
  return algo;  // lowdeg_bound
}

// Aggregated CSV column for a per-trial metric.
std::string csv_column(const std::string& metric) {
  return metric == "detect_sbm" ? "detect_power" : metric;
}

// Planned walk schedule when the regime admits one, baseline otherwise, so
// negative controls run the same classifier instead of erroring out.
RecoveryConfig schedule_or_fallback(const ModelParams& p, WalkPlan plan) {
  try {
    return choose_schedule(p, plan);
  } catch (const EmptyInterval&) {
    return fallback_schedule(p);
  }
}

}  // namespace

SweepSpec parse_sweep_config(const std::string& text) {
  SweepSpec spec;
  std::vector<std::string> seen;
  size_t start = 0;
  while (start <= text.size()) {
    const size_t nl = text.find('\n', start);
    std::string line =
        nl == std::string::npos ? text.substr(start) : text.substr(start, nl - start);
    start = nl == std::string::npos ? text.size() + 1 : nl + 1;

    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line missing '=': " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line with empty key: " + line);
    if (std::find(seen.begin(), seen.end(), key) != seen.end())
      throw ConfigError("duplicate config key '" + key + "'");
    seen.push_back(key);
    const auto tokens = split_tokens(value);

    const auto one = [&](const char* what) -> const std::string& {
      if (tokens.size() != 1)
        throw ConfigError("config key '" + key + "' expects one " + what);
      return tokens[0];
    };

    if (key == "n") {
      for (const auto& t : tokens) spec.n_values.push_back(parse_int(t, key));
    } else if (key == "q") {
      for (const auto& t : tokens) spec.q_values.push_back(parse_int(t, key));
    } else if (key == "chi") {
      for (const auto& t : tokens) spec.chi_values.push_back(parse_real(t, key));
    } else if (key == "d") {
      for (const auto& t : tokens) spec.d_values.push_back(parse_real(t, key));
    } else if (key == "lambda") {
      for (const auto& t : tokens) spec.lambda_values.push_back(parse_real(t, key));
    } else if (key == "kappa") {
      for (const auto& t : tokens) spec.kappa_values.push_back(parse_real(t, key));
    } else if (key == "trials") {
      spec.trials = parse_int(one("integer"), key);
    } else if (key == "algorithms") {
      spec.algorithms = tokens;  // may be empty: regime classification only
    } else if (key == "seed") {
      spec.base_seed = parse_uint(one("integer"), key);
    } else if (key == "lowdeg_degree") {
      spec.lowdeg_degree = static_cast<int32_t>(parse_int(one("integer"), key));
    } else if (key == "search_budget") {
      spec.search_budget = parse_int(one("integer"), key);
    } else if (key == "workers") {
      spec.workers = parse_int(one("integer"), key);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  expand_grid(spec);  // validate the assembled spec
  return spec;
}

std::vector<SweepPoint> expand_grid(const SweepSpec& spec) {
  if (spec.n_values.empty()) throw ConfigError("grid needs at least one n");
  if (spec.d_values.empty()) throw ConfigError("grid needs at least one d");
  const bool has_q = !spec.q_values.empty(), has_chi = !spec.chi_values.empty();
  if (has_q == has_chi) throw ConfigError("grid needs exactly one of q or chi");
  const bool has_lambda = !spec.lambda_values.empty(), has_kappa = !spec.kappa_values.empty();
  if (has_lambda == has_kappa) throw ConfigError("grid needs exactly one of lambda or kappa");
  if (spec.trials < 1) throw ConfigError("trials must be >= 1");
  if (spec.workers < 1) throw ConfigError("workers must be >= 1");
  if (spec.lowdeg_degree < 0) throw ConfigError("lowdeg_degree must be >= 0");
  if (spec.search_budget < 1) throw ConfigError("search_budget must be >= 1");
  for (const int64_t n : spec.n_values)
    if (n < 2) throw ConfigError("n must be >= 2");
  for (const int64_t q : spec.q_values)
    if (q < 2) throw ConfigError("q must be >= 2");
  for (size_t i = 0; i < spec.algorithms.size(); ++i) {
    if (!known_algorithm(spec.algorithms[i]))
      throw ConfigError("unknown algorithm '" + spec.algorithms[i] + "'");
    for (size_t j = i + 1; j < spec.algorithms.size(); ++j)
      if (spec.algorithms[i] == spec.algorithms[j])
        throw ConfigError("duplicate algorithm '" + spec.algorithms[i] + "'");
  }

  const size_t qc_count = has_q ? spec.q_values.size() : spec.chi_values.size();
  const size_t lk_count = has_lambda ? spec.lambda_values.size() : spec.kappa_values.size();
  std::vector<SweepPoint> grid;
  int64_t index = 0;
  for (const int64_t n : spec.n_values) {
    for (size_t qi = 0; qi < qc_count; ++qi) {
      int64_t q;
      double chi;
      if (has_q) {
        q = spec.q_values[qi];
        chi = std::log(static_cast<double>(q)) / std::log(static_cast<double>(n));
      } else {
        chi = spec.chi_values[qi];
        q = std::llround(std::pow(static_cast<double>(n), chi));
        if (q < 2)
          throw ConfigError("chi " + format_double(chi) + " at n " + format_int(n) +
                            " derives q < 2");
      }
      for (const double d : spec.d_values) {
        for (size_t li = 0; li < lk_count; ++li) {
          SweepPoint pt;
          pt.index = index++;
          pt.n = n;
          pt.q = q;
          pt.chi = chi;
          pt.d = d;
          if (has_lambda) {
            pt.lambda = spec.lambda_values[li];
            pt.kappa = d > 0.0 && d != 1.0 && pt.lambda > 0.0
                           ? -std::log(pt.lambda) / std::log(d)
                           : kNan;
          } else {
            pt.kappa = spec.kappa_values[li];
            pt.lambda = std::pow(d, -pt.kappa);
          }
          grid.push_back(pt);
        }
      }
    }
  }
  return grid;
}

uint64_t trial_seed(uint64_t base_seed, const SweepPoint& pt, int64_t trial) {
  uint64_t h = base_seed;
  h = hash_combine(h, static_cast<uint64_t>(pt.n));
  h = hash_combine(h, static_cast<uint64_t>(pt.q));
  h = hash_combine(h, std::bit_cast<uint64_t>(pt.d));
  h = hash_combine(h, std::bit_cast<uint64_t>(pt.lambda));
  h = hash_combine(h, static_cast<uint64_t>(trial));
  return h;
}

TrialRecord run_trial(const SweepSpec& spec, const SweepPoint& pt, int64_t trial) {
  const auto t0 = std::chrono::steady_clock::now();
  TrialRecord rec;
  rec.point = pt;
  rec.trial = trial;
  rec.seed = trial_seed(spec.base_seed, pt, trial);

  const auto algos = canonical_algorithms(spec);
  const auto note_error = [&rec](const std::string& where, const std::string& what) {
    if (!rec.error.empty()) rec.error += "; ";
    rec.error += where + ": " + what;
  };

  ModelParams p;
  bool params_ok = false;
  try {
    p = ModelParams::from_snr(pt.n, pt.q, pt.d, pt.lambda);
    rec.regime = regime_name(classify_regime(p));
    params_ok = true;
  } catch (const Error& e) {
    note_error("params", e.what());
  }

  RngStream rng(rec.seed);
  GraphSample g;
  bool have_graph = false;
  for (const auto& algo : algos) {
    double value = kNan;
    if (params_ok) {
      try {
        if (algo != "lowdeg_bound" && !have_graph) {
          g = sample_sbm(p, rng.substream(0));
          have_graph = true;
        }
        if (algo == "below_ks") {
          const auto cfg = schedule_or_fallback(p, WalkPlan::MultiPart);
          const auto rep = recover_below_ks(g, p, cfg, rng.substream(1));
          value = alignment(rep.labels, g.truth, p.q);
        } else if (algo == "above_ks") {
          const auto cfg = schedule_or_fallback(p, WalkPlan::SinglePart);
          const auto rep = recover_above_ks(g, p, cfg, rng.substream(2));
          value = alignment(rep.labels, g.truth, p.q);
        } else if (algo == "inefficient") {
          const auto rep = recover_inefficient(g, p, spec.search_budget, rng.substream(3));
          value = alignment(rep.labels, g.truth, p.q);
        } else if (algo == "detect") {
          value = detect_triangle(g, p).verdict == GraphLaw::SBM ? 1.0 : 0.0;
        } else {  // lowdeg_bound
          const auto rep = corr_bound(spec.lowdeg_degree, p);
          value = rep.guard_item1 && rep.bound_item1.has_value() ? *rep.bound_item1
                                                                 : rep.bound_item2;
        }
      } catch (const Error& e) {
        note_error(algo, e.what());
      }
    }
    rec.metric_names.push_back(metric_name(algo));
    rec.metric_values.push_back(value);
  }

  rec.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

std::vector<TrialRecord> run_sweep(const SweepSpec& spec) {
  const auto grid = expand_grid(spec);
  const int64_t trials = spec.trials;
  const int64_t total = static_cast<int64_t>(grid.size()) * trials;
  std::vector<TrialRecord> records(static_cast<size_t>(total));

  int64_t workers = spec.workers;
  if (const char* env = std::getenv("SBM_LAB_WORKERS")) {
    const int64_t cap = parse_int(env, "SBM_LAB_WORKERS");
    if (cap < 1) throw ConfigError("SBM_LAB_WORKERS must be >= 1");
    workers = std::min(workers, cap);
  }
  workers = std::max<int64_t>(1, std::min(workers, total));

  const auto work = [&](std::atomic<int64_t>& next) {
    while (true) {
      const int64_t task = next.fetch_add(1);
      if (task >= total) return;
      records[static_cast<size_t>(task)] =
          run_trial(spec, grid[static_cast<size_t>(task / trials)], task % trials);
    }
  };
  if (workers == 1) {
    std::atomic<int64_t> next{0};
    work(next);
  } else {
    std::atomic<int64_t> next{0};
    std::vector<std::thread> pool;
    for (int64_t w = 0; w < workers; ++w) pool.emplace_back([&] { work(next); });
    for (auto& t : pool) t.join();
  }
  return records;
}

std::string phase_csv(const std::vector<TrialRecord>& records) {
  static const char* kCoordHeader = "n,q,chi,d,lambda,kappa,regime";
  if (records.empty()) return std::string(kCoordHeader) + ",trials,errors\n";

  const auto& schema = records[0].metric_names;
  for (const auto& r : records)
    if (r.metric_names != schema)
      throw SchemaMismatch("records disagree on their metric schema");

  std::map<int64_t, std::vector<const TrialRecord*>> by_point;
  for (const auto& r : records) by_point[r.point.index].push_back(&r);

  std::string out = kCoordHeader;
  for (const auto& name : schema) out += "," + csv_column(name);
  out += ",trials,errors\n";

  for (const auto& [index, rows] : by_point) {
    const SweepPoint& pt = rows[0]->point;
    for (const TrialRecord* r : rows)
      if (r->point.n != pt.n || r->point.q != pt.q || r->point.d != pt.d ||
          r->point.lambda != pt.lambda)
        throw SchemaMismatch("records at one grid index disagree on coordinates");

    std::string regime;
    int64_t errors = 0;
    for (const TrialRecord* r : rows) {
      if (regime.empty() && !r->regime.empty()) regime = r->regime;
      if (!r->error.empty()) ++errors;
    }

    out += format_int(pt.n) + "," + format_int(pt.q) + "," + format_double(pt.chi) + "," +
           format_double(pt.d) + "," + format_double(pt.lambda) + "," +
           format_double(pt.kappa) + "," + regime;
    for (size_t m = 0; m < schema.size(); ++m) {
      double sum = 0.0;
      int64_t count = 0;
      for (const TrialRecord* r : rows)
        if (std::isfinite(r->metric_values[m])) {
          sum += r->metric_values[m];
          ++count;
        }
      out += "," + format_double(count > 0 ? sum / static_cast<double>(count) : kNan);
    }
    out += "," + format_int(static_cast<int64_t>(rows.size())) + "," + format_int(errors) +
           "\n";
  }
  return out;
}

std::string trial_record_json(const TrialRecord& r) {
  nlohmann::json j;
  j["point_index"] = r.point.index;
  j["trial"] = r.trial;
  j["seed"] = r.seed;
  j["n"] = r.point.n;
  j["q"] = r.point.q;
  j["chi"] = r.point.chi;
  j["d"] = r.point.d;
  j["lambda"] = r.point.lambda;
  j["kappa"] = r.point.kappa;
  j["regime"] = r.regime;
  nlohmann::json metrics = nlohmann::json::object();
  for (size_t m = 0; m < r.metric_names.size(); ++m)
    metrics[r.metric_names[m]] = r.metric_values[m];
  j["metrics"] = metrics;
  j["error"] = r.error;
  j["wall_time_ms"] = r.wall_time_ms;
  return j.dump();
}

int64_t error_row_count(const std::vector<TrialRecord>& records) {
  int64_t count = 0;
  for (const auto& r : records)
    if (!r.error.empty()) ++count;
  return count;
}

}  // namespace sbmlab
