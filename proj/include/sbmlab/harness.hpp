#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sbmlab/model.hpp"

namespace sbmlab {

/// The algorithm column names a sweep can request, in the canonical order
/// used everywhere (records, CSV columns, execution):
///   below_ks    multi-part walk classifier (alignment)
///   above_ks    single-part walk classifier (alignment)
///   inefficient edge-split search + one-step belief propagation (alignment)
///   detect      triangle-count test (1 when the planted law is declared)
///   lowdeg_bound closed-form correlation-squared bound (deterministic)
inline constexpr std::array<const char*, 5> kAlgorithmNames = {
    "below_ks", "above_ks", "inefficient", "detect", "lowdeg_bound"};

/// Grid and execution plan for a phase-diagram sweep. Exactly one of
/// {q_values, chi_values} is populated, and exactly one of
/// {lambda_values, kappa_values}: chi derives q = round(n^chi) and kappa
/// derives lambda = d^(-kappa), mirroring the growing-q phase-plane axes.
struct SweepSpec {
  std::vector<int64_t> n_values;
  std::vector<int64_t> q_values;
  std::vector<double> chi_values;
  std::vector<double> d_values;
  std::vector<double> lambda_values;
  std::vector<double> kappa_values;
  int64_t trials = 1;
  std::vector<std::string> algorithms;  // canonical-order subset, may be empty
  uint64_t base_seed = 0;
  int32_t lowdeg_degree = 8;       // degree for the lowdeg_bound column
  int64_t search_budget = 200000;  // budget for the inefficient pipeline
  int64_t workers = 1;             // worker threads (SBM_LAB_WORKERS caps this)
};

/// One grid point with native and derived coordinates both resolved.
struct SweepPoint {
  int64_t index = 0;  // flattened row-major position
  int64_t n = 0;
  int64_t q = 0;
  double chi = 0.0;  // ln q / ln n when q was given directly
  double d = 0.0;
  double lambda = 0.0;
  double kappa = 0.0;  // -ln lambda / ln d when lambda was given directly
};

/// Result of one (point, trial) execution. metric_names/metric_values run in
/// parallel; a failed algorithm stores NaN and appends to `error`. wall_time_ms
/// is diagnostic only and never enters the deterministic CSV surface.
struct TrialRecord {
  SweepPoint point;
  int64_t trial = 0;
  uint64_t seed = 0;
  std::string regime;  // empty when parameter derivation itself failed
  std::vector<std::string> metric_names;
  std::vector<double> metric_values;
  std::string error;
  double wall_time_ms = 0.0;
};

/// Parse a key-value config ('key = value', '#' comments, values split on
/// whitespace). Keys: n, q, chi, d, lambda, kappa, trials, algorithms, seed,
/// lowdeg_degree, search_budget, workers. Throws ConfigError on unknown or
/// duplicate keys, bad numbers, or a grid that violates the invariants.
SweepSpec parse_sweep_config(const std::string& text);

/// Validate the sweep description and resolve the grid, row-major over
/// (n, q-or-chi, d, lambda-or-kappa). Throws ConfigError.
std::vector<SweepPoint> expand_grid(const SweepSpec& spec);

/// Deterministic per-trial seed: base_seed combined with the bit patterns of
/// the model-defining coordinates (n, q, d, lambda) and the trial index.
uint64_t trial_seed(uint64_t base_seed, const SweepPoint& pt, int64_t trial);

/// Execute one (point, trial): sample a graph once, run every requested
/// algorithm on it in canonical order, isolate per-algorithm failures.
TrialRecord run_trial(const SweepSpec& spec, const SweepPoint& pt, int64_t trial);

/// Execute every (point, trial) pair; failures become error rows, never
/// aborts. Records are returned in (point, trial) order regardless of the
/// worker count. Throws ConfigError only for a malformed spec.
std::vector<TrialRecord> run_sweep(const SweepSpec& spec);

/// Aggregate records into phase-diagram CSV: one row per grid point with
/// columns n,q,chi,d,lambda,kappa,regime,<metric means>,trials,errors.
/// Metric means skip failed trials (NaN when none succeeded); `errors`
/// counts trials with a nonempty error. Throws SchemaMismatch when records
/// disagree on their metric schema.
std::string phase_csv(const std::vector<TrialRecord>& records);

/// One JSON line for a single trial (includes wall_time_ms and error text).
std::string trial_record_json(const TrialRecord& r);

/// Number of records carrying a nonempty error.
int64_t error_row_count(const std::vector<TrialRecord>& records);

}  // namespace sbmlab
