#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sbmlab/model.hpp"
#include "sbmlab/rng.hpp"

namespace sbmlab {

/// Random representative pool U plus the q label anchors chosen from it.
struct RepresentativeSet {
  std::vector<int32_t> u_all;    // the pool, |u_all| = ceil(sqrt(n * q))
  std::vector<int32_t> u_star;   // q distinct anchors, u_star[l] carries label l
  int64_t degree_floor = 0;      // required degree into V \ U for anchors
};

/// Walk schedule and thresholding knobs for label recovery.
struct RecoveryConfig {
  int32_t k = 1;                   // walk length, >= 1
  int32_t M = 1;                   // number of parts the non-pool vertices split into, >= 1
  double beta = 0.0;               // the exponent k was derived from (diagnostic)
  double threshold_factor = 0.25;  // in (0, 1); scales the acceptance threshold
  bool normalize = true;           // divide walk sums by their expected scale s_i^k / n_i
  bool collect_candidates = false; // keep per-vertex candidate label lists (diagnostics)
};

/// Labels plus per-run diagnostics for one recovery invocation.
struct RecoveryReport {
  Labeling labels;
  double fraction_zero_candidate = 0.0;   // classified vertices with no passing label
  double fraction_multi_candidate = 0.0;  // classified vertices with >= 2 passing labels
  int32_t k = 0;
  int32_t M = 0;
  // Sorted candidate-label lists per vertex (empty unless collect_candidates).
  std::vector<std::vector<int32_t>> candidates;
};

/// Draws the pool U of ceil(sqrt(n*q)) vertices uniformly without replacement,
/// then q anchors uniformly from the pool members with at least
/// max(1, ceil(ln ln n)) neighbors outside the pool. Throws RangeError unless
/// n > q >= 1, InsufficientCandidates if fewer than q pool members qualify.
RepresentativeSet select_representatives(const GraphSample& g, int64_t q, RngStream rng);

/// Which walk classifier a schedule is meant for. Auto picks SinglePart when
/// d * lambda^2 > 1 and MultiPart otherwise; the explicit values force one
/// (the multi-part classifier is also valid above the Kesten-Stigum threshold,
/// where its exponent interval loses its upper endpoint).
enum class WalkPlan { Auto, MultiPart, SinglePart };

/// Picks (k, M, beta) from the model parameters. SinglePart (valid only when
/// d * lambda^2 > 1): M = 1, beta = 2.2 / ln(d * lambda^2),
/// k = max(1, floor(beta * ln n)). MultiPart (needs s = d * lambda > 1): the
/// walk exponent must fit in the open interval
///   ( (1 - chi) / ln s ,  (2 chi - 1) / ln(d / s^2) )
/// whose upper endpoint is +infinity when d <= s^2; beta is the interval's
/// midpoint (or 1.5x the lower endpoint when unbounded), M = max(1, ceil(ln d)),
/// and k = max(1, floor(beta * ln(n / M))). Throws EmptyInterval when the
/// requested plan's constraints are contradictory.
RecoveryConfig choose_schedule(const ModelParams& p, WalkPlan plan = WalkPlan::Auto);

/// Schedule for baseline runs outside both walk regimes: k = max(1, floor(ln n)),
/// M = 1. Lets negative controls exercise the same code path.
RecoveryConfig fallback_schedule(const ModelParams& p);

/// Multi-part walk classifier: splits the non-pool vertices into M random
/// equal parts, sums non-backtracking walk statistics from each anchor's
/// neighbors within each part, and assigns a vertex the unique label whose
/// normalized sums clear the threshold in every part (uniform random label on
/// ties or misses). Anchors keep their own labels; remaining pool vertices get
/// random labels. Propagates InsufficientCandidates from anchor selection.
RecoveryReport recover_below_ks(const GraphSample& g, const ModelParams& p,
                                const RecoveryConfig& cfg, RngStream rng);

/// Single-part variant: walks avoid the whole pool U and start from every
/// neighbor of each anchor, so one statistic per (vertex, label) decides the
/// threshold test. cfg.M is ignored (one part by construction).
RecoveryReport recover_above_ks(const GraphSample& g, const ModelParams& p,
                                const RecoveryConfig& cfg, RngStream rng);

/// One-line JSON record of a recovery run (seed and parameters included) for
/// appending to experiment logs.
std::string recovery_trial_json(const ModelParams& p, const RecoveryConfig& cfg,
                                uint64_t seed, const RecoveryReport& report,
                                double alignment_value, double wall_time_ms);

}  // namespace sbmlab
