#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sbmlab/errors.hpp"
#include "sbmlab/model.hpp"
#include "sbmlab/rng.hpp"

namespace sbmlab {

/// Probability vector over the q community labels.
struct BeliefVector {
  std::vector<double> probs;
};

/// Uniform belief (1/q, ..., 1/q).
BeliefVector uniform_belief(int64_t q);

/// Entries nonnegative and summing to 1 within 1e-9.
bool is_valid_belief(const BeliefVector& b, int64_t q);

/// One depth-1 belief-propagation update:
///   out(j) being proportional to  prod_i [ 1 + lambda q (x_i(j) - 1/q) ],
/// computed in log space with max-subtraction. Inputs must be valid beliefs
/// and lambda in [0, 1]. Zero factors (lambda = 1 against a hard conflicting
/// belief) zero out a label; NumericalUnderflow when every label vanishes.
/// With no neighbors the output is uniform (empty product).
BeliefVector bp_step(const std::vector<BeliefVector>& neighbor_beliefs, double lambda, int64_t q);

/// Depth-1 labeled broadcast tree: the root has a uniform label, a
/// Binomial(n-1, d/n) number of children, and each child copies the root's
/// label with probability lambda, otherwise draws uniformly from all q labels.
struct BroadcastTree {
  int32_t root_label = 0;
  std::vector<int32_t> child_labels;
};

/// Exact sampler of BroadcastTree. Requires d in [0, n], lambda in [0, 1], q >= 1.
BroadcastTree sample_broadcast_tree(double d, double lambda, int64_t q, int64_t n, RngStream rng);

/// How search_good_partition explores labelings. Auto enumerates exhaustively
/// when q^n fits the budget and n <= 14, and otherwise runs the greedy
/// heuristic.
enum class SearchMode { Auto, Exhaustive, Heuristic };

/// A labeling together with its within-community edge count.
struct SearchResult {
  Labeling labels;
  int64_t objective = 0;
};

/// Thrown when exhaustive enumeration hits the iteration budget; carries the
/// best labeling found so far.
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(const std::string& msg, SearchResult best)
      : Error(msg), best_so_far(std::move(best)) {}
  SearchResult best_so_far;
};

/// Maximizes the number of within-community edges over near-balanced
/// labelings (community sizes within 2*sqrt(n/q) of n/q, and never empty).
/// Exhaustive mode enumerates all q^n assignments (guarded to n <= 14),
/// counting one budget unit per assignment and throwing BudgetExceeded with
/// the best-so-far when the budget runs out. Heuristic mode (guarded to
/// n <= 10^4) runs random-restart greedy single-vertex moves, one budget unit
/// per vertex evaluation, and always returns its best. Budget must be >= 1.
SearchResult search_good_partition(const GraphSample& g, const ModelParams& p, int64_t budget,
                                   RngStream rng, SearchMode mode = SearchMode::Auto);

/// Independent fair coin per edge: returns the two halves (first, second).
std::pair<std::vector<std::pair<int32_t, int32_t>>, std::vector<std::pair<int32_t, int32_t>>>
split_edges(const GraphSample& g, RngStream rng);

/// Labels plus diagnostics from the split-search-propagate pipeline.
struct ItRecoveryReport {
  Labeling labels;
  int64_t search_objective = 0;
  double beta_empirical = 0.0;  // initialization belief level actually used
  double beta_analytic = 0.0;   // q^(-2/(d lambda)) reference value (0 when d lambda <= 0)
  double bp_flip_fraction = 0.0;
  int64_t e1_size = 0;
  int64_t e2_size = 0;
};

/// Exponential-time recovery: split edges into halves E1/E2, search a
/// near-balanced partition of (V, E1), initialize each vertex's belief at
/// level beta on its search label, then run one bp_step per vertex over its
/// E2 neighbors and take the argmax (uniform tie-break; vertices with no E2
/// edges keep their search label). beta comes from the normalized search
/// objective mapped onto [1/q, 1] (clamped away from both ends).
ItRecoveryReport recover_inefficient(const GraphSample& g, const ModelParams& p, int64_t budget,
                                     RngStream rng);

/// One-line JSON record of an inefficient-recovery trial.
std::string it_trial_json(const ModelParams& p, uint64_t seed, const ItRecoveryReport& report,
                          double alignment_value, double wall_time_ms);

}  // namespace sbmlab
