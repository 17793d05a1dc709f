#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "sbmlab/model.hpp"

namespace sbmlab {

/// The centered edge-weight matrix W on a graph: W_{vw} = 1{(v,w) in G} - d/n
/// off the diagonal (so p = 1 - d/n on edges, mu = -d/n on non-edges) and
/// W_{vv} = 0, with rows/columns of an avoid set logically zeroed. Application
/// is O(m + n) per step: since p - mu = 1, (Wx)_v = mu (sum(x) - x_v) + (Ax)_v
/// where A is the plain adjacency, restricted to allowed coordinates.
class WeightOperator {
 public:
  WeightOperator(const GraphSample& g, double d, const std::vector<int32_t>& avoid);

  const GraphSample& graph() const { return *g_; }
  double p() const { return p_; }
  double mu() const { return mu_; }
  bool allowed(int32_t v) const { return allowed_[static_cast<size_t>(v)] != 0; }
  int64_t allowed_count() const { return static_cast<int64_t>(allowed_list_.size()); }
  const std::vector<int32_t>& allowed_list() const { return allowed_list_; }
  /// Number of graph neighbors of v inside the allowed set.
  int64_t allowed_degree(int32_t v) const { return deg_allowed_[static_cast<size_t>(v)]; }

  /// ax_v = sum of x_w over graph neighbors w of v, for every v (including
  /// disallowed ones); x must be zero outside the allowed set. Also returns
  /// sum(x) through `sum_out`.
  void adjacency_scatter(const std::vector<double>& x, std::vector<double>& ax,
                         double& sum_out) const;

 private:
  const GraphSample* g_;
  double p_, mu_;
  std::vector<char> allowed_;
  std::vector<int32_t> allowed_list_;
  std::vector<int64_t> deg_allowed_;
};

enum class WalkKind { NonBacktracking, SelfAvoidingOracle };

const char* walk_kind_name(WalkKind k);

/// All weighted walk sums from one source at one length: values[v] is the sum
/// over length-k walks from `source` to v of the product of step weights.
struct WalkStatVector {
  int32_t source = 0;
  int32_t k = 0;
  WalkKind kind = WalkKind::NonBacktracking;
  std::vector<double> values;  // size n
};

/// Weighted non-backtracking walk sums from u at length exactly k: walks
/// x_0 = u, x_1, ..., x_k with consecutive vertices distinct and no immediate
/// reversal (x_{i+2} != x_i), interior vertices x_1..x_{k-1} outside `avoid`
/// (endpoints are exempt), each walk contributing the product of its step
/// weights W_{x_i x_{i+1}}.
///
/// Computed in O((m+n)k) by a closed two-vector recurrence over the allowed
/// coordinates. Writing p + mu = P and p mu = Q, every off-diagonal weight x
/// satisfies x^2 = P x - Q pointwise, which closes the usual "subtract the
/// backtracking step" correction exactly:
///   m^(1) = W e_u,                      h^(1) = W^{(2)} e_u,
///   m^(2) = W m^(1) - r_u e_u,          h^(2) = W^{(2)} m^(1) - r3_u e_u,
///   m^(t) = W m^(t-1) - r m^(t-2) + P h^(t-2) - Q m^(t-2),
///   h^(t) = W^{(2)} m^(t-1) - r3 m^(t-2) + (P^2 - Q) h^(t-2) - Q P m^(t-2),
/// where W^{(2)} is the entrywise square of W, h^(t)_v re-weights each walk by
/// its final step weight, r_v = sum_w W_{vw}^2 and r3_v = sum_w W_{vw}^3 over
/// allowed w. Values at vertices in `avoid` (legal as endpoints only) come
/// from a one-step extension of m^(k-1), which needs no correction because
/// the extension target cannot equal an allowed interior vertex.
///
/// Throws BadLength if k < 1 or k > 200 (walk sums scale like (d lambda)^k)
/// and NumericalOverflow if any intermediate magnitude passes 1e290.
WalkStatVector nbw_vector(const GraphSample& g, int32_t u, int32_t k, double d,
                          const std::vector<int32_t>& avoid = {});

/// As nbw_vector but reusing a prebuilt operator (one build serves many
/// sources with the same avoid set). u must be allowed or lie in avoid with
/// endpoint exemption (any vertex works).
WalkStatVector nbw_vector(const WeightOperator& op, int32_t u, int32_t k);

/// Reusable scratch buffers for repeated walk computations on one graph.
struct WalkScratch {
  std::vector<double> m_prev, h_prev, m_cur, h_cur, m_next, h_next, ax;
};

/// Sum of nbw_vector over a set of sources, fused into a single recurrence:
/// the recurrence is linear in the source indicator vector as long as every
/// source is an allowed vertex (their correction terms share one form), so
/// one O((m+n)k) pass serves the whole set. Sources may repeat (their walk
/// sums add). Throws RangeError if any source lies in the avoid set.
WalkStatVector nbw_vector_multi(const WeightOperator& op, const std::vector<int32_t>& sources,
                                int32_t k, WalkScratch* scratch = nullptr);

/// Exhaustive-enumeration oracle: exact sum over non-backtracking walks of
/// length k from u to v (interiors outside `avoid`) of the weight product.
/// Guarded to n <= 12 and k <= 7 (TooLarge otherwise).
double nbw_bruteforce(const GraphSample& g, int32_t u, int32_t v, int32_t k, double d,
                      const std::vector<int32_t>& avoid = {});

/// Whole-vector variant of the oracle (one DFS serves every target).
std::vector<double> nbw_bruteforce_vector(const GraphSample& g, int32_t u, int32_t k, double d,
                                          const std::vector<int32_t>& avoid = {});

/// Same oracle for self-avoiding walks (all vertices distinct; u = v gives 0).
double saw_bruteforce(const GraphSample& g, int32_t u, int32_t v, int32_t k, double d,
                      const std::vector<int32_t>& avoid = {});

std::vector<double> saw_bruteforce_vector(const GraphSample& g, int32_t u, int32_t k, double d,
                                          const std::vector<int32_t>& avoid = {});

/// Z(w, rep) = sum over u in N(rep) intersect part of the length-k walk sum
/// from u to w avoiding the complement of `part` internally. One recurrence
/// per source u serves every target w; the vector form returns all targets.
std::vector<double> z_vector(const GraphSample& g, int32_t rep, const std::vector<int32_t>& part,
                             int32_t k, double d);

double z_statistic(const GraphSample& g, int32_t w, int32_t rep, const std::vector<int32_t>& part,
                   int32_t k, double d);

/// CSV round trip: a metadata line `source=<u>,k=<k>,kind=<name>`, a column
/// header `target,value`, then one row per vertex with full precision.
void save_walk_csv(const WalkStatVector& w, std::ostream& out);
WalkStatVector load_walk_csv(std::istream& in);

}  // namespace sbmlab
