#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sbmlab/model.hpp"

namespace sbmlab {

/// A polynomial index: a finite simple graph given as a set of unordered
/// vertex pairs. Vertices 0 and 1 play a special role throughout this
/// module: they are the pair whose same-community indicator the audited
/// polynomials try to predict.
class PolyIndex {
 public:
  PolyIndex() = default;  // the empty index

  /// Canonicalizes each pair to (min, max) and sorts the list. Throws
  /// RangeError on self-loops, negative ids, or duplicate pairs.
  explicit PolyIndex(std::vector<std::pair<int32_t, int32_t>> pairs);

  /// The single edge {0, 1} between the two queried vertices.
  static PolyIndex observed_edge();

  const std::vector<std::pair<int32_t, int32_t>>& pairs() const { return pairs_; }
  /// Sorted non-isolated vertices.
  const std::vector<int32_t>& support() const { return support_; }
  int64_t edge_count() const { return static_cast<int64_t>(pairs_.size()); }
  int64_t support_size() const { return static_cast<int64_t>(support_.size()); }
  bool empty() const { return pairs_.empty(); }

  bool connected() const { return connected_; }
  /// Smallest degree among support vertices other than 0 and 1;
  /// INT64_MAX when no such vertex exists.
  int64_t min_degree_off_queried() const { return min_degree_off_queried_; }
  bool contains_queried_pair() const;  // both 0 and 1 in the support

  bool contains(int32_t i, int32_t j) const;
  /// Edgewise inclusion.
  bool subset_of(const PolyIndex& other) const;
  bool operator==(const PolyIndex& other) const { return pairs_ == other.pairs_; }
  bool operator<(const PolyIndex& other) const;  // by (edge count, lexicographic)

 private:
  std::vector<std::pair<int32_t, int32_t>> pairs_;
  std::vector<int32_t> support_;
  bool connected_ = true;
  int64_t min_degree_off_queried_ = INT64_MAX;
};

/// True when alpha is empty, or alpha is connected, its support contains
/// both queried vertices 0 and 1, and every other support vertex has degree
/// at least 2. Only such indices can carry signal about the queried pair.
bool is_informative(const PolyIndex& alpha);

/// Complexity weight f: f(empty) = 1 and f(alpha) sums f over all proper
/// informative sub-indices (edge subsets). Exact by memoized subset
/// enumeration. Throws RangeError if alpha is not informative and TooLarge
/// when alpha has more than 8 edges.
int64_t f_complexity(const PolyIndex& alpha);

/// An index together with a community color per support vertex:
/// colors[i] labels support()[i].
struct LabeledIndex {
  PolyIndex beta;
  std::vector<int32_t> colors;
};

/// Correlation of the index polynomial with the centered same-community
/// indicator of the queried pair: (q-1) q^{-|V|} ((a-b)/n)^{|edges|} for a
/// nonempty informative index, and 0 for the empty index (the indicator is
/// centered). Throws RangeError when alpha is nonempty but not informative.
double c_entry(const PolyIndex& alpha, const ModelParams& p);

/// Cross-moment of the alpha index polynomial with the orthonormal labeled
/// basis element for (beta, colors). Zero unless beta's edges are a subset
/// of alpha's; otherwise a closed-form product whose label-consistency
/// factor is evaluated combinatorially on the components of alpha minus
/// beta. Throws SizeMismatch/LabelOutOfRange on an invalid coloring.
double m_entry(const LabeledIndex& beta, const PolyIndex& alpha, const ModelParams& p);

struct UEntry {
  PolyIndex beta;
  std::vector<int32_t> colors;
  double value = 0.0;
};

/// Dual certificate: coefficients over labeled informative indices whose
/// pairing with every informative index polynomial reproduces c_entry, so
/// that norm() / sqrt(x_second_moment) upper-bounds the best degree-D
/// correlation.
struct UVector {
  std::vector<UEntry> entries;  // grouped by index, colorings in base-q order
  double squared_norm = 0.0;
  double x_second_moment = 0.0;  // (1/q)(1 - 1/q)
  double correlation_upper() const;
};

/// Runs the two-step recursion over informative indices with at most
/// `degree` edges on vertex set [0, n). Throws TooLarge when n > 6 or
/// degree > 4, and NumericalUnderflow if a diagonal Gram block degenerates
/// while its residual is nonzero.
UVector build_u(int32_t degree, int64_t n, const ModelParams& p);

/// Closed-form upper bounds on the squared degree-D correlation. The
/// prefactor constant and guard exponent are unknown universal constants;
/// both default to 1 and are echoed in the report so downstream consumers
/// see which convention produced the numbers. bound_item1 uses the plain
/// signal ratio r = d_adj * lambda_adj^2 and is present only when its
/// degree guard D <= (xi n / (C q^2))^c holds; bound_item2 multiplies the
/// ratio by (1 + (q-1) b(1-b/n) / (a(1-a/n))) and is always reported
/// (infinite when a(1-a/n) = 0), with its own guard D <= (n / (C q))^c
/// flagged separately.
struct BoundReport {
  int32_t degree = 0;
  std::optional<double> bound_item1;
  double bound_item2 = 0.0;
  bool guard_item1 = false;
  bool guard_item2 = false;
  double scale_constant = 1.0;     // the prefactor C
  double exponent_constant = 1.0;  // the guard exponent c
  std::optional<double> corr_exact;
  ModelParams params;
};

BoundReport corr_bound(int32_t degree, const ModelParams& p, double scale_constant = 1.0,
                       double exponent_constant = 1.0);

/// Exact best correlation of any degree-D multilinear polynomial in the
/// edge indicators with the centered same-community indicator of vertices
/// 0 and 1, by exhaustive enumeration of all (graph, labeling) pairs and a
/// rank-revealing pseudo-solve of the monomial Gram system (tolerance
/// 1e-10). Guard: 2^C(n,2) * q^n <= 1e8, else TooLarge. With
/// rational = true the enumeration runs in exact rational arithmetic
/// (n <= 4 only).
double corr_exact(int64_t n, int64_t q, double a, double b, int32_t degree,
                  bool rational = false);

/// Finite-n minimax lower bound for estimating the edge-probability matrix
/// of a q-block model with degree-D estimators: evaluates
/// ((p2-p1)^2 / q)(1 - 1/q)(1 - corr^2) at the planted instance
/// p2 = 1/2, p1 = 1/2 - (1/4) sqrt(q^2/n), with corr^2 = min(1, D q / n).
/// Requires 2 <= q <= sqrt(n), else RangeError.
double graphon_lower_bound(int64_t n, int64_t q, int32_t degree);

/// One JSON object for the `lowdeg` CLI subcommand.
std::string bound_report_json(const BoundReport& r);

}  // namespace sbmlab
