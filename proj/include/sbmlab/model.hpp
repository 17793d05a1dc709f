#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sbmlab/rng.hpp"

namespace sbmlab {

/// Where an instance sits relative to the two signal-to-noise thresholds.
///   AboveKS:               d*lambda^2 > 1
///   BelowKSAboveModified:  d*lambda^2 <= 1 but d*lambda^(1/chi) > 1
///   Supercritical:         both of the above <= 1 but d*lambda > 1
///   BelowBoth:             every signal scalar <= 1
enum class Regime { AboveKS, BelowKSAboveModified, Supercritical, BelowBoth };

const char* regime_name(Regime r);

/// Parameters of the planted-partition model: n vertices, q communities,
/// within-rate a and across-rate b (edge probabilities a/n and b/n).
///
/// Derived scalars: average degree d = (a + (q-1) b) / q, signal strength
/// lambda = (a - b) / (a + (q-1) b), per-edge signal s = d * lambda, and the
/// community growth exponent chi = ln q / ln n. The "adjusted" quantities use
/// Bernoulli variances a(1-a/n), b(1-b/n) in place of the raw rates.
struct ModelParams {
  int64_t n = 0;
  int64_t q = 0;
  double a = 0.0;
  double b = 0.0;

  double d = 0.0;
  double lambda = 0.0;
  double chi = 0.0;

  double d_adj = 0.0;       // (a(1-a/n) + (q-1) b(1-b/n)) / q
  double lambda_adj = 0.0;  // (a-b) / (q * d_adj)
  double xi = 0.0;          // min{a(1-a/n), b(1-b/n)} / d_adj

  double s() const { return d * lambda; }

  /// Build from the rate pair (a, b). Validates 0 <= a,b <= n, n >= 1, q >= 2.
  static ModelParams from_rates(int64_t n, int64_t q, double a, double b);

  /// Build from (d, lambda) via invert_params; additionally validates
  /// RangeError when a resulting rate exceeds n (edge probability above one).
  static ModelParams from_snr(int64_t n, int64_t q, double d, double lambda);
};

/// Solve (d, lambda, q) -> (a, b): a = d(1 + (q-1) lambda), b = d(1 - lambda).
/// Throws NegativeRate when lambda lies outside [-1/(q-1), 1], outside which
/// one of the rates would be negative.
std::pair<double, double> invert_params(double d, double lambda, int64_t q);

/// d * lambda^2 (the spectral / Kesten-Stigum scalar).
double snr_ks(const ModelParams& p);

/// d * lambda^(1/chi), the growing-q threshold scalar; 0 when lambda <= 0
/// (the power is not real for negative bases) and when n < 2.
double snr_modified(const ModelParams& p);

Regime classify_regime(const ModelParams& p);

/// A (possibly partial) community assignment; kUnassigned marks holes.
struct Labeling {
  static constexpr int32_t kUnassigned = -1;
  std::vector<int32_t> assignment;

  Labeling() = default;
  explicit Labeling(size_t n) : assignment(n, kUnassigned) {}
  explicit Labeling(std::vector<int32_t> a) : assignment(std::move(a)) {}

  size_t size() const { return assignment.size(); }
  int32_t operator[](size_t v) const { return assignment[v]; }
  int32_t& operator[](size_t v) { return assignment[v]; }
  bool is_total() const;
  /// True when total and every label lies in [0, q).
  bool is_valid(int64_t q) const;
};

/// One sampled graph: vertices 0..n-1, a canonical edge list (u < v, sorted,
/// no duplicates), the planted labeling ("truth"; all-unassigned for plain
/// random graphs), and a sorted-CSR adjacency built by finalize().
struct GraphSample {
  int64_t n = 0;
  int64_t q = 0;
  std::string model_tag;  // "sbm" | "tilde_sbm" | "er" | "manual"
  uint64_t seed = 0;
  std::vector<std::pair<int32_t, int32_t>> edges;
  Labeling truth;

  std::vector<int64_t> adj_offsets;  // size n+1
  std::vector<int32_t> adj;          // size 2m, neighbors sorted per vertex

  /// Sorts/validates the edge list and builds the adjacency structure.
  void finalize();

  int64_t edge_count() const { return static_cast<int64_t>(edges.size()); }
  int64_t degree(int32_t v) const { return adj_offsets[v + 1] - adj_offsets[v]; }
  std::span<const int32_t> neighbors(int32_t v) const {
    return {adj.data() + adj_offsets[v], static_cast<size_t>(degree(v))};
  }
};

/// Convenience constructor for hand-built graphs in tests and tools.
GraphSample make_graph(int64_t n, int64_t q, std::vector<std::pair<int32_t, int32_t>> edges,
                       std::vector<int32_t> labels = {});

/// Sample labels iid uniform on [0, q) and edges independently with
/// probability a/n (same label) or b/n (different). Exact and O(q^2 + m)
/// via per-community-block geometric skip sampling.
GraphSample sample_sbm(const ModelParams& p, RngStream rng);

/// Sample only the edges, conditional on the supplied labeling (which must be
/// total with labels in [0, q)). Uses the same edge stream as sample_sbm, so
/// sample_sbm(p, rng) draws its labels and then defers to this.
GraphSample sample_sbm_given_labels(const ModelParams& p, const Labeling& labels, RngStream rng);

/// Variant with an exactly-sized uniformly random partition: sizes[c] is the
/// cardinality of community c; edge probabilities are given directly.
GraphSample sample_tilde_sbm(int64_t n, const std::vector<int64_t>& sizes, double a_over_n,
                             double b_over_n, RngStream rng);

/// Erdos-Renyi G(n, d/n); the truth labeling is all-unassigned.
GraphSample sample_er(int64_t n, double d, RngStream rng);

/// q * 1{lu == lv} - 1: the centered label-agreement weight. Labels must be
/// assigned and in [0, q).
int64_t alignment_weight(int32_t lu, int32_t lv, int64_t q);

/// max over label permutations pi of (1/n) #{v : sigma_v = pi(tau_v)},
/// computed with an O(q^3) assignment solver on the q x q confusion matrix.
/// Both labelings must be total with labels in [0, q).
double alignment(const Labeling& sigma, const Labeling& tau, int64_t q);

/// Maximum-total-weight assignment on a dense q x q matrix (row r -> column
/// perm[r]); exposed for testing against permutation brute force.
std::vector<int32_t> max_assignment(const std::vector<std::vector<int64_t>>& weight);

}  // namespace sbmlab
