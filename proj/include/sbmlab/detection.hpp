#pragma once

#include <cstdint>
#include <string>

#include "sbmlab/model.hpp"

namespace sbmlab {

/// Which edge law an expectation or verdict refers to.
enum class GraphLaw { ER, SBM };

/// Outcome of the triangle-count distinguisher. The verdict is SBM exactly
/// when the observed count exceeds the threshold. variance_sbm is reported
/// for diagnostics only and never enters the decision.
struct DetectionVerdict {
  double statistic = 0.0;
  double threshold = 0.0;
  GraphLaw verdict = GraphLaw::ER;
  double expected_er = 0.0;
  double expected_sbm = 0.0;
  double variance_sbm = 0.0;
  /// True when q * lambda^3 lies within a factor of two of 1, where the two
  /// models' leading-order triangle counts coincide and the test loses power.
  bool weak_separation = false;
};

/// Exact number of triangles (3-cliques), via sorted-neighbor intersection
/// over edges; each triangle is counted once at its highest-index vertex.
/// Cost O(sum of deg^2) in the worst case.
int64_t count_triangles(const GraphSample& g);

/// Closed-form expected triangle count. ER: C(n,3)(d/n)^3. SBM: the sum over
/// the three community patterns of a triple (all same, exactly two same, all
/// distinct), evaluated with real-valued binomial coefficients in n/q.
double expected_triangles(const ModelParams& p, GraphLaw model);

/// Leading-order variance of the SBM triangle count: the expectation plus a
/// shared-edge term 4q C(n/q,4) ((a/n)^5 - (a/n)^6). Diagnostic only.
double triangle_count_variance(const ModelParams& p);

/// Count triangles and compare against the geometric mean of the two
/// expected counts. Throws DegenerateGap when the expectations differ by
/// less than one triangle (the statistic is powerless at this size).
DetectionVerdict detect_triangle(const GraphSample& g, const ModelParams& p);

/// One JSON object describing the verdict, for the `detect` CLI subcommand.
std::string detection_json(const DetectionVerdict& v, const ModelParams& p, uint64_t seed);

enum class PairVerdict { Same, Different };

/// Classify whether u and v look like members of the same community by their
/// number of common neighbors X = |N(u) ∩ N(v)|. Returns Same when X clears
/// the midpoint between the two conditional means, i.e.
///   X >= 2ab/(nq) + b^2(1-2/q)/n + (a-b)^2/(2nq).
/// Informative only in dense scalings; with bounded degrees X is almost
/// always zero.
PairVerdict common_neighbor_test(const GraphSample& g, int32_t u, int32_t v,
                                 const ModelParams& p);

}  // namespace sbmlab
