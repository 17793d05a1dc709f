#include "sbmlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sbmlab/errors.hpp"

namespace sbmlab {

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::AboveKS: return "AboveKS";
    case Regime::BelowKSAboveModified: return "BelowKSAboveModified";
    case Regime::Supercritical: return "Supercritical";
    case Regime::BelowBoth: return "BelowBoth";
  }
  return "?";
}

static void fill_derived(ModelParams& p) {
  const double n = static_cast<double>(p.n);
  const double qd = static_cast<double>(p.q);
  const double row_sum = p.a + (qd - 1.0) * p.b;
  p.d = row_sum / qd;
  p.lambda = row_sum > 0.0 ? (p.a - p.b) / row_sum : 0.0;
  p.chi = (p.n >= 2) ? std::log(qd) / std::log(n) : 0.0;
  const double a_var = p.a * (1.0 - p.a / n);
  const double b_var = p.b * (1.0 - p.b / n);
  p.d_adj = (a_var + (qd - 1.0) * b_var) / qd;
  p.lambda_adj = p.d_adj > 0.0 ? (p.a - p.b) / (qd * p.d_adj) : 0.0;
  p.xi = p.d_adj > 0.0 ? std::min(a_var, b_var) / p.d_adj : 0.0;
}

ModelParams ModelParams::from_rates(int64_t n, int64_t q, double a, double b) {
  if (n < 1) throw RangeError("ModelParams: n must be >= 1");
  if (q < 2) throw RangeError("ModelParams: q must be >= 2");
  if (a < 0.0 || b < 0.0) throw NegativeRate("ModelParams: rates must be nonnegative");
  if (a > static_cast<double>(n) || b > static_cast<double>(n))
    throw RangeError("ModelParams: edge probability above one (rate exceeds n)");
  ModelParams p;
  p.n = n;
  p.q = q;
  p.a = a;
  p.b = b;
  fill_derived(p);
  return p;
}

std::pair<double, double> invert_params(double d, double lambda, int64_t q) {
  if (q < 2) throw RangeError("invert_params: q must be >= 2");
  if (d < 0.0) throw NegativeRate("invert_params: d must be nonnegative");
  if (lambda > 1.0 || lambda < -1.0 / (static_cast<double>(q) - 1.0))
    throw NegativeRate("invert_params: lambda outside [-1/(q-1), 1] makes a rate negative");
  return {d * (1.0 + (static_cast<double>(q) - 1.0) * lambda), d * (1.0 - lambda)};
}

ModelParams ModelParams::from_snr(int64_t n, int64_t q, double d, double lambda) {
  const auto [a, b] = invert_params(d, lambda, q);
  return from_rates(n, q, a, b);
}

double snr_ks(const ModelParams& p) { return p.d * p.lambda * p.lambda; }

double snr_modified(const ModelParams& p) {
  if (p.lambda <= 0.0 || p.n < 2 || p.q < 2 || p.chi <= 0.0) return 0.0;
  return p.d * std::exp(std::log(p.lambda) / p.chi);
}

Regime classify_regime(const ModelParams& p) {
  if (snr_ks(p) > 1.0) return Regime::AboveKS;
  if (snr_modified(p) > 1.0) return Regime::BelowKSAboveModified;
  if (p.d * p.lambda > 1.0) return Regime::Supercritical;
  return Regime::BelowBoth;
}

bool Labeling::is_total() const {
  for (int32_t l : assignment)
    if (l == kUnassigned) return false;
  return true;
}

bool Labeling::is_valid(int64_t q) const {
  for (int32_t l : assignment)
    if (l < 0 || l >= q) return false;
  return true;
}

void GraphSample::finalize() {
  for (auto& e : edges) {
    if (e.first == e.second) throw SchemaMismatch("graph: self-loop");
    if (e.first < 0 || e.second < 0 || e.first >= n || e.second >= n)
      throw SchemaMismatch("graph: endpoint outside [0, n)");
    if (e.first > e.second) std::swap(e.first, e.second);
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
    throw SchemaMismatch("graph: duplicate edge");
  if (!truth.assignment.empty() && static_cast<int64_t>(truth.size()) != n)
    throw SchemaMismatch("graph: truth labeling size != n");

  adj_offsets.assign(n + 1, 0);
  for (const auto& e : edges) {
    ++adj_offsets[e.first + 1];
    ++adj_offsets[e.second + 1];
  }
  for (int64_t v = 0; v < n; ++v) adj_offsets[v + 1] += adj_offsets[v];
  adj.assign(2 * edges.size(), 0);
  std::vector<int64_t> cursor(adj_offsets.begin(), adj_offsets.end() - 1);
  for (const auto& e : edges) {
    adj[cursor[e.first]++] = e.second;
    adj[cursor[e.second]++] = e.first;
  }
  for (int64_t v = 0; v < n; ++v)
    std::sort(adj.begin() + adj_offsets[v], adj.begin() + adj_offsets[v + 1]);
}

GraphSample make_graph(int64_t n, int64_t q, std::vector<std::pair<int32_t, int32_t>> edges,
                       std::vector<int32_t> labels) {
  GraphSample g;
  g.n = n;
  g.q = q;
  g.model_tag = "manual";
  g.seed = 0;
  g.edges = std::move(edges);
  if (!labels.empty()) g.truth = Labeling(std::move(labels));
  g.finalize();
  return g;
}

// --- edge-block skip sampling ------------------------------------------------

// Unrank pair index t in [0, s(s-1)/2) to (i, j), 0 <= i < j < s, lexicographic.
static std::pair<int64_t, int64_t> unrank_pair(int64_t t, int64_t s) {
  const double sd = static_cast<double>(s);
  int64_t i = static_cast<int64_t>(((2.0 * sd - 1.0) - std::sqrt((2.0 * sd - 1.0) * (2.0 * sd - 1.0) -
                                                                 8.0 * static_cast<double>(t))) /
                                   2.0);
  auto offset = [s](int64_t k) { return k * (2 * s - k - 1) / 2; };
  if (i < 0) i = 0;
  while (i + 1 < s && offset(i + 1) <= t) ++i;
  while (i > 0 && offset(i) > t) --i;
  return {i, i + 1 + (t - offset(i))};
}

// Visit each of `total` slots independently with probability p, in order.
template <typename F>
static void skip_sample(int64_t total, double p, RngStream& rng, F&& visit) {
  if (p <= 0.0 || total <= 0) return;
  if (p >= 1.0) {
    for (int64_t t = 0; t < total; ++t) visit(t);
    return;
  }
  int64_t t = rng.skip_geometric(p);
  while (t < total) {
    visit(t);
    t += 1 + rng.skip_geometric(p);
  }
}

// Shared edge generator: communities given as member lists (sorted vertex ids),
// within-probability p_in, across-probability p_out.
static std::vector<std::pair<int32_t, int32_t>> sample_block_edges(
    const std::vector<std::vector<int32_t>>& members, double p_in, double p_out, RngStream& rng) {
  std::vector<std::pair<int32_t, int32_t>> edges;
  const int64_t q = static_cast<int64_t>(members.size());
  for (int64_t c1 = 0; c1 < q; ++c1) {
    const auto& m1 = members[c1];
    const int64_t s1 = static_cast<int64_t>(m1.size());
    // Within-community block.
    skip_sample(s1 * (s1 - 1) / 2, p_in, rng, [&](int64_t t) {
      auto [i, j] = unrank_pair(t, s1);
      edges.emplace_back(m1[i], m1[j]);
    });
    // Across-community blocks.
    for (int64_t c2 = c1 + 1; c2 < q; ++c2) {
      const auto& m2 = members[c2];
      const int64_t s2 = static_cast<int64_t>(m2.size());
      skip_sample(s1 * s2, p_out, rng, [&](int64_t t) {
        int32_t u = m1[t / s2], v = m2[t % s2];
        if (u > v) std::swap(u, v);
        edges.emplace_back(u, v);
      });
    }
  }
  return edges;
}

GraphSample sample_sbm_given_labels(const ModelParams& p, const Labeling& labels, RngStream rng) {
  if (p.n < 1 || p.n > 1000000) throw RangeError("sample_sbm: n outside [1, 1e6]");
  if (static_cast<int64_t>(labels.size()) != p.n)
    throw SizeMismatch("sample_sbm_given_labels: labeling size != n");
  if (!labels.is_valid(p.q))
    throw LabelOutOfRange("sample_sbm_given_labels: labeling not total on [0, q)");
  GraphSample g;
  g.n = p.n;
  g.q = p.q;
  g.model_tag = "sbm";
  g.seed = rng.key();
  g.truth = labels;
  std::vector<std::vector<int32_t>> members(p.q);
  for (int64_t v = 0; v < p.n; ++v) members[labels[v]].push_back(static_cast<int32_t>(v));

  RngStream edge_rng = rng.substream(1);
  g.edges = sample_block_edges(members, p.a / static_cast<double>(p.n),
                               p.b / static_cast<double>(p.n), edge_rng);
  g.finalize();
  return g;
}

GraphSample sample_sbm(const ModelParams& p, RngStream rng) {
  if (p.n < 1 || p.n > 1000000) throw RangeError("sample_sbm: n outside [1, 1e6]");
  RngStream label_rng = rng.substream(0);
  Labeling labels(static_cast<size_t>(p.n));
  for (int64_t v = 0; v < p.n; ++v)
    labels[v] = static_cast<int32_t>(label_rng.uniform_below(p.q));
  return sample_sbm_given_labels(p, labels, rng);
}

GraphSample sample_tilde_sbm(int64_t n, const std::vector<int64_t>& sizes, double a_over_n,
                             double b_over_n, RngStream rng) {
  if (n < 1 || n > 1000000) throw RangeError("sample_tilde_sbm: n outside [1, 1e6]");
  int64_t total = 0;
  for (int64_t s : sizes) {
    if (s < 0) throw SizeMismatch("sample_tilde_sbm: negative community size");
    total += s;
  }
  if (total != n) throw SizeMismatch("sample_tilde_sbm: sizes do not sum to n");
  if (a_over_n < 0.0 || b_over_n < 0.0) throw NegativeRate("sample_tilde_sbm: negative probability");
  if (a_over_n > 1.0 || b_over_n > 1.0) throw RangeError("sample_tilde_sbm: probability above one");

  GraphSample g;
  g.n = n;
  g.q = static_cast<int64_t>(sizes.size());
  g.model_tag = "tilde_sbm";
  g.seed = rng.key();

  std::vector<int32_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  RngStream part_rng = rng.substream(0);
  part_rng.shuffle(order);

  g.truth = Labeling(static_cast<size_t>(n));
  std::vector<std::vector<int32_t>> members(sizes.size());
  int64_t pos = 0;
  for (size_t c = 0; c < sizes.size(); ++c) {
    members[c].assign(order.begin() + pos, order.begin() + pos + sizes[c]);
    std::sort(members[c].begin(), members[c].end());
    for (int32_t v : members[c]) g.truth[v] = static_cast<int32_t>(c);
    pos += sizes[c];
  }

  RngStream edge_rng = rng.substream(1);
  g.edges = sample_block_edges(members, a_over_n, b_over_n, edge_rng);
  g.finalize();
  return g;
}

GraphSample sample_er(int64_t n, double d, RngStream rng) {
  if (n < 1 || n > 1000000) throw RangeError("sample_er: n outside [1, 1e6]");
  if (d < 0.0) throw NegativeRate("sample_er: d must be nonnegative");
  if (d > static_cast<double>(n)) throw RangeError("sample_er: d exceeds n");
  GraphSample g;
  g.n = n;
  g.q = 1;
  g.model_tag = "er";
  g.seed = rng.key();
  g.truth = Labeling();  // sentinel: no planted labels

  RngStream edge_rng = rng.substream(1);
  skip_sample(n * (n - 1) / 2, d / static_cast<double>(n), edge_rng, [&](int64_t t) {
    auto [i, j] = unrank_pair(t, n);
    g.edges.emplace_back(static_cast<int32_t>(i), static_cast<int32_t>(j));
  });
  g.finalize();
  return g;
}

// --- alignment ---------------------------------------------------------------

int64_t alignment_weight(int32_t lu, int32_t lv, int64_t q) {
  if (lu < 0 || lv < 0 || lu >= q || lv >= q)
    throw LabelOutOfRange("alignment_weight: label outside [0, q)");
  return (lu == lv) ? q - 1 : -1;
}

std::vector<int32_t> max_assignment(const std::vector<std::vector<int64_t>>& weight) {
  // Hungarian algorithm with potentials, O(q^3), phrased as minimization of
  // the negated weights. Rows/columns are 1-indexed internally; column 0 is
  // the virtual start of each augmenting path.
  const int q = static_cast<int>(weight.size());
  if (q == 0) return {};
  const int64_t kInf = std::numeric_limits<int64_t>::max() / 4;
  std::vector<int64_t> u(q + 1, 0), v(q + 1, 0);
  std::vector<int> match(q + 1, 0), way(q + 1, 0);
  for (int i = 1; i <= q; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<int64_t> minv(q + 1, kInf);
    std::vector<char> used(q + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      int64_t delta = kInf;
      int j1 = -1;
      for (int j = 1; j <= q; ++j) {
        if (used[j]) continue;
        const int64_t cur = -weight[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= q; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int32_t> perm(q, -1);
  for (int j = 1; j <= q; ++j)
    if (match[j] != 0) perm[match[j] - 1] = j - 1;
  return perm;
}

double alignment(const Labeling& sigma, const Labeling& tau, int64_t q) {
  if (sigma.size() != tau.size()) throw SizeMismatch("alignment: labelings differ in size");
  if (sigma.size() == 0) throw SizeMismatch("alignment: empty labelings");
  if (!sigma.is_valid(q) || !tau.is_valid(q))
    throw LabelOutOfRange("alignment: labeling not total on [0, q)");
  const int64_t n = static_cast<int64_t>(sigma.size());
  std::vector<std::vector<int64_t>> confusion(q, std::vector<int64_t>(q, 0));
  for (int64_t vtx = 0; vtx < n; ++vtx) ++confusion[tau[vtx]][sigma[vtx]];
  const std::vector<int32_t> perm = max_assignment(confusion);
  int64_t agree = 0;
  for (int64_t t = 0; t < q; ++t) agree += confusion[t][perm[t]];
  return static_cast<double>(agree) / static_cast<double>(n);
}

}  // namespace sbmlab
