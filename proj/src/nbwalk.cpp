#include "sbmlab/nbwalk.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "sbmlab/errors.hpp"

namespace sbmlab {

const char* walk_kind_name(WalkKind k) {
  switch (k) {
    case WalkKind::NonBacktracking: return "NonBacktracking";
    case WalkKind::SelfAvoidingOracle: return "SelfAvoidingOracle";
  }
  return "?";
}

WeightOperator::WeightOperator(const GraphSample& g, double d, const std::vector<int32_t>& avoid)
    : g_(&g) {
  if (d < 0.0) throw NegativeRate("WeightOperator: d must be nonnegative");
  if (d > static_cast<double>(g.n)) throw RangeError("WeightOperator: d exceeds n");
  const double dn = d / static_cast<double>(g.n);
  p_ = 1.0 - dn;
  mu_ = -dn;
  allowed_.assign(static_cast<size_t>(g.n), 1);
  for (int32_t v : avoid) {
    if (v < 0 || v >= g.n) throw RangeError("WeightOperator: avoid vertex outside [0, n)");
    allowed_[static_cast<size_t>(v)] = 0;
  }
  allowed_list_.reserve(static_cast<size_t>(g.n));
  for (int32_t v = 0; v < g.n; ++v)
    if (allowed_[static_cast<size_t>(v)]) allowed_list_.push_back(v);
  deg_allowed_.assign(static_cast<size_t>(g.n), 0);
  for (int32_t v = 0; v < g.n; ++v) {
    int64_t c = 0;
    for (int32_t w : g.neighbors(v)) c += allowed_[static_cast<size_t>(w)];
    deg_allowed_[static_cast<size_t>(v)] = c;
  }
}

void WeightOperator::adjacency_scatter(const std::vector<double>& x, std::vector<double>& ax,
                                       double& sum_out) const {
  ax.assign(x.size(), 0.0);
  double sum = 0.0;
  for (int32_t v : allowed_list_) {
    const double xv = x[static_cast<size_t>(v)];
    if (xv == 0.0) continue;
    sum += xv;
    for (int32_t w : g_->neighbors(v)) ax[static_cast<size_t>(w)] += xv;
  }
  sum_out = sum;
}

namespace {

void check_magnitude(const std::vector<double>& xs) {
  for (double x : xs)
    if (!std::isfinite(x) || std::fabs(x) > 1e290)
      throw NumericalOverflow("nbw_vector: walk sums exceeded the floating-point budget");
}

}  // namespace

WalkStatVector nbw_vector(const WeightOperator& op, int32_t u, int32_t k) {
  const GraphSample& g = op.graph();
  if (u < 0 || u >= g.n) throw RangeError("nbw_vector: source outside [0, n)");
  if (k < 1) throw BadLength("nbw_vector: k must be >= 1");
  if (k > 200) throw BadLength("nbw_vector: k above the 200-step cap");

  const size_t n = static_cast<size_t>(g.n);
  const double p = op.p(), mu = op.mu();
  const double P = p + mu, Q = p * mu;

  WalkStatVector out;
  out.source = u;
  out.k = k;
  out.kind = WalkKind::NonBacktracking;
  out.values.assign(n, 0.0);

  if (k == 1) {
    // Both endpoints are exempt and there is no interior: values_v = W_{uv}.
    for (size_t v = 0; v < n; ++v) out.values[v] = mu;
    for (int32_t w : g.neighbors(u)) out.values[static_cast<size_t>(w)] += 1.0;
    out.values[static_cast<size_t>(u)] = 0.0;
    return out;
  }

  const bool source_allowed = op.allowed(u);
  const int64_t s_size = op.allowed_count();

  // r_v / r3_v: sums of W_{vw}^2 / W_{vw}^3 over allowed w != v.
  auto r_at = [&](int32_t v) {
    const double deg = static_cast<double>(op.allowed_degree(v));
    const double others = static_cast<double>(s_size - (op.allowed(v) ? 1 : 0)) - deg;
    return deg * p * p + others * mu * mu;
  };
  auto r3_at = [&](int32_t v) {
    const double deg = static_cast<double>(op.allowed_degree(v));
    const double others = static_cast<double>(s_size - (op.allowed(v) ? 1 : 0)) - deg;
    return deg * p * p * p + others * mu * mu * mu;
  };

  // State vectors live on the allowed coordinates; walks may only end at a
  // disallowed vertex on the very last step (handled by the extension below).
  std::vector<double> m_prev(n, 0.0), h_prev(n, 0.0);  // step t-2
  std::vector<double> m_cur(n, 0.0), h_cur(n, 0.0);    // step t-1
  std::vector<double> m_next(n, 0.0), h_next(n, 0.0);
  std::vector<double> ax(n, 0.0);

  // Step 1. h re-weights each walk by its final step weight; its step-1 value
  // participates in corrections only when the source is a legal interior.
  for (int32_t v : op.allowed_list()) {
    if (v == u) continue;
    m_cur[static_cast<size_t>(v)] = mu;
    if (source_allowed) h_cur[static_cast<size_t>(v)] = mu * mu;
  }
  for (int32_t w : g.neighbors(u)) {
    if (!op.allowed(w)) continue;
    m_cur[static_cast<size_t>(w)] = p;
    if (source_allowed) h_cur[static_cast<size_t>(w)] = p * p;
  }

  for (int32_t t = 2; t <= k; ++t) {
    double sum_m = 0.0;
    op.adjacency_scatter(m_cur, ax, sum_m);

    if (t == k) {
      // Extension to excluded endpoints: W_{xv} summed over allowed x needs
      // no backtracking correction there (the step before last is allowed,
      // the target is not). A length-2 walk back to an excluded source would
      // backtrack, hence the special case.
      for (size_t v = 0; v < n; ++v)
        if (!op.allowed(static_cast<int32_t>(v))) out.values[v] = mu * sum_m + ax[v];
      if (!source_allowed && k == 2) out.values[static_cast<size_t>(u)] = 0.0;
    }

    if (t == 2) {
      for (int32_t v : op.allowed_list()) {
        const size_t vi = static_cast<size_t>(v);
        const double wm = mu * (sum_m - m_cur[vi]) + ax[vi];
        const double w2m = mu * mu * (sum_m - m_cur[vi]) + (p * p - mu * mu) * ax[vi];
        m_next[vi] = wm;
        h_next[vi] = w2m;
      }
      if (source_allowed) {
        m_next[static_cast<size_t>(u)] -= r_at(u);
        h_next[static_cast<size_t>(u)] -= r3_at(u);
      }
    } else {
      const double hh = P * P - Q;  // cube coefficient: x^3 = (P^2 - Q) x - Q P
      // The P/Q correction terms re-expand sums over the penultimate vertex
      // of the step-(t-2) state, which is a legal interior except at t = 3,
      // where it is the source itself: with an excluded source those sums
      // are empty, so the Q-weighted occurrences of m^(t-2) drop out (h is
      // already zeroed at step 1 in that case).
      const bool pen_allowed = source_allowed || t > 3;
      for (int32_t v : op.allowed_list()) {
        const size_t vi = static_cast<size_t>(v);
        const double wm = mu * (sum_m - m_cur[vi]) + ax[vi];
        const double w2m = mu * mu * (sum_m - m_cur[vi]) + (p * p - mu * mu) * ax[vi];
        const double mp = pen_allowed ? m_prev[vi] : 0.0;
        m_next[vi] = wm - r_at(v) * m_prev[vi] + P * h_prev[vi] - Q * mp;
        h_next[vi] = w2m - r3_at(v) * m_prev[vi] + hh * h_prev[vi] - Q * P * mp;
      }
    }

    std::swap(m_prev, m_cur);
    std::swap(h_prev, h_cur);
    std::swap(m_cur, m_next);
    std::swap(h_cur, h_next);
    std::fill(m_next.begin(), m_next.end(), 0.0);
    std::fill(h_next.begin(), h_next.end(), 0.0);
    check_magnitude(m_cur);
  }

  for (int32_t v : op.allowed_list()) out.values[static_cast<size_t>(v)] = m_cur[static_cast<size_t>(v)];
  check_magnitude(out.values);
  return out;
}

WalkStatVector nbw_vector(const GraphSample& g, int32_t u, int32_t k, double d,
                          const std::vector<int32_t>& avoid) {
  const WeightOperator op(g, d, avoid);
  return nbw_vector(op, u, k);
}

WalkStatVector nbw_vector_multi(const WeightOperator& op, const std::vector<int32_t>& sources,
                                int32_t k, WalkScratch* scratch) {
  const GraphSample& g = op.graph();
  for (int32_t u : sources) {
    if (u < 0 || u >= g.n) throw RangeError("nbw_vector_multi: source outside [0, n)");
    if (!op.allowed(u)) throw RangeError("nbw_vector_multi: sources must be allowed vertices");
  }
  if (k < 1) throw BadLength("nbw_vector_multi: k must be >= 1");
  if (k > 200) throw BadLength("nbw_vector_multi: k above the 200-step cap");

  const size_t n = static_cast<size_t>(g.n);
  const double p = op.p(), mu = op.mu();
  const double P = p + mu, Q = p * mu;

  WalkStatVector out;
  out.source = sources.size() == 1 ? sources.front() : -1;
  out.k = k;
  out.kind = WalkKind::NonBacktracking;
  out.values.assign(n, 0.0);
  if (sources.empty()) return out;

  WalkScratch local;
  WalkScratch& ws = scratch ? *scratch : local;
  auto& m_prev = ws.m_prev;
  auto& h_prev = ws.h_prev;
  auto& m_cur = ws.m_cur;
  auto& h_cur = ws.h_cur;
  auto& m_next = ws.m_next;
  auto& h_next = ws.h_next;
  auto& ax = ws.ax;
  m_prev.assign(n, 0.0);
  h_prev.assign(n, 0.0);
  m_cur.assign(n, 0.0);
  h_cur.assign(n, 0.0);
  m_next.assign(n, 0.0);
  h_next.assign(n, 0.0);

  // Source multiplicity vector x0 and its adjacency image; every correction
  // term in the one-source recurrence is linear in x0 when all sources are
  // legal interiors, so their walk sums evolve as a single state pair.
  std::vector<double> x0(n, 0.0);
  double x0_sum = 0.0;
  for (int32_t u : sources) {
    x0[static_cast<size_t>(u)] += 1.0;
    x0_sum += 1.0;
  }
  op.adjacency_scatter(x0, ax, x0_sum);

  if (k == 1) {
    for (size_t v = 0; v < n; ++v) out.values[v] = mu * (x0_sum - x0[v]) + ax[v];
    return out;
  }

  const int64_t s_size = op.allowed_count();
  auto r_at = [&](int32_t v) {
    const double deg = static_cast<double>(op.allowed_degree(v));
    const double others = static_cast<double>(s_size - (op.allowed(v) ? 1 : 0)) - deg;
    return deg * p * p + others * mu * mu;
  };
  auto r3_at = [&](int32_t v) {
    const double deg = static_cast<double>(op.allowed_degree(v));
    const double others = static_cast<double>(s_size - (op.allowed(v) ? 1 : 0)) - deg;
    return deg * p * p * p + others * mu * mu * mu;
  };

  for (int32_t v : op.allowed_list()) {
    const size_t vi = static_cast<size_t>(v);
    m_cur[vi] = mu * (x0_sum - x0[vi]) + ax[vi];
    h_cur[vi] = mu * mu * (x0_sum - x0[vi]) + (p * p - mu * mu) * ax[vi];
  }

  for (int32_t t = 2; t <= k; ++t) {
    double sum_m = 0.0;
    op.adjacency_scatter(m_cur, ax, sum_m);

    if (t == k) {
      // Extension to excluded endpoints; the penultimate vertex is always a
      // legal interior here, so no backtracking correction is needed.
      for (size_t v = 0; v < n; ++v)
        if (!op.allowed(static_cast<int32_t>(v))) out.values[v] = mu * sum_m + ax[v];
    }

    if (t == 2) {
      for (int32_t v : op.allowed_list()) {
        const size_t vi = static_cast<size_t>(v);
        m_next[vi] = mu * (sum_m - m_cur[vi]) + ax[vi] - r_at(v) * x0[vi];
        h_next[vi] = mu * mu * (sum_m - m_cur[vi]) + (p * p - mu * mu) * ax[vi] - r3_at(v) * x0[vi];
      }
    } else {
      const double hh = P * P - Q;  // cube coefficient: x^3 = (P^2 - Q) x - Q P
      for (int32_t v : op.allowed_list()) {
        const size_t vi = static_cast<size_t>(v);
        const double wm = mu * (sum_m - m_cur[vi]) + ax[vi];
        const double w2m = mu * mu * (sum_m - m_cur[vi]) + (p * p - mu * mu) * ax[vi];
        m_next[vi] = wm - r_at(v) * m_prev[vi] + P * h_prev[vi] - Q * m_prev[vi];
        h_next[vi] = w2m - r3_at(v) * m_prev[vi] + hh * h_prev[vi] - Q * P * m_prev[vi];
      }
    }

    std::swap(m_prev, m_cur);
    std::swap(h_prev, h_cur);
    std::swap(m_cur, m_next);
    std::swap(h_cur, h_next);
    std::fill(m_next.begin(), m_next.end(), 0.0);
    std::fill(h_next.begin(), h_next.end(), 0.0);
    check_magnitude(m_cur);
  }

  for (int32_t v : op.allowed_list()) out.values[static_cast<size_t>(v)] = m_cur[static_cast<size_t>(v)];
  check_magnitude(out.values);
  return out;
}

// --- exhaustive oracles -------------------------------------------------------

namespace {

struct BruteContext {
  const GraphSample* g;
  double p, mu;
  std::vector<char> allowed;
  std::vector<std::vector<char>> adj;
  int32_t k;
  std::vector<double> values;

  double weight(int32_t x, int32_t y) const { return adj[x][y] ? p : mu; }
};

void check_brute_guard(const GraphSample& g, int32_t k) {
  if (g.n > 12 || k > 7) throw TooLarge("walk oracle: guarded to n <= 12 and k <= 7");
  if (k < 1) throw BadLength("walk oracle: k must be >= 1");
}

BruteContext make_brute_context(const GraphSample& g, int32_t k, double d,
                                const std::vector<int32_t>& avoid) {
  BruteContext ctx;
  ctx.g = &g;
  const double dn = d / static_cast<double>(g.n);
  ctx.p = 1.0 - dn;
  ctx.mu = -dn;
  ctx.allowed.assign(static_cast<size_t>(g.n), 1);
  for (int32_t v : avoid) {
    if (v < 0 || v >= g.n) throw RangeError("walk oracle: avoid vertex outside [0, n)");
    ctx.allowed[static_cast<size_t>(v)] = 0;
  }
  ctx.adj.assign(static_cast<size_t>(g.n), std::vector<char>(static_cast<size_t>(g.n), 0));
  for (const auto& [a, b] : g.edges) {
    ctx.adj[static_cast<size_t>(a)][static_cast<size_t>(b)] = 1;
    ctx.adj[static_cast<size_t>(b)][static_cast<size_t>(a)] = 1;
  }
  ctx.k = k;
  ctx.values.assign(static_cast<size_t>(g.n), 0.0);
  return ctx;
}

void nbw_dfs(BruteContext& ctx, int32_t prev, int32_t cur, int32_t depth, double product) {
  if (depth == ctx.k) {
    ctx.values[static_cast<size_t>(cur)] += product;
    return;
  }
  const bool last_step = (depth + 1 == ctx.k);
  for (int32_t next = 0; next < ctx.g->n; ++next) {
    if (next == cur || next == prev) continue;
    if (!last_step && !ctx.allowed[static_cast<size_t>(next)]) continue;
    const double w = ctx.weight(cur, next);
    if (w == 0.0) continue;
    nbw_dfs(ctx, cur, next, depth + 1, product * w);
  }
}

void saw_dfs(BruteContext& ctx, uint32_t used, int32_t cur, int32_t depth, double product) {
  if (depth == ctx.k) {
    ctx.values[static_cast<size_t>(cur)] += product;
    return;
  }
  const bool last_step = (depth + 1 == ctx.k);
  for (int32_t next = 0; next < ctx.g->n; ++next) {
    if (used & (1u << next)) continue;
    if (!last_step && !ctx.allowed[static_cast<size_t>(next)]) continue;
    const double w = ctx.weight(cur, next);
    if (w == 0.0) continue;
    saw_dfs(ctx, used | (1u << next), next, depth + 1, product * w);
  }
}

}  // namespace

std::vector<double> nbw_bruteforce_vector(const GraphSample& g, int32_t u, int32_t k, double d,
                                          const std::vector<int32_t>& avoid) {
  check_brute_guard(g, k);
  if (u < 0 || u >= g.n) throw RangeError("walk oracle: source outside [0, n)");
  BruteContext ctx = make_brute_context(g, k, d, avoid);
  nbw_dfs(ctx, -1, u, 0, 1.0);
  return ctx.values;
}

double nbw_bruteforce(const GraphSample& g, int32_t u, int32_t v, int32_t k, double d,
                      const std::vector<int32_t>& avoid) {
  if (v < 0 || v >= g.n) throw RangeError("walk oracle: target outside [0, n)");
  return nbw_bruteforce_vector(g, u, k, d, avoid)[static_cast<size_t>(v)];
}

std::vector<double> saw_bruteforce_vector(const GraphSample& g, int32_t u, int32_t k, double d,
                                          const std::vector<int32_t>& avoid) {
  check_brute_guard(g, k);
  if (u < 0 || u >= g.n) throw RangeError("walk oracle: source outside [0, n)");
  BruteContext ctx = make_brute_context(g, k, d, avoid);
  saw_dfs(ctx, 1u << u, u, 0, 1.0);
  return ctx.values;
}

double saw_bruteforce(const GraphSample& g, int32_t u, int32_t v, int32_t k, double d,
                      const std::vector<int32_t>& avoid) {
  if (v < 0 || v >= g.n) throw RangeError("walk oracle: target outside [0, n)");
  return saw_bruteforce_vector(g, u, k, d, avoid)[static_cast<size_t>(v)];
}

// --- walk statistic sums -------------------------------------------------------

std::vector<double> z_vector(const GraphSample& g, int32_t rep, const std::vector<int32_t>& part,
                             int32_t k, double d) {
  if (rep < 0 || rep >= g.n) throw RangeError("z_vector: representative outside [0, n)");
  std::vector<char> in_part(static_cast<size_t>(g.n), 0);
  for (int32_t v : part) {
    if (v < 0 || v >= g.n) throw RangeError("z_vector: part vertex outside [0, n)");
    in_part[static_cast<size_t>(v)] = 1;
  }
  std::vector<double> total(static_cast<size_t>(g.n), 0.0);

  std::vector<int32_t> sources;
  for (int32_t w : g.neighbors(rep))
    if (in_part[static_cast<size_t>(w)]) sources.push_back(w);
  if (sources.empty()) return total;

  std::vector<int32_t> complement;
  complement.reserve(static_cast<size_t>(g.n));
  for (int32_t v = 0; v < g.n; ++v)
    if (!in_part[static_cast<size_t>(v)]) complement.push_back(v);

  const WeightOperator op(g, d, complement);
  return nbw_vector_multi(op, sources, k).values;
}

double z_statistic(const GraphSample& g, int32_t w, int32_t rep, const std::vector<int32_t>& part,
                   int32_t k, double d) {
  if (w < 0 || w >= g.n) throw RangeError("z_statistic: target outside [0, n)");
  return z_vector(g, rep, part, k, d)[static_cast<size_t>(w)];
}

// --- serialization --------------------------------------------------------------

void save_walk_csv(const WalkStatVector& w, std::ostream& out) {
  out << "source=" << w.source << ",k=" << w.k << ",kind=" << walk_kind_name(w.kind) << '\n';
  out << "target,value\n";
  char buf[64];
  for (size_t v = 0; v < w.values.size(); ++v) {
    const auto res = std::to_chars(buf, buf + sizeof(buf), w.values[v],
                                   std::chars_format::general, 17);
    out << v << ',' << std::string_view(buf, static_cast<size_t>(res.ptr - buf)) << '\n';
  }
  if (!out) throw IoError("save_walk_csv: write failed");
}

WalkStatVector load_walk_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaMismatch("load_walk_csv: missing metadata line");
  WalkStatVector w;
  {
    int source = 0, k = 0;
    char kind_buf[64] = {0};
    if (std::sscanf(line.c_str(), "source=%d,k=%d,kind=%63s", &source, &k, kind_buf) != 3)
      throw SchemaMismatch("load_walk_csv: bad metadata line");
    w.source = source;
    w.k = k;
    const std::string kind(kind_buf);
    if (kind == walk_kind_name(WalkKind::NonBacktracking)) {
      w.kind = WalkKind::NonBacktracking;
    } else if (kind == walk_kind_name(WalkKind::SelfAvoidingOracle)) {
      w.kind = WalkKind::SelfAvoidingOracle;
    } else {
      throw SchemaMismatch("load_walk_csv: unknown kind");
    }
  }
  if (!std::getline(in, line) || line != "target,value")
    throw SchemaMismatch("load_walk_csv: missing column header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const size_t comma = line.find(',');
    if (comma == std::string::npos) throw SchemaMismatch("load_walk_csv: bad row");
    size_t target = 0;
    {
      const auto res = std::from_chars(line.data(), line.data() + comma, target);
      if (res.ec != std::errc() || res.ptr != line.data() + comma)
        throw SchemaMismatch("load_walk_csv: bad target");
    }
    double value = 0.0;
    {
      const char* b = line.data() + comma + 1;
      const char* e = line.data() + line.size();
      const auto res = std::from_chars(b, e, value);
      if (res.ec != std::errc() || res.ptr != e) throw SchemaMismatch("load_walk_csv: bad value");
    }
    if (target != w.values.size()) throw SchemaMismatch("load_walk_csv: targets must be 0..n-1");
    w.values.push_back(value);
  }
  return w;
}

}  // namespace sbmlab
