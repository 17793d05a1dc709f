#include "sbmlab/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "sbmlab/errors.hpp"
#include "sbmlab/nbwalk.hpp"

namespace sbmlab {

namespace {

// First m entries of a uniformly shuffled pool (partial Fisher-Yates).
std::vector<int32_t> draw_without_replacement(std::vector<int32_t> pool, size_t m, RngStream& rng) {
  for (size_t i = 0; i < m; ++i) {
    const size_t j = i + static_cast<size_t>(rng.uniform_below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(m);
  return pool;
}

void check_config(const RecoveryConfig& cfg) {
  if (cfg.k < 1) throw BadLength("recovery: walk length k must be >= 1");
  if (cfg.M < 1) throw RangeError("recovery: part count M must be >= 1");
  if (!(cfg.threshold_factor > 0.0 && cfg.threshold_factor < 1.0))
    throw RangeError("recovery: threshold_factor must lie in (0, 1)");
}

// Fraction of within-community edge rate among all rates leaving a vertex:
// a / (a + (q-1) b). Zero when the graph has no expected edges at all.
double within_rate_share(const ModelParams& p) {
  const double total = p.a + static_cast<double>(p.q - 1) * p.b;
  return total > 0.0 ? p.a / total : 0.0;
}

struct ClassifierState {
  std::vector<int32_t> cand_count;
  std::vector<int32_t> cand_last;
  std::vector<char> alive;
  std::vector<std::vector<int32_t>> cand_lists;
};

// Shared tail of both recovery variants: turn candidate counts into labels,
// using per-vertex substreams for ties so output is scheduling-independent.
RecoveryReport assemble_report(const GraphSample& g, const ModelParams& p,
                               const RecoveryConfig& cfg, const RepresentativeSet& reps,
                               const std::vector<char>& classified, ClassifierState& st,
                               RngStream& rng) {
  RecoveryReport report;
  report.k = cfg.k;
  report.M = cfg.M;
  report.labels.assignment.assign(static_cast<size_t>(g.n), Labeling::kUnassigned);

  RngStream tie_rng = rng.substream(2);
  int64_t n_classified = 0, n_zero = 0, n_multi = 0;
  for (int32_t v = 0; v < g.n; ++v) {
    const size_t vi = static_cast<size_t>(v);
    if (classified[vi]) {
      ++n_classified;
      if (st.cand_count[vi] == 1) {
        report.labels.assignment[vi] = st.cand_last[vi];
      } else {
        if (st.cand_count[vi] == 0) ++n_zero;
        else ++n_multi;
        report.labels.assignment[vi] =
            static_cast<int32_t>(tie_rng.substream(static_cast<uint64_t>(v))
                                     .uniform_below(static_cast<uint64_t>(p.q)));
      }
    } else {
      // Pool vertices other than the anchors get uniform random labels.
      report.labels.assignment[vi] =
          static_cast<int32_t>(tie_rng.substream(static_cast<uint64_t>(v))
                                   .uniform_below(static_cast<uint64_t>(p.q)));
    }
  }
  for (size_t l = 0; l < reps.u_star.size(); ++l)
    report.labels.assignment[static_cast<size_t>(reps.u_star[l])] = static_cast<int32_t>(l);

  if (n_classified > 0) {
    report.fraction_zero_candidate = static_cast<double>(n_zero) / static_cast<double>(n_classified);
    report.fraction_multi_candidate =
        static_cast<double>(n_multi) / static_cast<double>(n_classified);
  }
  if (cfg.collect_candidates) report.candidates = std::move(st.cand_lists);
  return report;
}

}  // namespace

RepresentativeSet select_representatives(const GraphSample& g, int64_t q, RngStream rng) {
  if (q < 1) throw RangeError("select_representatives: q must be >= 1");
  if (g.n <= q) throw RangeError("select_representatives: requires n > q");

  const double nd = static_cast<double>(g.n);
  const size_t pool_size =
      static_cast<size_t>(std::ceil(std::sqrt(nd * static_cast<double>(q))));

  RepresentativeSet reps;
  std::vector<int32_t> all(static_cast<size_t>(g.n));
  std::iota(all.begin(), all.end(), 0);
  const size_t take = std::min(pool_size, all.size());
  reps.u_all = draw_without_replacement(std::move(all), take, rng);
  std::sort(reps.u_all.begin(), reps.u_all.end());

  reps.degree_floor = std::max<int64_t>(
      1, static_cast<int64_t>(std::ceil(std::log(std::max(1e-12, std::log(nd))))));

  std::vector<char> in_pool(static_cast<size_t>(g.n), 0);
  for (int32_t v : reps.u_all) in_pool[static_cast<size_t>(v)] = 1;

  std::vector<int32_t> qualified;
  for (int32_t v : reps.u_all) {
    int64_t deg_out = 0;
    for (int32_t w : g.neighbors(v)) deg_out += in_pool[static_cast<size_t>(w)] ? 0 : 1;
    if (deg_out >= reps.degree_floor) qualified.push_back(v);
  }
  if (qualified.size() < static_cast<size_t>(q)) {
    std::ostringstream msg;
    msg << "select_representatives: only " << qualified.size() << " of " << reps.u_all.size()
        << " pool vertices reach degree " << reps.degree_floor << " outside the pool (need " << q
        << ")";
    throw InsufficientCandidates(msg.str());
  }
  reps.u_star = draw_without_replacement(std::move(qualified), static_cast<size_t>(q), rng);
  return reps;
}

namespace {

RecoveryConfig single_part_schedule(const ModelParams& p) {
  if (!(snr_ks(p) > 1.0))
    throw EmptyInterval("choose_schedule: single-part walk exponent needs d * lambda^2 > 1");
  RecoveryConfig cfg;
  cfg.M = 1;
  cfg.beta = 2.2 / std::log(p.d * p.lambda * p.lambda);
  cfg.k = std::max<int32_t>(
      1, static_cast<int32_t>(std::floor(cfg.beta * std::log(static_cast<double>(p.n)))));
  return cfg;
}

RecoveryConfig multi_part_schedule(const ModelParams& p) {
  const double s = p.s();
  if (!(s > 1.0))
    throw EmptyInterval("choose_schedule: multi-part walk exponent needs d * lambda > 1");
  const double lo = (1.0 - p.chi) / std::log(s);
  const double ratio = p.d / (s * s);
  const double hi = ratio > 1.0 ? (2.0 * p.chi - 1.0) / std::log(ratio)
                                : std::numeric_limits<double>::infinity();
  if (!(lo < hi) || lo <= 0.0) {
    std::ostringstream msg;
    msg << "choose_schedule: admissible exponent interval (" << lo << ", " << hi << ") is empty";
    throw EmptyInterval(msg.str());
  }
  RecoveryConfig cfg;
  cfg.beta = std::isinf(hi) ? 1.5 * lo : 0.5 * (lo + hi);
  cfg.M = std::max<int32_t>(1, static_cast<int32_t>(std::ceil(std::log(p.d))));
  cfg.k = std::max<int32_t>(
      1, static_cast<int32_t>(std::floor(
             cfg.beta * std::log(static_cast<double>(p.n) / static_cast<double>(cfg.M)))));
  return cfg;
}

}  // namespace

RecoveryConfig choose_schedule(const ModelParams& p, WalkPlan plan) {
  switch (plan) {
    case WalkPlan::SinglePart: return single_part_schedule(p);
    case WalkPlan::MultiPart: return multi_part_schedule(p);
    case WalkPlan::Auto: break;
  }
  if (snr_ks(p) > 1.0) return single_part_schedule(p);
  if (snr_modified(p) > 1.0) return multi_part_schedule(p);
  throw EmptyInterval("choose_schedule: no admissible walk exponent at these parameters");
}

RecoveryConfig fallback_schedule(const ModelParams& p) {
  RecoveryConfig cfg;
  cfg.M = 1;
  cfg.beta = 0.0;
  cfg.k = std::max<int32_t>(
      1, static_cast<int32_t>(std::floor(std::log(static_cast<double>(p.n)))));
  return cfg;
}

RecoveryReport recover_below_ks(const GraphSample& g, const ModelParams& p,
                                const RecoveryConfig& cfg, RngStream rng) {
  check_config(cfg);
  const RepresentativeSet reps = select_representatives(g, p.q, rng.substream(0));

  std::vector<char> in_pool(static_cast<size_t>(g.n), 0);
  for (int32_t v : reps.u_all) in_pool[static_cast<size_t>(v)] = 1;
  std::vector<int32_t> non_pool;
  non_pool.reserve(static_cast<size_t>(g.n) - reps.u_all.size());
  for (int32_t v = 0; v < g.n; ++v)
    if (!in_pool[static_cast<size_t>(v)]) non_pool.push_back(v);

  // One uniformly random split into M near-equal parts serves every anchor:
  // walk sums from distinct anchors never interact, so sharing the split only
  // shares sampling noise, not signal.
  RngStream part_rng = rng.substream(1);
  part_rng.shuffle(non_pool);
  const int32_t M = cfg.M;
  std::vector<std::vector<int32_t>> parts(static_cast<size_t>(M));
  {
    const size_t total = non_pool.size();
    const size_t base = total / static_cast<size_t>(M);
    const size_t extra = total % static_cast<size_t>(M);
    size_t pos = 0;
    for (int32_t i = 0; i < M; ++i) {
      const size_t len = base + (static_cast<size_t>(i) < extra ? 1 : 0);
      parts[static_cast<size_t>(i)].assign(non_pool.begin() + static_cast<int64_t>(pos),
                                           non_pool.begin() + static_cast<int64_t>(pos + len));
      pos += len;
    }
  }

  std::vector<WeightOperator> ops;
  ops.reserve(static_cast<size_t>(M));
  std::vector<char> in_part(static_cast<size_t>(g.n), 0);
  for (int32_t i = 0; i < M; ++i) {
    std::fill(in_part.begin(), in_part.end(), 0);
    for (int32_t v : parts[static_cast<size_t>(i)]) in_part[static_cast<size_t>(v)] = 1;
    std::vector<int32_t> avoid;
    avoid.reserve(static_cast<size_t>(g.n) - parts[static_cast<size_t>(i)].size());
    for (int32_t v = 0; v < g.n; ++v)
      if (!in_part[static_cast<size_t>(v)]) avoid.push_back(v);
    ops.emplace_back(g, p.d, avoid);
  }

  const double rho = within_rate_share(p);
  ClassifierState st;
  st.cand_count.assign(static_cast<size_t>(g.n), 0);
  st.cand_last.assign(static_cast<size_t>(g.n), -1);
  st.alive.assign(static_cast<size_t>(g.n), 0);
  if (cfg.collect_candidates) st.cand_lists.assign(static_cast<size_t>(g.n), {});

  std::vector<char> classified(static_cast<size_t>(g.n), 0);
  for (int32_t v : non_pool) classified[static_cast<size_t>(v)] = 1;

  WalkScratch scratch;
  std::vector<int32_t> sources;
  for (int64_t l = 0; l < p.q; ++l) {
    const int32_t anchor = reps.u_star[static_cast<size_t>(l)];
    for (int32_t v : non_pool) st.alive[static_cast<size_t>(v)] = 1;

    for (int32_t i = 0; i < M; ++i) {
      const WeightOperator& op = ops[static_cast<size_t>(i)];
      sources.clear();
      for (int32_t u : g.neighbors(anchor))
        if (op.allowed(u)) sources.push_back(u);

      const double n_i = static_cast<double>(parts[static_cast<size_t>(i)].size());
      const double d_i = p.d * n_i / static_cast<double>(g.n);
      const double s_i = d_i * p.lambda;
      const double scale = n_i > 0.0 ? std::pow(s_i, cfg.k) / n_i : 0.0;
      const double rhs =
          static_cast<double>(p.q) * cfg.threshold_factor * rho * static_cast<double>(sources.size());

      if (cfg.normalize && !(scale > 0.0 && std::isfinite(scale))) {
        // No meaningful walk scale (e.g. lambda <= 0): nothing can pass here.
        for (int32_t v : non_pool) st.alive[static_cast<size_t>(v)] = 0;
        continue;
      }

      const WalkStatVector z = nbw_vector_multi(op, sources, cfg.k, &scratch);
      const double lhs_scale = cfg.normalize ? 1.0 / scale : 1.0;
      for (int32_t v : non_pool) {
        const size_t vi = static_cast<size_t>(v);
        if (st.alive[vi] && !(z.values[vi] * lhs_scale > rhs)) st.alive[vi] = 0;
      }
    }

    for (int32_t v : non_pool) {
      const size_t vi = static_cast<size_t>(v);
      if (!st.alive[vi]) continue;
      ++st.cand_count[vi];
      st.cand_last[vi] = static_cast<int32_t>(l);
      if (cfg.collect_candidates) st.cand_lists[vi].push_back(static_cast<int32_t>(l));
    }
  }

  return assemble_report(g, p, cfg, reps, classified, st, rng);
}

RecoveryReport recover_above_ks(const GraphSample& g, const ModelParams& p,
                                const RecoveryConfig& cfg, RngStream rng) {
  check_config(cfg);
  const RepresentativeSet reps = select_representatives(g, p.q, rng.substream(0));

  std::vector<char> in_pool(static_cast<size_t>(g.n), 0);
  for (int32_t v : reps.u_all) in_pool[static_cast<size_t>(v)] = 1;
  std::vector<int32_t> non_pool;
  non_pool.reserve(static_cast<size_t>(g.n) - reps.u_all.size());
  for (int32_t v = 0; v < g.n; ++v)
    if (!in_pool[static_cast<size_t>(v)]) non_pool.push_back(v);

  const WeightOperator op(g, p.d, reps.u_all);

  const double n_eff = static_cast<double>(op.allowed_count());
  const double d_eff = p.d * n_eff / static_cast<double>(g.n);
  const double s_eff = d_eff * p.lambda;
  const double scale = n_eff > 0.0 ? std::pow(s_eff, cfg.k) / n_eff : 0.0;
  const double rho = within_rate_share(p);
  const bool scale_ok = !cfg.normalize || (scale > 0.0 && std::isfinite(scale));

  ClassifierState st;
  st.cand_count.assign(static_cast<size_t>(g.n), 0);
  st.cand_last.assign(static_cast<size_t>(g.n), -1);
  if (cfg.collect_candidates) st.cand_lists.assign(static_cast<size_t>(g.n), {});

  std::vector<char> classified(static_cast<size_t>(g.n), 0);
  for (int32_t v : non_pool) classified[static_cast<size_t>(v)] = 1;

  WalkScratch scratch;
  std::vector<double> z(static_cast<size_t>(g.n), 0.0);
  std::vector<int32_t> inside_sources;
  for (int64_t l = 0; l < p.q && scale_ok; ++l) {
    const int32_t anchor = reps.u_star[static_cast<size_t>(l)];
    inside_sources.clear();
    int64_t n_sources = 0;
    std::fill(z.begin(), z.end(), 0.0);
    for (int32_t u : g.neighbors(anchor)) {
      ++n_sources;
      if (op.allowed(u)) {
        inside_sources.push_back(u);
      } else {
        // Walks from a pool neighbor leave the pool immediately (endpoint
        // exemption); these sources are too rare to batch.
        const WalkStatVector one = nbw_vector(op, u, cfg.k);
        for (size_t vi = 0; vi < z.size(); ++vi) z[vi] += one.values[vi];
      }
    }
    const WalkStatVector batched = nbw_vector_multi(op, inside_sources, cfg.k, &scratch);
    for (size_t vi = 0; vi < z.size(); ++vi) z[vi] += batched.values[vi];

    const double lhs_scale = cfg.normalize ? 1.0 / scale : 1.0;
    const double rhs =
        static_cast<double>(p.q) * cfg.threshold_factor * rho * static_cast<double>(n_sources);
    for (int32_t v : non_pool) {
      const size_t vi = static_cast<size_t>(v);
      if (z[vi] * lhs_scale > rhs) {
        ++st.cand_count[vi];
        st.cand_last[vi] = static_cast<int32_t>(l);
        if (cfg.collect_candidates) st.cand_lists[vi].push_back(static_cast<int32_t>(l));
      }
    }
  }

  return assemble_report(g, p, cfg, reps, classified, st, rng);
}

std::string recovery_trial_json(const ModelParams& p, const RecoveryConfig& cfg,
                                uint64_t seed, const RecoveryReport& report,
                                double alignment_value, double wall_time_ms) {
  nlohmann::json j;
  j["seed"] = seed;
  j["n"] = p.n;
  j["q"] = p.q;
  j["a"] = p.a;
  j["b"] = p.b;
  j["d"] = p.d;
  j["lambda"] = p.lambda;
  j["regime"] = regime_name(classify_regime(p));
  j["k"] = report.k;
  j["M"] = report.M;
  j["beta"] = cfg.beta;
  j["threshold_factor"] = cfg.threshold_factor;
  j["normalize"] = cfg.normalize;
  j["alignment"] = alignment_value;
  j["fraction_zero_candidate"] = report.fraction_zero_candidate;
  j["fraction_multi_candidate"] = report.fraction_multi_candidate;
  j["wall_time_ms"] = wall_time_ms;
  return j.dump();
}

}  // namespace sbmlab
