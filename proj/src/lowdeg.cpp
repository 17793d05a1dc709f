#include "sbmlab/lowdeg.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <gmpxx.h>
#include <json.hpp>

#include "sbmlab/errors.hpp"

namespace sbmlab {

namespace {

double ipow(double base, int64_t e) {
  double out = 1.0;
  for (int64_t i = 0; i < e; ++i) out *= base;
  return out;
}

// Compensated accumulator for long enumeration sums.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

struct UnionFind {
  std::vector<int32_t> parent;
  explicit UnionFind(size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int32_t find(int32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(int32_t x, int32_t y) { parent[find(x)] = find(y); }
};

}  // namespace

PolyIndex::PolyIndex(std::vector<std::pair<int32_t, int32_t>> pairs) : pairs_(std::move(pairs)) {
  for (auto& [i, j] : pairs_) {
    if (i < 0 || j < 0) throw RangeError("PolyIndex: negative vertex id");
    if (i == j) throw RangeError("PolyIndex: self-loop");
    if (i > j) std::swap(i, j);
  }
  std::sort(pairs_.begin(), pairs_.end());
  if (std::adjacent_find(pairs_.begin(), pairs_.end()) != pairs_.end())
    throw RangeError("PolyIndex: duplicate pair");

  for (const auto& [i, j] : pairs_) {
    support_.push_back(i);
    support_.push_back(j);
  }
  std::sort(support_.begin(), support_.end());
  support_.erase(std::unique(support_.begin(), support_.end()), support_.end());

  // Connectivity of the support graph and the minimum degree off {0, 1}.
  std::vector<int64_t> degree(support_.size(), 0);
  UnionFind uf(support_.size());
  const auto pos = [&](int32_t v) {
    return static_cast<int32_t>(std::lower_bound(support_.begin(), support_.end(), v) -
                                support_.begin());
  };
  for (const auto& [i, j] : pairs_) {
    const int32_t pi = pos(i), pj = pos(j);
    ++degree[pi];
    ++degree[pj];
    uf.unite(pi, pj);
  }
  connected_ = true;
  for (size_t k = 1; k < support_.size(); ++k)
    if (uf.find(static_cast<int32_t>(k)) != uf.find(0)) connected_ = false;
  min_degree_off_queried_ = std::numeric_limits<int64_t>::max();
  for (size_t k = 0; k < support_.size(); ++k)
    if (support_[k] != 0 && support_[k] != 1)
      min_degree_off_queried_ = std::min(min_degree_off_queried_, degree[k]);
}

PolyIndex PolyIndex::observed_edge() { return PolyIndex({{0, 1}}); }

bool PolyIndex::contains_queried_pair() const {
  return std::binary_search(support_.begin(), support_.end(), 0) &&
         std::binary_search(support_.begin(), support_.end(), 1);
}

bool PolyIndex::contains(int32_t i, int32_t j) const {
  if (i > j) std::swap(i, j);
  return std::binary_search(pairs_.begin(), pairs_.end(), std::make_pair(i, j));
}

bool PolyIndex::subset_of(const PolyIndex& other) const {
  return std::includes(other.pairs_.begin(), other.pairs_.end(), pairs_.begin(), pairs_.end());
}

bool PolyIndex::operator<(const PolyIndex& other) const {
  if (pairs_.size() != other.pairs_.size()) return pairs_.size() < other.pairs_.size();
  return pairs_ < other.pairs_;
}

bool is_informative(const PolyIndex& alpha) {
  if (alpha.empty()) return true;
  return alpha.contains_queried_pair() && alpha.min_degree_off_queried() >= 2 &&
         alpha.connected();
}

int64_t f_complexity(const PolyIndex& alpha) {
  if (!is_informative(alpha)) throw RangeError("f_complexity: index is not informative");
  if (alpha.edge_count() > 8) throw TooLarge("f_complexity: more than 8 edges");
  if (alpha.empty()) return 1;
  const auto& edges = alpha.pairs();
  const uint32_t m = static_cast<uint32_t>(edges.size());
  const uint32_t full = (1u << m) - 1;

  std::vector<int8_t> informative(full + 1);
  for (uint32_t s = 0; s <= full; ++s) {
    std::vector<std::pair<int32_t, int32_t>> sub;
    for (uint32_t t = 0; t < m; ++t)
      if (s & (1u << t)) sub.push_back(edges[t]);
    informative[s] = is_informative(PolyIndex(std::move(sub))) ? 1 : 0;
  }

  // Every proper edge subset has a smaller mask, so ascending order works.
  std::vector<int64_t> f(full + 1, 0);
  f[0] = 1;
  for (uint32_t s = 1; s <= full; ++s) {
    if (!informative[s]) continue;
    int64_t total = f[0];
    for (uint32_t t = (s - 1) & s; t != 0; t = (t - 1) & s)
      if (informative[t]) total += f[t];
    f[s] = total;
  }
  return f[full];
}

double c_entry(const PolyIndex& alpha, const ModelParams& p) {
  if (alpha.empty()) return 0.0;
  if (!is_informative(alpha)) throw RangeError("c_entry: index is not informative");
  const double n = static_cast<double>(p.n);
  const double q = static_cast<double>(p.q);
  return (q - 1.0) * std::pow(q, -static_cast<double>(alpha.support_size())) *
         ipow((p.a - p.b) / n, alpha.edge_count());
}

double m_entry(const LabeledIndex& beta, const PolyIndex& alpha, const ModelParams& p) {
  const PolyIndex& b = beta.beta;
  if (beta.colors.size() != b.support().size())
    throw SizeMismatch("m_entry: one color per support vertex required");
  for (int32_t c : beta.colors)
    if (c < 0 || c >= p.q) throw LabelOutOfRange("m_entry: color outside [0, q)");
  if (!b.subset_of(alpha)) return 0.0;

  const double n = static_cast<double>(p.n);
  const double q = static_cast<double>(p.q);
  const double pa = p.a / n;
  const double pb = p.b / n;

  const auto color_of = [&](int32_t v) {
    const auto it = std::lower_bound(b.support().begin(), b.support().end(), v);
    return beta.colors[static_cast<size_t>(it - b.support().begin())];
  };

  int64_t mono = 0;  // edges of beta whose endpoints share a color
  for (const auto& [i, j] : b.pairs())
    if (color_of(i) == color_of(j)) ++mono;

  // Label-consistency factor over the components of alpha minus beta: each
  // component must be monochromatic; anchored vertices (those colored by
  // beta) pin the color, an unanchored component gets one free choice.
  std::vector<std::pair<int32_t, int32_t>> rest;
  for (const auto& e : alpha.pairs())
    if (!b.contains(e.first, e.second)) rest.push_back(e);
  double consistency = 1.0;
  if (!rest.empty()) {
    const PolyIndex diff(std::move(rest));
    const auto& sup = diff.support();
    UnionFind uf(sup.size());
    const auto pos = [&](int32_t v) {
      return static_cast<int32_t>(std::lower_bound(sup.begin(), sup.end(), v) - sup.begin());
    };
    for (const auto& [i, j] : diff.pairs()) uf.unite(pos(i), pos(j));
    std::map<int32_t, std::pair<int64_t, int64_t>> comp;  // root -> (size, anchors)
    std::map<int32_t, int32_t> anchor_color;
    for (size_t k = 0; k < sup.size(); ++k) {
      const int32_t root = uf.find(static_cast<int32_t>(k));
      auto& [size, anchors] = comp[root];
      ++size;
      if (std::binary_search(b.support().begin(), b.support().end(), sup[k])) {
        ++anchors;
        const int32_t c = color_of(sup[k]);
        const auto [it, inserted] = anchor_color.insert({root, c});
        if (!inserted && it->second != c) return 0.0;  // inconsistent anchors
      }
    }
    int64_t forced = 0;
    for (const auto& [root, sa] : comp) forced += sa.first - std::max<int64_t>(sa.second, 1);
    consistency = std::pow(q, -static_cast<double>(forced));
  }

  return std::pow(q, -static_cast<double>(b.support_size()) / 2.0) *
         std::pow(pa * (1.0 - pa), static_cast<double>(mono) / 2.0) *
         std::pow(pb * (1.0 - pb), static_cast<double>(b.edge_count() - mono) / 2.0) *
         ipow((p.a - p.b) / n, alpha.edge_count() - b.edge_count()) * consistency;
}

double UVector::correlation_upper() const {
  return x_second_moment > 0.0 ? std::sqrt(squared_norm / x_second_moment) : 0.0;
}

namespace {

// Advance a base-q odometer over `digits`; returns false after the last one.
bool next_coloring(std::vector<int32_t>& digits, int64_t q) {
  for (size_t k = digits.size(); k-- > 0;) {
    if (++digits[k] < q) return true;
    digits[k] = 0;
  }
  return false;
}

}  // namespace

UVector build_u(int32_t degree, int64_t n, const ModelParams& p) {
  if (degree < 0) throw RangeError("build_u: negative degree");
  if (n < 2) throw RangeError("build_u: need at least the two queried vertices");
  if (n > 6 || degree > 4) throw TooLarge("build_u: index enumeration guard (n <= 6, degree <= 4)");

  std::vector<std::pair<int32_t, int32_t>> slots;
  for (int32_t i = 0; i < n; ++i)
    for (int32_t j = i + 1; j < n; ++j) slots.push_back({i, j});
  const uint32_t m = static_cast<uint32_t>(slots.size());

  std::vector<PolyIndex> informative;
  for (uint32_t mask = 0; mask < (1u << m); ++mask) {
    if (std::popcount(mask) > degree) continue;
    std::vector<std::pair<int32_t, int32_t>> sub;
    for (uint32_t t = 0; t < m; ++t)
      if (mask & (1u << t)) sub.push_back(slots[t]);
    PolyIndex idx(std::move(sub));
    if (is_informative(idx)) informative.push_back(std::move(idx));
  }
  std::sort(informative.begin(), informative.end());

  double coloring_cost = 0.0;
  for (const auto& idx : informative)
    coloring_cost += std::pow(static_cast<double>(p.q), static_cast<double>(idx.support_size()));
  if (coloring_cost > 1e7) throw TooLarge("build_u: coloring enumeration guard");

  UVector out;
  out.x_second_moment =
      (1.0 / static_cast<double>(p.q)) * (1.0 - 1.0 / static_cast<double>(p.q));

  // Values already fixed, grouped per index in the same order as `informative`.
  std::vector<std::vector<std::pair<std::vector<int32_t>, double>>> fixed(informative.size());

  for (size_t ai = 0; ai < informative.size(); ++ai) {
    const PolyIndex& alpha = informative[ai];
    if (alpha.empty()) {
      fixed[ai].push_back({{}, 0.0});  // centered target: empty index carries nothing
      continue;
    }
    double residual = c_entry(alpha, p);
    for (size_t bi = 0; bi < ai; ++bi) {
      if (informative[bi].empty() || !informative[bi].subset_of(alpha)) continue;
      if (informative[bi] == alpha) continue;
      for (const auto& [colors, value] : fixed[bi])
        residual -= value * m_entry({informative[bi], colors}, alpha, p);
    }

    std::vector<std::vector<int32_t>> colorings;
    std::vector<double> diag;
    double denom = 0.0;
    std::vector<int32_t> gamma(alpha.support().size(), 0);
    do {
      const double mg = m_entry({alpha, gamma}, alpha, p);
      colorings.push_back(gamma);
      diag.push_back(mg);
      denom += mg * mg;
    } while (next_coloring(gamma, p.q));

    if (denom <= 0.0) {
      if (std::fabs(residual) > 1e-12)
        throw NumericalUnderflow("build_u: zero diagonal block with nonzero residual");
      for (size_t g = 0; g < colorings.size(); ++g)
        fixed[ai].push_back({std::move(colorings[g]), 0.0});
      continue;
    }
    for (size_t g = 0; g < colorings.size(); ++g)
      fixed[ai].push_back({std::move(colorings[g]), diag[g] * residual / denom});
  }

  for (size_t ai = 0; ai < informative.size(); ++ai)
    for (auto& [colors, value] : fixed[ai]) {
      out.squared_norm += value * value;
      out.entries.push_back({informative[ai], std::move(colors), value});
    }
  return out;
}

BoundReport corr_bound(int32_t degree, const ModelParams& p, double scale_constant,
                       double exponent_constant) {
  if (degree < 0) throw RangeError("corr_bound: negative degree");
  if (scale_constant <= 0.0 || exponent_constant <= 0.0)
    throw RangeError("corr_bound: constants must be positive");
  BoundReport out;
  out.degree = degree;
  out.params = p;
  out.scale_constant = scale_constant;
  out.exponent_constant = exponent_constant;

  const double n = static_cast<double>(p.n);
  const double q = static_cast<double>(p.q);
  const double ratio = p.d_adj * p.lambda_adj * p.lambda_adj;
  const double a_var = p.a * (1.0 - p.a / n);
  const double b_var = p.b * (1.0 - p.b / n);
  const double amplification =
      a_var > 0.0 ? 1.0 + (q - 1.0) * b_var / a_var : std::numeric_limits<double>::infinity();

  double sum1 = 0.0, sum2 = 0.0, pow1 = 1.0, pow2 = 1.0;
  for (int32_t l = 1; l <= degree; ++l) {
    pow1 *= ratio;
    pow2 *= ratio * amplification;
    sum1 += pow1;
    sum2 += pow2;
  }
  out.guard_item1 = static_cast<double>(degree) <=
                    std::pow(p.xi * n / (scale_constant * q * q), exponent_constant);
  out.guard_item2 =
      static_cast<double>(degree) <= std::pow(n / (scale_constant * q), exponent_constant);
  if (out.guard_item1) out.bound_item1 = scale_constant * q / n * sum1;
  out.bound_item2 = scale_constant * q / n * sum2;
  return out;
}

namespace {

// Cyclic Jacobi eigendecomposition of a symmetric matrix. On return the
// diagonal of a holds the eigenvalues and the columns of v the vectors.
void jacobi_eigen(std::vector<std::vector<double>>& a, std::vector<std::vector<double>>& v) {
  const size_t m = a.size();
  v.assign(m, std::vector<double>(m, 0.0));
  for (size_t i = 0; i < m; ++i) v[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (size_t i = 0; i < m; ++i)
      for (size_t j = i + 1; j < m; ++j) off += a[i][j] * a[i][j];
    if (off < 1e-300) return;
    for (size_t pp = 0; pp < m; ++pp)
      for (size_t qq = pp + 1; qq < m; ++qq) {
        if (std::fabs(a[pp][qq]) < 1e-300) continue;
        const double theta = (a[qq][qq] - a[pp][pp]) / (2.0 * a[pp][qq]);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (size_t k = 0; k < m; ++k) {
          const double akp = a[k][pp], akq = a[k][qq];
          a[k][pp] = c * akp - s * akq;
          a[k][qq] = s * akp + c * akq;
        }
        for (size_t k = 0; k < m; ++k) {
          const double apk = a[pp][k], aqk = a[qq][k];
          a[pp][k] = c * apk - s * aqk;
          a[qq][k] = s * apk + c * aqk;
        }
        for (size_t k = 0; k < m; ++k) {
          const double vkp = v[k][pp], vkq = v[k][qq];
          v[k][pp] = c * vkp - s * vkq;
          v[k][qq] = s * vkp + c * vkq;
        }
      }
  }
}

double pseudo_solve_quadratic(std::vector<std::vector<double>> gram,
                              const std::vector<double>& target) {
  // target' G^+ target via rank-revealing eigendecomposition.
  const size_t m = gram.size();
  std::vector<std::vector<double>> vec;
  jacobi_eigen(gram, vec);
  double max_eig = 0.0;
  for (size_t i = 0; i < m; ++i) max_eig = std::max(max_eig, gram[i][i]);
  if (max_eig <= 0.0) return 0.0;
  double total = 0.0;
  for (size_t i = 0; i < m; ++i) {
    if (gram[i][i] <= 1e-10 * max_eig) continue;
    double dot = 0.0;
    for (size_t k = 0; k < m; ++k) dot += vec[k][i] * target[k];
    total += dot * dot / gram[i][i];
  }
  return total;
}

}  // namespace

double corr_exact(int64_t n, int64_t q, double a, double b, int32_t degree, bool rational) {
  if (n < 2) throw RangeError("corr_exact: need at least the two queried vertices");
  if (q < 2) throw RangeError("corr_exact: need at least two communities");
  if (degree < 0) throw RangeError("corr_exact: negative degree");
  if (a < 0.0 || b < 0.0 || a > static_cast<double>(n) || b > static_cast<double>(n))
    throw RangeError("corr_exact: rates must lie in [0, n]");
  const uint32_t m = static_cast<uint32_t>(n * (n - 1) / 2);
  if (static_cast<double>(m) * std::log(2.0) + static_cast<double>(n) * std::log(static_cast<double>(q)) >
      std::log(1e8))
    throw TooLarge("corr_exact: enumeration guard 2^C(n,2) * q^n <= 1e8");
  if (rational && n > 4) throw TooLarge("corr_exact: rational arithmetic offered for n <= 4 only");

  std::vector<std::pair<int32_t, int32_t>> slots;
  for (int32_t i = 0; i < n; ++i)
    for (int32_t j = i + 1; j < n; ++j) slots.push_back({i, j});

  const uint32_t cap = std::min<uint32_t>(static_cast<uint32_t>(degree), m);
  std::vector<uint32_t> monomials;
  for (uint32_t mask = 0; mask < (1u << m); ++mask)
    if (static_cast<uint32_t>(std::popcount(mask)) <= cap) monomials.push_back(mask);

  // Outcome probabilities P(y) and P(y) * x(sigma), accumulated over all
  // labelings; a superset-sum transform then turns them into the moment
  // tables E[Y^U] and E[Y^U * x] in place.
  std::vector<double> moments(1u << m, 0.0);
  std::vector<double> xmoments(1u << m, 0.0);
  const double inv_q = 1.0 / static_cast<double>(q);

  if (!rational) {
    std::vector<KahanSum> pacc(1u << m), xacc(1u << m);
    std::vector<int32_t> sigma(static_cast<size_t>(n), 0);
    std::vector<double> edge_prob(m);
    const double prob_sigma = std::pow(inv_q, static_cast<double>(n));
    do {
      for (uint32_t t = 0; t < m; ++t)
        edge_prob[t] = sigma[static_cast<size_t>(slots[t].first)] ==
                               sigma[static_cast<size_t>(slots[t].second)]
                           ? a / static_cast<double>(n)
                           : b / static_cast<double>(n);
      const double x_val = (sigma[0] == sigma[1] ? 1.0 : 0.0) - inv_q;
      for (uint32_t y = 0; y < (1u << m); ++y) {
        double prob = prob_sigma;
        for (uint32_t t = 0; t < m; ++t)
          prob *= (y & (1u << t)) ? edge_prob[t] : 1.0 - edge_prob[t];
        pacc[y].add(prob);
        xacc[y].add(prob * x_val);
      }
    } while (next_coloring(sigma, q));
    for (uint32_t y = 0; y < (1u << m); ++y) {
      moments[y] = pacc[y].sum;
      xmoments[y] = xacc[y].sum;
    }
    for (uint32_t t = 0; t < m; ++t)
      for (uint32_t y = 0; y < (1u << m); ++y)
        if (!(y & (1u << t))) {
          moments[y] += moments[y | (1u << t)];
          xmoments[y] += xmoments[y | (1u << t)];
        }
  } else {
    std::vector<mpq_class> pacc(1u << m, 0), xacc(1u << m, 0);
    const mpq_class pa = mpq_class(a) / n;
    const mpq_class pb = mpq_class(b) / n;
    const mpq_class x_same = mpq_class(q - 1, q);
    const mpq_class x_diff = mpq_class(-1, q);
    mpq_class prob_sigma = 1;
    for (int64_t k = 0; k < n; ++k) prob_sigma /= q;
    std::vector<int32_t> sigma(static_cast<size_t>(n), 0);
    std::vector<mpq_class> edge_prob(m);
    do {
      for (uint32_t t = 0; t < m; ++t)
        edge_prob[t] = sigma[static_cast<size_t>(slots[t].first)] ==
                               sigma[static_cast<size_t>(slots[t].second)]
                           ? pa
                           : pb;
      const mpq_class x_val = sigma[0] == sigma[1] ? x_same : x_diff;
      for (uint32_t y = 0; y < (1u << m); ++y) {
        mpq_class prob = prob_sigma;
        for (uint32_t t = 0; t < m; ++t)
          prob *= (y & (1u << t)) ? edge_prob[t] : 1 - edge_prob[t];
        pacc[y] += prob;
        xacc[y] += prob * x_val;
      }
    } while (next_coloring(sigma, q));
    for (uint32_t t = 0; t < m; ++t)
      for (uint32_t y = 0; y < (1u << m); ++y)
        if (!(y & (1u << t))) {
          pacc[y] += pacc[y | (1u << t)];
          xacc[y] += xacc[y | (1u << t)];
        }
    for (uint32_t y = 0; y < (1u << m); ++y) {
      moments[y] = pacc[y].get_d();
      xmoments[y] = xacc[y].get_d();
    }
  }

  const size_t mm = monomials.size();
  std::vector<std::vector<double>> gram(mm, std::vector<double>(mm, 0.0));
  std::vector<double> target(mm, 0.0);
  for (size_t s = 0; s < mm; ++s) {
    target[s] = xmoments[monomials[s]];
    for (size_t t = 0; t < mm; ++t) gram[s][t] = moments[monomials[s] | monomials[t]];
  }

  const double x_second_moment = inv_q * (1.0 - inv_q);
  const double corr_sq = pseudo_solve_quadratic(std::move(gram), target) / x_second_moment;
  return std::sqrt(std::clamp(corr_sq, 0.0, 1.0));
}

double graphon_lower_bound(int64_t n, int64_t q, int32_t degree) {
  if (degree < 0) throw RangeError("graphon_lower_bound: negative degree");
  if (q < 2 || q * q > n) throw RangeError("graphon_lower_bound: requires 2 <= q <= sqrt(n)");
  const double nd = static_cast<double>(n);
  const double qd = static_cast<double>(q);
  const double p2 = 0.5;
  const double p1 = 0.5 - 0.25 * qd / std::sqrt(nd);
  const double corr_sq = std::min(1.0, static_cast<double>(degree) * qd / nd);
  return (p2 - p1) * (p2 - p1) / qd * (1.0 - 1.0 / qd) * (1.0 - corr_sq);
}

std::string bound_report_json(const BoundReport& r) {
  nlohmann::json j;
  j["degree"] = r.degree;
  j["n"] = r.params.n;
  j["q"] = r.params.q;
  j["a"] = r.params.a;
  j["b"] = r.params.b;
  j["signal_ratio"] = r.params.d_adj * r.params.lambda_adj * r.params.lambda_adj;
  if (r.bound_item1.has_value())
    j["bound_item1"] = *r.bound_item1;
  else
    j["bound_item1"] = nullptr;
  j["bound_item2"] = r.bound_item2;
  j["guard_item1"] = r.guard_item1;
  j["guard_item2"] = r.guard_item2;
  j["scale_constant"] = r.scale_constant;
  j["exponent_constant"] = r.exponent_constant;
  if (r.corr_exact.has_value())
    j["corr_exact"] = *r.corr_exact;
  else
    j["corr_exact"] = nullptr;
  return j.dump();
}

}  // namespace sbmlab
