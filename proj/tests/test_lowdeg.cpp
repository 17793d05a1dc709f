#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sbmlab/errors.hpp"
#include "sbmlab/lowdeg.hpp"
#include "sbmlab/model.hpp"

using namespace sbmlab;

namespace {

// Exhaustive-expectation oracle over all (graph, labeling) pairs at tiny n.
// Evaluates E[f(Y, sigma)] by summing f against the exact joint law.
class TinyWorld {
 public:
  TinyWorld(int64_t n, int64_t q, double a, double b) : n_(n), q_(q), a_(a), b_(b) {
    for (int32_t i = 0; i < n; ++i)
      for (int32_t j = i + 1; j < n; ++j) slots_.push_back({i, j});
  }

  int64_t n() const { return n_; }
  int64_t q() const { return q_; }
  const std::vector<std::pair<int32_t, int32_t>>& slots() const { return slots_; }

  int slot_of(int32_t i, int32_t j) const {
    if (i > j) std::swap(i, j);
    for (size_t t = 0; t < slots_.size(); ++t)
      if (slots_[t] == std::make_pair(i, j)) return static_cast<int>(t);
    return -1;
  }

  // Centered-edge product polynomial for the index alpha.
  double phi(const PolyIndex& alpha, uint32_t y) const {
    double out = 1.0;
    for (const auto& [i, j] : alpha.pairs()) {
      const double ind = (y >> slot_of(i, j)) & 1u ? 1.0 : 0.0;
      out *= ind - b_ / static_cast<double>(n_);
    }
    return out;
  }

  // Orthonormal labeled basis element for (beta, colors).
  double psi(const PolyIndex& beta, const std::vector<int32_t>& colors, uint32_t y,
             const std::vector<int32_t>& sigma) const {
    const auto& sup = beta.support();
    for (size_t k = 0; k < sup.size(); ++k)
      if (sigma[static_cast<size_t>(sup[k])] != colors[k]) return 0.0;
    const double pa = a_ / static_cast<double>(n_);
    const double pb = b_ / static_cast<double>(n_);
    double out = std::pow(static_cast<double>(q_), static_cast<double>(sup.size()) / 2.0);
    for (const auto& [i, j] : beta.pairs()) {
      int32_t ci = -1, cj = -1;
      for (size_t k = 0; k < sup.size(); ++k) {
        if (sup[k] == i) ci = colors[k];
        if (sup[k] == j) cj = colors[k];
      }
      const double ind = (y >> slot_of(i, j)) & 1u ? 1.0 : 0.0;
      if (ci == cj)
        out *= (ind - pa) / std::sqrt(pa * (1.0 - pa));
      else
        out *= (ind - pb) / std::sqrt(pb * (1.0 - pb));
    }
    return out;
  }

  template <typename F>
  double expect(F f) const {
    double total = 0.0;
    std::vector<int32_t> sigma(static_cast<size_t>(n_), 0);
    const double prob_sigma = std::pow(1.0 / static_cast<double>(q_), static_cast<double>(n_));
    while (true) {
      for (uint32_t y = 0; y < (1u << slots_.size()); ++y) {
        double prob = prob_sigma;
        for (size_t t = 0; t < slots_.size(); ++t) {
          const double pe = sigma[static_cast<size_t>(slots_[t].first)] ==
                                    sigma[static_cast<size_t>(slots_[t].second)]
                                ? a_ / static_cast<double>(n_)
                                : b_ / static_cast<double>(n_);
          prob *= (y >> t) & 1u ? pe : 1.0 - pe;
        }
        total += prob * f(y, sigma);
      }
      size_t k = sigma.size();
      bool done = true;
      while (k-- > 0) {
        if (++sigma[k] < q_) {
          done = false;
          break;
        }
        sigma[k] = 0;
      }
      if (done) break;
    }
    return total;
  }

 private:
  int64_t n_, q_;
  double a_, b_;
  std::vector<std::pair<int32_t, int32_t>> slots_;
};

// All indices with at most max_edges edges over the world's vertex pairs.
std::vector<PolyIndex> indices_up_to(const TinyWorld& w, int max_edges) {
  std::vector<PolyIndex> out;
  const auto& slots = w.slots();
  for (uint32_t mask = 0; mask < (1u << slots.size()); ++mask) {
    if (std::popcount(mask) > max_edges) continue;
    std::vector<std::pair<int32_t, int32_t>> pairs;
    for (size_t t = 0; t < slots.size(); ++t)
      if (mask & (1u << t)) pairs.push_back(slots[t]);
    out.push_back(PolyIndex(std::move(pairs)));
  }
  return out;
}

// Advances colors as a base-q odometer; false once wrapped around.
bool next_colors(std::vector<int32_t>& colors, int64_t q) {
  for (size_t k = colors.size(); k-- > 0;) {
    if (++colors[k] < q) return true;
    colors[k] = 0;
  }
  return false;
}

// Distinct indices appearing in a dual-certificate vector, in entry order.
std::vector<PolyIndex> distinct_indices(const UVector& u) {
  std::vector<PolyIndex> out;
  for (const auto& e : u.entries)
    if (out.empty() || !(out.back() == e.beta)) out.push_back(e.beta);
  return out;
}

double residual_worst(const UVector& u, const ModelParams& p) {
  double worst = 0.0;
  for (const auto& alpha : distinct_indices(u)) {
    if (alpha.empty()) continue;
    double paired = 0.0;
    for (const auto& e : u.entries) paired += e.value * m_entry({e.beta, e.colors}, alpha, p);
    worst = std::max(worst, std::fabs(paired - c_entry(alpha, p)));
  }
  return worst;
}

}  // namespace

TEST(PolyIndexTest, CanonicalizationAndAccessors) {
  const PolyIndex idx({{3, 0}, {1, 2}, {2, 0}});
  const std::vector<std::pair<int32_t, int32_t>> want = {{0, 2}, {0, 3}, {1, 2}};
  EXPECT_EQ(idx.pairs(), want);
  const std::vector<int32_t> sup = {0, 1, 2, 3};
  EXPECT_EQ(idx.support(), sup);
  EXPECT_EQ(idx.edge_count(), 3);
  EXPECT_EQ(idx.support_size(), 4);
  EXPECT_FALSE(idx.empty());
  EXPECT_TRUE(idx.contains(2, 0));
  EXPECT_TRUE(idx.contains(0, 2));
  EXPECT_FALSE(idx.contains(0, 1));
  EXPECT_TRUE(idx.contains_queried_pair());

  const PolyIndex empty;
  EXPECT_TRUE(empty.empty());
  EXPECT_TRUE(empty.connected());
  EXPECT_EQ(empty.min_degree_off_queried(), std::numeric_limits<int64_t>::max());
  EXPECT_TRUE(empty.subset_of(idx));
  EXPECT_FALSE(idx.subset_of(empty));
  EXPECT_TRUE(PolyIndex(std::vector<std::pair<int32_t, int32_t>>{}) == empty);

  const PolyIndex edge = PolyIndex::observed_edge();
  EXPECT_EQ(edge.edge_count(), 1);
  EXPECT_TRUE(edge.contains(0, 1));
  EXPECT_TRUE(edge.subset_of(PolyIndex({{0, 1}, {1, 2}})));
  EXPECT_FALSE(edge.subset_of(PolyIndex({{0, 2}, {1, 2}})));

  // Ordering: primary by edge count, then lexicographic on the pair lists.
  EXPECT_TRUE(empty < edge);
  EXPECT_TRUE(edge < idx);
  EXPECT_TRUE(PolyIndex({{0, 1}}) < PolyIndex({{0, 2}}));
  EXPECT_FALSE(PolyIndex({{0, 2}}) < PolyIndex({{0, 1}}));
}

TEST(PolyIndexTest, ConnectivityAndDegrees) {
  const PolyIndex path({{0, 2}, {2, 1}});
  EXPECT_TRUE(path.connected());
  EXPECT_EQ(path.min_degree_off_queried(), 2);

  const PolyIndex pendant({{0, 1}, {0, 2}});
  EXPECT_TRUE(pendant.connected());
  EXPECT_EQ(pendant.min_degree_off_queried(), 1);

  const PolyIndex two_parts({{0, 1}, {2, 3}, {3, 4}, {4, 2}});
  EXPECT_FALSE(two_parts.connected());
  EXPECT_EQ(two_parts.min_degree_off_queried(), 2);

  EXPECT_EQ(PolyIndex({{0, 1}}).min_degree_off_queried(), std::numeric_limits<int64_t>::max());
}

TEST(PolyIndexTest, RejectsMalformedPairs) {
  EXPECT_THROW(PolyIndex({{0, 0}}), RangeError);
  EXPECT_THROW(PolyIndex({{-1, 2}}), RangeError);
  EXPECT_THROW(PolyIndex({{0, 1}, {1, 0}}), RangeError);
  EXPECT_THROW(PolyIndex({{0, 1}, {0, 1}}), RangeError);
}

TEST(IsInformativeTest, Examples) {
  EXPECT_TRUE(is_informative(PolyIndex()));
  EXPECT_TRUE(is_informative(PolyIndex::observed_edge()));
  EXPECT_TRUE(is_informative(PolyIndex({{0, 2}, {2, 1}})));
  EXPECT_TRUE(is_informative(PolyIndex({{0, 1}, {0, 2}, {1, 2}})));

  EXPECT_FALSE(is_informative(PolyIndex({{0, 2}})));           // vertex 1 missing
  EXPECT_FALSE(is_informative(PolyIndex({{2, 3}})));           // both missing
  EXPECT_FALSE(is_informative(PolyIndex({{0, 1}, {0, 2}})));   // pendant vertex 2
  EXPECT_FALSE(is_informative(PolyIndex({{0, 1}, {2, 3}, {3, 4}, {4, 2}})));  // disconnected
}

TEST(FComplexityTest, SmallValuesAndGuards) {
  EXPECT_EQ(f_complexity(PolyIndex()), 1);
  EXPECT_EQ(f_complexity(PolyIndex::observed_edge()), 1);
  EXPECT_EQ(f_complexity(PolyIndex({{0, 2}, {2, 1}})), 1);
  // Triangle: the empty index, the direct edge, and the two-step path all
  // feed the recursion.
  EXPECT_EQ(f_complexity(PolyIndex({{0, 1}, {0, 2}, {1, 2}})), 3);

  EXPECT_THROW(f_complexity(PolyIndex({{0, 2}})), RangeError);
  // A path from 0 to 1 through eight interior vertices: informative, but
  // nine edges exceeds the subset-enumeration guard.
  EXPECT_THROW(f_complexity(PolyIndex(
                   {{0, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {6, 7}, {7, 8}, {8, 9}, {9, 1}})),
               TooLarge);
}

TEST(FComplexityTest, ExhaustiveGrowthBound) {
  // Every informative index with at most 6 edges over 8 vertices satisfies
  // f(alpha) <= (2|alpha|)^(|alpha| - |V(alpha)| + 1).
  std::vector<std::pair<int32_t, int32_t>> slots;
  for (int32_t i = 0; i < 8; ++i)
    for (int32_t j = i + 1; j < 8; ++j) slots.push_back({i, j});

  int64_t informative_count = 0;
  std::vector<size_t> chosen;
  const auto check = [&](const std::vector<size_t>& picks) {
    std::vector<std::pair<int32_t, int32_t>> pairs;
    for (size_t t : picks) pairs.push_back(slots[t]);
    const PolyIndex alpha(std::move(pairs));
    if (!is_informative(alpha) || alpha.empty()) return;
    ++informative_count;
    const double cap = std::pow(2.0 * static_cast<double>(alpha.edge_count()),
                                static_cast<double>(alpha.edge_count() - alpha.support_size() + 1));
    EXPECT_LE(static_cast<double>(f_complexity(alpha)), cap + 1e-9);
  };
  const auto recurse = [&](auto&& self, size_t next) -> void {
    check(chosen);
    if (chosen.size() == 6) return;
    for (size_t t = next; t < slots.size(); ++t) {
      chosen.push_back(t);
      self(self, t + 1);
      chosen.pop_back();
    }
  };
  recurse(recurse, 0);
  EXPECT_GT(informative_count, 100);
}

TEST(CEntryTest, ClosedFormAndGuards) {
  const auto p = ModelParams::from_rates(10, 2, 6.0, 2.0);
  EXPECT_DOUBLE_EQ(c_entry(PolyIndex(), p), 0.0);
  EXPECT_DOUBLE_EQ(c_entry(PolyIndex::observed_edge(), p), 0.1);

  const auto flat = ModelParams::from_rates(10, 3, 4.0, 4.0);
  EXPECT_DOUBLE_EQ(c_entry(PolyIndex({{0, 2}, {2, 1}}), flat), 0.0);
  EXPECT_DOUBLE_EQ(c_entry(PolyIndex({{0, 1}, {0, 2}, {1, 2}}), flat), 0.0);

  EXPECT_THROW(c_entry(PolyIndex({{0, 2}}), p), RangeError);
}

TEST(MEntryTest, SubsetRuleAndClosedForm) {
  const auto p = ModelParams::from_rates(6, 3, 3.0, 1.0);
  const PolyIndex triangle({{0, 1}, {0, 2}, {1, 2}});

  EXPECT_DOUBLE_EQ(m_entry({PolyIndex({{0, 3}}), {0, 1}}, triangle, p), 0.0);
  EXPECT_DOUBLE_EQ(m_entry({PolyIndex({{0, 1}, {0, 3}}), {0, 0, 1}}, triangle, p), 0.0);

  // beta = alpha: only the diagonal product of normalized edge factors.
  const double pa = 0.5, pb = 1.0 / 6.0;
  const double va = pa * (1.0 - pa), vb = pb * (1.0 - pb);
  EXPECT_NEAR(m_entry({triangle, {1, 1, 1}}, triangle, p),
              std::pow(3.0, -1.5) * std::pow(va, 1.5), 1e-15);
  EXPECT_NEAR(m_entry({triangle, {1, 1, 2}}, triangle, p),
              std::pow(3.0, -1.5) * std::sqrt(va) * vb, 1e-15);
  EXPECT_NEAR(m_entry({triangle, {0, 1, 2}}, triangle, p),
              std::pow(3.0, -1.5) * std::pow(vb, 1.5), 1e-15);

  EXPECT_THROW(m_entry({triangle, {0, 1}}, triangle, p), SizeMismatch);
  EXPECT_THROW(m_entry({triangle, {0, 1, 3}}, triangle, p), LabelOutOfRange);
  EXPECT_THROW(m_entry({triangle, {0, -1, 1}}, triangle, p), LabelOutOfRange);
}

TEST(MEntryTest, MatchesExhaustiveExpectationOracle) {
  // Every cross-moment with the centered edge products, against the literal
  // expectation over all graphs and labelings: n=4, q=2, a=2, b=1.
  const TinyWorld w(4, 2, 2.0, 1.0);
  const auto p = ModelParams::from_rates(4, 2, 2.0, 1.0);
  const auto indices = indices_up_to(w, 2);
  int checked = 0;
  for (const auto& alpha : indices) {
    for (const auto& beta : indices) {
      std::vector<int32_t> colors(beta.support().size(), 0);
      while (true) {
        const double direct = w.expect([&](uint32_t y, const std::vector<int32_t>& sigma) {
          return w.phi(alpha, y) * w.psi(beta, colors, y, sigma);
        });
        ASSERT_NEAR(m_entry({beta, colors}, alpha, p), direct, 1e-12)
            << "alpha edges " << alpha.edge_count() << " beta edges " << beta.edge_count();
        ++checked;
        if (colors.empty() || !next_colors(colors, 2)) break;
      }
    }
  }
  EXPECT_EQ(checked, 3718);
}

TEST(MEntryTest, LabeledBasisIsOrthonormal) {
  // E[psi psi'] = 1 exactly on the diagonal and 0 off it, for every pair of
  // labeled indices with at most two edges at n=4, q=2.
  const TinyWorld w(4, 2, 2.0, 1.0);
  std::vector<std::pair<PolyIndex, std::vector<int32_t>>> labeled;
  for (const auto& beta : indices_up_to(w, 2)) {
    std::vector<int32_t> colors(beta.support().size(), 0);
    while (true) {
      labeled.push_back({beta, colors});
      if (colors.empty() || !next_colors(colors, 2)) break;
    }
  }
  ASSERT_EQ(labeled.size(), 169u);
  for (size_t i = 0; i < labeled.size(); ++i)
    for (size_t j = i; j < labeled.size(); ++j) {
      const double inner = w.expect([&](uint32_t y, const std::vector<int32_t>& sigma) {
        return w.psi(labeled[i].first, labeled[i].second, y, sigma) *
               w.psi(labeled[j].first, labeled[j].second, y, sigma);
      });
      ASSERT_NEAR(inner, i == j ? 1.0 : 0.0, 1e-12) << "pair " << i << "," << j;
    }
}

TEST(BuildUTest, EmptyAndDegreeZero) {
  const auto p = ModelParams::from_rates(4, 2, 3.0, 1.0);
  const UVector u = build_u(0, 4, p);
  ASSERT_EQ(u.entries.size(), 1u);
  EXPECT_TRUE(u.entries[0].beta.empty());
  EXPECT_DOUBLE_EQ(u.entries[0].value, 0.0);
  EXPECT_DOUBLE_EQ(u.squared_norm, 0.0);
  EXPECT_DOUBLE_EQ(u.correlation_upper(), 0.0);
  EXPECT_DOUBLE_EQ(u.x_second_moment, 0.25);
}

TEST(BuildUTest, EntryLayoutAtDegreeTwo) {
  // n=4, D=2: the empty index, the queried edge, and the two 2-step paths;
  // one coefficient per coloring of each support.
  const auto p = ModelParams::from_rates(4, 2, 2.0, 1.0);
  const UVector u = build_u(2, 4, p);
  const auto idx = distinct_indices(u);
  ASSERT_EQ(idx.size(), 4u);
  EXPECT_TRUE(idx[0].empty());
  EXPECT_TRUE(idx[1] == PolyIndex::observed_edge());
  EXPECT_TRUE(idx[2] == PolyIndex({{0, 2}, {1, 2}}));
  EXPECT_TRUE(idx[3] == PolyIndex({{0, 3}, {1, 3}}));
  EXPECT_EQ(u.entries.size(), 1u + 4u + 8u + 8u);
}

TEST(BuildUTest, PairingReproducesCEntries) {
  struct Inst {
    int64_t n, q;
    double a, b;
    int32_t degree;
  };
  for (const auto& inst : std::vector<Inst>{{4, 2, 2, 1, 2},
                                            {4, 2, 3, 1, 3},
                                            {5, 2, 3, 1, 3},
                                            {5, 3, 3, 1, 3},
                                            {6, 2, 3, 1, 4}}) {
    const auto p = ModelParams::from_rates(inst.n, inst.q, inst.a, inst.b);
    const UVector u = build_u(inst.degree, inst.n, p);
    EXPECT_LE(residual_worst(u, p), 1e-10)
        << "n=" << inst.n << " q=" << inst.q << " D=" << inst.degree;
  }
}

TEST(BuildUTest, CoefficientBoundOnRecoveredResiduals) {
  // The per-index residual d_alpha recovered from the coefficients obeys
  // |d_alpha| <= q^(-|V|+1) (|a-b|/n)^(|alpha|) f(alpha).
  const auto p = ModelParams::from_rates(5, 3, 4.0, 1.0);
  const UVector u = build_u(3, 5, p);
  const auto idx = distinct_indices(u);
  int nontrivial = 0;
  for (const auto& alpha : idx) {
    if (alpha.empty()) continue;
    double d_alpha = 0.0;
    for (const auto& e : u.entries)
      if (e.beta == alpha) d_alpha += e.value * m_entry({e.beta, e.colors}, alpha, p);
    const double cap =
        std::pow(3.0, -static_cast<double>(alpha.support_size()) + 1.0) *
        std::pow(std::fabs(p.a - p.b) / static_cast<double>(p.n),
                 static_cast<double>(alpha.edge_count())) *
        static_cast<double>(f_complexity(alpha));
    EXPECT_LE(std::fabs(d_alpha), cap + 1e-12);
    if (std::fabs(d_alpha) > 0.0) ++nontrivial;
  }
  EXPECT_GT(nontrivial, 3);
}

TEST(BuildUTest, DiagonalBlockLowerBounds) {
  // sum_gamma M(alpha gamma, alpha)^2 >= max of the two closed-form floors.
  struct Inst {
    int64_t n, q;
    double a, b;
  };
  for (const auto& inst :
       std::vector<Inst>{{4, 2, 2, 1}, {5, 2, 3, 1}, {5, 3, 3, 1}, {5, 3, 1, 3}}) {
    const auto p = ModelParams::from_rates(inst.n, inst.q, inst.a, inst.b);
    const UVector u = build_u(3, inst.n, p);
    const double pa = p.a / static_cast<double>(p.n);
    for (const auto& alpha : distinct_indices(u)) {
      if (alpha.empty()) continue;
      double denom = 0.0;
      std::vector<int32_t> colors(alpha.support().size(), 0);
      do {
        const double mg = m_entry({alpha, colors}, alpha, p);
        denom += mg * mg;
      } while (next_colors(colors, p.q));
      const double edges = static_cast<double>(alpha.edge_count());
      const double verts = static_cast<double>(alpha.support_size());
      const double floor1 = std::pow(p.d_adj / static_cast<double>(p.n), edges) *
                            std::pow(p.xi, edges - verts + 1.0);
      const double floor2 =
          std::pow(pa * (1.0 - pa), edges) * std::pow(static_cast<double>(p.q), -verts + 1.0);
      EXPECT_GE(denom, std::max(floor1, floor2) - 1e-15)
          << "n=" << inst.n << " q=" << inst.q << " a=" << inst.a << " b=" << inst.b
          << " |alpha|=" << alpha.edge_count();
    }
  }
}

TEST(BuildUTest, Guards) {
  const auto p = ModelParams::from_rates(6, 2, 3.0, 1.0);
  EXPECT_THROW(build_u(-1, 4, p), RangeError);
  EXPECT_THROW(build_u(2, 1, p), RangeError);
  EXPECT_THROW(build_u(2, 7, p), TooLarge);
  EXPECT_THROW(build_u(5, 6, p), TooLarge);
  EXPECT_THROW(build_u(4, 6, ModelParams::from_rates(6, 50, 3.0, 1.0)), TooLarge);

  // Rates at the extremes kill every diagonal entry while the pairing
  // target stays away from zero: the recursion cannot proceed.
  EXPECT_THROW(build_u(1, 4, ModelParams::from_rates(4, 2, 0.0, 4.0)), NumericalUnderflow);
}

TEST(CorrExactTest, DegenerateCasesAreZero) {
  EXPECT_NEAR(corr_exact(4, 2, 2.0, 2.0, 3), 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(corr_exact(4, 2, 3.0, 1.0, 0), 0.0);
  EXPECT_NEAR(corr_exact(5, 3, 2.5, 2.5, 2), 0.0, 1e-12);
}

TEST(CorrExactTest, DegreeOneMatchesLeastSquaresOracle) {
  // At degree 1 only the queried edge indicator carries signal, so the best
  // correlation is |Cov(Y01, x)| / sqrt(Var(Y01) E[x^2]) with
  // Cov = (pa - pb) (1/q)(1 - 1/q) and Var from the mixture mean.
  struct Inst {
    int64_t n, q;
    double a, b;
  };
  for (const auto& inst : std::vector<Inst>{
           {4, 2, 3, 1}, {5, 3, 4, 1}, {2, 2, 1.5, 0.5}, {4, 2, 1, 3}, {5, 2, 2, 3}}) {
    const double n = static_cast<double>(inst.n), q = static_cast<double>(inst.q);
    const double pa = inst.a / n, pb = inst.b / n;
    const double x2 = (1.0 / q) * (1.0 - 1.0 / q);
    const double cov = (pa - pb) * x2;
    const double mix = pa / q + (1.0 - 1.0 / q) * pb;
    const double oracle = std::fabs(cov) / std::sqrt(mix * (1.0 - mix) * x2);
    EXPECT_NEAR(corr_exact(inst.n, inst.q, inst.a, inst.b, 1), oracle, 1e-12)
        << "n=" << inst.n << " q=" << inst.q << " a=" << inst.a << " b=" << inst.b;
  }
  EXPECT_DOUBLE_EQ(corr_exact(4, 2, 3.0, 1.0, 1), 0.5);
}

TEST(CorrExactTest, RationalArithmeticMatchesDouble) {
  for (int32_t degree : {1, 2, 3}) {
    EXPECT_NEAR(corr_exact(4, 2, 3.0, 1.0, degree, true),
                corr_exact(4, 2, 3.0, 1.0, degree, false), 1e-12);
  }
  EXPECT_NEAR(corr_exact(3, 3, 1.5, 0.5, 2, true), corr_exact(3, 3, 1.5, 0.5, 2, false),
              1e-12);
}

TEST(CorrExactTest, MonotoneInDegree) {
  double prev = 0.0;
  for (int32_t degree = 0; degree <= 5; ++degree) {
    const double cur = corr_exact(4, 2, 3.0, 1.0, degree);
    EXPECT_GE(cur, prev - 1e-12);
    EXPECT_LE(cur, 1.0);
    prev = cur;
  }
  EXPECT_GT(prev, 0.55);  // degree beyond one strictly helps here
}

TEST(CorrExactTest, Guards) {
  EXPECT_THROW(corr_exact(1, 2, 0.5, 0.5, 1), RangeError);
  EXPECT_THROW(corr_exact(4, 1, 2.0, 1.0, 1), RangeError);
  EXPECT_THROW(corr_exact(4, 2, -0.5, 1.0, 1), RangeError);
  EXPECT_THROW(corr_exact(4, 2, 5.0, 1.0, 1), RangeError);
  EXPECT_THROW(corr_exact(4, 2, 2.0, 1.0, -1), RangeError);
  EXPECT_THROW(corr_exact(7, 2, 3.0, 1.0, 2), TooLarge);
  EXPECT_THROW(corr_exact(6, 5, 3.0, 1.0, 2), TooLarge);
  EXPECT_THROW(corr_exact(5, 2, 3.0, 1.0, 2, true), TooLarge);
}

TEST(CorrExactTest, SandwichedByDualCertificateAndClosedForms) {
  // exact <= coefficient-vector upper bound, and when the degree guards
  // hold the squared upper bound sits below both closed-form evaluations.
  struct Inst {
    int64_t n, q;
    double a, b;
    int32_t degree;
  };
  for (const auto& inst : std::vector<Inst>{{4, 2, 2, 1, 2},
                                            {4, 2, 3, 1, 2},
                                            {4, 2, 3, 1, 3},
                                            {5, 2, 3, 1, 1},
                                            {5, 2, 3, 1, 3},
                                            {5, 3, 3, 1, 3},
                                            {5, 3, 4, 1, 2}}) {
    const auto p = ModelParams::from_rates(inst.n, inst.q, inst.a, inst.b);
    const UVector u = build_u(inst.degree, inst.n, p);
    const double exact = corr_exact(inst.n, inst.q, inst.a, inst.b, inst.degree);
    EXPECT_LE(exact, u.correlation_upper() + 1e-12)
        << "n=" << inst.n << " q=" << inst.q << " D=" << inst.degree;
    const BoundReport rep = corr_bound(inst.degree, p);
    const double upper_sq = u.squared_norm / u.x_second_moment;
    if (rep.guard_item1 && rep.bound_item1.has_value()) {
      EXPECT_LE(upper_sq, *rep.bound_item1 + 1e-12);
    }
    if (rep.guard_item2) {
      EXPECT_LE(upper_sq, rep.bound_item2 + 1e-12);
    }
  }
}

TEST(CorrExactTest, NontrivialClosedFormComparisonPoint) {
  // n=5, q=2, a=3, b=1, D=1: the first degree guard holds (xi n / q^2 = 1),
  // so the full chain exact <= certificate <= item-1 bound is live.
  const auto p = ModelParams::from_rates(5, 2, 3.0, 1.0);
  const BoundReport rep = corr_bound(1, p);
  ASSERT_TRUE(rep.guard_item1);
  ASSERT_TRUE(rep.bound_item1.has_value());
  const UVector u = build_u(1, 5, p);
  const double exact_sq = std::pow(corr_exact(5, 2, 3.0, 1.0, 1), 2.0);
  const double upper_sq = u.squared_norm / u.x_second_moment;
  EXPECT_LE(exact_sq, upper_sq + 1e-12);
  EXPECT_LE(upper_sq, *rep.bound_item1 + 1e-12);
  EXPECT_LE(*rep.bound_item1, rep.bound_item2 + 1e-12);
  EXPECT_NEAR(upper_sq, 0.2, 1e-12);
  EXPECT_NEAR(*rep.bound_item1, 0.4, 1e-9);
}

TEST(CorrBoundTest, DegreeZeroAndUnitRatio) {
  const auto p = ModelParams::from_rates(1000, 4, 8.0, 2.0);
  const BoundReport rep0 = corr_bound(0, p);
  ASSERT_TRUE(rep0.bound_item1.has_value());
  EXPECT_DOUBLE_EQ(*rep0.bound_item1, 0.0);
  EXPECT_DOUBLE_EQ(rep0.bound_item2, 0.0);
  EXPECT_TRUE(rep0.guard_item1);
  EXPECT_TRUE(rep0.guard_item2);

  // At signal ratio ~1 the first sum telescopes to D terms of size one.
  const auto flat = ModelParams::from_snr(100000000, 2, 4.0, 0.5);
  EXPECT_NEAR(flat.d_adj * flat.lambda_adj * flat.lambda_adj, 1.0, 1e-6);
  const BoundReport rep = corr_bound(5, flat);
  ASSERT_TRUE(rep.bound_item1.has_value());
  EXPECT_NEAR(*rep.bound_item1,
              5.0 * static_cast<double>(flat.q) / static_cast<double>(flat.n), 1e-12);
}

TEST(CorrBoundTest, FrozenHeadlinePoint) {
  const auto p = ModelParams::from_snr(1000000, 100, 5.0, 0.3);
  const BoundReport rep = corr_bound(20, p);
  EXPECT_TRUE(rep.guard_item1);
  EXPECT_TRUE(rep.guard_item2);
  ASSERT_TRUE(rep.bound_item1.has_value());
  EXPECT_NEAR(*rep.bound_item1, 8.182554406005631e-05, 1e-13);
  EXPECT_NEAR(rep.bound_item2, 0.6612154031570237, 1e-9);
  EXPECT_FALSE(rep.corr_exact.has_value());
}

TEST(CorrBoundTest, GuardFlagsAndConstants) {
  const auto p = ModelParams::from_snr(1000000, 100, 5.0, 0.3);
  const BoundReport far = corr_bound(2000000, p);
  EXPECT_FALSE(far.guard_item1);
  EXPECT_FALSE(far.guard_item2);
  EXPECT_FALSE(far.bound_item1.has_value());
  EXPECT_GT(far.bound_item2, 0.0);

  const BoundReport base = corr_bound(20, p);
  const BoundReport doubled = corr_bound(20, p, 2.0);
  ASSERT_TRUE(base.bound_item1.has_value());
  ASSERT_TRUE(doubled.bound_item1.has_value());
  EXPECT_NEAR(*doubled.bound_item1, 2.0 * *base.bound_item1, 1e-18);
  EXPECT_DOUBLE_EQ(doubled.scale_constant, 2.0);

  // Shrinking the guard exponent turns the first guard off at this degree.
  const BoundReport rooted = corr_bound(20, p, 1.0, 0.5);
  EXPECT_FALSE(rooted.guard_item1);
  EXPECT_DOUBLE_EQ(rooted.exponent_constant, 0.5);

  EXPECT_THROW(corr_bound(-1, p), RangeError);
  EXPECT_THROW(corr_bound(5, p, 0.0), RangeError);
  EXPECT_THROW(corr_bound(5, p, 1.0, -1.0), RangeError);
}

TEST(GraphonTest, FrozenPointAndClosedForms) {
  EXPECT_DOUBLE_EQ(graphon_lower_bound(64, 2, 1), 0.000946044921875);
  // Degree zero: no correlation discount at all.
  EXPECT_DOUBLE_EQ(graphon_lower_bound(64, 2, 0), 0.0009765625);
  // q = sqrt(n): the across-block rate reaches its floor 1/4.
  EXPECT_DOUBLE_EQ(graphon_lower_bound(16, 4, 0), 0.01171875);
}

TEST(GraphonTest, RateStaysWithinConstantWindow) {
  // Whenever the correlation discount is at most 1/2 the value is pinned
  // between q/(64 n) and q/(16 n); it never reaches q/(8 n).
  for (const auto& [n, q] : std::vector<std::pair<int64_t, int64_t>>{
           {64, 2}, {100, 3}, {400, 11}, {10000, 100}, {10000, 7}}) {
    for (int32_t degree = 0; 2 * degree * q <= n; ++degree) {
      const double value = graphon_lower_bound(n, q, degree);
      const double scale = static_cast<double>(q) / static_cast<double>(n);
      EXPECT_GE(value, scale / 64.0);
      EXPECT_LE(value, scale / 16.0);
      EXPECT_LT(value, scale / 8.0);
    }
  }
}

TEST(GraphonTest, DegreeDiscountAndGuards) {
  double prev = graphon_lower_bound(64, 2, 0);
  for (int32_t degree = 1; degree <= 40; ++degree) {
    const double cur = graphon_lower_bound(64, 2, degree);
    EXPECT_LE(cur, prev + 1e-18);
    prev = cur;
  }
  EXPECT_DOUBLE_EQ(graphon_lower_bound(64, 2, 32), 0.0);   // discount saturates
  EXPECT_DOUBLE_EQ(graphon_lower_bound(64, 2, 100), 0.0);  // and stays clamped

  EXPECT_THROW(graphon_lower_bound(64, 1, 1), RangeError);
  EXPECT_THROW(graphon_lower_bound(16, 5, 1), RangeError);
  EXPECT_THROW(graphon_lower_bound(64, 2, -1), RangeError);
}

TEST(BoundReportJsonTest, RoundTripsThroughParser) {
  const auto p = ModelParams::from_snr(1000000, 100, 5.0, 0.3);
  BoundReport rep = corr_bound(20, p);
  rep.corr_exact = 0.25;
  const auto j = nlohmann::json::parse(bound_report_json(rep));
  EXPECT_EQ(j.at("degree").get<int32_t>(), 20);
  EXPECT_EQ(j.at("n").get<int64_t>(), 1000000);
  EXPECT_EQ(j.at("q").get<int64_t>(), 100);
  EXPECT_NEAR(j.at("a").get<double>(), 153.5, 1e-12);
  EXPECT_NEAR(j.at("b").get<double>(), 3.5, 1e-12);
  EXPECT_NEAR(j.at("signal_ratio").get<double>(), 0.45002229860489595, 1e-12);
  EXPECT_NEAR(j.at("bound_item1").get<double>(), 8.182554406005631e-05, 1e-13);
  EXPECT_TRUE(j.at("guard_item1").get<bool>());
  EXPECT_TRUE(j.at("guard_item2").get<bool>());
  EXPECT_DOUBLE_EQ(j.at("scale_constant").get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(j.at("exponent_constant").get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(j.at("corr_exact").get<double>(), 0.25);

  const BoundReport far = corr_bound(2000000, p);
  const auto jf = nlohmann::json::parse(bound_report_json(far));
  EXPECT_TRUE(jf.at("bound_item1").is_null());
  EXPECT_TRUE(jf.at("corr_exact").is_null());
}
