#include "psiegel/theta.hpp"

#include <gtest/gtest.h>

using namespace psiegel;

namespace {

HalfIntegralMatrix M(const std::vector<std::vector<int64_t>>& rows) {
  return HalfIntegralMatrix::from_twoT(rows);
}

// All X in [-b, b]^{m x n} with S[X] = T; optionally only those whose
// maximal minors are coprime.
int64_t box_count(const HalfIntegralMatrix& s, const HalfIntegralMatrix& t, int b, bool primitive_only) {
  const int m = s.size(), n = t.size();
  const int cells = m * n;
  std::vector<int64_t> e(cells, -b);
  int64_t count = 0;
  while (true) {
    bool match = true;
    for (int i = 0; i < n && match; ++i)
      for (int j = 0; j < n && match; ++j) {
        Vec xi{}, xj{};
        for (int k = 0; k < m; ++k) {
          xi[k] = e[k * n + i];
          xj[k] = e[k * n + j];
        }
        match = s.bilinear2(xi, xj) == t.two(i, j);
      }
    if (match) {
      bool ok = true;
      if (primitive_only) {
        int64_t g = 0;
        for (int mask = 0; mask < (1 << m); ++mask) {
          if (__builtin_popcount(mask) != n) continue;
          IntMatrix sub(n);
          int r = 0;
          for (int k = 0; k < m; ++k) {
            if (!(mask & (1 << k))) continue;
            for (int c = 0; c < n; ++c) sub(r, c) = e[k * n + c];
            ++r;
          }
          g = gcd64(g, determinant64(sub));
        }
        ok = g == 1;
      }
      if (ok) ++count;
    }
    int pos = 0;
    while (pos < cells && e[pos] == b) e[pos++] = -b;
    if (pos == cells) break;
    ++e[pos];
  }
  return count;
}

}  // namespace

TEST(Indices, CountsAndCanonical) {
  // degree 1: 0..B
  EXPECT_EQ(fourier_indices(1, 10).size(), 11u);
  for (const auto& t : fourier_indices(2, 8)) {
    EXPECT_EQ(canonical(t), t);
    EXPECT_LE(t.trace(), 8);
  }
  // degree 2, trace <= 2: 0, (1,0), (2,0), (1,1) with b in {0, 1}
  EXPECT_EQ(fourier_indices(2, 2).size(), 5u);
}

TEST(QExpansion, OutOfRange) {
  QExpansion f(1, 5);
  EXPECT_THROW(f.coeff(HalfIntegralMatrix::diagonal({6})), DomainError);
  EXPECT_THROW(f.coeff(M({{2, 0}, {0, 2}})), DomainError);
  EXPECT_EQ(f.coeff(HalfIntegralMatrix::diagonal({5})), 0);
}

TEST(Theta, DegreeOneExamples) {
  const auto f = theta_series(M({{2}}), 1, 16);
  EXPECT_EQ(f.coeff(HalfIntegralMatrix(1)), 1);
  for (int64_t t = 1; t <= 16; ++t) {
    const int64_t r = static_cast<int64_t>(std::llround(std::sqrt(static_cast<double>(t))));
    EXPECT_EQ(f.coeff(HalfIntegralMatrix::diagonal({t})), r * r == t ? 2 : 0);
  }
  EXPECT_EQ(theta_series(M({{2, 1}, {1, 2}}), 1, 3).coeff(HalfIntegralMatrix::diagonal({1})), 6);
}

TEST(Theta, MatchesBoxCount) {
  const auto s = M({{2, 1}, {1, 4}});
  const auto f = theta_series(s, 2, 5);
  for (const auto& t : fourier_indices(2, 5)) EXPECT_EQ(f.coeff(t), box_count(s, t, 4, false)) << t.to_string();
}

TEST(Theta, ClassInvariance) {
  const auto s = M({{2, 1, 0}, {1, 4, 1}, {0, 1, 6}});
  IntMatrix u = IntMatrix::identity(3);
  u(0, 1) = 2;
  u(2, 0) = -1;
  EXPECT_EQ(theta_series(s, 2, 6), theta_series(s.transform(u), 2, 6));
}

TEST(Theta, CoefficientAtSIsAtLeastEpsilon) {
  for (const auto& s : {M({{2, 1}, {1, 2}}), M({{2, 0}, {0, 4}}), M({{2, 1}, {1, 4}})}) {
    const auto f = theta_series(s, 2, s.trace());
    EXPECT_GE(f.coeff(s), automorphism_count(s));
  }
}

TEST(Fourier, RankFilterPartition) {
  const auto f = theta_series(M({{2, 1}, {1, 4}}), 2, 6);
  QExpansion sum(2, 6);
  for (int r = 0; r <= 2; ++r) sum = sum + rank_filter(f, r);
  EXPECT_EQ(sum, f);
  const auto c = rank_filter(f, 0);
  EXPECT_EQ(c.coefficients().size(), 1u);
  EXPECT_EQ(c.coeff(HalfIntegralMatrix(2)), 1);
}

TEST(Fourier, RankOneThetaInDegreeTwo) {
  // theta of a rank-1 form has no rank-2 coefficients
  const auto f = theta_series(M({{2}}), 2, 8);
  EXPECT_TRUE(rank_filter(f, 2).coefficients().empty());
  EXPECT_EQ(f.coeff(M({{2, 2}, {2, 2}})), 2);  // X = +-(1, 1)
}

TEST(Fourier, ScalingAndLinearity) {
  const auto f = theta_series(M({{2, 1}, {1, 2}}), 1, 10);
  const auto g = f.scaled(Rational(3, 7));
  for (const auto& t : fourier_indices(1, 10)) EXPECT_EQ(g.coeff(t), Rational(3, 7) * f.coeff(t));
}

TEST(Fourier, CongruentMod) {
  const auto f = theta_series(M({{2, 1}, {1, 2}}), 1, 12);
  EXPECT_TRUE(congruent_mod(f, f, 7, 5));
  QExpansion unit(1, 12);
  for (int64_t t = 0; t <= 12; ++t) unit.set(HalfIntegralMatrix::diagonal({t}), 1 + 7 * t);
  const auto g = f + unit.scaled(49);
  EXPECT_TRUE(congruent_mod(f, g, 7, 2));
  const auto res = congruent_mod(f, g, 7, 3);
  EXPECT_FALSE(res);
  ASSERT_TRUE(res.witness.has_value());
  QExpansion bad(1, 12);
  bad.set(HalfIntegralMatrix::diagonal({1}), Rational(1, 7));
  EXPECT_THROW(congruent_mod(f, bad, 7, 1), DomainError);
}

TEST(Fourier, PrimitiveCoefficientsMatchPrimitiveCounts) {
  const auto s = M({{2, 1, 0}, {1, 2, 1}, {0, 1, 4}});
  const auto f = theta_series(s, 2, 6);
  for (int r = 1; r <= 2; ++r) {
    const auto prim = primitive_coeffs(f, r, 6);
    for (const auto& [t, v] : prim) EXPECT_EQ(v, box_count(s, t, 3, true)) << t.to_string();
  }
}

TEST(Fourier, PrimitiveInversionConsistency) {
  const auto f = theta_series(M({{2, 1}, {1, 4}}), 2, 8);
  const auto prim = primitive_coeffs(f, 2, 8);
  for (const auto& [t, v] : prim) {
    Rational total = 0;
    const int64_t det2 = t.det2().get_si();
    for (int64_t d = 1; d * d <= det2; ++d) {
      if (det2 % (d * d) != 0) continue;
      for (const auto& sup : superlattice_forms(t, d)) total += prim.at(canonical(sup));
    }
    EXPECT_EQ(total, f.coeff(t));
  }
  // squarefree det(2T): no correction
  const auto t = M({{2, 1}, {1, 4}});
  EXPECT_EQ(prim.at(t), f.coeff(t));
}

TEST(Fourier, ValuationsAndSingularRank) {
  QExpansion f(2, 4);
  f.set(HalfIntegralMatrix(2), 1);
  EXPECT_EQ(mod_pm_singular_rank(f, 7, 3), 0);
  EXPECT_TRUE(v_p_rank(f, 7, 1).is_infinite());
  f.set(M({{2, 0}, {0, 0}}), 7);
  f.set(M({{4, 0}, {0, 0}}), 14);
  EXPECT_EQ(v_p_rank(f, 7, 1), ExtendedValuation(1));
  EXPECT_EQ(v_p_rank(f.scaled(Rational(1, 7)), 7, 1), ExtendedValuation(0));
  // rank 1 coefficients divisible by 7 once: mod 7 singular of rank 0, not mod 49
  EXPECT_EQ(mod_pm_singular_rank(f, 7, 1), 0);
  EXPECT_EQ(mod_pm_singular_rank(f, 7, 2), std::nullopt);
  // theta of a rank-1 form in degree 2
  const auto th = theta_series(M({{2}}), 2, 6);
  for (int m = 1; m <= 3; ++m) EXPECT_EQ(mod_pm_singular_rank(th, 7, m), 1);
  // a unit at top rank: not singular
  EXPECT_EQ(mod_pm_singular_rank(theta_series(M({{2, 1}, {1, 2}}), 2, 4), 7, 1), std::nullopt);
}

TEST(Fourier, WeightRankCongruence) {
  EXPECT_TRUE(check_weight_rank_congruence(296, 4, 7, 3));
  EXPECT_FALSE(check_weight_rank_congruence(296, 4, 7, 4));
  EXPECT_TRUE(check_weight_rank_congruence(5, 10, 7, 9));
}

TEST(Fourier, HeckeUp) {
  QExpansion c(2, 20);
  c.set(HalfIntegralMatrix(2), 5);
  EXPECT_EQ(u_p(c, 3), [] {
    QExpansion r(2, 6);
    r.set(HalfIntegralMatrix(2), 5);
    return r;
  }());
  const auto f = theta_series(M({{14}}), 1, 63);  // S = (7)
  const auto g = u_p(f, 7);
  EXPECT_EQ(g.trace_bound(), 9);
  for (int64_t t = 0; t <= 9; ++t) {
    int64_t count = 0;
    for (int64_t x = -10; x <= 10; ++x) count += (7 * x * x == 7 * t);
    EXPECT_EQ(g.coeff(HalfIntegralMatrix::diagonal({t})), count);
  }
  const auto h = theta_series(M({{2, 1}, {1, 4}}), 2, 18);
  const auto h2 = u_p(u_p(h, 3), 3);
  for (const auto& t : fourier_indices(2, 2)) EXPECT_EQ(h2.coeff(t), h.coeff(t.scaled(9)));
}

TEST(Fourier, JsonRoundTrip) {
  const auto f = theta_series(M({{2, 1}, {1, 4}}), 2, 5).scaled(Rational(2, 3));
  EXPECT_EQ(QExpansion::from_json(f.to_json()), f);
  EXPECT_EQ(f.to_json().dump(), QExpansion::from_json(f.to_json()).to_json().dump());
}

TEST(ThetaDecomposition, ThetaSeriesExact) {
  for (const auto& s : {M({{2, 1}, {1, 2}}), M({{2, 1}, {1, 4}}), M({{2}}), M({{4}})})
    for (int n = s.size(); n <= 3; ++n) {
      const auto f = theta_series(s, n, 5);
      const auto rep = verify_rank_decomposition(f, s.size(), 5);
      EXPECT_TRUE(rep.passed()) << s.to_string() << " n=" << n;
    }
}

TEST(ThetaDecomposition, VanishingRankPart) {
  const auto f = theta_series(M({{2}}), 2, 5);
  const auto rep = verify_rank_decomposition(f, 2, 5);
  EXPECT_TRUE(rep.passed());
  for (const auto& [s, v] : rep.primitive) EXPECT_EQ(v, 0);
}

TEST(GenusTheta, SingleClassAndMass) {
  const auto genera = partition_into_genera(enumerate_classes(2, 3));
  const auto gt = genus_theta(genera[0], 1, 10);
  const auto th = theta_series(genera[0].classes[0].rep, 1, 10);
  EXPECT_EQ(gt.average, th);
  EXPECT_EQ(gt.zero, th.scaled(Rational(1, 12)));
  EXPECT_EQ(gt.zero.coeff(HalfIntegralMatrix(1)), genera[0].mass);
}

TEST(GenusTheta, MultiClassWeights) {
  const auto genera = partition_into_genera(enumerate_classes(4, 5));
  for (const auto& g : genera) {
    const auto gt = genus_theta(g, 1, 6);
    EXPECT_EQ(gt.average.coeff(HalfIntegralMatrix(1)), 1);
    EXPECT_EQ(gt.average.scaled(g.mass), gt.zero);
    for (int64_t t = 0; t <= 6; ++t) {
      Rational expect = 0;
      for (const auto& c : g.classes)
        expect += theta_series(c.rep, 1, 6).coeff(HalfIntegralMatrix::diagonal({t})) / Rational(c.epsilon);
      EXPECT_EQ(gt.zero.coeff(HalfIntegralMatrix::diagonal({t})), expect);
    }
  }
}
