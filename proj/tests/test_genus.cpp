#include "psiegel/genus.hpp"

#include <gtest/gtest.h>

using namespace psiegel;

namespace {

HalfIntegralMatrix M(const std::vector<std::vector<int64_t>>& rows) {
  return HalfIntegralMatrix::from_twoT(rows);
}

// #{x mod q^e : S[x] = t mod q^e} for t = 0..10, by exhaustive count.
std::vector<int64_t> local_counts(const HalfIntegralMatrix& s, int64_t q, int e) {
  const int n = s.size();
  const int64_t mod = ipow(q, e);
  std::vector<int64_t> counts(11, 0);
  Vec x{};
  std::function<void(int)> rec = [&](int i) {
    if (i == n) {
      int64_t v = s.value(x) % mod;
      for (int64_t t = 0; t <= 10; ++t)
        if (((v - t) % mod + mod) % mod == 0) ++counts[t];
      return;
    }
    for (int64_t a = 0; a < mod; ++a) {
      x[i] = a;
      rec(i + 1);
    }
  };
  rec(0);
  return counts;
}

bool same_local_counts(const HalfIntegralMatrix& a, const HalfIntegralMatrix& b) {
  const int64_t d = a.det2().get_si();
  for (int64_t q : prime_divisors(2 * d)) {
    const int e = static_cast<int>(vp_int(Integer(2 * d), q)) + 1;
    if (ipow(q, e * a.size()) > 3000000) continue;
    if (local_counts(a, q, e) != local_counts(b, q, e)) return false;
  }
  return true;
}

}  // namespace

TEST(Genus, Basic) {
  const auto a2 = M({{2, 1}, {1, 2}});
  EXPECT_TRUE(same_genus(a2, a2));
  EXPECT_FALSE(same_genus(a2, M({{2, 0}, {0, 2}})));
  EXPECT_FALSE(same_genus(a2, M({{2, 1, 0}, {1, 2, 0}, {0, 0, 2}})));
}

TEST(Genus, BinaryDiscriminantMinus56) {
  // x^2 + 14y^2 and 2x^2 + 7y^2 share the principal genus; 3x^2 + 2xy + 5y^2 does not.
  const auto f1 = M({{2, 0}, {0, 28}}), f2 = M({{4, 0}, {0, 14}}), f3 = M({{6, 2}, {2, 10}});
  EXPECT_FALSE(is_equivalent(f1, f2));
  EXPECT_TRUE(same_genus(f1, f2));
  EXPECT_FALSE(same_genus(f1, f3));
  EXPECT_TRUE(same_local_counts(f1, f2));
  EXPECT_FALSE(same_local_counts(f1, f3));
}

TEST(Genus, BinaryDiscriminantMinus24) {
  // x^2 + 6y^2 and 2x^2 + 3y^2 lie in different genera.
  EXPECT_FALSE(same_genus(M({{2, 0}, {0, 12}}), M({{4, 0}, {0, 6}})));
}

TEST(Genus, SingletonPartition) {
  const auto classes = enumerate_classes(2, 3);
  const auto genera = partition_into_genera(classes);
  ASSERT_EQ(genera.size(), 1u);
  EXPECT_EQ(genera[0].mass, Rational(1, 12));
  EXPECT_EQ(genera[0].level, 3);
}

TEST(Genus, InvariantsConstantOnGenera) {
  for (auto [r, n] : std::vector<std::pair<int, int64_t>>{{2, 4}, {2, 8}, {2, 12}, {2, 23}, {4, 4}, {4, 5}, {4, 7}}) {
    const auto classes = enumerate_classes(r, n);
    const auto genera = partition_into_genera(classes);
    std::size_t total = 0;
    for (const auto& g : genera) {
      total += g.classes.size();
      Rational mass = 0;
      for (const auto& c : g.classes) {
        mass += Rational(1, c.epsilon);
        EXPECT_EQ(c.rep.det2(), g.classes.front().rep.det2());
        EXPECT_EQ(level(c.rep), g.level);
        for (int64_t d = 1; d <= 30; ++d)
          if (gcd64(d, 2 * g.classes.front().rep.det2().get_si()) == 1) EXPECT_EQ(chi_S(c.rep, d), g.character(d));
      }
      EXPECT_EQ(mass, g.mass);
    }
    EXPECT_EQ(total, classes.size());
  }
}

TEST(Genus, EquivalenceRelationAndLocalCounts) {
  const auto classes = enumerate_classes(2, 23);
  ASSERT_EQ(classes.size(), 2u);  // h(-23) = 3, the two non-principal classes are GL-equivalent
  for (const auto& a : classes)
    for (const auto& b : classes) {
      EXPECT_TRUE(same_genus(a.rep, b.rep));
      EXPECT_TRUE(same_local_counts(a.rep, b.rep));
    }
  const auto c12 = enumerate_classes(2, 12);
  for (const auto& a : c12)
    for (const auto& b : c12) {
      EXPECT_EQ(same_genus(a.rep, b.rep), same_genus(b.rep, a.rep));
      if (is_equivalent(a.rep, b.rep)) EXPECT_TRUE(same_genus(a.rep, b.rep));
      if (same_genus(a.rep, b.rep)) EXPECT_TRUE(same_local_counts(a.rep, b.rep));
      for (const auto& c : c12)
        if (same_genus(a.rep, b.rep) && same_genus(b.rep, c.rep)) EXPECT_TRUE(same_genus(a.rep, c.rep));
    }
}

TEST(Genus, QuaternaryLevelSevenSingleGenus) {
  const auto classes = enumerate_classes(4, 7);
  const auto genera = partition_into_genera(classes);
  ASSERT_EQ(genera.size(), 1u);
  EXPECT_TRUE(genera[0].character.same_values(QuadCharacter::trivial_mod(7)));
  EXPECT_EQ(genera[0].mass, Rational(1, 32));
}

TEST(Genus, JsonRoundTrip) {
  const auto classes = enumerate_classes(4, 5);
  const auto genera = partition_into_genera(classes);
  const auto j = genera_to_json(4, 5, classes, genera);
  const auto back = genera_from_json(nlohmann::json::parse(j.dump()));
  ASSERT_EQ(back.size(), genera.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].mass, genera[i].mass);
    EXPECT_EQ(back[i].classes, genera[i].classes);
    EXPECT_EQ(back[i].level, genera[i].level);
  }
}

TEST(Genus, CacheIsDeterministic) {
  const auto dir = std::filesystem::temp_directory_path() / "psiegel_genus_cache_test";
  std::filesystem::remove_all(dir);
  load_or_compute_genera(4, 5, dir);
  std::ifstream a(genus_cache_path(dir, 4, 5));
  const std::string first((std::istreambuf_iterator<char>(a)), {});
  std::filesystem::remove_all(dir);
  load_or_compute_genera(4, 5, dir);
  std::ifstream b(genus_cache_path(dir, 4, 5));
  const std::string second((std::istreambuf_iterator<char>(b)), {});
  EXPECT_EQ(first, second);
  EXPECT_EQ(load_or_compute_genera(4, 5, dir).size(), partition_into_genera(enumerate_classes(4, 5)).size());
  std::filesystem::remove_all(dir);
}
