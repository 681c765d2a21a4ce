#pragma once

// Theta series theta_S^{(n)} = sum_X q^{S[X]}, genus theta series and the
// decomposition of the rank-r part of an expansion into theta series.

#include "psiegel/fourier.hpp"

namespace psiegel {

namespace detail {

/// Vectors of S grouped by norm S[x], including x = 0 at norm 0.
inline std::map<int64_t, std::vector<Vec>> vectors_by_norm(const HalfIntegralMatrix& s, int64_t bound) {
  std::map<int64_t, std::vector<Vec>> out;
  out[0].push_back(Vec{});
  for (const auto& sv : short_vectors(s, bound, true)) out[sv.value].push_back(sv.x);
  return out;
}

/// #{X in Z^{r x n} : S[X] = T} using the precomputed vector lists.
inline int64_t count_representations(const HalfIntegralMatrix& s, const HalfIntegralMatrix& t,
                                     const std::map<int64_t, std::vector<Vec>>& by_norm) {
  const int n = t.size();
  std::vector<const std::vector<Vec>*> lists(n);
  for (int i = 0; i < n; ++i) {
    const auto it = by_norm.find(t.two(i, i) / 2);
    if (it == by_norm.end()) return 0;
    lists[i] = &it->second;
  }
  std::vector<const Vec*> chosen(n);
  int64_t count = 0;
  std::function<void(int)> rec = [&](int i) {
    if (i == n) {
      ++count;
      return;
    }
    for (const Vec& x : *lists[i]) {
      bool ok = true;
      for (int j = 0; j < i && ok; ++j) ok = s.bilinear2(*chosen[j], x) == t.two(j, i);
      if (!ok) continue;
      chosen[i] = &x;
      rec(i + 1);
    }
  };
  rec(0);
  return count;
}

}  // namespace detail

/// theta_S^{(n)} on the window tr(T) <= bound.
inline QExpansion theta_series(const HalfIntegralMatrix& s, int n, int64_t bound) {
  if (!s.is_positive_definite()) throw DomainError("theta_series: S must be positive definite");
  const auto by_norm = detail::vectors_by_norm(s, bound);
  QExpansion f(n, bound);
  for (const auto& t : fourier_indices(n, bound)) {
    const int64_t c = detail::count_representations(s, t, by_norm);
    if (c != 0) f.set(t, c);
  }
  return f;
}

struct GenusTheta {
  QExpansion average;  // Theta: (sum theta_i / eps_i) / mass
  QExpansion zero;     // Theta^0: sum theta_i / eps_i
};

inline GenusTheta genus_theta(const GenusRecord& g, int n, int64_t bound) {
  if (g.classes.empty()) throw DomainError("genus_theta: empty genus");
  QExpansion zero(n, bound);
  for (const ClassRecord& c : g.classes) zero = zero + theta_series(c.rep, n, bound).scaled(Rational(1, c.epsilon));
  return {zero.scaled(1 / g.mass), zero};
}

struct DecompositionRow {
  HalfIntegralMatrix index;
  Rational lhs;
  Rational rhs;
};

struct DecompositionReport {
  int degree = 0;
  int rank = 0;
  int64_t trace_bound = 0;
  std::vector<DecompositionRow> rows;
  std::map<HalfIntegralMatrix, Rational> primitive;  // a*(S) used on the right

  bool passed() const {
    return std::all_of(rows.begin(), rows.end(), [](const DecompositionRow& r) { return r.lhs == r.rhs; });
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["degree"] = degree;
    j["rank"] = rank;
    j["trace_bound"] = trace_bound;
    j["passed"] = passed();
    j["rows"] = nlohmann::json::array();
    for (const auto& r : rows)
      j["rows"].push_back({{"twoT", r.index.twoT().rows()}, {"lhs", rational_to_json(r.lhs)}, {"rhs", rational_to_json(r.rhs)}});
    return j;
  }
};

/// Both sides of F_[r] = sum_S a*(S (+) 0) / eps(S) * (theta_S^{(n)})_[r]
/// over the window tr(T) <= bound; S runs over classes in Lambda_r^+ with
/// tr(S) <= bound, which are all that can contribute there.
inline DecompositionReport verify_rank_decomposition(const QExpansion& f, int r, int64_t bound) {
  if (!f.class_invariant()) throw DomainError("verify_rank_decomposition: expansion must be class invariant");
  if (r < 1 || r > f.degree()) throw DomainError("verify_rank_decomposition: rank out of range");
  if (bound > f.trace_bound()) throw DomainError("verify_rank_decomposition: window too small for the bound");
  const int n = f.degree();
  DecompositionReport report;
  report.degree = n;
  report.rank = r;
  report.trace_bound = bound;
  report.primitive = primitive_coeffs(f, r, bound);
  QExpansion rhs(n, bound);
  for (const auto& [s, astar] : report.primitive) {
    if (astar == 0) continue;
    const Rational weight = astar / Rational(automorphism_count(s));
    rhs = rhs + rank_filter(theta_series(s, n, bound), r).scaled(weight);
  }
  const QExpansion lhs = rank_filter(f.truncated(bound), r);
  for (const auto& t : fourier_indices(n, bound)) {
    if (rank(t) != r) continue;
    report.rows.push_back({t, lhs.coeff(t), rhs.coeff(t)});
  }
  return report;
}

}  // namespace psiegel
