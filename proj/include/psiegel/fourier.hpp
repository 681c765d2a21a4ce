#pragma once

// Truncated Fourier expansions sum a(T) q^T of Siegel modular forms of
// degree n, indexed by canonical representatives of T >= 0 in Lambda_n.

#include "psiegel/genus.hpp"

#include <map>
#include <optional>

namespace psiegel {

/// Canonical forms T >= 0 in Lambda_n whose class has a representative of
/// trace <= bound (for n <= 4 this is the trace of the canonical form).
inline std::vector<HalfIntegralMatrix> definite_indices(int r, int64_t bound) {
  std::set<HalfIntegralMatrix> found;
  if (r == 0) return {HalfIntegralMatrix(0)};
  IntMatrix g(r);
  // reduced shape: ascending diagonal, 2|t_ij| <= t_ii for i < j
  std::function<void(int, int64_t)> place = [&](int i, int64_t rest) {
    if (i == r) {
      const HalfIntegralMatrix t(g);
      if (t.is_positive_definite()) found.insert(canonical(t));
      return;
    }
    const int64_t lo = i == 0 ? 2 : g(i - 1, i - 1);
    for (int64_t a = lo; (a / 2) * (r - i) <= rest; a += 2) {
      g(i, i) = a;
      std::function<void(int)> off = [&](int j) {
        if (j == i) {
          IntMatrix lead(i + 1);
          for (int x = 0; x <= i; ++x)
            for (int y = 0; y <= i; ++y) lead(x, y) = g(x, y);
          if (determinant64(lead) > 0) place(i + 1, rest - a / 2);
          return;
        }
        const int64_t lim = g(j, j) / 2;
        for (int64_t v = -lim; v <= lim; ++v) {
          g(i, j) = g(j, i) = v;
          off(j + 1);
        }
        g(i, j) = g(j, i) = 0;
      };
      off(0);
    }
    g(i, i) = 0;
  };
  place(0, bound);
  std::vector<HalfIntegralMatrix> out;
  for (const auto& t : found)
    if (t.trace() <= bound) out.push_back(t);
  return out;
}

/// All canonical T >= 0 in Lambda_n with trace <= bound, every rank.
inline std::vector<HalfIntegralMatrix> fourier_indices(int n, int64_t bound) {
  std::vector<HalfIntegralMatrix> out;
  for (int r = 0; r <= n; ++r)
    for (const auto& t : definite_indices(r, bound)) out.push_back(r == 0 ? HalfIntegralMatrix(n) : t.pad_zero(n));
  std::sort(out.begin(), out.end());
  return out;
}

class QExpansion {
public:
  QExpansion() = default;
  QExpansion(int degree, int64_t trace_bound, bool class_invariant = true)
      : degree_(degree), bound_(trace_bound), invariant_(class_invariant) {
    if (degree < 1 || degree > kMaxDim) throw DomainError("QExpansion: degree out of range");
    if (trace_bound < 0) throw DomainError("QExpansion: negative trace bound");
  }

  int degree() const { return degree_; }
  int64_t trace_bound() const { return bound_; }
  bool class_invariant() const { return invariant_; }

  /// Storage key of T, after validating size, semidefiniteness and window.
  HalfIntegralMatrix key(const HalfIntegralMatrix& t) const {
    if (t.size() != degree_) throw DomainError("index of size " + std::to_string(t.size()) + " in a degree " +
                                               std::to_string(degree_) + " expansion");
    const HalfIntegralMatrix k = invariant_ ? canonical(t) : t;
    if (!invariant_ && !t.is_positive_semidefinite()) throw DomainError("index must be positive semidefinite");
    if (k.trace() > bound_)
      throw DomainError("index " + t.to_string() + " outside trace bound " + std::to_string(bound_));
    return k;
  }

  Rational coeff(const HalfIntegralMatrix& t) const {
    const auto it = coeffs_.find(key(t));
    return it == coeffs_.end() ? Rational(0) : it->second;
  }

  void set(const HalfIntegralMatrix& t, const Rational& value) {
    const HalfIntegralMatrix k = key(t);
    if (value == 0) coeffs_.erase(k);
    else coeffs_[k] = value;
  }

  void add(const HalfIntegralMatrix& t, const Rational& value) { set(t, coeff(t) + value); }

  /// Nonzero coefficients by storage key.
  const std::map<HalfIntegralMatrix, Rational>& coefficients() const { return coeffs_; }

  /// All indices of the window (including zero coefficients).
  std::vector<HalfIntegralMatrix> indices() const { return fourier_indices(degree_, bound_); }

  QExpansion scaled(const Rational& c) const {
    QExpansion out(degree_, bound_, invariant_);
    if (c != 0)
      for (const auto& [t, v] : coeffs_) out.coeffs_[t] = v * c;
    return out;
  }

  QExpansion truncated(int64_t bound) const {
    QExpansion out(degree_, std::min(bound, bound_), invariant_);
    for (const auto& [t, v] : coeffs_)
      if (t.trace() <= out.bound_) out.coeffs_[t] = v;
    return out;
  }

  friend QExpansion operator+(const QExpansion& f, const QExpansion& g) { return combine(f, g, 1); }
  friend QExpansion operator-(const QExpansion& f, const QExpansion& g) { return combine(f, g, -1); }
  friend bool operator==(const QExpansion& f, const QExpansion& g) {
    return f.degree_ == g.degree_ && f.bound_ == g.bound_ && f.coeffs_ == g.coeffs_;
  }

  /// Deterministic dump: header plus list of {twoT, num, den} in key order.
  nlohmann::json to_json() const {
    nlohmann::json coeffs = nlohmann::json::array();
    for (const auto& [t, v] : coeffs_)
      coeffs.push_back({{"twoT", t.twoT().rows()}, {"num", v.get_num().get_str()}, {"den", v.get_den().get_str()}});
    return {{"degree", degree_}, {"trace_bound", bound_}, {"class_invariant", invariant_}, {"coefficients", coeffs}};
  }

  static QExpansion from_json(const nlohmann::json& j) {
    QExpansion f(j.at("degree").get<int>(), j.at("trace_bound").get<int64_t>(), j.value("class_invariant", true));
    for (const auto& c : j.at("coefficients")) {
      Rational v(Integer(c.at("num").get<std::string>()), Integer(c.at("den").get<std::string>()));
      v.canonicalize();
      f.set(HalfIntegralMatrix::from_twoT(c.at("twoT").get<std::vector<std::vector<int64_t>>>()), v);
    }
    return f;
  }

private:
  static QExpansion combine(const QExpansion& f, const QExpansion& g, int sign) {
    if (f.degree_ != g.degree_) throw DomainError("degree mismatch");
    QExpansion out(f.degree_, std::min(f.bound_, g.bound_), f.invariant_ && g.invariant_);
    for (const auto& [t, v] : f.coeffs_)
      if (t.trace() <= out.bound_) out.coeffs_[t] = v;
    for (const auto& [t, v] : g.coeffs_) {
      if (t.trace() > out.bound_) continue;
      Rational& slot = out.coeffs_[t];
      slot += sign * v;
      if (slot == 0) out.coeffs_.erase(t);
    }
    return out;
  }

  int degree_ = 1;
  int64_t bound_ = 0;
  bool invariant_ = true;
  std::map<HalfIntegralMatrix, Rational> coeffs_;
};

/// Fill an expansion from a coefficient function over every window index.
inline QExpansion expansion_from(int degree, int64_t bound,
                                 const std::function<Rational(const HalfIntegralMatrix&)>& coeff) {
  QExpansion f(degree, bound);
  for (const auto& t : fourier_indices(degree, bound)) f.set(t, coeff(t));
  return f;
}

struct CongruenceResult {
  bool holds = true;
  std::optional<HalfIntegralMatrix> witness;  // first index violating the congruence
  explicit operator bool() const { return holds; }
};

/// F = G mod p^m on the common window.
inline CongruenceResult congruent_mod(const QExpansion& f, const QExpansion& g, int64_t p, int m) {
  if (f.degree() != g.degree()) throw DomainError("congruent_mod: degree mismatch");
  const int64_t bound = std::min(f.trace_bound(), g.trace_bound());
  std::set<HalfIntegralMatrix> keys;
  for (const auto& [t, v] : f.coefficients())
    if (t.trace() <= bound) keys.insert(t);
  for (const auto& [t, v] : g.coefficients())
    if (t.trace() <= bound) keys.insert(t);
  for (const auto& t : keys)
    if (!is_p_integral(f.coeff(t), p) || !is_p_integral(g.coeff(t), p))
      throw DomainError("congruent_mod: coefficient at " + t.to_string() + " is not p-integral");
  for (const auto& t : keys)
    if (!(vp(f.coeff(t) - g.coeff(t), p) >= m)) return {false, t};
  return {true, std::nullopt};
}

/// F_[r]: the coefficients of rank r only.
inline QExpansion rank_filter(const QExpansion& f, int r) {
  if (r < 0 || r > f.degree()) throw DomainError("rank_filter: rank out of range");
  QExpansion out(f.degree(), f.trace_bound(), f.class_invariant());
  for (const auto& [t, v] : f.coefficients())
    if (rank(t) == r) out.set(t, v);
  return out;
}

/// Primitive coefficients a*(T) for canonical T in Lambda_r^+ with
/// tr(T) <= bound, from a(T (+) 0) = sum_D a*(T[D^{-1}]) over D in
/// GL_r(Z) \ M_r(Z) with T[D^{-1}] half-integral. Works for any coefficient
/// source `a` defined on Lambda_r^+ (the values a(T (+) 0)).
class PrimitiveCoefficients {
public:
  PrimitiveCoefficients(int r, std::function<Rational(const HalfIntegralMatrix&)> a) : r_(r), a_(std::move(a)) {}

  Rational operator()(const HalfIntegralMatrix& t) {
    const HalfIntegralMatrix c = canonical(t);
    if (c.size() != r_ || !c.is_positive_definite()) throw DomainError("primitive coefficient needs T in Lambda_r^+");
    if (auto it = memo_.find(c); it != memo_.end()) return it->second;
    Rational value = a_(c);
    const int64_t det2 = c.det2().get_si();
    for (int64_t d = 2; d * d <= det2; ++d) {
      if (det2 % (d * d) != 0) continue;
      for (const auto& sup : superlattice_forms(c, d)) value -= (*this)(sup);
    }
    memo_.emplace(c, value);
    return value;
  }

private:
  int r_;
  std::function<Rational(const HalfIntegralMatrix&)> a_;
  std::map<HalfIntegralMatrix, Rational> memo_;
};

/// a_F(T)* for all canonical T in Lambda_r^+ with tr(T) <= bound.
inline std::map<HalfIntegralMatrix, Rational> primitive_coeffs(const QExpansion& f, int r, int64_t bound) {
  if (!f.class_invariant()) throw DomainError("primitive_coeffs: expansion must be class invariant");
  if (r < 1 || r > f.degree()) throw DomainError("primitive_coeffs: rank out of range");
  if (bound > f.trace_bound()) throw DomainError("primitive_coeffs: bound exceeds the window");
  PrimitiveCoefficients prim(r, [&](const HalfIntegralMatrix& t) { return f.coeff(t.pad_zero(f.degree())); });
  std::map<HalfIntegralMatrix, Rational> out;
  for (const auto& t : definite_indices(r, bound)) out.emplace(t, prim(t));
  return out;
}

/// inf v_p over the stored rank-r coefficients (window relative).
inline ExtendedValuation v_p_rank(const QExpansion& f, int64_t p, int r) {
  ExtendedValuation best = ExtendedValuation::infinity();
  for (const auto& [t, v] : f.coefficients())
    if (rank(t) == r) best = std::min(best, vp(v, p));
  return best;
}

/// The p-rank r < n when F is mod p^m singular on the window: every
/// coefficient of rank > r vanishes mod p^m and some rank-r coefficient is a
/// p-unit.
inline std::optional<int> mod_pm_singular_rank(const QExpansion& f, int64_t p, int m) {
  if (m < 1) throw DomainError("mod_pm_singular_rank: m >= 1 required");
  int top = -1;
  for (const auto& [t, v] : f.coefficients()) {
    if (!is_p_integral(v, p)) throw DomainError("mod_pm_singular_rank: coefficient is not p-integral");
    if (!(vp(v, p) >= m)) top = std::max(top, rank(t));
  }
  if (top < 0 || top >= f.degree()) return std::nullopt;
  for (const auto& [t, v] : f.coefficients())
    if (rank(t) == top && vp(v, p) == ExtendedValuation(0)) return top;
  return std::nullopt;
}

/// 2k - r = 0 mod (p - 1) p^{m-1}.
inline bool check_weight_rank_congruence(int64_t k, int64_t r, int64_t p, int m) {
  if (m < 1) throw DomainError("check_weight_rank_congruence: m >= 1 required");
  const Integer mod = Integer(p - 1) * pow_int(Integer(p), m - 1);
  const Integer diff = 2 * Integer(k) - r;
  return diff % mod == 0;
}

/// F | U(p): a(T) -> a(pT), on the window floor(B / p).
inline QExpansion u_p(const QExpansion& f, int64_t p) {
  if (p < 2) throw DomainError("u_p: p >= 2 required");
  QExpansion out(f.degree(), f.trace_bound() / p, f.class_invariant());
  for (const auto& [t, v] : f.coefficients()) {
    // keys are canonical: t = p t' with t' canonical exactly when p divides 2T entrywise
    bool divisible = true;
    for (int i = 0; i < t.size() && divisible; ++i)
      for (int j = 0; j < t.size() && divisible; ++j)
        divisible = t.two(i, j) % p == 0 && (i != j || (t.two(i, i) / p) % 2 == 0);
    if (!divisible) continue;
    IntMatrix m = t.twoT();
    for (auto& e : m.a) e /= p;
    const HalfIntegralMatrix small(m);
    if (small.trace() <= out.trace_bound()) out.set(small, v);
  }
  return out;
}

/// Degree n-1 window read from the indices T (+) 0 of a degree-n expansion.
inline QExpansion phi_view(const QExpansion& f) {
  if (f.degree() < 2) throw DomainError("phi_view: degree >= 2 required");
  QExpansion out(f.degree() - 1, f.trace_bound(), f.class_invariant());
  for (const auto& t : fourier_indices(f.degree() - 1, f.trace_bound())) out.set(t, f.coeff(t.pad_zero(f.degree())));
  return out;
}

}  // namespace psiegel
