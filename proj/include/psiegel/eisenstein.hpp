#pragma once

// Fourier coefficients of the level-one Siegel-Eisenstein series E_k^{(n)}:
// closed forms in degrees 1 and 2, and a local-density evaluation for
// positive definite indices of rank up to 4.

#include "psiegel/fourier.hpp"

namespace psiegel {

inline void validate_eisenstein_weight(int64_t k, int n) {
  if (n < 1) throw DomainError("eisenstein: degree must be positive");
  if (k % 2 != 0) throw DomainError("eisenstein: weight k = " + std::to_string(k) + " must be even");
  if (k <= n + 1) throw DomainError("eisenstein: weight k = " + std::to_string(k) + " must exceed n + 1");
}

/// a_k^{(1)}(t) = -2k/B_k sigma_{k-1}(t) for t >= 1.
inline Rational eisenstein_degree1(int64_t k, int64_t t) {
  if (t == 0) return 1;
  return Rational(-2 * k) / bernoulli(k) * Rational(divisor_sigma(t, k - 1));
}

/// a_k^{(2)}(T) for T > 0 with 2T = [[2a, b], [b, 2c]]:
///   2 / (zeta(1-k) zeta(3-2k)) sum_{d | (a,b,c)} d^{k-1} H(k-1, (4ac - b^2) / d^2).
inline Rational eisenstein_degree2_definite(int64_t k, const HalfIntegralMatrix& t) {
  const int64_t a = t.two(0, 0) / 2, b = t.two(0, 1), c = t.two(1, 1) / 2;
  const int64_t disc = 4 * a * c - b * b;
  if (disc <= 0) throw DomainError("eisenstein_degree2_definite: T must be positive definite");
  Rational sum = 0;
  for (int64_t d : divisors(gcd64(gcd64(a, b), c)))
    sum += Rational(pow_int(Integer(d), k - 1)) * cohen_H(static_cast<unsigned>(k - 1), disc / (d * d));
  return 2 * sum / (zeta_at_one_minus(k) * zeta_at_one_minus(2 * k - 2));
}

// ---------------------------------------------------------------------------
// Local densities

namespace detail {

/// Polynomial in Y = p^k, index = degree.
using YPoly = std::vector<Rational>;

inline void ypoly_add(YPoly& acc, const YPoly& x, const Rational& scale) {
  if (acc.size() < x.size()) acc.resize(x.size(), 0);
  for (std::size_t i = 0; i < x.size(); ++i) acc[i] += scale * x[i];
}

inline YPoly ypoly_mul(const YPoly& x, const YPoly& y) {
  YPoly out(x.size() + y.size() - 1, 0);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) out[i + j] += x[i] * y[j];
  return out;
}

inline Rational ypoly_eval(const YPoly& x, const Integer& y) {
  Rational acc = 0;
  for (std::size_t i = x.size(); i-- > 0;) acc = acc * y + x[i];
  return acc;
}

using Fp = std::vector<int64_t>;  // vector over F_p

/// All subspaces of F_p^n as bases in reduced row echelon form.
inline std::vector<std::vector<Fp>> subspaces(int n, int64_t p) {
  std::vector<std::vector<Fp>> out;
  for (int d = 0; d <= n; ++d) {
    std::vector<int> piv(d);
    std::function<void(int, int)> choose = [&](int i, int start) {
      if (i == d) {
        std::vector<std::pair<int, int>> free;
        for (int r = 0; r < d; ++r)
          for (int c = piv[r] + 1; c < n; ++c)
            if (std::find(piv.begin(), piv.end(), c) == piv.end()) free.emplace_back(r, c);
        std::vector<Fp> rows(d, Fp(n, 0));
        for (int r = 0; r < d; ++r) rows[r][piv[r]] = 1;
        std::function<void(std::size_t)> fill = [&](std::size_t idx) {
          if (idx == free.size()) {
            out.push_back(rows);
            return;
          }
          for (int64_t v = 0; v < p; ++v) {
            rows[free[idx].first][free[idx].second] = v;
            fill(idx + 1);
          }
          rows[free[idx].first][free[idx].second] = 0;
        };
        fill(0);
        return;
      }
      for (int c = start; c < n; ++c) {
        piv[i] = c;
        choose(i + 1, c + 1);
      }
    };
    choose(0, 0);
  }
  return out;
}

inline int64_t mod_p(int64_t x, int64_t p) { return ((x % p) + p) % p; }

inline int rank_mod_p(std::vector<Fp> rows, int64_t p) {
  if (rows.empty()) return 0;
  const int n = static_cast<int>(rows[0].size());
  int r = 0;
  for (int c = 0; c < n && r < static_cast<int>(rows.size()); ++c) {
    int piv = -1;
    for (int i = r; i < static_cast<int>(rows.size()); ++i)
      if (mod_p(rows[i][c], p) != 0) {
        piv = i;
        break;
      }
    if (piv < 0) continue;
    std::swap(rows[r], rows[piv]);
    Integer inv;
    const Integer lead = mod_p(rows[r][c], p);
    mpz_invert(inv.get_mpz_t(), lead.get_mpz_t(), Integer(p).get_mpz_t());
    for (auto& v : rows[r]) v = mod_p(v * inv.get_si(), p);
    for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
      if (i == r || mod_p(rows[i][c], p) == 0) continue;
      const int64_t f = rows[i][c];
      for (int j = 0; j < n; ++j) rows[i][j] = mod_p(rows[i][j] - f * rows[r][j], p);
    }
    ++r;
  }
  return r;
}

/// Number of primitive representations of T mod p by the split form of
/// rank 2k, as a polynomial in Y = p^k. Inclusion-exclusion over radical
/// subspaces W, each term counting by totally singular U containing W.
inline YPoly primitive_count_poly(const IntMatrix& tw, int64_t p) {
  const int n = tw.n;
  auto q = [&](const Fp& x) {
    int64_t s = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += tw(i, j) * x[i] * x[j];
    return mod_p(s / 2, p);
  };
  auto b = [&](const Fp& x, const Fp& y) {
    int64_t s = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += tw(i, j) * x[i] * y[j];
    return mod_p(s, p);
  };
  std::vector<std::vector<Fp>> singular, radical;
  for (const auto& u : subspaces(n, p)) {
    bool ts = true;
    for (std::size_t i = 0; i < u.size() && ts; ++i) {
      ts = q(u[i]) == 0;
      for (std::size_t j = i + 1; j < u.size() && ts; ++j) ts = b(u[i], u[j]) == 0;
    }
    if (!ts) continue;
    singular.push_back(u);
    bool rad = true;
    for (std::size_t i = 0; i < u.size() && rad; ++i)
      for (int e = 0; e < n && rad; ++e) {
        Fp unit(n, 0);
        unit[e] = 1;
        rad = b(u[i], unit) == 0;
      }
    if (rad) radical.push_back(u);
  }
  // inj(a) = prod_{i<a} (Y - p^i)
  auto inj = [&](int a) {
    YPoly out{1};
    for (int i = 0; i < a; ++i) out = ypoly_mul(out, YPoly{Rational(-pow_int(Integer(p), i)), Rational(1)});
    return out;
  };
  YPoly total;
  for (const auto& w : radical) {
    const int dw = static_cast<int>(w.size());
    const int m = n - dw;
    YPoly nw;
    for (const auto& u : singular) {
      if (static_cast<int>(u.size()) < dw) continue;
      std::vector<Fp> both = u;
      both.insert(both.end(), w.begin(), w.end());
      if (rank_mod_p(both, p) != static_cast<int>(u.size())) continue;
      const int dd = static_cast<int>(u.size()) - dw;
      // inj(m - dd) Y^m p^{dd(dd+1)/2 - m(m+1)/2}
      YPoly term = inj(m - dd);
      term.insert(term.begin(), m, Rational(0));
      ypoly_add(nw, term, pow_rat(Rational(p), dd * (dd + 1) / 2 - m * (m + 1) / 2));
    }
    const Rational sign_scale = (dw % 2 == 0 ? 1 : -1) * Rational(pow_int(Integer(p), dw * (dw - 1) / 2));
    ypoly_add(total, nw, sign_scale);
  }
  return total;
}

inline YPoly primitive_count_poly_cached(const IntMatrix& tw, int64_t p) {
  IntMatrix key = tw;
  for (int i = 0; i < tw.n; ++i)
    for (int j = 0; j < tw.n; ++j) key(i, j) = mod_p(tw(i, j), 2 * p);
  static std::mutex mutex;
  static std::map<std::tuple<int64_t, int, std::array<int64_t, kMaxDim * kMaxDim>>, YPoly> memo;
  const auto k = std::make_tuple(p, key.n, key.a);
  {
    std::lock_guard<std::mutex> lock(mutex);
    if (auto it = memo.find(k); it != memo.end()) return it->second;
  }
  YPoly poly = primitive_count_poly(key, p);
  std::lock_guard<std::mutex> lock(mutex);
  memo.emplace(k, poly);
  return poly;
}

}  // namespace detail

/// Local density alpha_p(T, k) of representing T by the split form of rank
/// 2k over Z_p, T positive definite:
///   alpha_p = sum_{D} p^{a(n+1-2k)} p^{n(n+1)/2 - 2kn} N*_p(T[D^{-1}])
/// over D in GL_n(Z)\M_n(Z) of determinant p^a with T[D^{-1}] in Lambda_n,
/// where N*_p counts primitive representations mod p.
inline Rational local_density(const HalfIntegralMatrix& t, int64_t p, int64_t k) {
  if (!is_prime(p)) throw DomainError("local_density: p must be prime");
  if (!t.is_positive_definite()) throw DomainError("local_density: T must be positive definite");
  const int n = t.size();
  const Integer det2 = t.det2();
  const Integer y = pow_int(Integer(p), k);
  Rational total = 0;
  Integer pa = 1;
  for (int a = 0; det2 % (pa * pa) == 0; ++a, pa *= p) {
    Rational count = 0;
    for (const IntMatrix& d : hermite_normal_forms(n, pa.get_si()))
      if (auto sup = inverse_transform(t, d))
        count += detail::ypoly_eval(detail::primitive_count_poly_cached(sup->twoT(), p), y);
    if (count == 0) continue;
    total += count * pow_rat(Rational(p), a * (n + 1 - 2 * k) + n * (n + 1) / 2 - 2 * k * n);
  }
  return total;
}

/// The unramified value of alpha_p(T, k): with X = p^{-k},
/// (1 - X) prod_{i=1}^{floor(n/2)} (1 - p^{2i} X^2), divided by
/// (1 - chi(p) p^{n/2} X) for n even.
inline Rational generic_local_density(int n, int64_t p, int64_t k, int chi) {
  const Rational x = pow_rat(Rational(p), -k);
  Rational out = 1 - x;
  for (int i = 1; i <= n / 2; ++i) out *= 1 - pow_rat(Rational(p), 2 * i) * x * x;
  if (n % 2 == 0) out /= 1 - chi * pow_rat(Rational(p), n / 2) * x;
  return out;
}

namespace detail {

/// x * pi^{half_pi / 2}, the exponent tracked separately.
struct PiMonomial {
  Rational x = 1;
  int half_pi = 0;
};

inline Rational factorial(long n) {
  Integer f;
  mpz_fac_ui(f.get_mpz_t(), static_cast<unsigned long>(n));
  return Rational(f);
}

/// zeta(2m) = (-1)^{m+1} B_{2m} (2 pi)^{2m} / (2 (2m)!)
inline PiMonomial zeta_even(long m) {
  Rational x = bernoulli(2 * m) * Rational(pow_int(Integer(2), 2 * m)) / (2 * factorial(2 * m));
  if (m % 2 == 0) x = -x;
  return {x, 4 * static_cast<int>(m)};
}

}  // namespace detail

/// a_k^{(n)}(T) for T in Lambda_n^+, n <= 4, from Siegel's formula
///   a = C_n(k) det(T)^{k-(n+1)/2} prod_p alpha_p(T, k),
/// the Euler product over p not dividing det(2T) summed in closed form by
/// zeta and L-values. All pi powers and square roots cancel exactly.
inline Rational local_density_coeff(const HalfIntegralMatrix& t, int64_t k) {
  const int n = t.size();
  if (n > 4) throw DomainError("local_density_coeff: rank at most 4");
  if (!t.is_positive_definite()) throw DomainError("local_density_coeff: T must be positive definite");
  validate_eisenstein_weight(k, n);
  using detail::PiMonomial;
  PiMonomial c;
  // (2 pi)^{nk} (-1)^{nk/2} / (2^{n(n-1)/2} Gamma_n(k)),
  // Gamma_n(k) = pi^{n(n-1)/4} prod_{j<n} Gamma(k - j/2)
  c.x = pow_rat(Rational(2), n * k - n * (n - 1) / 2);
  c.half_pi = 2 * n * static_cast<int>(k) - n * (n - 1) / 2;
  if ((n * k / 2) % 2 != 0) c.x = -c.x;
  for (int j = 0; j < n; ++j) {
    if (j % 2 == 0) {
      c.x /= detail::factorial(k - j / 2 - 1);
    } else {
      const long m = k - (j + 1) / 2;  // Gamma(m + 1/2) = (2m)! / (4^m m!) sqrt(pi)
      c.x /= detail::factorial(2 * m) / (Rational(pow_int(Integer(4), m)) * detail::factorial(m));
      c.half_pi -= 1;
    }
  }
  auto divide = [&](const PiMonomial& z) {
    c.x /= z.x;
    c.half_pi -= z.half_pi;
  };
  divide(detail::zeta_even(k / 2));
  for (int i = 1; i <= n / 2; ++i) divide(detail::zeta_even(k - i));

  const Integer det2 = t.det2();
  const int64_t det2_si = det2.get_si();
  int64_t d0 = 1;
  if (n % 2 == 0) {
    // L(s, chi_D0), s = k - n/2, D = (-1)^{n/2} det 2T = D0 f^2:
    // (-1)^{1 + (s - delta)/2} sqrt|D0| / 2 (2 pi / |D0|)^s B_{s,chi} / s!
    const int64_t disc = (n / 2) % 2 == 0 ? det2_si : -det2_si;
    const auto [fund, f] = fundamental_discriminant(disc);
    d0 = fund;
    const int64_t cond = fund < 0 ? -fund : fund;
    const long s = k - n / 2;
    const long delta = fund < 0 ? 1 : 0;
    Rational l = Rational(pow_int(Integer(2), s)) / Rational(pow_int(Integer(cond), s)) *
                 generalized_bernoulli(static_cast<unsigned>(s), fund) / (2 * detail::factorial(s));
    if ((1 + (s - delta) / 2) % 2 != 0) l = -l;
    c.x *= l;
    c.half_pi += 2 * static_cast<int>(s);
    // det(T)^{k-n/2-1} sqrt(det T), with sqrt(det 2T) sqrt|D0| = |D0| f
    const Rational det_t = Rational(det2) / Rational(pow_int(Integer(2), n));
    c.x *= pow_rat(det_t, k - n / 2 - 1) * Rational(cond * f) / Rational(pow_int(Integer(2), n / 2));
  } else {
    const Rational det_t = Rational(det2) / Rational(pow_int(Integer(2), n));
    c.x *= pow_rat(det_t, k - (n + 1) / 2);
  }
  if (c.half_pi != 0) throw std::logic_error("local_density_coeff: pi powers do not cancel");

  for (int64_t p : prime_divisors(det2_si)) {
    const int chi = n % 2 == 0 ? kronecker(d0, p) : 0;
    c.x *= local_density(t, p, k) / generic_local_density(n, p, k, chi);
  }
  return c.x;
}

/// a_k^{(n)}(T) for any T in Lambda_n, T >= 0, via the definite part:
/// closed forms for rank <= 2, local densities for rank 3 and 4.
inline Rational eisenstein_coefficient(int64_t k, const HalfIntegralMatrix& t) {
  const HalfIntegralMatrix s = definite_part(t);
  switch (s.size()) {
    case 0: return 1;
    case 1: return eisenstein_degree1(k, s.two(0, 0) / 2);
    case 2: return eisenstein_degree2_definite(k, s);
    default: return local_density_coeff(s, k);
  }
}

/// E_k^{(n)} on the window tr(T) <= bound, n in {1, 2}.
inline QExpansion eisenstein_qexp(int64_t k, int n, int64_t bound) {
  if (n != 1 && n != 2) throw DomainError("eisenstein_qexp: degree must be 1 or 2");
  validate_eisenstein_weight(k, n);
  return expansion_from(n, bound, [k](const HalfIntegralMatrix& t) { return eisenstein_coefficient(k, t); });
}

/// Degree n expansion through local densities at every index (n <= 4).
inline QExpansion eisenstein_qexp_local(int64_t k, int n, int64_t bound) {
  validate_eisenstein_weight(k, n);
  return expansion_from(n, bound, [k](const HalfIntegralMatrix& t) {
    const HalfIntegralMatrix s = definite_part(t);
    return s.size() == 0 ? Rational(1) : local_density_coeff(s, k);
  });
}

}  // namespace psiegel
