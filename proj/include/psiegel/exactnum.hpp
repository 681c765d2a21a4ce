#pragma once

// Exact arithmetic substrate: GMP-backed integers and rationals, p-adic
// valuations, the Kronecker symbol, Bernoulli numbers (classical and
// quadratic-character twisted) and Cohen's H-function.

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace psiegel {

using Integer = mpz_class;
using Rational = mpq_class;

/// Raised when an argument falls outside an operation's documented domain.
class DomainError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A p-adic valuation that may be +infinity (only for the zero rational).
class ExtendedValuation {
public:
  ExtendedValuation() = default;  // +infinity
  explicit ExtendedValuation(long v) : value_(v) {}

  static ExtendedValuation infinity() { return {}; }

  bool is_infinite() const { return !value_.has_value(); }
  long value() const {
    if (!value_) throw DomainError("valuation is +infinity");
    return *value_;
  }

  friend bool operator==(const ExtendedValuation&, const ExtendedValuation&) = default;
  friend bool operator<(const ExtendedValuation& a, const ExtendedValuation& b) {
    if (a.is_infinite()) return false;
    if (b.is_infinite()) return true;
    return *a.value_ < *b.value_;
  }
  friend bool operator<=(const ExtendedValuation& a, const ExtendedValuation& b) {
    return !(b < a);
  }
  friend bool operator>=(const ExtendedValuation& a, long b) {
    return a.is_infinite() || *a.value_ >= b;
  }
  friend ExtendedValuation operator+(const ExtendedValuation& a, const ExtendedValuation& b) {
    if (a.is_infinite() || b.is_infinite()) return {};
    return ExtendedValuation(*a.value_ + *b.value_);
  }
  friend std::ostream& operator<<(std::ostream& os, const ExtendedValuation& v) {
    if (v.is_infinite()) return os << "+inf";
    return os << *v.value_;
  }

private:
  std::optional<long> value_;
};

// ---------------------------------------------------------------------------
// Small-integer number theory

inline bool is_prime(int64_t n) {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  for (int64_t d = 3; d * d <= n; d += 2)
    if (n % d == 0) return false;
  return true;
}

/// Prime factorisation of |n| as (prime, exponent) pairs in increasing order.
inline std::vector<std::pair<int64_t, int>> factorize(int64_t n) {
  std::vector<std::pair<int64_t, int>> out;
  if (n < 0) n = -n;
  for (int64_t d = 2; d * d <= n; ++d) {
    if (n % d != 0) continue;
    int e = 0;
    while (n % d == 0) {
      n /= d;
      ++e;
    }
    out.emplace_back(d, e);
  }
  if (n > 1) out.emplace_back(n, 1);
  return out;
}

inline std::vector<int64_t> prime_divisors(int64_t n) {
  std::vector<int64_t> out;
  for (auto [q, e] : factorize(n)) out.push_back(q);
  return out;
}

/// Positive divisors of n > 0, ascending.
inline std::vector<int64_t> divisors(int64_t n) {
  std::vector<int64_t> out{1};
  for (auto [q, e] : factorize(n)) {
    const std::size_t base = out.size();
    int64_t pw = 1;
    for (int i = 1; i <= e; ++i) {
      pw *= q;
      for (std::size_t j = 0; j < base; ++j) out.push_back(out[j] * pw);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline int mobius(int64_t n) {
  int mu = 1;
  for (auto [q, e] : factorize(n)) {
    if (e > 1) return 0;
    mu = -mu;
  }
  return mu;
}

inline int64_t gcd64(int64_t a, int64_t b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    const int64_t t = a % b;
    a = b;
    b = t;
  }
  return a;
}

inline int64_t ipow(int64_t base, int exp) {
  int64_t r = 1;
  while (exp-- > 0) r *= base;
  return r;
}

inline Integer pow_int(const Integer& base, unsigned long exp) {
  Integer r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), exp);
  return r;
}

inline Integer pow_int(long base, unsigned long exp) { return pow_int(Integer(base), exp); }

inline Rational pow_rat(const Rational& base, long exp) {
  if (exp >= 0) {
    Rational r(pow_int(base.get_num(), exp), pow_int(base.get_den(), exp));
    r.canonicalize();
    return r;
  }
  if (base == 0) throw DomainError("zero to a negative power");
  Rational r(pow_int(base.get_den(), -exp), pow_int(base.get_num(), -exp));
  r.canonicalize();
  return r;
}

/// sigma_s(n) = sum of d^s over positive divisors d of n.
inline Integer divisor_sigma(int64_t n, unsigned long s) {
  Integer total = 0;
  for (int64_t d : divisors(n)) total += pow_int(Integer(d), s);
  return total;
}

// ---------------------------------------------------------------------------
// Kronecker symbol
//
// Convention (used for every quadratic character in the library):
//   (a/0)  = 1 if a = +-1, else 0
//   (a/-1) = -1 if a < 0, else 1
//   (a/2)  = 0 if a even, 1 if a = +-1 mod 8, -1 if a = +-3 mod 8
// and complete multiplicativity in the bottom argument.

inline int kronecker(int64_t a, int64_t b) {
  if (b == 0) return (a == 1 || a == -1) ? 1 : 0;
  int result = 1;
  if (b < 0) {
    b = -b;
    if (a < 0) result = -result;
  }
  int v = 0;
  while (b % 2 == 0) {
    b /= 2;
    ++v;
  }
  if (v > 0) {
    if (a % 2 == 0) return 0;
    const int64_t r8 = ((a % 8) + 8) % 8;
    if ((v & 1) && (r8 == 3 || r8 == 5)) result = -result;
  }
  // Jacobi symbol (a/b) for odd b > 0.
  int64_t x = a % b;
  if (x < 0) x += b;
  int64_t y = b;
  while (x != 0) {
    while (x % 2 == 0) {
      x /= 2;
      const int64_t r8 = y % 8;
      if (r8 == 3 || r8 == 5) result = -result;
    }
    std::swap(x, y);
    if (x % 4 == 3 && y % 4 == 3) result = -result;
    x %= y;
  }
  return y == 1 ? result : 0;
}

// ---------------------------------------------------------------------------
// p-adic valuation and residues

inline long vp_int(Integer x, int64_t p) {
  if (x == 0) throw DomainError("valuation of zero integer");
  return static_cast<long>(mpz_remove(x.get_mpz_t(), x.get_mpz_t(), Integer(p).get_mpz_t()));
}

inline ExtendedValuation vp(const Rational& x, int64_t p) {
  if (!is_prime(p)) throw DomainError("v_p: p must be prime, got " + std::to_string(p));
  if (x == 0) return ExtendedValuation::infinity();
  return ExtendedValuation(vp_int(x.get_num(), p) - vp_int(x.get_den(), p));
}

inline bool is_p_integral(const Rational& x, int64_t p) {
  return mpz_divisible_ui_p(x.get_den_mpz_t(), static_cast<unsigned long>(p)) == 0;
}

/// Residue of a p-integral rational in [0, p^m).
inline Integer residue_mod_pm(const Rational& x, int64_t p, int m) {
  if (!is_p_integral(x, p))
    throw DomainError("residue of a non-p-integral rational " + x.get_str());
  const Integer mod = pow_int(Integer(p), m);
  Integer inv;
  if (mpz_invert(inv.get_mpz_t(), x.get_den_mpz_t(), mod.get_mpz_t()) == 0)
    throw DomainError("denominator not invertible");
  Integer r = (x.get_num() * inv) % mod;
  if (r < 0) r += mod;
  return r;
}

/// Wang rational reconstruction: a/b with |a|, b <= sqrt(mod/2) and
/// a/b = r mod `mod`, if one exists.
inline std::optional<Rational> rational_reconstruction(const Integer& r, const Integer& mod) {
  Integer bound = sqrt(Integer(mod / 2));
  Integer r0 = mod, r1 = ((r % mod) + mod) % mod;
  Integer t0 = 0, t1 = 1;
  while (r1 > bound) {
    Integer q = r0 / r1;
    Integer tmp = r0 - q * r1;
    r0 = r1;
    r1 = tmp;
    tmp = t0 - q * t1;
    t0 = t1;
    t1 = tmp;
  }
  if (t1 == 0 || abs(t1) > bound) return std::nullopt;
  Rational out(r1, t1);
  out.canonicalize();
  if (gcd(out.get_den(), mod) != 1) return std::nullopt;
  return out;
}

// ---------------------------------------------------------------------------
// Bernoulli numbers

namespace detail {

class BernoulliTable {
public:
  static BernoulliTable& instance() {
    static BernoulliTable table;
    return table;
  }

  Rational get(unsigned k) {
    if (k == 0) return 1;
    if (k == 1) return Rational(-1, 2);
    if (k % 2 == 1) return 0;
    const unsigned n = k / 2;
    std::lock_guard<std::mutex> lock(mutex_);
    if (n >= values_.size()) extend(std::max<unsigned>(n, 2 * static_cast<unsigned>(values_.size())));
    return values_[n];
  }

private:
  // Tangent numbers T_1..T_n (Brent-Harvey), then
  // B_{2i} = (-1)^{i-1} 2i T_i / (4^i (4^i - 1)).
  void extend(unsigned n) {
    std::vector<Integer> t(n + 1);
    t[1] = 1;
    for (unsigned k = 2; k <= n; ++k) t[k] = (k - 1) * t[k - 1];
    for (unsigned k = 2; k <= n; ++k)
      for (unsigned j = k; j <= n; ++j) t[j] = (j - k) * t[j - 1] + (j - k + 2) * t[j];
    values_.assign(n + 1, Rational(0));
    values_[0] = 1;
    for (unsigned i = 1; i <= n; ++i) {
      const Integer four_i = pow_int(Integer(4), i);
      Rational b(Integer(2 * i) * t[i], four_i * (four_i - 1));
      b.canonicalize();
      values_[i] = (i % 2 == 1) ? b : Rational(-b);
    }
  }

  std::mutex mutex_;
  std::vector<Rational> values_;  // values_[i] = B_{2i}
};

}  // namespace detail

/// Bernoulli number B_k with B_1 = -1/2.
inline Rational bernoulli(unsigned k) { return detail::BernoulliTable::instance().get(k); }

inline Integer binomial(unsigned n, unsigned k) {
  Integer r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return r;
}

/// Generalised Bernoulli number B_{k,chi} for the Kronecker character
/// chi = (D/.) viewed as a character modulo f = |D|:
///   B_{k,chi} = f^{k-1} sum_{a=1}^{f} chi(a) B_k(a/f).
/// D = 1 gives the trivial character mod 1, for which B_{1,chi} = +1/2.
inline Rational generalized_bernoulli(unsigned k, int64_t D) {
  if (k == 0) throw DomainError("generalized_bernoulli: k must be positive");
  const int64_t f = D < 0 ? -D : D;
  if (f == 0) throw DomainError("generalized_bernoulli: modulus must be nonzero");

  static std::mutex memo_mutex;
  static std::map<std::pair<unsigned, int64_t>, Rational> memo;
  {
    std::lock_guard<std::mutex> lock(memo_mutex);
    if (auto it = memo.find({k, D}); it != memo.end()) return it->second;
  }

  // f^{k-1} B_k(a/f) = sum_j C(k,j) B_j a^{k-j} f^{j-1}
  std::vector<int> chi(f + 1);
  for (int64_t a = 1; a <= f; ++a) chi[a] = kronecker(D, a);
  Rational total = 0;
  for (unsigned j = 0; j <= k; ++j) {
    const Rational bj = bernoulli(j);
    if (bj == 0) continue;
    Integer power_sum = 0;
    for (int64_t a = 1; a <= f; ++a)
      if (chi[a] != 0) power_sum += chi[a] * pow_int(Integer(a), k - j);
    if (power_sum == 0) continue;
    Rational term = bj * Rational(binomial(k, j) * power_sum);
    term *= pow_rat(Rational(f), static_cast<long>(j) - 1);
    total += term;
  }
  std::lock_guard<std::mutex> lock(memo_mutex);
  memo.emplace(std::pair{k, D}, total);
  return total;
}

/// Fundamental discriminant D0 and conductor index f with D = D0 f^2.
/// Requires D = 0, 1 mod 4 and D != 0.
inline std::pair<int64_t, int64_t> fundamental_discriminant(int64_t D) {
  if (D == 0 || (((D % 4) + 4) % 4 != 0 && ((D % 4) + 4) % 4 != 1))
    throw DomainError("not a discriminant: " + std::to_string(D));
  int64_t core = D < 0 ? -1 : 1;
  int64_t f = 1;
  for (auto [q, e] : factorize(D)) {
    if (e % 2 == 1) core *= q;
    f *= ipow(q, e / 2);
  }
  if (((core % 4) + 4) % 4 != 1) {
    core *= 4;
    f /= 2;
  }
  return {core, f};
}

/// Riemann zeta value zeta(1 - r) = -B_r / r for r >= 2.
inline Rational zeta_at_one_minus(unsigned r) {
  if (r < 2) throw DomainError("zeta_at_one_minus: r >= 2 required");
  return -bernoulli(r) / Rational(r);
}

/// Cohen's function H(r, N) for r >= 1:
///   H(r, 0) = zeta(1 - 2r);  H(r, N) = 0 for (-1)^r N = 2, 3 mod 4;  otherwise with
///   (-1)^r N = D0 f^2 (D0 fundamental)
///   H(r, N) = L(1 - r, chi_D0) * sum_{d | f} mu(d) chi_D0(d) d^{r-1} sigma_{2r-1}(f/d).
/// H(1, N) is the Hurwitz class number.
inline Rational cohen_H(unsigned r, int64_t N) {
  if (r == 0) throw DomainError("cohen_H: r >= 1 required");
  if (N < 0) throw DomainError("cohen_H: N >= 0 required");
  if (N == 0) return zeta_at_one_minus(2 * r);
  const int64_t D = (r % 2 == 0) ? N : -N;
  if (((D % 4) + 4) % 4 >= 2) return 0;
  const auto [D0, f] = fundamental_discriminant(D);
  const Rational L = -generalized_bernoulli(r, D0) / Rational(r);
  Integer sum = 0;
  for (int64_t d : divisors(f)) {
    const int mu = mobius(d);
    if (mu == 0) continue;
    const int chi = kronecker(D0, d);
    if (chi == 0) continue;
    sum += mu * chi * pow_int(Integer(d), r - 1) * divisor_sigma(f / d, 2 * r - 1);
  }
  return L * Rational(sum);
}

/// Hurwitz class number H(N) by counting reduced binary forms of
/// discriminant -N, forms equivalent to multiples of x^2+y^2 and
/// x^2+xy+y^2 weighted 1/2 and 1/3.
inline Rational hurwitz_class_number(int64_t N) {
  if (N < 0) throw DomainError("hurwitz_class_number: N >= 0");
  if (N == 0) return Rational(-1, 12);
  if (N % 4 == 1 || N % 4 == 2) return 0;
  Rational total = 0;
  // reduced: |b| <= a <= c, b >= 0 if |b| == a or a == c; b^2 - 4ac = -N
  for (int64_t a = 1; 3 * a * a <= N; ++a) {
    for (int64_t b = -a + 1; b <= a; ++b) {
      const int64_t num = b * b + N;
      if (num % (4 * a) != 0) continue;
      const int64_t c = num / (4 * a);
      if (c < a) continue;
      if (c == a && b < 0) continue;
      if (a == b && a == c) total += Rational(1, 3);
      else if (b == 0 && a == c) total += Rational(1, 2);
      else total += 1;
    }
  }
  return total;
}

}  // namespace psiegel
