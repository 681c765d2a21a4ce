#pragma once

// The lattice Lambda_n of half-integral symmetric matrices. Every matrix T is
// stored through the even integral matrix 2T, so "T in Lambda_n" is exactly
// "2T symmetric integral with even diagonal".

#include "psiegel/exactnum.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace psiegel {

inline constexpr int kMaxDim = 5;

/// Small dense square integer matrix (n <= kMaxDim), row-major.
struct IntMatrix {
  int n = 0;
  std::array<int64_t, kMaxDim * kMaxDim> a{};

  IntMatrix() = default;
  explicit IntMatrix(int size) : n(size) {
    if (size < 0 || size > kMaxDim) throw DomainError("matrix size out of range");
  }

  static IntMatrix identity(int size) {
    IntMatrix m(size);
    for (int i = 0; i < size; ++i) m(i, i) = 1;
    return m;
  }

  static IntMatrix from_rows(const std::vector<std::vector<int64_t>>& rows) {
    IntMatrix m(static_cast<int>(rows.size()));
    for (int i = 0; i < m.n; ++i) {
      if (static_cast<int>(rows[i].size()) != m.n) throw DomainError("matrix rows must be square");
      for (int j = 0; j < m.n; ++j) m(i, j) = rows[i][j];
    }
    return m;
  }

  int64_t& operator()(int i, int j) { return a[i * kMaxDim + j]; }
  int64_t operator()(int i, int j) const { return a[i * kMaxDim + j]; }

  IntMatrix transpose() const {
    IntMatrix t(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) t(i, j) = (*this)(j, i);
    return t;
  }

  friend IntMatrix operator*(const IntMatrix& x, const IntMatrix& y) {
    if (x.n != y.n) throw DomainError("matrix size mismatch");
    IntMatrix r(x.n);
    for (int i = 0; i < x.n; ++i)
      for (int k = 0; k < x.n; ++k) {
        const int64_t v = x(i, k);
        if (v == 0) continue;
        for (int j = 0; j < x.n; ++j) r(i, j) += v * y(k, j);
      }
    return r;
  }

  friend bool operator==(const IntMatrix& x, const IntMatrix& y) {
    if (x.n != y.n) return false;
    for (int i = 0; i < x.n; ++i)
      for (int j = 0; j < x.n; ++j)
        if (x(i, j) != y(i, j)) return false;
    return true;
  }

  std::vector<std::vector<int64_t>> rows() const {
    std::vector<std::vector<int64_t>> out(n, std::vector<int64_t>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out[i][j] = (*this)(i, j);
    return out;
  }
};

/// Exact determinant (fraction-free Bareiss elimination).
inline Integer determinant(const IntMatrix& m) {
  if (m.n == 0) return 1;
  std::vector<Integer> w(m.n * m.n);
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) w[i * m.n + j] = m(i, j);
  const int n = m.n;
  Integer prev = 1;
  int sign = 1;
  for (int k = 0; k < n - 1; ++k) {
    if (w[k * n + k] == 0) {
      int swap_row = -1;
      for (int i = k + 1; i < n; ++i)
        if (w[i * n + k] != 0) {
          swap_row = i;
          break;
        }
      if (swap_row < 0) return 0;
      for (int j = 0; j < n; ++j) std::swap(w[k * n + j], w[swap_row * n + j]);
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i)
      for (int j = k + 1; j < n; ++j)
        w[i * n + j] = (w[i * n + j] * w[k * n + k] - w[i * n + k] * w[k * n + j]) / prev;
    prev = w[k * n + k];
  }
  return sign * w[(n - 1) * n + (n - 1)];
}

/// Determinant in 128-bit Bareiss arithmetic; entries must be small enough
/// for the intermediate minors to fit.
inline int64_t determinant64(const IntMatrix& m) {
  const int n = m.n;
  if (n == 0) return 1;
  __int128 w[kMaxDim][kMaxDim];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) w[i][j] = m(i, j);
  __int128 prev = 1;
  int sign = 1;
  for (int k = 0; k < n - 1; ++k) {
    if (w[k][k] == 0) {
      int swap_row = -1;
      for (int i = k + 1; i < n; ++i)
        if (w[i][k] != 0) {
          swap_row = i;
          break;
        }
      if (swap_row < 0) return 0;
      for (int j = 0; j < n; ++j) std::swap(w[k][j], w[swap_row][j]);
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i)
      for (int j = k + 1; j < n; ++j) w[i][j] = (w[i][j] * w[k][k] - w[i][k] * w[k][j]) / prev;
    prev = w[k][k];
  }
  return sign * static_cast<int64_t>(w[n - 1][n - 1]);
}

/// Adjugate: adj(m) * m = det(m) * I.
inline IntMatrix adjugate(const IntMatrix& m) {
  IntMatrix adj(m.n);
  if (m.n == 1) {
    adj(0, 0) = 1;
    return adj;
  }
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) {
      IntMatrix minor(m.n - 1);
      for (int r = 0, rr = 0; r < m.n; ++r) {
        if (r == i) continue;
        for (int c = 0, cc = 0; c < m.n; ++c) {
          if (c == j) continue;
          minor(rr, cc++) = m(r, c);
        }
        ++rr;
      }
      const int64_t cof = determinant64(minor);
      adj(j, i) = ((i + j) % 2 == 0) ? cof : -cof;
    }
  return adj;
}

/// Rank over Q.
inline int matrix_rank(const IntMatrix& m) {
  std::vector<Rational> w(m.n * m.n);
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) w[i * m.n + j] = m(i, j);
  int rank = 0;
  for (int c = 0; c < m.n && rank < m.n; ++c) {
    int pivot = -1;
    for (int r = rank; r < m.n; ++r)
      if (w[r * m.n + c] != 0) {
        pivot = r;
        break;
      }
    if (pivot < 0) continue;
    for (int j = 0; j < m.n; ++j) std::swap(w[rank * m.n + j], w[pivot * m.n + j]);
    for (int r = rank + 1; r < m.n; ++r) {
      if (w[r * m.n + c] == 0) continue;
      const Rational f = w[r * m.n + c] / w[rank * m.n + c];
      for (int j = c; j < m.n; ++j) w[r * m.n + j] -= f * w[rank * m.n + j];
    }
    ++rank;
  }
  return rank;
}

using Vec = std::array<int64_t, kMaxDim>;

/// An element T of Lambda_n, stored as 2T.
class HalfIntegralMatrix {
public:
  HalfIntegralMatrix() = default;
  explicit HalfIntegralMatrix(int n) : two_(n) {}

  /// Build from the even symmetric matrix 2T; throws unless 2T has even
  /// diagonal and is symmetric.
  explicit HalfIntegralMatrix(const IntMatrix& twoT) : two_(twoT) {
    for (int i = 0; i < twoT.n; ++i) {
      if (twoT(i, i) % 2 != 0) throw DomainError("2T must have even diagonal");
      for (int j = 0; j < i; ++j)
        if (twoT(i, j) != twoT(j, i)) throw DomainError("2T must be symmetric");
    }
  }

  static HalfIntegralMatrix from_twoT(const std::vector<std::vector<int64_t>>& rows) {
    return HalfIntegralMatrix(IntMatrix::from_rows(rows));
  }

  /// diag(t_1, ..., t_n) as T (so 2T = diag(2 t_i)).
  static HalfIntegralMatrix diagonal(const std::vector<int64_t>& t) {
    IntMatrix m(static_cast<int>(t.size()));
    for (int i = 0; i < m.n; ++i) m(i, i) = 2 * t[i];
    return HalfIntegralMatrix(m);
  }

  int size() const { return two_.n; }
  const IntMatrix& twoT() const { return two_; }
  int64_t two(int i, int j) const { return two_(i, j); }

  /// Trace of T (not 2T).
  int64_t trace() const {
    int64_t t = 0;
    for (int i = 0; i < size(); ++i) t += two_(i, i);
    return t / 2;
  }

  /// x^t (2T) y.
  int64_t bilinear2(const Vec& x, const Vec& y) const {
    int64_t s = 0;
    for (int i = 0; i < size(); ++i) {
      if (x[i] == 0) continue;
      int64_t row = 0;
      for (int j = 0; j < size(); ++j) row += two_(i, j) * y[j];
      s += x[i] * row;
    }
    return s;
  }

  /// T[x] = x^t T x (always an integer).
  int64_t value(const Vec& x) const { return bilinear2(x, x) / 2; }

  /// det(2T).
  Integer det2() const { return determinant(two_); }

  /// U^t T U.
  HalfIntegralMatrix transform(const IntMatrix& u) const {
    return HalfIntegralMatrix(u.transpose() * two_ * u);
  }

  /// T (+) 0_{extra}.
  HalfIntegralMatrix pad_zero(int total_size) const {
    if (total_size < size()) throw DomainError("pad_zero: target smaller than matrix");
    IntMatrix m(total_size);
    for (int i = 0; i < size(); ++i)
      for (int j = 0; j < size(); ++j) m(i, j) = two_(i, j);
    return HalfIntegralMatrix(m);
  }

  /// Leading principal r x r block.
  HalfIntegralMatrix leading_block(int r) const {
    IntMatrix m(r);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) m(i, j) = two_(i, j);
    return HalfIntegralMatrix(m);
  }

  HalfIntegralMatrix scaled(int64_t c) const {
    IntMatrix m = two_;
    for (int i = 0; i < size(); ++i)
      for (int j = 0; j < size(); ++j) m(i, j) *= c;
    return HalfIntegralMatrix(m);
  }

  bool is_zero() const {
    for (int i = 0; i < size(); ++i)
      for (int j = 0; j < size(); ++j)
        if (two_(i, j) != 0) return false;
    return true;
  }

  bool is_positive_definite() const {
    for (int r = 1; r <= size(); ++r)
      if (determinant(leading_block(r).two_) <= 0) return false;
    return true;
  }

  /// All principal minors nonnegative.
  bool is_positive_semidefinite() const {
    const int n = size();
    for (int mask = 1; mask < (1 << n); ++mask) {
      IntMatrix sub(__builtin_popcount(mask));
      int ri = 0;
      for (int i = 0; i < n; ++i) {
        if (!(mask & (1 << i))) continue;
        int ci = 0;
        for (int j = 0; j < n; ++j)
          if (mask & (1 << j)) sub(ri, ci++) = two_(i, j);
        ++ri;
      }
      if (determinant(sub) < 0) return false;
    }
    return true;
  }

  /// Entries of 2T in row-major order.
  std::vector<int64_t> entries() const {
    std::vector<int64_t> e;
    for (int i = 0; i < size(); ++i)
      for (int j = 0; j < size(); ++j) e.push_back(two_(i, j));
    return e;
  }

  /// Text form "n; row; row; ..." of 2T.
  std::string to_string() const {
    std::ostringstream os;
    os << size();
    for (int i = 0; i < size(); ++i) {
      os << ";";
      for (int j = 0; j < size(); ++j) os << " " << two_(i, j);
    }
    return os.str();
  }

  /// Parse "n; a b ...; ..." (entries may also be comma separated).
  static HalfIntegralMatrix parse(const std::string& text) {
    std::string cleaned = text;
    for (char& c : cleaned)
      if (c == ',' || c == '[' || c == ']') c = ' ';
    std::vector<std::string> parts;
    std::stringstream ss(cleaned);
    std::string part;
    while (std::getline(ss, part, ';')) parts.push_back(part);
    if (parts.empty()) throw DomainError("empty matrix text");
    int n = 0;
    if (!(std::istringstream(parts[0]) >> n) || n < 1 || n > kMaxDim)
      throw DomainError("bad matrix size in '" + text + "'");
    if (static_cast<int>(parts.size()) != n + 1)
      throw DomainError("expected " + std::to_string(n) + " rows in '" + text + "'");
    IntMatrix m(n);
    for (int i = 0; i < n; ++i) {
      std::istringstream row(parts[i + 1]);
      for (int j = 0; j < n; ++j)
        if (!(row >> m(i, j))) throw DomainError("short row in '" + text + "'");
      int64_t extra;
      if (row >> extra) throw DomainError("long row in '" + text + "'");
    }
    return HalfIntegralMatrix(m);
  }

  friend bool operator==(const HalfIntegralMatrix& x, const HalfIntegralMatrix& y) {
    return x.two_ == y.two_;
  }
  friend std::strong_ordering operator<=>(const HalfIntegralMatrix& x, const HalfIntegralMatrix& y) {
    if (auto c = x.size() <=> y.size(); c != 0) return c;
    for (int i = 0; i < x.size(); ++i)
      for (int j = 0; j < x.size(); ++j)
        if (auto c = x.two_(i, j) <=> y.two_(i, j); c != 0) return c;
    return std::strong_ordering::equal;
  }

private:
  IntMatrix two_;
};

inline int rank(const HalfIntegralMatrix& t) { return matrix_rank(t.twoT()); }

// ---------------------------------------------------------------------------
// Level and characters

/// Smallest l > 0 with l (2S)^{-1} in 2 Lambda_r (integral, even diagonal).
inline int64_t level(const HalfIntegralMatrix& s) {
  if (!s.is_positive_definite()) throw DomainError("level: S must be positive definite");
  const int64_t d = determinant64(s.twoT());
  const IntMatrix adj = adjugate(s.twoT());
  int64_t l = 1;
  auto lcm_with = [&](int64_t m) { l = l / gcd64(l, m) * m; };
  for (int i = 0; i < s.size(); ++i)
    for (int j = 0; j < s.size(); ++j) {
      if (i == j) lcm_with(2 * d / gcd64(2 * d, adj(i, i)));
      else lcm_with(d / gcd64(d, adj(i, j)));
    }
  return l;
}

/// A quadratic character d -> (D/d) for a discriminant D = 0, 1 mod 4. Such a
/// character is periodic with period |D|; the trivial character mod N is
/// D = N^2 and chi_p = (./p) is D = (-1)^{(p-1)/2} p.
struct QuadCharacter {
  int64_t discriminant = 1;

  int64_t modulus() const { return discriminant < 0 ? -discriminant : discriminant; }
  int operator()(int64_t d) const { return kronecker(discriminant, d); }

  static QuadCharacter trivial_mod(int64_t n) { return {n * n}; }
  static QuadCharacter legendre(int64_t p) { return {(p % 4 == 1) ? p : -p}; }

  /// chi_p^j: j = 0 the trivial character mod p, j = 1 the Legendre symbol.
  static QuadCharacter chi_p_power(int64_t p, int j) {
    return j == 0 ? trivial_mod(p) : legendre(p);
  }

  /// Conductor of the underlying primitive character.
  int64_t conductor() const {
    const auto [d0, f] = fundamental_discriminant(discriminant);
    return d0 < 0 ? -d0 : d0;
  }

  /// Equal as functions on the nonzero integers.
  bool same_values(const QuadCharacter& other) const {
    const int64_t period = modulus() / gcd64(modulus(), other.modulus()) * other.modulus();
    if ((*this)(-1) != other(-1)) return false;
    for (int64_t d = 1; d <= period; ++d)
      if ((*this)(d) != other(d)) return false;
    return true;
  }

  friend bool operator==(const QuadCharacter&, const QuadCharacter&) = default;
};

/// (-1)^{r/2} det(2S); the discriminant of the even lattice S.
inline int64_t signed_discriminant(const HalfIntegralMatrix& s) {
  const int r = s.size();
  if (r % 2 != 0) throw DomainError("character of S requires even rank");
  const int64_t d = determinant64(s.twoT());
  return ((r / 2) % 2 == 0) ? d : -d;
}

/// chi_S(d) = sign(d)^{r/2} ( (-1)^{r/2} det 2S / |d| ).
inline int chi_S(const HalfIntegralMatrix& s, int64_t d) {
  if (!s.is_positive_definite()) throw DomainError("chi_S: S must be positive definite");
  if (d == 0) throw DomainError("chi_S: d must be nonzero");
  const int64_t disc = signed_discriminant(s);
  const int sgn = (d < 0 && (s.size() / 2) % 2 == 1) ? -1 : 1;
  return sgn * kronecker(disc, d < 0 ? -d : d);
}

/// chi_S as a character, (D/.) with D = (-1)^{r/2} det 2S.
inline QuadCharacter character(const HalfIntegralMatrix& s) {
  if (!s.is_positive_definite()) throw DomainError("character: S must be positive definite");
  return {signed_discriminant(s)};
}

/// eta_S: the primitive character inducing chi_S.
inline QuadCharacter eta_S(const HalfIntegralMatrix& s) {
  const auto [d0, f] = fundamental_discriminant(character(s).discriminant);
  return {d0};
}

// ---------------------------------------------------------------------------
// LLL reduction (exact, Gram-matrix form)

/// Unimodular U such that the columns of U form an LLL-reduced basis
/// (delta = 3/4) for the positive definite form T.
inline IntMatrix lll_reduce(const HalfIntegralMatrix& t) {
  const int n = t.size();
  IntMatrix u = IntMatrix::identity(n);
  IntMatrix g = t.twoT();
  std::vector<std::vector<Rational>> mu(n, std::vector<Rational>(n));
  std::vector<Rational> bstar(n);
  auto refresh = [&]() {
    g = u.transpose() * t.twoT() * u;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < i; ++j) {
        Rational x = g(i, j);
        for (int k = 0; k < j; ++k) x -= mu[j][k] * mu[i][k] * bstar[k];
        mu[i][j] = x / bstar[j];
      }
      Rational b = g(i, i);
      for (int k = 0; k < i; ++k) b -= mu[i][k] * mu[i][k] * bstar[k];
      bstar[i] = b;
    }
  };
  refresh();
  const Rational delta(3, 4);
  int k = 1;
  while (k < n) {
    for (int j = k - 1; j >= 0; --j) {
      // r = floor(mu + 1/2)
      const Rational& m = mu[k][j];
      Integer r;
      const Integer num = 2 * m.get_num() + m.get_den(), den = 2 * m.get_den();
      mpz_fdiv_q(r.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
      if (r == 0) continue;
      const int64_t ri = r.get_si();
      for (int i = 0; i < n; ++i) u(i, k) -= ri * u(i, j);
      refresh();
    }
    if (bstar[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * bstar[k - 1]) {
      ++k;
    } else {
      for (int i = 0; i < n; ++i) std::swap(u(i, k), u(i, k - 1));
      refresh();
      k = std::max(k - 1, 1);
    }
  }
  return u;
}

// ---------------------------------------------------------------------------
// Short vectors (Fincke-Pohst)

struct ShortVector {
  Vec x{};
  int64_t value = 0;  // S[x]
};

namespace detail {

/// Fincke-Pohst enumeration of all nonzero x with S[x] <= bound; S should be
/// LLL-reduced so that the floating-point interval bounds are well conditioned.
/// Every candidate is verified exactly.
inline std::vector<ShortVector> fincke_pohst(const HalfIntegralMatrix& s, int64_t bound) {
  std::vector<ShortVector> out;
  if (bound < 1) return out;
  const int n = s.size();
  // Q(x) = sum_i q[i][i] (x_i + sum_{j>i} q[i][j] x_j)^2 with Q(x) = S[x].
  long double q[kMaxDim][kMaxDim] = {};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) q[i][j] = static_cast<long double>(s.two(i, j)) / 2.0L;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      q[j][i] = q[i][j];
      q[i][j] /= q[i][i];
    }
    for (int k = i + 1; k < n; ++k)
      for (int l = k; l < n; ++l) q[k][l] -= q[k][i] * q[i][l];
  }
  const long double slack = 1e-9L * (1.0L + static_cast<long double>(bound));
  Vec x{};
  long double remaining[kMaxDim + 1];
  remaining[n] = static_cast<long double>(bound);
  std::function<void(int)> recurse = [&](int i) {
    long double center = 0;
    for (int j = i + 1; j < n; ++j) center -= q[i][j] * static_cast<long double>(x[j]);
    const long double rad2 = remaining[i + 1] / q[i][i];
    if (rad2 < -slack) return;
    const long double rad = std::sqrt(std::max(rad2, 0.0L)) + slack;
    const int64_t lo = static_cast<int64_t>(std::ceil(center - rad));
    const int64_t hi = static_cast<int64_t>(std::floor(center + rad));
    for (int64_t v = lo; v <= hi; ++v) {
      x[i] = v;
      const long double diff = static_cast<long double>(v) - center;
      remaining[i] = remaining[i + 1] - q[i][i] * diff * diff;
      if (remaining[i] < -slack) continue;
      if (i > 0) {
        recurse(i - 1);
      } else {
        bool nonzero = false;
        for (int j = 0; j < n; ++j) nonzero = nonzero || x[j] != 0;
        if (!nonzero) continue;
        const int64_t val = s.value(x);
        if (val <= bound) out.push_back({x, val});
      }
    }
    x[i] = 0;
  };
  recurse(n - 1);
  return out;
}

}  // namespace detail

/// All nonzero x with S[x] <= bound. With both_signs == false only the member
/// of each +-pair whose first nonzero coordinate is positive is returned.
/// Sorted by value, then coordinates.
inline std::vector<ShortVector> short_vectors(const HalfIntegralMatrix& s, int64_t bound,
                                              bool both_signs = true) {
  if (!s.is_positive_definite()) throw DomainError("short_vectors: S must be positive definite");
  const int n = s.size();
  const IntMatrix u = lll_reduce(s);
  std::vector<ShortVector> out;
  for (const ShortVector& sv : detail::fincke_pohst(s.transform(u), bound)) {
    ShortVector mapped{Vec{}, sv.value};
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) mapped.x[i] += u(i, j) * sv.x[j];
    if (!both_signs) {
      int first = 0;
      while (mapped.x[first] == 0) ++first;
      if (mapped.x[first] < 0) continue;
    }
    out.push_back(mapped);
  }
  std::sort(out.begin(), out.end(), [](const ShortVector& a, const ShortVector& b) {
    if (a.value != b.value) return a.value < b.value;
    return a.x < b.x;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Canonical representatives

struct ReducedForm {
  HalfIntegralMatrix form;  // canonical representative
  IntMatrix transform;      // unimodular U with T[U] = form
};

namespace detail {

/// Unimodular W with W [b_1 .. b_k] = [H; 0] for a primitive system b. A
/// vector v extends b to a primitive system iff rows k..n-1 of W v are coprime.
inline IntMatrix quotient_map(const std::vector<Vec>& cols, int n) {
  const int k = static_cast<int>(cols.size());
  IntMatrix a(n), w = IntMatrix::identity(n);
  for (int c = 0; c < k; ++c)
    for (int i = 0; i < n; ++i) a(i, c) = cols[c][i];
  auto row_op = [&](int dst, int src, int64_t f) {  // row dst -= f row src
    for (int j = 0; j < n; ++j) {
      a(dst, j) -= f * a(src, j);
      w(dst, j) -= f * w(src, j);
    }
  };
  auto row_swap = [&](int r1, int r2) {
    for (int j = 0; j < n; ++j) {
      std::swap(a(r1, j), a(r2, j));
      std::swap(w(r1, j), w(r2, j));
    }
  };
  for (int c = 0; c < k; ++c) {
    while (true) {
      int best = -1;
      for (int r = c; r < n; ++r)
        if (a(r, c) != 0 && (best < 0 || std::llabs(a(r, c)) < std::llabs(a(best, c)))) best = r;
      if (best < 0) break;
      row_swap(c, best);
      bool done = true;
      for (int r = c + 1; r < n; ++r) {
        if (a(r, c) == 0) continue;
        row_op(r, c, a(r, c) / a(c, c));
        if (a(r, c) != 0) done = false;
      }
      if (done) break;
    }
  }
  return w;
}

inline bool extends_primitively(const IntMatrix& w, int k, const Vec& v) {
  int64_t g = 0;
  for (int i = k; i < w.n && g != 1; ++i) {
    int64_t x = 0;
    for (int j = 0; j < w.n; ++j) x += w(i, j) * v[j];
    g = gcd64(g, x);
  }
  return g == 1;
}

/// Unimodular V with (2T) V = [H | 0]; the last n - rank columns of V span the
/// integral radical of T.
inline IntMatrix radical_split(const HalfIntegralMatrix& t, int* rank_out) {
  const int n = t.size();
  IntMatrix a = t.twoT();
  IntMatrix v = IntMatrix::identity(n);
  auto col_op = [&](int dst, int src, int64_t f) {  // col dst -= f col src
    for (int i = 0; i < n; ++i) {
      a(i, dst) -= f * a(i, src);
      v(i, dst) -= f * v(i, src);
    }
  };
  auto col_swap = [&](int c1, int c2) {
    for (int i = 0; i < n; ++i) {
      std::swap(a(i, c1), a(i, c2));
      std::swap(v(i, c1), v(i, c2));
    }
  };
  int pivot_col = 0;
  for (int row = 0; row < n && pivot_col < n; ++row) {
    // Euclid on row `row` across columns pivot_col..n-1.
    while (true) {
      int best = -1;
      for (int c = pivot_col; c < n; ++c)
        if (a(row, c) != 0 && (best < 0 || std::llabs(a(row, c)) < std::llabs(a(row, best)))) best = c;
      if (best < 0) break;
      col_swap(pivot_col, best);
      bool done = true;
      for (int c = pivot_col + 1; c < n; ++c) {
        if (a(row, c) == 0) continue;
        col_op(c, pivot_col, a(row, c) / a(row, pivot_col));
        if (a(row, c) != 0) done = false;
      }
      if (done) {
        ++pivot_col;
        break;
      }
    }
  }
  *rank_out = pivot_col;
  return v;
}

/// Key of a Gram matrix in greedy-basis order: for each level i the diagonal
/// entry then the negated off-diagonal entries with the earlier vectors.
inline std::vector<int64_t> canonical_key(const IntMatrix& g) {
  std::vector<int64_t> key;
  for (int i = 0; i < g.n; ++i) {
    key.push_back(g(i, i));
    for (int j = 0; j < i; ++j) key.push_back(-g(j, i));
  }
  return key;
}

inline ReducedForm reduce_binary(const HalfIntegralMatrix& t) {
  // Gauss reduction on a x^2 + b xy + c y^2 with 2T = [[2a, b], [b, 2c]].
  int64_t a = t.two(0, 0) / 2, b = t.two(0, 1), c = t.two(1, 1) / 2;
  IntMatrix u = IntMatrix::identity(2);
  while (true) {
    if (a > c) {  // (x, y) -> (y, -x)
      std::swap(a, c);
      b = -b;
      IntMatrix s(2);
      s(0, 1) = -1;
      s(1, 0) = 1;
      u = u * s;
      continue;
    }
    // translate b into (-a, a]
    if (b > a || b <= -a) {
      // k = ceil((b - a) / 2a) puts b - 2ak in (-a, a]
      const int64_t num = b - a, den = 2 * a;
      const int64_t k = num >= 0 ? (num + den - 1) / den : -((-num) / den);
      const int64_t nb = b - 2 * a * k;
      c = a * k * k - b * k + c;
      b = nb;
      IntMatrix s = IntMatrix::identity(2);
      s(0, 1) = -k;
      u = u * s;
      continue;
    }
    if (a > c) continue;
    break;
  }
  if (b < 0) {
    b = -b;
    IntMatrix s = IntMatrix::identity(2);
    s(1, 1) = -1;
    u = u * s;
  }
  IntMatrix g(2);
  g(0, 0) = 2 * a;
  g(0, 1) = g(1, 0) = b;
  g(1, 1) = 2 * c;
  return {HalfIntegralMatrix(g), u};
}

/// Canonical form of a positive definite T by exhaustive search over greedy
/// (Minkowski) bases, keeping the lexicographically smallest key.
inline ReducedForm reduce_definite(const HalfIntegralMatrix& t) {
  const int n = t.size();
  if (n == 1) return {t, IntMatrix::identity(1)};
  if (n == 2) return reduce_binary(t);

  const HalfIntegralMatrix cur = t.transform(lll_reduce(t));
  int64_t bound = 0;
  for (int i = 0; i < n; ++i) bound = std::max(bound, cur.two(i, i) / 2);

  while (true) {
    const auto vecs = short_vectors(t, bound, true);
    std::vector<int64_t> best_key;
    std::vector<Vec> best_basis;
    std::vector<Vec> basis;
    std::vector<int64_t> key;
    bool exhausted = false;

    // At each level only the candidates with the smallest key segment
    // (norm, then negated inner products with earlier vectors) can lead to
    // the minimal key.
    std::function<void(int)> search = [&](int level) {
      if (level == n) {
        if (best_key.empty() || key < best_key) {
          best_key = key;
          best_basis = basis;
        }
        return;
      }
      const IntMatrix w = quotient_map(basis, n);
      std::vector<int64_t> best_seg, seg;
      std::vector<const Vec*> ties;
      for (const auto& sv : vecs) {
        if (!best_seg.empty() && 2 * sv.value > best_seg[0]) break;
        if (!extends_primitively(w, level, sv.x)) continue;
        seg.assign(1, 2 * sv.value);
        for (int j = 0; j < level; ++j) seg.push_back(-t.bilinear2(basis[j], sv.x));
        if (best_seg.empty() || seg < best_seg) {
          best_seg = seg;
          ties.clear();
        }
        if (seg == best_seg) ties.push_back(&sv.x);
      }
      if (ties.empty()) {
        exhausted = true;
        return;
      }
      const std::size_t key_pos = key.size();
      key.insert(key.end(), best_seg.begin(), best_seg.end());
      const bool worse = !best_key.empty() &&
                         std::lexicographical_compare_three_way(key.begin(), key.end(), best_key.begin(),
                                                                best_key.begin() + key.size()) > 0;
      if (!worse) {
        for (const Vec* x : ties) {
          basis.push_back(*x);
          search(level + 1);
          basis.pop_back();
          if (exhausted) return;
        }
      }
      key.resize(key_pos);
    };
    search(0);
    if (exhausted) {
      bound *= 2;
      continue;
    }
    IntMatrix u(n);
    for (int c = 0; c < n; ++c)
      for (int i = 0; i < n; ++i) u(i, c) = best_basis[c][i];
    return {t.transform(u), u};
  }
}

}  // namespace detail

/// Canonical GL_n(Z)-representative of T >= 0: the definite part is
/// Minkowski-reduced (ascending diagonal), ties broken by the smallest key
/// (diagonal, then negated off-diagonal entries, row by row), and the radical
/// is moved to the trailing coordinates. Idempotent.
inline ReducedForm minkowski_reduce(const HalfIntegralMatrix& t) {
  if (t.size() > kMaxDim) throw DomainError("minkowski_reduce: size > 5");
  const int n = t.size();
  int r = n;
  const IntMatrix v = t.det2() != 0 ? IntMatrix::identity(n) : detail::radical_split(t, &r);
  const HalfIntegralMatrix split = t.transform(v);
  const HalfIntegralMatrix definite = split.leading_block(r);
  if (r > 0 && !definite.is_positive_definite())
    throw DomainError("minkowski_reduce: T must be positive semidefinite");
  if (r == 0) return {HalfIntegralMatrix(n), v};
  const ReducedForm red = detail::reduce_definite(definite);
  IntMatrix w = IntMatrix::identity(n);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) w(i, j) = red.transform(i, j);
  const IntMatrix u = v * w;
  return {red.form.pad_zero(n), u};
}

inline HalfIntegralMatrix canonical(const HalfIntegralMatrix& t) { return minkowski_reduce(t).form; }

/// The definite part T' in Lambda_r^+ (canonical) with T ~ T' (+) 0.
inline HalfIntegralMatrix definite_part(const HalfIntegralMatrix& t) {
  const HalfIntegralMatrix c = canonical(t);
  return c.leading_block(rank(c));
}

// ---------------------------------------------------------------------------
// Isometries and automorphisms

/// Backtracking search for U with S[U] = S2 (columns of U are vectors of S
/// whose norms and inner products match the Gram matrix of S2). Calls
/// `visit(U)` per isometry; the search stops when visit returns false.
inline void for_each_isometry(const HalfIntegralMatrix& s, const HalfIntegralMatrix& s2,
                              const std::function<bool(const IntMatrix&)>& visit) {
  const int n = s.size();
  if (s2.size() != n) return;
  if (!s.is_positive_definite() || !s2.is_positive_definite())
    throw DomainError("isometry search requires positive definite forms");
  if (s.det2() != s2.det2()) return;
  int64_t max_norm = 0;
  for (int i = 0; i < n; ++i) max_norm = std::max(max_norm, s2.two(i, i) / 2);
  const auto vecs = short_vectors(s, max_norm, true);
  std::vector<std::vector<const Vec*>> candidates(n);
  for (int i = 0; i < n; ++i)
    for (const auto& sv : vecs)
      if (2 * sv.value == s2.two(i, i)) candidates[i].push_back(&sv.x);
  std::vector<const Vec*> chosen(n);
  bool stop = false;
  std::function<void(int)> search = [&](int col) {
    if (col == n) {
      IntMatrix u(n);
      for (int c = 0; c < n; ++c)
        for (int i = 0; i < n; ++i) u(i, c) = (*chosen[c])[i];
      const int64_t d = determinant64(u);
      if (d == 1 || d == -1) stop = !visit(u);
      return;
    }
    for (const Vec* x : candidates[col]) {
      bool ok = true;
      for (int j = 0; j < col && ok; ++j) ok = s.bilinear2(*chosen[j], *x) == s2.two(j, col);
      if (!ok) continue;
      chosen[col] = x;
      search(col + 1);
      if (stop) return;
    }
  };
  search(0);
}

/// A witness U with S[U] = S2, or nullopt when not GL_n(Z)-equivalent.
inline std::optional<IntMatrix> is_equivalent(const HalfIntegralMatrix& s, const HalfIntegralMatrix& s2) {
  if (s.size() != s2.size()) return std::nullopt;
  if (s.size() > kMaxDim) throw DomainError("is_equivalent: size > 5");
  // Search from the reduced form of S2 so that candidate norms are small.
  const ReducedForm red2 = minkowski_reduce(s2);
  std::optional<IntMatrix> witness;
  for_each_isometry(s, red2.form, [&](const IntMatrix& u) {
    witness = u;
    return false;
  });
  if (!witness) return std::nullopt;
  // S[U] = red2 = S2[V]  =>  S[U V^{-1}] = S2.
  const IntMatrix& v = red2.transform;
  const IntMatrix vinv = adjugate(v);  // det V = +-1
  IntMatrix vi = vinv;
  if (determinant64(v) == -1)
    for (auto& e : vi.a) e = -e;
  return *witness * vi;
}

/// epsilon(S) = #{U in GL_r(Z) : S[U] = S}.
inline int64_t automorphism_count(const HalfIntegralMatrix& s) {
  const HalfIntegralMatrix red = canonical(s);
  int64_t count = 0;
  for_each_isometry(red, red, [&](const IntMatrix&) {
    ++count;
    return true;
  });
  return count;
}

// ---------------------------------------------------------------------------
// Hermite normal forms and superlattices

/// All upper triangular D with positive diagonal, det D = d and
/// 0 <= D_ij < D_jj for i < j: representatives of GL_r(Z) \ {D : det D = d}.
inline std::vector<IntMatrix> hermite_normal_forms(int r, int64_t d) {
  std::vector<IntMatrix> out;
  std::vector<int64_t> diag(r);
  std::function<void(int, int64_t)> choose_diag = [&](int i, int64_t rest) {
    if (i == r - 1) {
      diag[i] = rest;
      // fill off-diagonals
      IntMatrix m(r);
      for (int k = 0; k < r; ++k) m(k, k) = diag[k];
      std::vector<std::pair<int, int>> pos;
      for (int j = 0; j < r; ++j)
        for (int k = 0; k < j; ++k) pos.emplace_back(k, j);
      std::function<void(std::size_t)> fill = [&](std::size_t idx) {
        if (idx == pos.size()) {
          out.push_back(m);
          return;
        }
        const auto [k, j] = pos[idx];
        for (int64_t v = 0; v < diag[j]; ++v) {
          m(k, j) = v;
          fill(idx + 1);
        }
        m(k, j) = 0;
      };
      fill(0);
      return;
    }
    for (int64_t f : divisors(rest)) {
      diag[i] = f;
      choose_diag(i + 1, rest / f);
    }
  };
  if (r == 0) return out;
  choose_diag(0, d);
  return out;
}

/// T[D^{-1}] = D^{-t} T D^{-1} when it lies in Lambda_r.
inline std::optional<HalfIntegralMatrix> inverse_transform(const HalfIntegralMatrix& t, const IntMatrix& d) {
  const int64_t det = determinant64(d);
  const IntMatrix adj = adjugate(d);  // D^{-1} = adj / det
  const IntMatrix num = adj.transpose() * t.twoT() * adj;
  const int64_t den = det * det;
  IntMatrix out(t.size());
  for (int i = 0; i < t.size(); ++i)
    for (int j = 0; j < t.size(); ++j) {
      if (num(i, j) % den != 0) return std::nullopt;
      out(i, j) = num(i, j) / den;
    }
  for (int i = 0; i < t.size(); ++i)
    if (out(i, i) % 2 != 0) return std::nullopt;
  return HalfIntegralMatrix(out);
}

/// All T[D^{-1}] in Lambda_r^+ for D over GL_r(Z)\{det D = d}; T positive definite.
inline std::vector<HalfIntegralMatrix> superlattice_forms(const HalfIntegralMatrix& t, int64_t d) {
  std::vector<HalfIntegralMatrix> out;
  for (const IntMatrix& dm : hermite_normal_forms(t.size(), d))
    if (auto s = inverse_transform(t, dm)) out.push_back(*s);
  return out;
}

// ---------------------------------------------------------------------------
// Class enumeration

/// A GL-class representative with its automorphism count.
struct ClassRecord {
  HalfIntegralMatrix rep;  // canonical
  int64_t epsilon = 0;

  friend bool operator==(const ClassRecord&, const ClassRecord&) = default;
};

/// Minkowski's constant c_r with prod a_ii <= c_r det for reduced forms.
inline Rational minkowski_constant(int r) {
  switch (r) {
    case 1: return 1;
    case 2: return Rational(4, 3);
    case 3: return 2;
    case 4: return 4;
    default: throw DomainError("minkowski_constant: rank out of scope");
  }
}

/// All classes S in Lambda_r^+ (r even, r <= 4) with level(S) | level_divides,
/// sorted by canonical representative. det(2S) divides level^r. The search
/// covers Minkowski-reduced 2S whose diagonal product is at most
/// bound_scale * c_r * det(2S).
inline std::vector<ClassRecord> enumerate_classes(int r, int64_t level_divides, int64_t bound_scale = 1) {
  if (r <= 0 || r % 2 != 0 || r > 4) throw DomainError("enumerate_classes: rank must be 2 or 4");
  if (level_divides < 1) throw DomainError("enumerate_classes: level must be positive");
  if (bound_scale < 1) throw DomainError("enumerate_classes: bound_scale must be positive");
  const int64_t det_cap = ipow(level_divides, r);
  if (det_cap > 10000000) throw DomainError("enumerate_classes: level out of desk scale");
  std::set<HalfIntegralMatrix> raw;
  const Rational c = minkowski_constant(r) * bound_scale;
  for (int64_t det : divisors(det_cap)) {
    const int64_t disc = ((r / 2) % 2 == 0) ? det : -det;
    const int64_t m4 = ((disc % 4) + 4) % 4;
    if (m4 != 0 && m4 != 1) continue;
    IntMatrix g(r);
    auto lead_det = [&](int size) {
      IntMatrix lead(size);
      for (int x = 0; x < size; ++x)
        for (int y = 0; y < size; ++y) lead(x, y) = g(x, y);
      return determinant64(lead);
    };
    // Off-diagonal entries of column i with |g_ji| <= g_jj / 2, the first
    // nonzero one positive (sign of b_i).
    std::function<void(int, int, bool, const std::function<void()>&)> off =
        [&](int i, int j, bool sign_fixed, const std::function<void()>& done) {
          if (j == i) {
            done();
            return;
          }
          const int64_t lim = g(j, j) / 2;
          for (int64_t v = sign_fixed ? -lim : 0; v <= lim; ++v) {
            g(j, i) = g(i, j) = v;
            off(i, j + 1, sign_fixed || v != 0, done);
          }
          g(j, i) = g(i, j) = 0;
        };
    // Columns 0..r-2 choose the diagonal and test the leading minor; the last
    // diagonal entry is solved from det(2S) = det, which is linear in it.
    std::function<void(int, Rational)> place = [&](int i, Rational budget) {
      const int64_t lo = (i == 0) ? 2 : g(i - 1, i - 1);
      if (i == r - 1) {
        off(i, 0, false, [&]() {
          g(i, i) = 0;
          const int64_t constant = lead_det(r);
          const int64_t slope = lead_det(r - 1);
          g(i, i) = 0;
          if ((det - constant) % slope != 0) return;
          const int64_t a = (det - constant) / slope;
          if (a < lo || a % 2 != 0 || Rational(a) > budget) return;
          g(i, i) = a;
          const HalfIntegralMatrix s(g);
          if (level_divides % level(s) == 0) raw.insert(s);
          g(i, i) = 0;
        });
        return;
      }
      for (int64_t a = lo; Rational(ipow(a, r - i)) <= budget; a += 2) {
        g(i, i) = a;
        off(i, 0, false, [&]() {
          if (lead_det(i + 1) > 0) place(i + 1, budget / a);
        });
      }
      g(i, i) = 0;
    };
    place(0, c * det);
  }
  std::set<HalfIntegralMatrix> found;
  for (const auto& s : raw) found.insert(canonical(s));
  std::vector<ClassRecord> out;
  for (const auto& s : found) out.push_back({s, automorphism_count(s)});
  return out;
}

}  // namespace psiegel
