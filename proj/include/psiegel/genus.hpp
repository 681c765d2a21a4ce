#pragma once

// Genera of positive definite even lattices. Two even lattices of the same
// rank and signature lie in one genus exactly when their discriminant
// quadratic forms (L^#/L, q) are isometric; that is the test used here.

#include "psiegel/lambda.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <map>

namespace psiegel {

struct GenusRecord {
  std::vector<ClassRecord> classes;
  int64_t level = 1;
  QuadCharacter character;
  Rational mass;
};

namespace detail {

/// L A R = diag(d_1, ..., d_n) with d_i | d_{i+1}, L and R unimodular.
struct SmithForm {
  IntMatrix left;
  IntMatrix right;
  std::vector<int64_t> diag;
};

inline SmithForm smith_normal_form(const IntMatrix& m) {
  const int n = m.n;
  IntMatrix a = m, l = IntMatrix::identity(n), r = IntMatrix::identity(n);
  auto row_op = [&](int dst, int src, int64_t f) {
    for (int j = 0; j < n; ++j) {
      a(dst, j) -= f * a(src, j);
      l(dst, j) -= f * l(src, j);
    }
  };
  auto col_op = [&](int dst, int src, int64_t f) {
    for (int i = 0; i < n; ++i) {
      a(i, dst) -= f * a(i, src);
      r(i, dst) -= f * r(i, src);
    }
  };
  auto row_swap = [&](int x, int y) {
    for (int j = 0; j < n; ++j) {
      std::swap(a(x, j), a(y, j));
      std::swap(l(x, j), l(y, j));
    }
  };
  auto col_swap = [&](int x, int y) {
    for (int i = 0; i < n; ++i) {
      std::swap(a(i, x), a(i, y));
      std::swap(r(i, x), r(i, y));
    }
  };
  for (int k = 0; k < n; ++k) {
    while (true) {
      // smallest nonzero entry of the trailing block as pivot
      int pi = -1, pj = -1;
      for (int i = k; i < n; ++i)
        for (int j = k; j < n; ++j)
          if (a(i, j) != 0 && (pi < 0 || std::llabs(a(i, j)) < std::llabs(a(pi, pj)))) {
            pi = i;
            pj = j;
          }
      if (pi < 0) break;
      row_swap(k, pi);
      col_swap(k, pj);
      bool clean = true;
      for (int i = k + 1; i < n; ++i) {
        row_op(i, k, a(i, k) / a(k, k));
        if (a(i, k) != 0) clean = false;
      }
      for (int j = k + 1; j < n; ++j) {
        col_op(j, k, a(k, j) / a(k, k));
        if (a(k, j) != 0) clean = false;
      }
      if (!clean) continue;
      // divisibility: fold a row that the pivot does not divide into row k
      int bad = -1;
      for (int i = k + 1; i < n && bad < 0; ++i)
        for (int j = k + 1; j < n; ++j)
          if (a(i, j) % a(k, k) != 0) {
            bad = i;
            break;
          }
      if (bad < 0) break;
      row_op(k, bad, -1);
    }
  }
  std::vector<int64_t> diag(n);
  for (int i = 0; i < n; ++i) {
    if (a(i, i) < 0) {
      for (int j = 0; j < n; ++j) l(i, j) = -l(i, j);
      a(i, i) = -a(i, i);
    }
    diag[i] = a(i, i);
  }
  return {l, r, diag};
}

/// The discriminant form of 2S on Z^r / 2S Z^r in Smith coordinates:
/// q(c) = c^t Q c / det mod 2 and b(c, c') = c^t Q c' / det mod 1.
struct DiscriminantForm {
  int64_t det = 1;
  std::vector<int64_t> orders;  // nontrivial invariant factors
  std::vector<std::vector<int64_t>> gram;  // Q restricted to the nontrivial generators

  int64_t q(const std::vector<int64_t>& c) const {
    __int128 s = 0;
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = 0; j < c.size(); ++j) s += static_cast<__int128>(c[i]) * gram[i][j] * c[j];
    const __int128 mod = 2 * static_cast<__int128>(det);
    return static_cast<int64_t>(((s % mod) + mod) % mod);
  }
  int64_t b(const std::vector<int64_t>& x, const std::vector<int64_t>& y) const {
    __int128 s = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::size_t j = 0; j < y.size(); ++j) s += static_cast<__int128>(x[i]) * gram[i][j] * y[j];
    return static_cast<int64_t>(((s % det) + det) % det);
  }
};

inline DiscriminantForm discriminant_form(const HalfIntegralMatrix& s) {
  const IntMatrix& two = s.twoT();
  const int n = two.n;
  const int64_t det = determinant64(two);
  const SmithForm snf = smith_normal_form(two);
  // Generators: columns of L^{-1}; L^{-1} = adj(L) * det(L) since det L = +-1.
  IntMatrix linv = adjugate(snf.left);
  if (determinant64(snf.left) == -1)
    for (auto& e : linv.a) e = -e;
  const IntMatrix adj = adjugate(two);
  const IntMatrix q = linv.transpose() * adj * linv;
  DiscriminantForm f;
  f.det = det;
  std::vector<int> idx;
  for (int i = 0; i < n; ++i)
    if (snf.diag[i] > 1) {
      idx.push_back(i);
      f.orders.push_back(snf.diag[i]);
    }
  f.gram.assign(idx.size(), std::vector<int64_t>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j) f.gram[i][j] = q(idx[i], idx[j]);
  return f;
}

/// Whether the two discriminant forms are isometric (backtracking over the
/// images of the generators of the first).
inline bool isometric(const DiscriminantForm& f1, const DiscriminantForm& f2) {
  if (f1.det != f2.det || f1.orders != f2.orders) return false;
  const std::size_t k = f1.orders.size();
  if (k == 0) return true;
  // all elements of the second group
  std::vector<std::vector<int64_t>> elems;
  std::vector<int64_t> c(k, 0);
  while (true) {
    elems.push_back(c);
    std::size_t pos = 0;
    while (pos < k && ++c[pos] == f2.orders[pos]) c[pos++] = 0;
    if (pos == k) break;
  }
  std::vector<int64_t> qvals(elems.size());
  for (std::size_t e = 0; e < elems.size(); ++e) qvals[e] = f2.q(elems[e]);
  std::vector<std::vector<std::size_t>> candidates(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<int64_t> g(k, 0);
    g[i] = 1;
    const int64_t qi = f1.q(g);
    for (std::size_t e = 0; e < elems.size(); ++e) {
      if (qvals[e] != qi) continue;
      bool order_ok = true;  // d_i * h = 0
      for (std::size_t j = 0; j < k && order_ok; ++j) order_ok = (f1.orders[i] * elems[e][j]) % f2.orders[j] == 0;
      if (order_ok) candidates[i].push_back(e);
    }
  }
  std::vector<std::size_t> chosen(k);
  std::function<bool(std::size_t)> search = [&](std::size_t i) {
    if (i == k) return true;
    for (std::size_t e : candidates[i]) {
      bool ok = true;
      for (std::size_t j = 0; j < i && ok; ++j) {
        const int64_t b1 = ((f1.gram[i][j] % f1.det) + f1.det) % f1.det;
        ok = f2.b(elems[e], elems[chosen[j]]) == b1;
      }
      if (!ok) continue;
      chosen[i] = e;
      if (search(i + 1)) return true;
    }
    return false;
  };
  return search(0);
}

}  // namespace detail

/// Same genus: equal rank and determinant and isometric discriminant forms
/// (definite forms of equal rank have equal signature).
inline bool same_genus(const HalfIntegralMatrix& s, const HalfIntegralMatrix& s2) {
  if (s.size() != s2.size()) return false;
  if (!s.is_positive_definite() || !s2.is_positive_definite())
    throw DomainError("same_genus: forms must be positive definite");
  if (s.det2() != s2.det2()) return false;
  return detail::isometric(detail::discriminant_form(s), detail::discriminant_form(s2));
}

/// Partition a class list into genera, each with its level, character and
/// mass sum 1/epsilon.
inline std::vector<GenusRecord> partition_into_genera(const std::vector<ClassRecord>& classes) {
  std::vector<GenusRecord> genera;
  for (const ClassRecord& c : classes) {
    bool placed = false;
    for (GenusRecord& g : genera)
      if (same_genus(g.classes.front().rep, c.rep)) {
        g.classes.push_back(c);
        g.mass += Rational(1, c.epsilon);
        placed = true;
        break;
      }
    if (!placed) {
      GenusRecord g;
      g.classes.push_back(c);
      g.level = level(c.rep);
      if (c.rep.size() % 2 == 0) g.character = character(c.rep);
      g.mass = Rational(1, c.epsilon);
      genera.push_back(g);
    }
  }
  for (const GenusRecord& g : genera)
    for (const ClassRecord& c : g.classes) {
      if (level(c.rep) != g.level) throw std::logic_error("level not constant on a genus");
      if (c.rep.size() % 2 == 0 && !character(c.rep).same_values(g.character))
        throw std::logic_error("character not constant on a genus");
    }
  return genera;
}

// ---------------------------------------------------------------------------
// Persistence

inline nlohmann::json rational_to_json(const Rational& x) {
  return {{"num", x.get_num().get_str()}, {"den", x.get_den().get_str()}};
}

inline Rational rational_from_json(const nlohmann::json& j) {
  Rational x(Integer(j.at("num").get<std::string>()), Integer(j.at("den").get<std::string>()));
  x.canonicalize();
  return x;
}

inline nlohmann::json matrix_to_json(const HalfIntegralMatrix& t) { return t.twoT().rows(); }

inline HalfIntegralMatrix matrix_from_json(const nlohmann::json& j) {
  return HalfIntegralMatrix::from_twoT(j.get<std::vector<std::vector<int64_t>>>());
}

inline nlohmann::json genera_to_json(int r, int64_t lvl, const std::vector<ClassRecord>& classes,
                                     const std::vector<GenusRecord>& genera) {
  nlohmann::json out;
  out["rank"] = r;
  out["level"] = lvl;
  out["classes"] = nlohmann::json::array();
  for (const ClassRecord& c : classes)
    out["classes"].push_back({{"twoT", matrix_to_json(c.rep)}, {"epsilon", c.epsilon}});
  out["genera"] = nlohmann::json::array();
  for (const GenusRecord& g : genera) {
    nlohmann::json members = nlohmann::json::array();
    for (const ClassRecord& c : g.classes)
      for (std::size_t i = 0; i < classes.size(); ++i)
        if (classes[i].rep == c.rep) members.push_back(i);
    out["genera"].push_back({{"classes", members},
                             {"level", g.level},
                             {"character", g.character.discriminant},
                             {"mass", rational_to_json(g.mass)}});
  }
  return out;
}

inline std::vector<GenusRecord> genera_from_json(const nlohmann::json& j) {
  std::vector<ClassRecord> classes;
  for (const auto& c : j.at("classes"))
    classes.push_back({matrix_from_json(c.at("twoT")), c.at("epsilon").get<int64_t>()});
  std::vector<GenusRecord> genera;
  for (const auto& g : j.at("genera")) {
    GenusRecord rec;
    for (const auto& idx : g.at("classes")) rec.classes.push_back(classes.at(idx.get<std::size_t>()));
    rec.level = g.at("level").get<int64_t>();
    rec.character = {g.at("character").get<int64_t>()};
    rec.mass = rational_from_json(g.at("mass"));
    genera.push_back(rec);
  }
  return genera;
}

/// Write text to path via a temporary file and rename.
inline void write_atomically(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os << text;
    if (!os) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::filesystem::path genus_cache_path(const std::filesystem::path& dir, int r, int64_t lvl) {
  return dir / ("genera_r" + std::to_string(r) + "_level" + std::to_string(lvl) + ".json");
}

/// Genera of rank r with level dividing lvl, read from the cache directory
/// when present and computed (then cached) otherwise. An empty directory
/// path disables caching.
inline std::vector<GenusRecord> load_or_compute_genera(int r, int64_t lvl, const std::filesystem::path& dir) {
  if (!dir.empty()) {
    const auto path = genus_cache_path(dir, r, lvl);
    if (std::filesystem::exists(path)) {
      std::ifstream is(path);
      return genera_from_json(nlohmann::json::parse(is));
    }
  }
  const auto classes = enumerate_classes(r, lvl);
  const auto genera = partition_into_genera(classes);
  if (!dir.empty()) write_atomically(genus_cache_path(dir, r, lvl), genera_to_json(r, lvl, classes, genera).dump(2) + "\n");
  return genera;
}

}  // namespace psiegel
