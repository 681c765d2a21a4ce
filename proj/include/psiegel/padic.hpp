#pragma once

// Weight sequences converging in Z_p x Z/(p-1), empirical p-adic limits of
// Eisenstein windows, and the fit-and-verify check of the genus theta
// identity for the limit series.

#include "psiegel/eisenstein.hpp"
#include "psiegel/theta.hpp"

namespace psiegel {

/// Raised when the candidate thetas are dependent mod p on the window.
class SingularFitError : public DomainError {
public:
  using DomainError::DomainError;
};

struct WeightTarget {
  int64_t p = 7;
  int64_t k = 2;
  int j = 0;

  /// Theorem mode also demands p > 2k + 1.
  void validate(bool theorem_mode = true) const {
    if (p < 3 || !is_prime(p)) throw DomainError("weight target: p must be an odd prime");
    if (k < 1) throw DomainError("weight target: k must be positive");
    if (j != 0 && j != 1) throw DomainError("weight target: j must be 0 or 1");
    if (j == 0 && k % 2 != 0) throw DomainError("weight target: j = 0 needs k even");
    if (j == 1 && (k - (p - 1) / 2) % 2 != 0) throw DomainError("weight target: j = 1 needs k = (p-1)/2 mod 2");
    if (theorem_mode && p <= 2 * k + 1)
      throw DomainError("weight target: p > 2k + 1 required outside exploratory mode");
  }

  /// chi_p^j
  QuadCharacter character() const { return QuadCharacter::chi_p_power(p, j); }
};

struct WeightSequence {
  WeightTarget target;
  std::vector<int> b;  // b(1) < b(2) < ...

  /// b(m) = m for m = 1..m_max.
  static WeightSequence standard(const WeightTarget& t, int m_max) {
    WeightSequence s{t, {}};
    for (int m = 1; m <= m_max; ++m) s.b.push_back(m);
    return s;
  }

  void validate() const {
    if (b.empty()) throw DomainError("weight sequence: empty schedule");
    for (std::size_t i = 0; i < b.size(); ++i)
      if (b[i] < 1 || (i > 0 && b[i] <= b[i - 1]))
        throw DomainError("weight sequence: schedule must be strictly increasing and positive");
  }

  /// Minimal positive a = (p-1)/2^j mod (p-1).
  int64_t a() const { return target.j == 0 ? target.p - 1 : (target.p - 1) / 2; }

  int size() const { return static_cast<int>(b.size()); }
  int b_at(int m) const {
    if (m < 1 || m > size()) throw DomainError("weight sequence: m outside the schedule");
    return b[m - 1];
  }
};

/// k_j(m) = k + a_j(m) p^{b(m)}.
inline int64_t weight_at(const WeightSequence& seq, int m) {
  const Integer w = seq.target.k + seq.a() * pow_int(Integer(seq.target.p), seq.b_at(m));
  if (!w.fits_slong_p() || w > 1000000) throw DomainError("weight_at: weight out of desk scale");
  return w.get_si();
}

/// (k, degree, bound) -> E_k^{(degree)} window.
using CoefficientSource = std::function<QExpansion(int64_t, int, int64_t)>;

inline QExpansion default_source(int64_t k, int n, int64_t bound) { return eisenstein_qexp(k, n, bound); }

// ---------------------------------------------------------------------------
// Empirical limits

struct LimitEntry {
  HalfIntegralMatrix index;
  std::vector<Integer> residues;                 // p^{-nu} a_{k(m)}(T) mod p^{b(m)}
  std::vector<ExtendedValuation> certificates;   // v_p of consecutive differences
  bool flagged = false;
};

struct LimitWindow {
  WeightSequence seq;
  int degree = 1;
  int64_t trace_bound = 0;
  long nu_hat = 0;
  std::vector<int64_t> weights;
  std::vector<LimitEntry> entries;

  /// Residue expansion at rung m (values in [0, p^{b(m)})).
  QExpansion rung(int m) const {
    QExpansion f(degree, trace_bound);
    for (const auto& e : entries) f.set(e.index, Rational(e.residues.at(m - 1)));
    return f;
  }

  bool any_flagged() const {
    return std::any_of(entries.begin(), entries.end(), [](const LimitEntry& e) { return e.flagged; });
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["p"] = seq.target.p;
    j["k"] = seq.target.k;
    j["j"] = seq.target.j;
    j["schedule"] = seq.b;
    j["weights"] = weights;
    j["degree"] = degree;
    j["trace_bound"] = trace_bound;
    j["nu_hat"] = nu_hat;
    j["entries"] = nlohmann::json::array();
    for (const auto& e : entries) {
      nlohmann::json res = nlohmann::json::array(), cert = nlohmann::json::array();
      for (const auto& r : e.residues) res.push_back(r.get_str());
      for (const auto& c : e.certificates) cert.push_back(c.is_infinite() ? nlohmann::json("inf") : nlohmann::json(c.value()));
      j["entries"].push_back({{"twoT", e.index.twoT().rows()}, {"residues", res}, {"certificates", cert}, {"flagged", e.flagged}});
    }
    return j;
  }
};

/// Residue ladder of E_{k_j(m)}^{(n)} along the schedule, with certificates
/// v_p(a_{k(m+1)}(T) - a_{k(m)}(T)) >= b(m), nondecreasing in m.
inline LimitWindow empirical_limit(const WeightSequence& seq, int n, int64_t bound,
                                   const CoefficientSource& source = default_source) {
  seq.validate();
  const int64_t p = seq.target.p;
  LimitWindow out{seq, n, bound, 0, {}, {}};
  std::vector<QExpansion> windows;
  for (int m = 1; m <= seq.size(); ++m) {
    out.weights.push_back(weight_at(seq, m));
    windows.push_back(source(out.weights.back(), n, bound));
    for (const auto& [t, v] : windows.back().coefficients())
      if (auto val = vp(v, p); !val.is_infinite()) out.nu_hat = std::min(out.nu_hat, val.value());
  }
  const Rational scale = pow_rat(Rational(p), -out.nu_hat);
  for (const auto& t : fourier_indices(n, bound)) {
    LimitEntry e{t, {}, {}, false};
    for (int m = 1; m <= seq.size(); ++m) {
      const Rational a = windows[m - 1].coeff(t) * scale;
      e.residues.push_back(residue_mod_pm(a, p, seq.b_at(m)));
      if (m > 1) {
        const ExtendedValuation c = vp(a - windows[m - 2].coeff(t) * scale, p);
        if (!(c >= seq.b_at(m - 1))) e.flagged = true;
        if (!e.certificates.empty() && c < e.certificates.back()) e.flagged = true;
        e.certificates.push_back(c);
      }
    }
    out.entries.push_back(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Linear algebra over Z / p^c

namespace detail {

inline Integer mod_pow(const Integer& x, const Integer& mod) {
  Integer r = x % mod;
  if (r < 0) r += mod;
  return r;
}

inline Integer inverse_mod(const Integer& x, const Integer& mod) {
  Integer inv;
  if (mpz_invert(inv.get_mpz_t(), x.get_mpz_t(), mod.get_mpz_t()) == 0) throw std::logic_error("inverse_mod: not a unit");
  return inv;
}

/// Solve A x = y over Z/p^c, A square and invertible mod p, pivoting on units.
inline std::vector<Integer> solve_mod(std::vector<std::vector<Integer>> a, std::vector<Integer> y, int64_t p, int c) {
  const Integer mod = pow_int(Integer(p), c);
  const std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && a[piv][col] % p == 0) ++piv;
    if (piv == n) throw SingularFitError("fit system is singular mod p");
    std::swap(a[piv], a[col]);
    std::swap(y[piv], y[col]);
    const Integer inv = inverse_mod(a[col][col], mod);
    for (auto& v : a[col]) v = mod_pow(v * inv, mod);
    y[col] = mod_pow(y[col] * inv, mod);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0) continue;
      const Integer f = a[r][col];
      for (std::size_t k = 0; k < n; ++k) a[r][k] = mod_pow(a[r][k] - f * a[col][k], mod);
      y[r] = mod_pow(y[r] - f * y[col], mod);
    }
  }
  return y;
}

/// Rank over F_p of the given rows.
inline std::size_t rank_fp(std::vector<std::vector<Integer>> rows, int64_t p) {
  std::size_t r = 0;
  const std::size_t cols = rows.empty() ? 0 : rows[0].size();
  for (std::size_t c = 0; c < cols && r < rows.size(); ++c) {
    std::size_t piv = r;
    while (piv < rows.size() && rows[piv][c] % p == 0) ++piv;
    if (piv == rows.size()) continue;
    std::swap(rows[piv], rows[r]);
    const Integer inv = inverse_mod(rows[r][c], Integer(p));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i == r || rows[i][c] % p == 0) continue;
      const Integer f = mod_pow(rows[i][c] * inv, Integer(p));
      for (std::size_t k = 0; k < cols; ++k) rows[i][k] = mod_pow(rows[i][k] - f * rows[r][k], Integer(p));
    }
    ++r;
  }
  return r;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Fit and verify

struct FitConfig {
  WeightTarget target;
  int degree = 1;
  int64_t trace_bound = 50;
  int m_max = 3;
  std::vector<int> schedule;  // empty: b(m) = m
  bool exploratory = false;
  bool include_mismatched = false;  // add genera with chi_S = chi_p^{1-j}
  int fit_margin = 1;               // c(m) = b(m) + fit_margin

  WeightSequence sequence() const {
    if (schedule.empty()) return WeightSequence::standard(target, m_max);
    WeightSequence s{target, schedule};
    s.b.resize(std::min<std::size_t>(schedule.size(), static_cast<std::size_t>(m_max)));
    return s;
  }

  nlohmann::json to_json() const {
    const auto seq = sequence();
    return {{"p", target.p},          {"k", target.k},
            {"j", target.j},          {"degree", degree},
            {"trace_bound", trace_bound}, {"m_max", m_max},
            {"schedule", seq.b},      {"exploratory", exploratory},
            {"include_mismatched", include_mismatched}, {"fit_margin", fit_margin}};
  }
};

struct Residual {
  HalfIntegralMatrix index;
  ExtendedValuation valuation;  // capped at c(m)
};

struct RungResult {
  int m = 0;
  int b = 0;
  int c = 0;
  int64_t weight = 0;
  long nu_hat = 0;
  std::vector<HalfIntegralMatrix> training;
  std::vector<Integer> residues;     // solution mod p^c, per dictionary entry
  std::vector<Rational> fitted;      // p^{nu + shift} x, x the least nonnegative residue
  std::vector<Residual> residuals;   // held-out indices
  long achieved = 0;
  bool passed = false;
  int64_t up_window = 0;
  bool up_passed = false;
  bool mismatch_vanishes = true;
};

struct AuditEntry {
  std::string source;
  int64_t weight = 0;
  int m = 0;
  int rank = 0;
  bool holds = false;
};

struct VerificationReport {
  std::string mode = "theorem";
  FitConfig config;
  std::vector<GenusRecord> dictionary;
  std::vector<bool> character_matches;
  std::vector<long> column_shift;  // Theta^0 scaled by p^shift to make it p-integral
  std::vector<RungResult> rungs;
  bool coherent = false;
  std::vector<AuditEntry> audit;
  std::string failed_stage;
  std::string error;
  bool passed = false;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["mode"] = mode;
    j["config"] = config.to_json();
    j["dictionary"] = nlohmann::json::array();
    for (std::size_t g = 0; g < dictionary.size(); ++g) {
      nlohmann::json classes = nlohmann::json::array();
      for (const auto& c : dictionary[g].classes) classes.push_back({{"twoT", c.rep.twoT().rows()}, {"epsilon", c.epsilon}});
      j["dictionary"].push_back({{"classes", classes},
                                 {"level", dictionary[g].level},
                                 {"character", dictionary[g].character.discriminant},
                                 {"mass", rational_to_json(dictionary[g].mass)},
                                 {"character_matches", static_cast<bool>(character_matches[g])},
                                 {"column_shift", column_shift.empty() ? 0 : column_shift[g]}});
    }
    j["rungs"] = nlohmann::json::array();
    for (const auto& r : rungs) {
      nlohmann::json fitted = nlohmann::json::array();
      for (std::size_t g = 0; g < r.fitted.size(); ++g) {
        nlohmann::json f = rational_to_json(r.fitted[g]);
        f["residue"] = r.residues[g].get_str();
        fitted.push_back(f);
      }
      nlohmann::json training = nlohmann::json::array(), residuals = nlohmann::json::array();
      for (const auto& t : r.training) training.push_back(t.twoT().rows());
      for (const auto& res : r.residuals)
        residuals.push_back({{"twoT", res.index.twoT().rows()}, {"valuation", res.valuation.value()}});
      j["rungs"].push_back({{"m", r.m},
                            {"b", r.b},
                            {"c", r.c},
                            {"weight", r.weight},
                            {"nu_hat", r.nu_hat},
                            {"training", training},
                            {"fitted", fitted},
                            {"residuals", residuals},
                            {"achieved_exponent", r.achieved},
                            {"passed", r.passed},
                            {"u_p", {{"window", r.up_window}, {"passed", r.up_passed}}},
                            {"mismatch_vanishes", r.mismatch_vanishes}});
    }
    j["coherent"] = coherent;
    j["audit"] = nlohmann::json::array();
    for (const auto& a : audit)
      j["audit"].push_back({{"source", a.source}, {"weight", a.weight}, {"m", a.m}, {"rank", a.rank}, {"holds", a.holds}});
    j["failed_stage"] = failed_stage.empty() ? nlohmann::json(nullptr) : nlohmann::json(failed_stage);
    j["error"] = error.empty() ? nlohmann::json(nullptr) : nlohmann::json(error);
    j["passed"] = passed;
    return j;
  }
};

/// Weight-rank congruence on every mod p^{m'} singular detection,
/// m' = 1..max_m, of a p-integral window of weight k.
inline std::vector<AuditEntry> audit_singular(const QExpansion& f, int64_t weight, int64_t p, int max_m,
                                              const std::string& source) {
  std::vector<AuditEntry> out;
  for (int m = 1; m <= max_m; ++m)
    if (auto r = mod_pm_singular_rank(f, p, m))
      out.push_back({source, weight, m, *r, check_weight_rank_congruence(weight, *r, p, m)});
  return out;
}

/// Genus dictionary for the target: genera of rank 2k with level | p whose
/// character is chi_p^j, plus those with chi_p^{1-j} when requested.
inline std::vector<GenusRecord> candidate_genera(const std::vector<GenusRecord>& all, const WeightTarget& t,
                                                 bool include_mismatched, std::vector<bool>* matches) {
  std::vector<GenusRecord> out;
  const QuadCharacter want = t.character();
  const QuadCharacter other = QuadCharacter::chi_p_power(t.p, 1 - t.j);
  for (const auto& g : all) {
    if (t.p % g.level != 0) continue;
    const bool match = g.character.same_values(want);
    if (match || (include_mismatched && g.character.same_values(other))) {
      out.push_back(g);
      if (matches) matches->push_back(match);
    }
  }
  return out;
}

/// Consistency check of cached genera: class levels divide p, automorphism
/// counts and masses agree, characters constant.
inline void validate_genera(const std::vector<GenusRecord>& genera, int rank, int64_t p) {
  for (const auto& g : genera) {
    if (g.classes.empty()) throw DomainError("genus cache: empty genus");
    Rational mass = 0;
    for (const auto& c : g.classes) {
      if (c.rep.size() != rank || !c.rep.is_positive_definite()) throw DomainError("genus cache: bad class " + c.rep.to_string());
      if (p % level(c.rep) != 0) throw DomainError("genus cache: class level does not divide p");
      if (automorphism_count(c.rep) != c.epsilon) throw DomainError("genus cache: wrong automorphism count");
      if (!character(c.rep).same_values(g.character)) throw DomainError("genus cache: wrong character");
      if (!same_genus(c.rep, g.classes.front().rep)) throw DomainError("genus cache: classes of different genera");
      mass += Rational(1, c.epsilon);
    }
    if (mass != g.mass) throw DomainError("genus cache: mass mismatch");
  }
}

/// Fit the limit series against the genus dictionary rung by rung and verify
/// on held-out indices. Errors are reported with the failing stage instead of
/// thrown.
inline VerificationReport fit_and_verify(const FitConfig& cfg,
                                         const std::function<std::vector<GenusRecord>()>& load_genera,
                                         const CoefficientSource& source = default_source) {
  VerificationReport rep;
  rep.config = cfg;
  rep.mode = cfg.exploratory ? "exploratory (outside theorem hypotheses)" : "theorem";
  std::string stage = "config";
  try {
    cfg.target.validate(!cfg.exploratory);
    const WeightSequence seq = cfg.sequence();
    seq.validate();
    if (cfg.degree < 1 || cfg.degree > 2) throw DomainError("fit_and_verify: degree must be 1 or 2");
    if (cfg.fit_margin < 0) throw DomainError("fit_and_verify: negative fit margin");
    const int64_t p = cfg.target.p;
    const int n = cfg.degree;
    const int64_t bound = cfg.trace_bound;

    stage = "fit";
    const int rank = static_cast<int>(2 * cfg.target.k);
    auto all = load_genera();
    validate_genera(all, rank, p);
    rep.dictionary = candidate_genera(all, cfg.target, cfg.include_mismatched, &rep.character_matches);
    if (rep.dictionary.empty()) throw DomainError("no genera of rank " + std::to_string(rank) + " with level | p");

    stage = "theta";
    std::vector<QExpansion> thetas;
    for (const auto& g : rep.dictionary) {
      QExpansion th = genus_theta(g, n, bound).zero;
      long shift = 0;
      for (const auto& [t, v] : th.coefficients()) shift = std::max(shift, -vp(v, p).value());
      rep.column_shift.push_back(shift);
      thetas.push_back(th.scaled(pow_rat(Rational(p), shift)));
    }
    const auto indices = fourier_indices(n, bound);  // sorted by canonical order
    std::vector<HalfIntegralMatrix> order = indices;
    std::stable_sort(order.begin(), order.end(),
                     [](const HalfIntegralMatrix& a, const HalfIntegralMatrix& b) { return a.trace() < b.trace(); });

    for (int m = 1; m <= seq.size(); ++m) {
      RungResult r;
      r.m = m;
      r.b = seq.b_at(m);
      r.c = r.b + cfg.fit_margin;
      r.weight = weight_at(seq, m);

      stage = "eisenstein";
      const QExpansion e = source(r.weight, n, bound);
      for (const auto& [t, v] : e.coefficients())
        if (auto val = vp(v, p); !val.is_infinite()) r.nu_hat = std::min(r.nu_hat, val.value());
      const QExpansion es = e.scaled(pow_rat(Rational(p), -r.nu_hat));

      stage = "fit";
      std::vector<std::vector<Integer>> rows;
      std::vector<Integer> rhs;
      std::set<HalfIntegralMatrix> train;
      for (const auto& t : order) {
        if (rows.size() == rep.dictionary.size()) break;
        std::vector<Integer> row;
        for (const auto& th : thetas) row.push_back(residue_mod_pm(th.coeff(t), p, r.c));
        auto trial = rows;
        trial.push_back(row);
        if (detail::rank_fp(trial, p) > rows.size()) {
          rows.push_back(row);
          rhs.push_back(residue_mod_pm(es.coeff(t), p, r.c));
          r.training.push_back(t);
          train.insert(t);
        }
      }
      if (rows.size() < rep.dictionary.size())
        throw SingularFitError("genus thetas are dependent mod p on the window; enlarge the trace bound");
      r.residues = detail::solve_mod(rows, rhs, p, r.c);
      for (std::size_t g = 0; g < r.residues.size(); ++g)
        r.fitted.push_back(Rational(r.residues[g]) * pow_rat(Rational(p), r.nu_hat + rep.column_shift[g]));
      QExpansion combo(n, bound);
      for (std::size_t g = 0; g < thetas.size(); ++g) combo = combo + thetas[g].scaled(Rational(r.residues[g]));

      stage = "verify";
      r.achieved = r.c;
      for (const auto& t : indices) {
        if (train.count(t)) continue;
        ExtendedValuation v = vp(es.coeff(t) - combo.coeff(t), p);
        if (!(v < ExtendedValuation(r.c))) v = ExtendedValuation(r.c);
        r.achieved = std::min(r.achieved, v.value());
        r.residuals.push_back({t, v});
      }
      if (r.residuals.empty()) throw DomainError("no held-out indices; enlarge the trace bound");
      r.passed = r.achieved >= r.b;
      for (std::size_t g = 0; g < rep.dictionary.size(); ++g)
        if (!rep.character_matches[g] && !(vp(r.fitted[g], p) >= r.b)) r.mismatch_vanishes = false;

      stage = "u_p";
      const QExpansion up = u_p(combo, p);
      r.up_window = up.trace_bound();
      r.up_passed = congruent_mod(up, combo.truncated(r.up_window), p, r.c).holds;

      stage = "audit";
      for (auto& a : audit_singular(es, r.weight, p, r.c, "E_" + std::to_string(r.weight))) rep.audit.push_back(a);
      rep.rungs.push_back(std::move(r));
    }

    stage = "coherence";
    rep.coherent = true;
    for (std::size_t i = 1; i < rep.rungs.size(); ++i)
      for (std::size_t g = 0; g < rep.dictionary.size(); ++g)
        if (!(vp(rep.rungs[i].fitted[g] - rep.rungs[i - 1].fitted[g], p) >=
              rep.rungs[i - 1].c + rep.rungs[i - 1].nu_hat + rep.column_shift[g]))
          rep.coherent = false;

    bool ok = rep.coherent;
    for (const auto& r : rep.rungs) ok = ok && r.passed && r.up_passed && r.mismatch_vanishes;
    for (const auto& a : rep.audit) ok = ok && a.holds;
    rep.passed = ok;
    if (!ok) {
      for (const auto& r : rep.rungs) {
        if (!r.passed) { rep.failed_stage = "verify"; break; }
        if (!r.up_passed) { rep.failed_stage = "u_p"; break; }
        if (!r.mismatch_vanishes) { rep.failed_stage = "fit"; break; }
      }
      if (rep.failed_stage.empty()) rep.failed_stage = rep.coherent ? "audit" : "coherence";
    }
  } catch (const std::exception& ex) {
    rep.passed = false;
    rep.failed_stage = stage;
    rep.error = ex.what();
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Direct limits of primitive coefficients

struct DirectLimitLadder {
  HalfIntegralMatrix form;
  std::vector<int> schedule;
  std::vector<int64_t> weights;
  std::vector<Rational> values;                 // a*_{k(m)}(S)
  std::vector<ExtendedValuation> valuations;
  std::vector<std::optional<Integer>> residues;  // mod p^{b(m)} when p-integral

  /// Every rung vanishes mod p^{b(m)}.
  bool tends_to_zero() const {
    for (std::size_t i = 0; i < values.size(); ++i)
      if (!(valuations[i] >= schedule[i])) return false;
    return true;
  }

  /// Rung m agrees with x mod p^{b(m)}.
  bool matches(const Rational& x, int64_t p, int m) const { return vp(values.at(m - 1) - x, p) >= schedule.at(m - 1); }

  nlohmann::json to_json() const {
    nlohmann::json rungs = nlohmann::json::array();
    for (std::size_t i = 0; i < values.size(); ++i)
      rungs.push_back({{"b", schedule[i]},
                       {"weight", weights[i]},
                       {"value", rational_to_json(values[i])},
                       {"valuation", valuations[i].is_infinite() ? nlohmann::json("inf") : nlohmann::json(valuations[i].value())},
                       {"residue", residues[i] ? nlohmann::json(residues[i]->get_str()) : nlohmann::json(nullptr)}});
    return {{"twoT", form.twoT().rows()}, {"rungs", rungs}, {"tends_to_zero", tends_to_zero()}};
  }
};

/// a*_{k_j(m)}(S) for S of rank 2k <= 4 along the schedule.
inline DirectLimitLadder direct_limit_coefficient(const HalfIntegralMatrix& s, const WeightSequence& seq) {
  seq.validate();
  if (!s.is_positive_definite()) throw DomainError("direct_limit_coefficient: S must be positive definite");
  if (s.size() != 2 * seq.target.k) throw DomainError("direct_limit_coefficient: S must have rank 2k");
  if (s.size() > 4) throw DomainError("direct_limit_coefficient: rank at most 4");
  const int64_t p = seq.target.p;
  DirectLimitLadder out;
  out.form = canonical(s);
  out.schedule = seq.b;
  for (int m = 1; m <= seq.size(); ++m) {
    const int64_t w = weight_at(seq, m);
    PrimitiveCoefficients prim(s.size(), [w](const HalfIntegralMatrix& t) { return eisenstein_coefficient(w, t); });
    const Rational v = prim(s);
    out.weights.push_back(w);
    out.values.push_back(v);
    out.valuations.push_back(vp(v, p));
    out.residues.push_back(is_p_integral(v, p) ? std::optional<Integer>(residue_mod_pm(v, p, seq.b_at(m))) : std::nullopt);
  }
  return out;
}

}  // namespace psiegel
