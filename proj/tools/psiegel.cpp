// psiegel: command-line front end.

#include "psiegel/psiegel.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace psiegel;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct Options {
  int rank = 2;
  int64_t level = 1;
  std::string form;
  std::string input;
  int degree = 1;
  int64_t bound = 10;
  int64_t k = 2;
  int64_t p = 7;
  int j = 0;
  int m = 1;
  int m_max = 3;
  std::vector<int> schedule;
  bool exploratory = false;
  bool include_mismatched = false;
  std::string cache_dir;
  std::string output;
};

fs::path cache_dir(const Options& o) {
  if (!o.cache_dir.empty()) return o.cache_dir;
  if (const char* env = std::getenv("PSIEGEL_CACHE_DIR"); env && *env) return env;
  return ".psiegel-cache";
}

void emit(const Options& o, const nlohmann::json& j) {
  const std::string text = j.dump(2) + "\n";
  if (o.output.empty()) std::cout << text;
  else write_atomically(o.output, text);
}

std::string read_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DomainError("cannot read " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

/// A form given inline ("2; 2 1; 1 2") or as a file holding that text, a
/// JSON row list, or an object with a "twoT" field.
HalfIntegralMatrix read_form(const std::string& arg) {
  if (!fs::exists(arg)) return HalfIntegralMatrix::parse(arg);
  const std::string text = read_file(arg);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (text[first] == '[' || text[first] == '{')) {
    const auto j = nlohmann::json::parse(text);
    return matrix_from_json(j.is_object() ? j.at("twoT") : j);
  }
  return HalfIntegralMatrix::parse(text);
}

/// Eisenstein windows cached by (k, degree, bound).
CoefficientSource cached_source(const fs::path& dir) {
  return [dir](int64_t k, int n, int64_t bound) {
    const fs::path path =
        dir / ("eisenstein_k" + std::to_string(k) + "_n" + std::to_string(n) + "_B" + std::to_string(bound) + ".json");
    if (fs::exists(path)) return QExpansion::from_json(nlohmann::json::parse(read_file(path.string())));
    QExpansion f = eisenstein_qexp(k, n, bound);
    write_atomically(path, f.to_json().dump() + "\n");
    return f;
  };
}

FitConfig fit_config(const Options& o) {
  FitConfig cfg;
  cfg.target = {o.p, o.k, o.j};
  cfg.degree = o.degree;
  cfg.trace_bound = o.bound;
  cfg.m_max = o.m_max;
  cfg.schedule = o.schedule;
  cfg.exploratory = o.exploratory;
  cfg.include_mismatched = o.include_mismatched;
  return cfg;
}

WeightSequence sequence(const Options& o) {
  WeightTarget t{o.p, o.k, o.j};
  t.validate(!o.exploratory);
  return fit_config(o).sequence();
}

int cmd_classes(const Options& o) {
  if (o.rank % 2 != 0 || o.rank < 2 || o.rank > 4) throw DomainError("classes: rank must be 2 or 4");
  const auto classes = enumerate_classes(o.rank, o.level);
  nlohmann::json j{{"rank", o.rank}, {"level", o.level}, {"classes", nlohmann::json::array()}};
  for (const auto& c : classes) j["classes"].push_back({{"twoT", matrix_to_json(c.rep)}, {"epsilon", c.epsilon}});
  emit(o, j);
  return 0;
}

int cmd_genera(const Options& o) {
  if (o.rank % 2 != 0 || o.rank < 2 || o.rank > 4) throw DomainError("genera: rank must be 2 or 4");
  const fs::path dir = cache_dir(o);
  load_or_compute_genera(o.rank, o.level, dir);
  const std::string text = read_file(genus_cache_path(dir, o.rank, o.level).string());
  if (o.output.empty()) std::cout << text;
  else write_atomically(o.output, text);
  return 0;
}

int cmd_theta(const Options& o) {
  if (o.form.empty()) throw DomainError("theta: --form is required");
  emit(o, theta_series(read_form(o.form), o.degree, o.bound).to_json());
  return 0;
}

int cmd_eisenstein(const Options& o) {
  emit(o, eisenstein_qexp(o.k, o.degree, o.bound).to_json());
  return 0;
}

int cmd_singular_rank(const Options& o) {
  if (o.input.empty()) throw DomainError("singular-rank: --input is required");
  const QExpansion f = QExpansion::from_json(nlohmann::json::parse(read_file(o.input)));
  const auto r = mod_pm_singular_rank(f, o.p, o.m);
  emit(o, {{"p", o.p},
           {"m", o.m},
           {"degree", f.degree()},
           {"trace_bound", f.trace_bound()},
           {"singular", r.has_value()},
           {"p_rank", r ? nlohmann::json(*r) : nlohmann::json(nullptr)}});
  return 0;
}

int cmd_limit(const Options& o) {
  const LimitWindow w = empirical_limit(sequence(o), o.degree, o.bound, cached_source(cache_dir(o)));
  emit(o, w.to_json());
  return w.any_flagged() ? kExitFail : 0;
}

int cmd_direct_limit(const Options& o) {
  if (o.form.empty()) throw DomainError("direct-limit: --form is required");
  const DirectLimitLadder l = direct_limit_coefficient(read_form(o.form), sequence(o));
  emit(o, l.to_json());
  return 0;
}

int cmd_verify_main(const Options& o) {
  const fs::path dir = cache_dir(o);
  const FitConfig cfg = fit_config(o);
  const int rank = static_cast<int>(2 * o.k);
  const VerificationReport rep =
      fit_and_verify(cfg, [&] { return load_or_compute_genera(rank, o.p, dir); }, cached_source(dir));
  emit(o, rep.to_json());
  if (!rep.passed)
    std::cerr << "verify-main: failed at stage " << rep.failed_stage << (rep.error.empty() ? "" : ": " + rep.error)
              << "\n";
  return rep.passed ? 0 : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Siegel-Eisenstein p-adic limits and genus theta series"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--cache-dir", o.cache_dir, "cache directory (default $PSIEGEL_CACHE_DIR or .psiegel-cache)");
    sub->add_option("--output", o.output, "output file (default stdout)");
  };
  auto add_weight = [&](CLI::App* sub) {
    sub->add_option("--p", o.p, "odd prime")->default_val(7);
    sub->add_option("--k", o.k, "target weight k")->default_val(2);
    sub->add_option("--j", o.j, "character exponent j in {0, 1}")->default_val(0);
    sub->add_option("--m-max", o.m_max, "number of schedule rungs")->default_val(3);
    sub->add_option("--schedule", o.schedule, "b(1) < b(2) < ... (default b(m) = m)");
    sub->add_flag("--exploratory", o.exploratory, "allow p <= 2k + 1 (outside theorem hypotheses)");
  };

  auto* classes = app.add_subcommand("classes", "GL-classes of even forms with level dividing --level");
  classes->add_option("--rank", o.rank, "even rank (2 or 4)")->required();
  classes->add_option("--level", o.level, "level bound")->required();
  add_common(classes);

  auto* genera = app.add_subcommand("genera", "classes grouped into genera, written to the cache");
  genera->add_option("--rank", o.rank, "even rank (2 or 4)")->required();
  genera->add_option("--level", o.level, "level bound")->required();
  add_common(genera);

  auto* theta = app.add_subcommand("theta", "theta series of a positive definite form");
  theta->add_option("--form", o.form, "2S inline ('2; 2 1; 1 2') or a file")->required();
  theta->add_option("--degree", o.degree, "degree n")->default_val(1);
  theta->add_option("--bound", o.bound, "trace bound")->default_val(10);
  add_common(theta);

  auto* eis = app.add_subcommand("eisenstein", "Siegel-Eisenstein series of degree 1 or 2");
  eis->add_option("--k", o.k, "even weight k > degree + 1")->required();
  eis->add_option("--degree", o.degree, "degree n")->default_val(1);
  eis->add_option("--bound", o.bound, "trace bound")->default_val(10);
  add_common(eis);

  auto* sing = app.add_subcommand("singular-rank", "mod p^m singular p-rank of an expansion dump");
  sing->add_option("--input", o.input, "expansion dump (JSON)")->required();
  sing->add_option("--p", o.p, "prime")->default_val(7);
  sing->add_option("--m", o.m, "exponent m")->default_val(1);
  add_common(sing);

  auto* limit = app.add_subcommand("limit", "residue ladder of E_{k_j(m)} along the weight schedule");
  add_weight(limit);
  limit->add_option("--degree", o.degree, "degree n")->default_val(1);
  limit->add_option("--bound", o.bound, "trace bound")->default_val(50);
  add_common(limit);

  auto* direct = app.add_subcommand("direct-limit", "ladder of primitive coefficients a*_{k_j(m)}(S)");
  direct->add_option("--form", o.form, "2S inline or a file, rank 2k")->required();
  add_weight(direct);
  add_common(direct);

  auto* verify = app.add_subcommand("verify-main", "fit and verify the genus theta identity of the limit series");
  add_weight(verify);
  verify->add_option("--degree", o.degree, "degree n (1 or 2)")->default_val(1);
  verify->add_option("--bound", o.bound, "trace bound")->default_val(50);
  verify->add_flag("--include-mismatched", o.include_mismatched, "add genera with character chi_p^{1-j}");
  add_common(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (*classes) return cmd_classes(o);
    if (*genera) return cmd_genera(o);
    if (*theta) return cmd_theta(o);
    if (*eis) return cmd_eisenstein(o);
    if (*sing) return cmd_singular_rank(o);
    if (*limit) return cmd_limit(o);
    if (*direct) return cmd_direct_limit(o);
    if (*verify) return cmd_verify_main(o);
  } catch (const DomainError& e) {
    std::cerr << "psiegel: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "psiegel: " << e.what() << "\n";
    return kExitFail;
  }
  return kExitUsage;
}
