// opequiv: ingest matrices, normalize measures, compare them, verify subspace
// properties. Exit codes: 0 ok / equivalent, 1 not equivalent or a failed
// check, 2 bad input or configuration, 3 numerical failure.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "opequiv/canonical.hpp"
#include "opequiv/errors.hpp"
#include "opequiv/io.hpp"
#include "opequiv/operator.hpp"
#include "opequiv/verify.hpp"

using namespace opequiv;
using io::Json;

namespace {

struct RunConfig {
  double beta = 2.0;
  double b = 1.0;
  double cluster_tol = 1e-8;
  double rank_tol = 1e-10;
  std::uint64_t seed = 42;
  int trials = 100;
  bool json = false;

  Tolerances tolerances() const { return {cluster_tol, rank_tol}; }
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void validate(const RunConfig& c) {
  if (!(c.beta > 1.0 && std::isfinite(c.beta))) throw ConfigError("--beta must be a finite number above 1");
  if (!(c.b > 0.0 && std::isfinite(c.b))) throw ConfigError("--b must be positive");
  if (!(c.cluster_tol > 0.0)) throw ConfigError("--cluster-tol must be positive");
  if (!(c.rank_tol > 0.0)) throw ConfigError("--rank-tol must be positive");
  if (c.trials < 1) throw ConfigError("--trials must be at least 1");
}

std::string opt(const std::optional<Cardinal>& c) { return c ? c->to_string() : "none"; }

std::string form_text(const CanonicalForm& f) {
  std::ostringstream out;
  out << "total " << f.total.to_string() << ", kernel " << f.kernel.to_string() << ", image "
      << f.image.to_string() << ", tail " << describe(f.tail) << ", family " << opt(f.family) << ", heavy "
      << opt(f.heavy);
  return out.str();
}

int cmd_from_matrix(const std::string& path, const RunConfig& cfg) {
  const DenseOperator T = io::matrix_from_json(io::read_file(path));
  std::cout << io::dump(io::to_json(measure_from_dense(T, cfg.tolerances()))) << '\n';
  return 0;
}

int cmd_normalize(const std::string& path, const RunConfig& cfg) {
  const SpectralMeasure m = io::measure_from_json(io::read_file(path));
  const Canonicalization c = canonicalize(m, cfg.beta, cfg.b);
  if (cfg.json) {
    std::cout << io::dump(io::to_json(c)) << '\n';
    return 0;
  }
  std::cout << "form: " << form_text(c.form) << '\n';
  std::cout << "items (exponent k of " << cfg.b << "*" << cfg.beta << "^k):";
  if (c.evi.items.empty()) std::cout << " none";
  for (const EviItem& it : c.evi.items) {
    if (const auto* r = std::get_if<FiniteRun>(&it))
      std::cout << ' ' << r->k << 'x' << r->mult;
    else
      std::cout << ' ' << std::get<Intermission>(it).k << '[' << std::get<Intermission>(it).cardinal.to_string() << ']';
  }
  std::cout << '\n' << "witness K " << c.witness.K << " over " << c.steps.size() << " steps\n";
  return 0;
}

int cmd_compare(const std::string& a, const std::string& b, const RunConfig& cfg) {
  const SpectralMeasure m1 = io::measure_from_json(io::read_file(a));
  const SpectralMeasure m2 = io::measure_from_json(io::read_file(b));
  const Verdict v = decide_equivalent(m1, m2, cfg.beta, cfg.b);
  if (cfg.json) {
    std::cout << io::dump(io::to_json(v, m1, m2)) << '\n';
  } else if (v.equivalent) {
    std::cout << "equivalent, K = " << v.witness_K << '\n';
  } else {
    const Certificate& c = *v.certificate;
    std::cout << "not equivalent: " << field_name(c.field) << " differs (" << c.left << " vs " << c.right << ")\n";
    if (c.intervals) {
      std::cout << "intervals: " << c.intervals->formula << '\n';
      for (double K : io::kInstanceKs)
        if (auto viol = instantiate(c, m1, m2, K)) {
          std::cout << "  K=" << K << ": measure " << viol->side << " puts " << viol->small.to_string() << " on ";
          if (viol->prefix)
            std::cout << "[0, ";
          else
            std::cout << ']' << viol->lo << ", ";
          std::cout << viol->hi << "], the other only " << viol->inflated.to_string() << " on its K-inflation\n";
        }
    }
  }
  return v.equivalent ? 0 : 1;
}

int cmd_verify(const std::string& path, const RunConfig& cfg) {
  const DenseOperator T = io::matrix_from_json(io::read_file(path));
  VerifyConfig vc;
  vc.seed = cfg.seed;
  vc.trials = cfg.trials;
  vc.tol = cfg.tolerances();
  const VerifyReport r = verify_operator(T, vc);
  if (cfg.json) {
    Json checks = Json::array();
    for (const CheckStats& s : r.checks)
      checks.push_back(Json{{"name", s.name},
                            {"passed", s.passed},
                            {"failed", s.failed},
                            {"skipped", s.skipped},
                            {"worst_margin", std::isfinite(s.worst_margin) ? Json(s.worst_margin) : Json(nullptr)}});
    std::cout << io::dump(Json{{"seed", cfg.seed},
                               {"trials", cfg.trials},
                               {"pass", r.all_pass()},
                               {"checks", std::move(checks)},
                               {"failures", r.failures}})
              << '\n';
  } else {
    for (const CheckStats& s : r.checks) {
      std::cout << s.name << ": " << s.passed << " passed, " << s.failed << " failed";
      if (s.skipped) std::cout << ", " << s.skipped << " skipped";
      if (std::isfinite(s.worst_margin)) std::cout << ", worst margin " << s.worst_margin;
      std::cout << '\n';
    }
    for (const std::string& f : r.failures) std::cout << "FAIL " << f << '\n';
    std::cout << (r.all_pass() ? "all checks passed" : std::to_string(r.failures.size()) + " failures") << '\n';
  }
  return r.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral-measure normalization and equivalence checks for operators"};
  app.require_subcommand(1);
  RunConfig cfg;
  app.add_option("--beta", cfg.beta, "grid ratio for normalization")->capture_default_str();
  app.add_option("--b", cfg.b, "grid offset for normalization")->capture_default_str();
  app.add_option("--cluster-tol", cfg.cluster_tol, "relative gap that merges singular values")->capture_default_str();
  app.add_option("--rank-tol", cfg.rank_tol, "singular values below rank_tol*sigma_1 count as zero")
      ->capture_default_str();
  app.add_option("--seed", cfg.seed, "seed for verify")->capture_default_str();
  app.add_option("--trials", cfg.trials, "number of verify trials")->capture_default_str();
  app.add_flag("--json", cfg.json, "JSON output for normalize, compare and verify");

  std::string file_a, file_b;
  auto* from = app.add_subcommand("from-matrix", "print the spectral measure of a matrix");
  from->add_option("matrix", file_a, "matrix JSON file")->required();
  auto* norm = app.add_subcommand("normalize", "canonical form of a measure");
  norm->add_option("measure", file_a, "measure JSON file")->required();
  auto* cmp = app.add_subcommand("compare", "decide equivalence of two measures");
  cmp->add_option("first", file_a, "measure JSON file")->required();
  cmp->add_option("second", file_b, "measure JSON file")->required();
  auto* ver = app.add_subcommand("verify", "randomized subspace checks on a matrix");
  ver->add_option("matrix", file_a, "matrix JSON file")->required();
  for (auto* sub : {from, norm, cmp, ver}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    validate(cfg);
    if (from->parsed()) return cmd_from_matrix(file_a, cfg);
    if (norm->parsed()) return cmd_normalize(file_a, cfg);
    if (cmp->parsed()) return cmd_compare(file_a, file_b, cfg);
    return cmd_verify(file_a, cfg);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ContractError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << " (residual " << e.residual << ")\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 3;
  }
}
