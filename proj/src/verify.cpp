#include "opequiv/verify.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>

namespace opequiv {
namespace {

enum Check { Subspaces, Projection, Quotient, Attain, kChecks };
const char* const kNames[kChecks] = {"spectral_subspace", "projection_iso", "quotient_dim", "norm_attainment"};

struct Tally {
  VerifyReport& report;
  int trial;

  void record(Check c, bool ok, double margin, const std::string& detail) {
    CheckStats& s = report.checks[c];
    (ok ? s.passed : s.failed) += 1;
    s.worst_margin = std::min(s.worst_margin, margin);
    if (!ok) report.failures.push_back("trial " + std::to_string(trial) + ": " + kNames[c] + ": " + detail);
  }
  void skip(Check c) { report.checks[c].skipped += 1; }
};

std::string num(double x) {
  std::ostringstream ss;
  ss.precision(6);
  ss << x;
  return ss.str();
}

// Distinct levels of the snapped spectrum, descending.
std::vector<double> levels(const std::vector<double>& v, const Tolerances& tol) {
  std::vector<double> out;
  for (double x : v)
    if (out.empty() || (out.back() - x) > tol.cluster * out.back()) out.push_back(x);
  return out;
}

double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

Eigen::VectorXd gaussian(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = normal(rng);
  return x;
}

void run_trial(const DenseOperator& T, const SpectrumResult& svd, const VerifyConfig& cfg, std::mt19937_64& rng,
               Tally& tally) {
  const std::vector<double> v = snapped_values(svd, cfg.tol);
  const std::vector<double> lv = levels(v, cfg.tol);
  const double norm = v.front();

  // mu strictly inside a gap of the spectrum
  std::vector<std::pair<double, double>> gaps;
  for (std::size_t i = 0; i + 1 < lv.size(); ++i) gaps.push_back({lv[i + 1], lv[i]});
  if (lv.back() > 0.0) gaps.push_back({0.0, lv.back()});

  if (gaps.empty()) {
    tally.skip(Subspaces);
    tally.skip(Projection);
  } else {
    const auto [below, above] = gaps[std::uniform_int_distribution<std::size_t>(0, gaps.size() - 1)(rng)];
    const double mu = below + (above - below) * uniform(rng, 0.25, 0.75);

    const Subspace lo = spectral_subspace(T, SpectralInterval::below(mu), cfg.tol);
    const Subspace hi = spectral_subspace(T, SpectralInterval::above(mu), cfg.tol);
    const SubspaceCheck a = check_I_subspace(T, lo, SpectralInterval::below(mu), cfg.norm_tol);
    const SubspaceCheck b = check_I_subspace(T, hi, SpectralInterval::above(mu), cfg.norm_tol);
    const bool maximal = lo.dim() == maximal_subspace_dim(T, mu, cfg.tol);
    tally.record(Subspaces, a.ok && b.ok && maximal, std::min(a.margin, b.margin),
                 "mu=" + num(mu) + " margins " + num(a.margin) + ", " + num(b.margin) +
                     (maximal ? "" : ", dimension below maximal"));

    // largest perturbation that keeps the graph inside [0,mu]
    const double room = (mu * mu - below * below) / std::max(norm * norm - mu * mu, 1e-300);
    const double s = std::min(0.1, 0.5 * std::sqrt(room));
    const Subspace Y = perturbed_maximal_subspace(T, mu, s, rng(), cfg.tol);
    const ProjectionIso p = verify_projection_iso(T, Y, mu, cfg.tol);
    const bool ok = p.injective && p.onto && p.condition <= 1.5;
    tally.record(Projection, ok, ok ? 1.5 - p.condition : -1.0,
                 "mu=" + num(mu) + " injective=" + std::to_string(p.injective) + " onto=" + std::to_string(p.onto) +
                     " condition=" + num(p.condition));
  }

  {
    double a = uniform(rng, 0.0, 1.2 * std::max(norm, 1.0)), b = uniform(rng, 0.0, 1.2 * std::max(norm, 1.0));
    if (a > b) std::swap(a, b);
    if (a == b) b = a + 1.0;
    const QuotientCheck q = quotient_dim_check(T, a, b, cfg.tol);
    tally.record(Quotient, q.ok, q.ok ? 0.0 : -1.0,
                 "]" + num(a) + ", " + num(b) + "]: dims " + std::to_string(q.dim_difference) + ", count " +
                     std::to_string(q.count) + ", weight " + q.measure_weight.to_string());
  }

  if (norm == 0.0) {
    tally.skip(Attain);
    return;
  }
  const Subspace top = norm_attainment_subspace(T, cfg.tol);
  const Eigen::Index t = top.dim(), n = T.cols();
  Eigen::VectorXd x = top.basis * gaussian(rng, t);
  x.normalize();
  const double ratio = (T.matrix() * x).norm() / norm;
  const Attainment in = attainment_test(T, x, cfg.norm_tol, cfg.tol);
  bool ok = in.attains && in.inside && ratio >= 1 - cfg.norm_tol;
  double margin = ratio - (1 - cfg.norm_tol);
  std::string detail = "inside vector reaches " + num(ratio) + " of the norm";

  if (t < n) {
    // x = cos * inside + sin * outside with outside component c >= 0.1
    const Eigen::MatrixXd rest = svd.vectors.rightCols(n - t);
    const Eigen::VectorXd out = (rest * gaussian(rng, n - t)).normalized();
    const double c = uniform(rng, 0.1, 1.0);
    const Eigen::VectorXd y = std::sqrt(1 - c * c) * x + c * out;
    const double next = v[static_cast<std::size_t>(t)];
    const double gap = norm * norm - next * next;
    const double needed = gap * c * c / (2 * norm);
    const double shortfall = norm - (T.matrix() * y).norm();
    const Attainment o = attainment_test(T, y, cfg.norm_tol, cfg.tol);
    const double m = (shortfall - needed) / norm;
    ok = ok && !o.attains && !o.inside && m >= -1e-14;
    margin = std::min(margin, m);
    detail += "; outside component " + num(c) + " falls short by " + num(shortfall) + ", needed " + num(needed);
  }
  tally.record(Attain, ok, margin, detail);
}

}  // namespace

std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  return std::mt19937_64(seq);
}

VerifyReport verify_operator(const DenseOperator& T, const VerifyConfig& cfg) {
  VerifyReport report;
  for (int c = 0; c < kChecks; ++c) report.checks.push_back({kNames[c]});
  const SpectrumResult svd = singular_spectrum(T);
  for (int i = 0; i < cfg.trials; ++i) {
    std::mt19937_64 rng = trial_rng(cfg.seed, static_cast<std::uint64_t>(i));
    Tally tally{report, i};
    try {
      run_trial(T, svd, cfg, rng, tally);
    } catch (const std::exception& e) {
      report.failures.push_back("trial " + std::to_string(i) + ": error: " + e.what());
    }
  }
  return report;
}

}  // namespace opequiv
