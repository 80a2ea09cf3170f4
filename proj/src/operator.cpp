#include "opequiv/operator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "opequiv/errors.hpp"

namespace opequiv {
namespace {

double rank_threshold(const std::vector<double>& v, const Tolerances& tol) {
  const double top = v.empty() ? 0.0 : v.front();
  return top > 0.0 ? tol.rank * top : tol.rank;
}

// Number of leading values in the cluster of the largest one.
std::size_t top_cluster_size(const std::vector<double>& v, const Tolerances& tol) {
  std::size_t n = v.empty() ? 0 : 1;
  while (n < v.size() && v[n] > 0.0 && (v[n - 1] - v[n]) <= tol.cluster * v[n - 1]) ++n;
  return n;
}

bool in_interval(double sigma, double norm, SpectralInterval I) {
  switch (I.kind) {
    case SpectralInterval::Below: return sigma <= I.mu;
    case SpectralInterval::Above: return sigma > I.mu;
    case SpectralInterval::Top: return sigma == norm;
  }
  return false;
}

Subspace columns(const SpectrumResult& s, const std::vector<std::size_t>& idx) {
  Subspace Y;
  Y.ambient = static_cast<int>(s.vectors.rows());
  Y.basis.resize(s.vectors.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i)
    Y.basis.col(static_cast<Eigen::Index>(i)) = s.vectors.col(static_cast<Eigen::Index>(idx[i]));
  return Y;
}

// Singular values of T restricted to Y.
std::vector<double> restricted_values(const DenseOperator& T, const Subspace& Y) {
  return singular_spectrum(DenseOperator(T.matrix() * Y.basis)).values;
}

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& M) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
  return qr.householderQ() * Eigen::MatrixXd::Identity(M.rows(), M.cols());
}

}  // namespace

DenseOperator::DenseOperator(Eigen::MatrixXd m) : m_(std::move(m)) {
  if (m_.rows() < 1 || m_.cols() < 1) throw ContractError("operator needs at least one row and one column");
  if (!m_.allFinite()) throw ContractError("operator entries must be finite");
}

DenseOperator DenseOperator::from_row_major(int rows, int cols, const std::vector<double>& data) {
  if (rows < 1 || cols < 1) throw ContractError("operator needs at least one row and one column");
  if (data.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
    throw ContractError("matrix data has " + std::to_string(data.size()) + " entries, expected " +
                        std::to_string(rows * cols));
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = data[static_cast<std::size_t>(i) * cols + j];
  return DenseOperator(std::move(m));
}

SpectrumResult singular_spectrum(const DenseOperator& T, int max_sweeps, double tol) {
  if (!(tol > 0.0)) throw ContractError("singular_spectrum: tol must be positive");
  Eigen::MatrixXd U = T.matrix();
  const Eigen::Index n = U.cols();
  Eigen::MatrixXd V = Eigen::MatrixXd::Identity(n, n);

  SpectrumResult out;
  bool converged = false;
  while (!converged) {
    if (out.sweeps == max_sweeps)
      throw NumericalError("singular_spectrum: no convergence after " + std::to_string(max_sweeps) + " sweeps",
                           out.residual);
    ++out.sweeps;
    converged = true;
    out.residual = 0.0;
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double alpha = U.col(p).squaredNorm(), beta = U.col(q).squaredNorm();
        if (alpha == 0.0 || beta == 0.0) continue;
        const double gamma = U.col(p).dot(U.col(q));
        const double rel = std::abs(gamma) / std::sqrt(alpha * beta);
        out.residual = std::max(out.residual, rel);
        if (rel <= tol) continue;
        converged = false;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, t), s = c * t;
        const Eigen::VectorXd up = U.col(p), vp = V.col(p);
        U.col(p) = c * up - s * U.col(q);
        U.col(q) = s * up + c * U.col(q);
        V.col(p) = c * vp - s * V.col(q);
        V.col(q) = s * vp + c * V.col(q);
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Eigen::VectorXd norms = U.colwise().norm();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return norms(a) > norms(b); });
  out.vectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values.push_back(norms(order[static_cast<std::size_t>(i)]));
    out.vectors.col(i) = V.col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

std::vector<double> snapped_values(const SpectrumResult& s, const Tolerances& tol) {
  std::vector<double> v = s.values;
  const double thr = rank_threshold(v, tol);
  for (double& x : v)
    if (x <= thr) x = 0.0;
  return v;
}

SpectralMeasure measure_from_dense(const DenseOperator& T, const Tolerances& tol) {
  if (!(tol.cluster > 0.0 && tol.rank > 0.0)) throw ContractError("measure_from_dense: tolerances must be positive");
  const std::vector<double> v = snapped_values(singular_spectrum(T), tol);
  std::uint64_t kernel = 0;
  std::vector<Atom> atoms;
  double sum = 0.0;
  std::uint64_t size = 0;
  auto flush = [&] {
    if (size > 0) atoms.push_back({sum / static_cast<double>(size), Cardinal::fin(size)});
    sum = 0.0;
    size = 0;
  };
  double prev = 0.0;
  for (double x : v) {
    if (x == 0.0) {
      ++kernel;
      continue;
    }
    if (size > 0 && (prev - x) > tol.cluster * prev) flush();
    sum += x;
    ++size;
    prev = x;
  }
  flush();
  return SpectralMeasure(Cardinal::fin(kernel), std::move(atoms));
}

Subspace spectral_subspace(const DenseOperator& T, SpectralInterval I, const Tolerances& tol) {
  const SpectrumResult s = singular_spectrum(T);
  const std::vector<double> v = snapped_values(s, tol);
  std::vector<std::size_t> idx;
  if (I.kind == SpectralInterval::Top) {
    // Values that cluster with the top one count as equal to the norm.
    if (v.front() > 0.0)
      for (std::size_t i = 0; i < top_cluster_size(v, tol); ++i) idx.push_back(i);
  } else {
    for (std::size_t i = 0; i < v.size(); ++i)
      if (in_interval(v[i], v.front(), I)) idx.push_back(i);
  }
  return columns(s, idx);
}

SubspaceCheck check_I_subspace(const DenseOperator& T, const Subspace& Y, SpectralInterval I, double slack) {
  SubspaceCheck out;
  if (Y.dim() == 0) return out;
  const std::vector<double> r = restricted_values(T, Y);
  const double hi = r.front(), lo = r.back();
  switch (I.kind) {
    case SpectralInterval::Below: out.margin = I.mu * (1 + slack) - hi; break;
    case SpectralInterval::Above: out.margin = lo - I.mu * (1 - slack); break;
    case SpectralInterval::Top: {
      const double norm = singular_spectrum(T).values.front();
      out.margin = slack * norm - std::max(norm - lo, hi - norm);
      break;
    }
  }
  out.ok = out.margin >= 0.0;
  return out;
}

int maximal_subspace_dim(const DenseOperator& T, double mu, const Tolerances& tol) {
  if (!(mu >= 0.0)) throw ContractError("maximal_subspace_dim: mu must be nonnegative");
  const std::vector<double> v = snapped_values(singular_spectrum(T), tol);
  return static_cast<int>(std::count_if(v.begin(), v.end(), [&](double x) { return x <= mu; }));
}

Subspace perturbed_maximal_subspace(const DenseOperator& T, double mu, double s, std::uint64_t seed,
                                    const Tolerances& tol) {
  if (!(s >= 0.0)) throw ContractError("perturbed_maximal_subspace: scale must be nonnegative");
  const Subspace low = spectral_subspace(T, SpectralInterval::below(mu), tol);
  const Subspace high = spectral_subspace(T, SpectralInterval::above(mu), tol);
  if (low.dim() == 0 || high.dim() == 0 || s == 0.0) return low;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd B(high.dim(), low.dim());
  for (Eigen::Index i = 0; i < B.size(); ++i) B.data()[i] = normal(rng);
  const double bnorm = singular_spectrum(DenseOperator(B)).values.front();
  if (bnorm == 0.0) return low;
  B /= bnorm;

  for (int attempt = 0; attempt <= 8; ++attempt, s /= 2) {
    Subspace Y;
    Y.ambient = low.ambient;
    Y.basis = orthonormalize(low.basis + high.basis * (s * B));
    if (check_I_subspace(T, Y, SpectralInterval::below(mu), 0.0).ok) return Y;
  }
  throw ConstructionError("perturbed_maximal_subspace: graph is not a [0,mu]-subspace even after 8 halvings");
}

ProjectionIso verify_projection_iso(const DenseOperator& T, const Subspace& Y, double mu, const Tolerances& tol) {
  if (!check_I_subspace(T, Y, SpectralInterval::below(mu)).ok)
    throw ContractError("verify_projection_iso: Y is not a [0,mu]-subspace");
  ProjectionIso out;
  const Subspace E = spectral_subspace(T, SpectralInterval::below(mu), tol);
  if (Y.dim() == 0) {
    out.onto = E.dim() == 0;
    return out;
  }
  if (E.dim() == 0) {
    out.injective = out.onto = false;
    out.condition = std::numeric_limits<double>::infinity();
    return out;
  }
  const std::vector<double> p = singular_spectrum(DenseOperator(E.basis.transpose() * Y.basis)).values;
  const double smin = p[static_cast<std::size_t>(std::min(Y.dim(), E.dim())) - 1];
  out.injective = Y.dim() <= E.dim() && smin > 1e-8;
  out.onto = out.injective && Y.dim() == maximal_subspace_dim(T, mu, tol);
  out.condition = out.injective ? p.front() / smin : std::numeric_limits<double>::infinity();
  return out;
}

QuotientCheck quotient_dim_check(const DenseOperator& T, double mu_lo, double mu_hi, const Tolerances& tol) {
  if (!(mu_lo >= 0.0 && mu_lo < mu_hi)) throw ContractError("quotient_dim_check: needs 0 <= mu_lo < mu_hi");
  QuotientCheck out;
  out.dim_difference = maximal_subspace_dim(T, mu_hi, tol) - maximal_subspace_dim(T, mu_lo, tol);
  const std::vector<double> v = snapped_values(singular_spectrum(T), tol);
  out.count = static_cast<int>(std::count_if(v.begin(), v.end(), [&](double x) { return x > mu_lo && x <= mu_hi; }));
  out.measure_weight = weight_interval(measure_from_dense(T, tol), mu_lo, mu_hi);
  out.ok = out.dim_difference == out.count && out.measure_weight == Cardinal::fin(static_cast<std::uint64_t>(out.count));
  return out;
}

Subspace norm_attainment_subspace(const DenseOperator& T, const Tolerances& tol) {
  if (T.matrix().isZero(0.0)) throw DomainError("norm_attainment_subspace: every vector attains the zero norm");
  return spectral_subspace(T, SpectralInterval::top(), tol);
}

Attainment attainment_test(const DenseOperator& T, const Eigen::VectorXd& x, double tol, const Tolerances& tols) {
  if (x.size() != T.cols()) throw ContractError("attainment_test: vector has the wrong length");
  const double xn = x.norm();
  if (xn == 0.0) throw ContractError("attainment_test: zero vector");
  const Subspace top = norm_attainment_subspace(T, tols);
  const double norm = singular_spectrum(T).values.front();
  Attainment out;
  out.attains = (T.matrix() * x).norm() >= norm * xn * (1 - tol);
  const Eigen::VectorXd u = x / xn;
  out.outside = (u - top.basis * (top.basis.transpose() * u)).norm();
  out.inside = out.outside <= tol;
  return out;
}

bool injective_dim_check(const DenseOperator& T, const Tolerances& tol) {
  const std::vector<double> v = snapped_values(singular_spectrum(T), tol);
  const bool injective = std::none_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
  return !injective || T.cols() <= T.rows();
}

}  // namespace opequiv
