#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "opequiv/measure.hpp"

namespace opequiv {

/// Real m x n matrix acting from R^n to R^m.
class DenseOperator {
 public:
  explicit DenseOperator(Eigen::MatrixXd m);
  // Throws ContractError unless data has rows*cols finite entries.
  static DenseOperator from_row_major(int rows, int cols, const std::vector<double>& data);

  int rows() const { return static_cast<int>(m_.rows()); }
  int cols() const { return static_cast<int>(m_.cols()); }
  const Eigen::MatrixXd& matrix() const { return m_; }

 private:
  Eigen::MatrixXd m_;
};

struct Tolerances {
  double cluster = 1e-8;  // relative gap that joins two singular values
  double rank = 1e-10;  // relative to the largest singular value
};

/// Spectrum of A = sqrt(T*T): one value per domain dimension (so n values,
/// with at least n - m zeros when n > m), descending, and the matching
/// orthonormal right vectors as columns of `vectors`.
struct SpectrumResult {
  std::vector<double> values;
  Eigen::MatrixXd vectors;
  int sweeps = 0;
  double residual = 0.0;  // largest relative column inner product left
};

// One-sided Jacobi; NumericalError when max_sweeps is not enough.
SpectrumResult singular_spectrum(const DenseOperator& T, int max_sweeps = 60, double tol = 1e-14);

// Values at or below the rank threshold set to exactly 0.
std::vector<double> snapped_values(const SpectrumResult& s, const Tolerances& tol = {});

SpectralMeasure measure_from_dense(const DenseOperator& T, const Tolerances& tol = {});

/// Orthonormal columns spanning a subspace of R^ambient.
struct Subspace {
  int ambient = 0;
  Eigen::MatrixXd basis;  // ambient x dim
  int dim() const { return static_cast<int>(basis.cols()); }
};

struct SpectralInterval {
  enum Kind { Below, Above, Top };  // [0, mu], ]mu, inf[, {||T||}
  Kind kind = Below;
  double mu = 0.0;

  static SpectralInterval below(double mu) { return {Below, mu}; }
  static SpectralInterval above(double mu) { return {Above, mu}; }
  static SpectralInterval top() { return {Top, 0.0}; }
};

Subspace spectral_subspace(const DenseOperator& T, SpectralInterval I, const Tolerances& tol = {});

struct SubspaceCheck {
  bool ok = true;
  // Distance to failing, in singular-value units; +inf for an empty subspace.
  double margin = std::numeric_limits<double>::infinity();
};

// ||Tx|| / ||x|| on Y against I, with relative slack `slack`.
SubspaceCheck check_I_subspace(const DenseOperator& T, const Subspace& Y, SpectralInterval I, double slack = 1e-9);

int maximal_subspace_dim(const DenseOperator& T, double mu, const Tolerances& tol = {});

/// Graph {x + Bx} over E([0,mu])H of a random B into E(]mu,inf[)H with norm s,
/// halving s up to 8 times until the graph is a [0,mu]-subspace.
Subspace perturbed_maximal_subspace(const DenseOperator& T, double mu, double s, std::uint64_t seed,
                                    const Tolerances& tol = {});

struct ProjectionIso {
  bool injective = true;
  bool onto = true;
  double condition = 1.0;
};

// Orthogonal projection of Y onto E([0,mu])H. ContractError unless Y is a
// [0,mu]-subspace.
ProjectionIso verify_projection_iso(const DenseOperator& T, const Subspace& Y, double mu, const Tolerances& tol = {});

struct QuotientCheck {
  bool ok = true;
  int dim_difference = 0;  // maximal dims at mu_hi minus at mu_lo
  int count = 0;  // singular values in ]mu_lo, mu_hi]
  Cardinal measure_weight;  // of the extracted measure
};

QuotientCheck quotient_dim_check(const DenseOperator& T, double mu_lo, double mu_hi, const Tolerances& tol = {});

// E({||T||})H; DomainError for the zero operator.
Subspace norm_attainment_subspace(const DenseOperator& T, const Tolerances& tol = {});

struct Attainment {
  bool attains = false;  // ||Tx|| >= ||T|| ||x|| (1 - tol)
  double outside = 0.0;  // norm of the part of x/||x|| outside E({||T||})H
  bool inside = false;  // outside <= tol
};

Attainment attainment_test(const DenseOperator& T, const Eigen::VectorXd& x, double tol = 1e-9,
                           const Tolerances& tols = {});

// If T is injective then n <= m. Always true; a sanity invariant.
bool injective_dim_check(const DenseOperator& T, const Tolerances& tol = {});

}  // namespace opequiv
