#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "opequiv/operator.hpp"

namespace opequiv {

struct VerifyConfig {
  std::uint64_t seed = 42;
  int trials = 100;
  Tolerances tol;
  double norm_tol = 1e-9;  // relative, on norms
};

// Tally for one kind of check; margins are >= 0 when the check passed.
struct CheckStats {
  std::string name;
  int passed = 0;
  int failed = 0;
  int skipped = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
};

struct VerifyReport {
  std::vector<CheckStats> checks;
  std::vector<std::string> failures;  // "trial N: check: detail", in trial order
  bool all_pass() const { return failures.empty(); }
};

// Generator for trial `trial` of a run seeded with `seed`; independent of
// how many trials run or in which order.
std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial);

/// Randomized checks on one operator: spectral subspaces are I-subspaces,
/// perturbed maximal subspaces project isomorphically, quotient dimensions
/// agree with interval weights, norm attainment matches membership in the
/// top subspace (with the shortfall bound for vectors outside it).
VerifyReport verify_operator(const DenseOperator& T, const VerifyConfig& cfg);

}  // namespace opequiv
