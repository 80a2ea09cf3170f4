#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "opequiv/cardinal.hpp"

namespace opequiv {

/// Geometric partition of ]0,inf[ into buckets ]b*beta^(k-1), b*beta^k] with
/// target point b*beta^k.
struct GridSpec {
  double beta = 2.0;
  double b = 1.0;

  double point(std::int64_t k) const;
  // Smallest k with x <= point(k); x > 0.
  std::int64_t bucket(double x) const;
  double snap(double x) const { return point(bucket(x)); }
  // Largest grid point <= h; h > 0.
  double floor_point(double h) const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

// Grids applied one after the other, oldest first.
using GridChain = std::vector<GridSpec>;

double snap_through(const GridChain& grids, double x);

struct Atom {
  double pos = 0.0;
  Cardinal weight;

  friend bool operator==(const Atom&, const Atom&) = default;
};

enum class TailKind { Geometric, Power };

/// Countable run of unit-multiplicity masses decreasing to `limit`.
///
/// Geometric terms are limit + a*rate^j, power terms limit + a*j^(-rate), for
/// j >= first_index. When `grids` is not empty every term sits at the point its
/// chain of snaps sends it to instead (only allowed for limit 0).
struct Tail {
  TailKind kind = TailKind::Geometric;
  double a = 1.0;
  double rate = 0.5;
  std::uint64_t mult = 1;
  double limit = 0.0;
  std::int64_t first_index = 0;
  GridChain grids;

  static Tail geometric(double a, double r, std::uint64_t mult = 1, double limit = 0.0);
  static Tail power(double a, double p, std::uint64_t mult = 1, double limit = 0.0);

  double raw_term(std::int64_t j) const;
  double term(std::int64_t j) const { return snap_through(grids, raw_term(j)); }
  double head() const { return term(first_index); }

  // Smallest j >= first_index with raw_term(j) <= x. Requires x > limit.
  std::int64_t first_at_or_below(double x) const;

  friend bool operator==(const Tail&, const Tail&) = default;
};

/// An aleph-weight atom at every c*rho^k, k >= 0 (snapped through `grids`).
struct InfiniteFamily {
  double c = 1.0;
  double rho = 0.5;
  Cardinal cardinal = kAleph0;
  GridChain grids;

  double raw_member(std::int64_t k) const;
  double member(std::int64_t k) const { return snap_through(grids, raw_member(k)); }
  // Smallest k >= 0 with raw_member(k) <= x; x > 0.
  std::int64_t first_at_or_below(double x) const;
  // Largest ratio between consecutive distinct members.
  double gap_ratio() const;

  friend bool operator==(const InfiniteFamily&, const InfiniteFamily&) = default;
};

/// Symbolic cardinal-valued measure on [0,inf[: kernel weight at 0, finitely
/// many atoms, decreasing tails and infinite-atom families.
///
/// Immutable once built. The constructor sorts atoms descending and throws
/// ContractError on any malformed component.
class SpectralMeasure {
 public:
  SpectralMeasure() = default;
  SpectralMeasure(Cardinal kernel, std::vector<Atom> atoms, std::vector<Tail> tails = {},
                  std::vector<InfiniteFamily> families = {});

  const Cardinal& kernel() const { return kernel_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<Tail>& tails() const { return tails_; }
  const std::vector<InfiniteFamily>& families() const { return families_; }

  // Weight of the atom exactly at pos (0 if none).
  Cardinal atom_weight(double pos) const;

  friend bool operator==(const SpectralMeasure&, const SpectralMeasure&) = default;

 private:
  Cardinal kernel_{};
  std::vector<Atom> atoms_;
  std::vector<Tail> tails_;
  std::vector<InfiniteFamily> families_;
};

// Weight of ]lo, hi] carried by one component, in closed form.
Cardinal tail_weight(const Tail& tail, double lo, double hi);
Cardinal family_weight(const InfiniteFamily& family, double lo, double hi);

/// D([0, mu]).
Cardinal weight_prefix(const SpectralMeasure& m, double mu);
/// D(]mu_lo, mu_hi]). Throws ContractError unless 0 <= mu_lo <= mu_hi.
Cardinal weight_interval(const SpectralMeasure& m, double mu_lo, double mu_hi);
/// Supremum of the support; 0 for kernel-only; DomainError for the zero measure.
double support_sup(const SpectralMeasure& m);
Cardinal total_dim(const SpectralMeasure& m);
Cardinal image_dim(const SpectralMeasure& m);

enum class InfReason { InfiniteAtom, FamilyMember, TailAccumulation };

struct InfPoint {
  double pos = 0.0;
  InfReason reason = InfReason::InfiniteAtom;
  Cardinal local_weight;
};

// Open interval ]lo, hi[; hi may be +inf.
struct FinComponent {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();

  friend bool operator==(const FinComponent&, const FinComponent&) = default;
};

/// FIN/INF split of ]0,inf[. Family members form infinitely many inf points;
/// they are listed down to `listing_floor` and the components below it are
/// omitted (floor 0 means the listing is complete).
struct FinInfReport {
  std::vector<InfPoint> inf_points;  // descending
  bool zero_in_inf = false;
  std::vector<FinComponent> components;  // descending
  double listing_floor = 0.0;
};

inline constexpr int kFamilyListingDepth = 64;

FinInfReport fin_inf_decomposition(const SpectralMeasure& m);

struct SigmaPoint {
  double pos = 0.0;
  std::uint64_t mult = 0;

  friend bool operator==(const SigmaPoint&, const SigmaPoint&) = default;
};

// Terms tail[tail_index] from index from_index on, all inside the component.
struct TailRemainder {
  std::size_t tail_index = 0;
  std::int64_t from_index = 0;
};

struct SigmaListing {
  std::vector<SigmaPoint> points;  // descending, merged
  std::vector<TailRemainder> remainders;
};

/// Discrete support of a FIN component. ContractError if `component` is not
/// one of the components reported by fin_inf_decomposition.
SigmaListing component_sigma(const SpectralMeasure& m, const FinComponent& component);

}  // namespace opequiv
