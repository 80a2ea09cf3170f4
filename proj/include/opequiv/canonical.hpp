#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "opequiv/cardinal.hpp"
#include "opequiv/measure.hpp"
#include "opequiv/shift.hpp"

namespace opequiv {

struct FiniteRun {
  std::int64_t k = 0;
  std::uint64_t mult = 1;
  friend bool operator==(const FiniteRun&, const FiniteRun&) = default;
};

struct Intermission {
  std::int64_t k = 0;
  Cardinal cardinal = kAleph0;
  friend bool operator==(const Intermission&, const Intermission&) = default;
};

using EviItem = std::variant<FiniteRun, Intermission>;

struct GeometricClass {
  double rate = 0.5;  // effective per-index rate
  friend bool operator==(const GeometricClass&, const GeometricClass&) = default;
};

struct PowerClass {
  double exponent = 1.0;
  friend bool operator==(const PowerClass&, const PowerClass&) = default;
};

using TailClass = std::variant<std::monostate, GeometricClass, PowerClass>;

// Class rates are recomputed from different representations of the same
// sequence, so equality allows a few ulps.
bool same_tail_class(const TailClass& a, const TailClass& b);
std::string describe(const TailClass& c);

/// Grid-snapped, non-increasing listing of the explicit masses with aleph
/// markers between them. Tails and families stay symbolic.
struct EviSequence {
  double beta = 2.0;
  double b = 1.0;
  Cardinal kernel;
  std::vector<EviItem> items;  // strictly descending in k
  TailClass tail_class;
  std::optional<Cardinal> family_cardinal;
  Cardinal total;
};

struct CanonicalForm {
  Cardinal total;
  Cardinal kernel;
  Cardinal image;
  TailClass tail;
  std::optional<Cardinal> family;
  std::optional<Cardinal> heavy;  // only when above family
};

bool same_form(const CanonicalForm& a, const CanonicalForm& b);

enum class StepKind { Snap, Truncate, Absorb };

/// One replayable shift: the operation, its parameters and the witness it
/// produced when first applied.
struct ShiftStep {
  int side = 1;  // which input measure the step belongs to
  StepKind kind = StepKind::Snap;
  GridSpec grid;
  std::size_t tail_index = 0;
  double R = 1.0;
  ShiftWitness witness;
};

ShiftResult apply_step(const SpectralMeasure& m, const ShiftStep& step);

struct Canonicalization {
  EviSequence evi;
  CanonicalForm form;
  ShiftWitness witness;  // composed over all steps
  std::vector<ShiftStep> steps;
  SpectralMeasure measure;  // end of the pipeline
};

/// Snaps to the grid b*beta^k, truncates what is left of tails
/// with a positive limit, absorbs all finite mass that has an infinite point
/// to go to, then reads off the invariants.
Canonicalization canonicalize(const SpectralMeasure& m, double beta = 2.0, double b = 1.0);

enum class FormField { Total, Kernel, Image, Family, Heavy, Tail };
const char* field_name(FormField f);

/// A concrete failure of the interval condition at one K: `small` is the
/// weight of ]lo, hi] (or [0, hi] when prefix) under measure `side`, and
/// `inflated` the weight of ]lo/K, K*hi] under the other measure.
struct Violation {
  double K = 1.0;
  int side = 1;
  bool prefix = false;
  double lo = 0.0;
  double hi = 0.0;
  Cardinal small;
  Cardinal inflated;
};

enum class FamilyShape {
  Window,  // ]X e^-t, X] with X below every positive feature, t growing
  Members,  // a small neighbourhood of ever deeper family members
  Heavy,  // a small neighbourhood of the heavy content
};

/// Symbolic interval family ]mu'_n, mu_n] on which `side` keeps more mass
/// than any K-inflation of the other measure can hold.
struct IntervalFamily {
  FamilyShape shape = FamilyShape::Window;
  int side = 1;
  std::string formula;
};

struct Certificate {
  FormField field = FormField::Total;
  std::string left;  // field value for M1
  std::string right;  // and for M2
  std::optional<IntervalFamily> intervals;
};

/// Searches the interval family of `cert` for a member that violates the
/// interval condition at K, checked with weight_interval.
std::optional<Violation> instantiate(const Certificate& cert, const SpectralMeasure& m1, const SpectralMeasure& m2,
                                     double K);

struct Verdict {
  bool equivalent = false;
  double witness_K = 1.0;
  std::vector<ShiftStep> steps;  // side 1 chain then side 2 chain
  std::optional<Certificate> certificate;
  CanonicalForm form1;
  CanonicalForm form2;
};

Verdict decide_equivalent(const SpectralMeasure& m1, const SpectralMeasure& m2, double beta = 2.0,
                          double b = 1.0);

/// Replays a side's steps from its input measure; throws ContractError when
/// a step does not reproduce its recorded witness bound.
SpectralMeasure replay(const SpectralMeasure& m, const std::vector<ShiftStep>& steps, int side);

struct ProbeResult {
  double lo = 0.0;
  double hi = 0.0;
  bool pass = true;
  // weight of ]lo,hi] under one measure against ]lo/K, K*hi] under the other
  Cardinal w1, w2_inflated, w2, w1_inflated;
  // same for [0,hi] against [0, K*hi]
  Cardinal p1, p2_inflated, p2, p1_inflated;
};

struct NecessaryReport {
  double K = 1.0;
  bool pass = true;
  std::vector<ProbeResult> probes;
};

NecessaryReport check_necessary_condition(const SpectralMeasure& m1, const SpectralMeasure& m2, double K,
                                          const std::vector<std::pair<double, double>>& probes);

/// Least K for which the atoms of two purely finite atomic measures can be
/// matched unit by unit; none when the totals differ.
std::optional<double> finite_shift_witness(const SpectralMeasure& m1, const SpectralMeasure& m2);

/// Bound on sup_n |log sigma_n - log tau_n| (as a ratio) for two measures
/// made only of finite atoms and tails to 0, of the same tail class.
double compact_match_ratio(const SpectralMeasure& a, const SpectralMeasure& b);

}  // namespace opequiv
