#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "opequiv/cardinal.hpp"
#include "opequiv/measure.hpp"

namespace opequiv {

struct Move {
  double from = 0.0;
  double to = 0.0;
  Cardinal amount;
};

inline double move_ratio(const Move& m) { return m.to > m.from ? m.to / m.from : m.from / m.to; }

/// Evidence that a measure was transformed by a uniformly log-bounded shift:
/// no unit of mass moved by a position ratio outside [1/K, K].
///
/// Finitely many explicit moves are listed; moves of infinitely many terms
/// are described by `rules`, each with its own supremum ratio folded into K.
struct ShiftWitness {
  double K = 1.0;
  std::vector<Move> moves;
  std::vector<std::string> rules;

  void record(const Move& m);
  void record_rule(std::string rule, double sup_ratio);
};

// Witness of applying `first` and then `second`.
ShiftWitness compose(const ShiftWitness& first, const ShiftWitness& second);

// Every listed move stays within [1/K, K].
bool witness_consistent(const ShiftWitness& w);

struct InfiniteTarget {
  double pos = 0.0;
  double ratio = 1.0;  // max(x/pos, pos/x)
};

double ratio_of(double x, double y);

// Closest point of weight >= at_least that carries an aleph (atom or family member).
std::optional<InfiniteTarget> nearest_infinite(const SpectralMeasure& m, double x, Cardinal at_least = kAleph0);

// Below its head, every point is within this ratio of some family member.
double cover_ratio(const InfiniteFamily& f);

struct ShiftResult {
  SpectralMeasure measure;
  ShiftWitness witness;
};

/// Moves every positive mass to the grid point of its bucket. Atoms merge,
/// tails with a positive limit become finitely many head atoms plus an
/// aleph_0 atom, tails to 0 and families are re-expressed on the grid.
/// Kernel mass never moves. Components already on `grid` stay put; others
/// extend their chain of grids.
ShiftResult snap_to_grid(const SpectralMeasure& m, const GridSpec& grid);

/// Applies explicit moves between atoms in order.
ShiftResult transfer_masses(const SpectralMeasure& m, const std::vector<Move>& moves);

/// Erases finite mass within ratio R of an infinite-weight point (an aleph
/// atom or a family member). Tails whose limit is such a point disappear
/// whole; other tails lose the head terms that are close enough.
ShiftResult absorb_near_infinite(const SpectralMeasure& m, double R);

/// Replaces the tail by an aleph_0 atom at its positive limit, keeping the
/// first `keep_head` terms as explicit atoms.
ShiftResult truncate_tail_into_limit(const SpectralMeasure& m, std::size_t tail_index, std::size_t keep_head = 0);

}  // namespace opequiv
