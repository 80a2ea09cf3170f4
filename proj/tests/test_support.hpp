#pragma once

// Random representable measures and brute-force weight oracles shared by the
// unit and acceptance suites. The oracles enumerate terms one by one and never
// call the closed-form index solvers they are checked against.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "opequiv/errors.hpp"
#include "opequiv/measure.hpp"

namespace opequiv::testing {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

struct MeasureShape {
  bool allow_families = true;
  bool allow_infinite_atoms = true;
  bool allow_positive_limits = true;
  int max_atoms = 4;
  int max_tails = 2;
};

inline SpectralMeasure random_measure(std::mt19937_64& rng, const MeasureShape& shape = {}) {
  for (;;) {
    const Cardinal kernel = uniform_int(rng, 0, 5) == 0 ? kAleph0 : Cardinal::fin(uniform_int(rng, 0, 3));
    std::vector<Atom> atoms;
    const int n_atoms = uniform_int(rng, 0, shape.max_atoms);
    for (int i = 0; i < n_atoms; ++i) {
      const double pos = std::exp2(uniform(rng, -6.0, 3.0));
      const bool inf = shape.allow_infinite_atoms && uniform_int(rng, 0, 6) == 0;
      atoms.push_back({pos, inf ? Cardinal::aleph(uniform_int(rng, 0, 2)) : Cardinal::fin(uniform_int(rng, 1, 5))});
    }
    std::vector<Tail> tails;
    const int n_tails = uniform_int(rng, 0, shape.max_tails);
    for (int i = 0; i < n_tails; ++i) {
      const double limit = shape.allow_positive_limits && uniform_int(rng, 0, 3) == 0 ? uniform(rng, 0.05, 0.5) : 0.0;
      const auto mult = static_cast<std::uint64_t>(uniform_int(rng, 1, 3));
      if (uniform_int(rng, 0, 1) == 0)
        tails.push_back(Tail::geometric(uniform(rng, 0.1, 4.0), uniform(rng, 0.2, 0.8), mult, limit));
      else
        tails.push_back(Tail::power(uniform(rng, 0.1, 4.0), uniform(rng, 1.0, 3.0), mult, limit));
    }
    std::vector<InfiniteFamily> families;
    if (shape.allow_families && uniform_int(rng, 0, 4) == 0)
      families.push_back({uniform(rng, 0.1, 2.0), uniform(rng, 0.2, 0.7), Cardinal::aleph(uniform_int(rng, 0, 2)), {}});
    try {
      return SpectralMeasure(kernel, std::move(atoms), std::move(tails), std::move(families));
    } catch (const ContractError&) {
      // duplicate position or tail collision; draw again
    }
  }
}

// Oracle: terms of an ungridded tail inside ]lo, hi], counted one at a time.
inline Cardinal enumerate_tail_weight(const Tail& t, double lo, double hi) {
  if (hi <= lo || hi <= t.limit) return kZero;
  if (lo <= t.limit) return kAleph0;
  std::uint64_t count = 0;
  for (std::int64_t j = t.first_index;; ++j) {
    const double x = t.kind == TailKind::Geometric ? t.limit + t.a * std::pow(t.rate, static_cast<double>(j))
                                                   : t.limit + t.a * std::pow(static_cast<double>(j), -t.rate);
    if (x <= lo) break;
    if (x <= hi) ++count;
  }
  return Cardinal::fin(count * t.mult);
}

inline Cardinal enumerate_family_weight(const InfiniteFamily& f, double lo, double hi) {
  if (hi <= lo) return kZero;
  if (lo == 0.0) return f.cardinal;
  for (std::int64_t k = 0;; ++k) {
    const double x = f.c * std::pow(f.rho, static_cast<double>(k));
    if (x <= lo) return kZero;
    if (x <= hi) return f.cardinal;
  }
}

// Oracle for ungridded measures.
inline Cardinal enumerate_weight(const SpectralMeasure& m, double lo, double hi) {
  Cardinal sum = kZero;
  for (const Atom& a : m.atoms())
    if (a.pos > lo && a.pos <= hi) sum = card_add(sum, a.weight);
  for (const Tail& t : m.tails()) sum = card_add(sum, enumerate_tail_weight(t, lo, hi));
  for (const InfiniteFamily& f : m.families()) sum = card_add(sum, enumerate_family_weight(f, lo, hi));
  return sum;
}

// Random interval endpoint on a log scale, occasionally an exact atom position.
inline double random_point(std::mt19937_64& rng, const SpectralMeasure& m) {
  if (!m.atoms().empty() && uniform_int(rng, 0, 3) == 0)
    return m.atoms()[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(m.atoms().size()) - 1))].pos;
  return std::exp2(uniform(rng, -9.0, 4.0));
}

// Interval consistency at ratio K in both directions, on random probes.
inline bool interval_consistent(const SpectralMeasure& a, const SpectralMeasure& b, double K, std::mt19937_64& rng,
                                int probes) {
  K *= 1 + 1e-12;  // K is itself a rounded ratio
  for (int i = 0; i < probes; ++i) {
    double lo = random_point(rng, a), hi = random_point(rng, b);
    if (lo > hi) std::swap(lo, hi);
    if (weight_interval(b, lo / K, K * hi) < weight_interval(a, lo, hi)) return false;
    if (weight_interval(a, lo / K, K * hi) < weight_interval(b, lo, hi)) return false;
    if (weight_prefix(b, K * hi) < weight_prefix(a, hi)) return false;
    if (weight_prefix(a, K * hi) < weight_prefix(b, hi)) return false;
  }
  return true;
}

}  // namespace opequiv::testing
