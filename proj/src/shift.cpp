#include "opequiv/shift.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>

#include "opequiv/errors.hpp"

namespace opequiv {
namespace {

constexpr std::int64_t kMaxExplicitTerms = 1'000'000;

class AtomMap {
 public:
  explicit AtomMap(const std::vector<Atom>& atoms) {
    for (const Atom& a : atoms) add(a.pos, a.weight);
  }
  void add(double pos, Cardinal w) {
    auto [it, inserted] = map_.try_emplace(pos, w);
    if (!inserted) it->second = card_add(it->second, w);
  }
  void remove(double pos, Cardinal amount) {
    auto it = map_.find(pos);
    if (it == map_.end() || it->second < amount) throw ContractError("transfer_masses: moving more mass than present");
    if (it->second == amount) {
      map_.erase(it);
    } else if (it->second.is_finite()) {
      it->second = Cardinal::fin(it->second.value() - amount.value());
    }
    // An aleph minus a strictly smaller cardinal keeps its value.
  }
  std::vector<Atom> atoms() const {
    std::vector<Atom> out;
    for (const auto& [pos, w] : map_)
      if (!w.is_zero()) out.push_back({pos, w});
    return out;
  }

 private:
  std::map<double, Cardinal, std::greater<>> map_;
};

std::string describe_grid(const GridSpec& g) {
  std::ostringstream os;
  os << "grid(beta=" << g.beta << ", b=" << g.b << ")";
  return os.str();
}

// Family whose bounded gaps can absorb everything below its head at ratio R.
std::optional<InfiniteFamily> covering_family(const SpectralMeasure& m, double R) {
  std::optional<InfiniteFamily> best;
  for (const InfiniteFamily& f : m.families())
    if (cover_ratio(f) <= R && (!best || f.member(0) > best->member(0))) best = f;
  return best;
}

// Adds g to the chain unless the component already sits on g.
bool extend_chain(GridChain& grids, const GridSpec& g) {
  if (!grids.empty() && grids.back() == g) return false;
  grids.push_back(g);
  return true;
}

}  // namespace

double ratio_of(double x, double y) { return x > y ? x / y : y / x; }

std::optional<InfiniteTarget> nearest_infinite(const SpectralMeasure& m, double x, Cardinal at_least) {
  std::optional<InfiniteTarget> best;
  auto consider = [&](double pos) {
    const double r = ratio_of(x, pos);
    if (!best || r < best->ratio) best = InfiniteTarget{pos, r};
  };
  for (const Atom& a : m.atoms())
    if (a.weight.is_aleph() && a.weight >= at_least) consider(a.pos);
  for (const InfiniteFamily& f : m.families()) {
    if (f.cardinal < at_least) continue;
    if (x >= f.member(0)) {
      consider(f.member(0));
      continue;
    }
    // Snapping lifts members by less than one grid step, so look a little wider.
    const std::int64_t k = f.first_at_or_below(x);
    for (std::int64_t i = std::max<std::int64_t>(0, k - 3); i <= k + 2; ++i) consider(f.member(i));
  }
  return best;
}

double cover_ratio(const InfiniteFamily& f) { return std::sqrt(f.gap_ratio()); }

void ShiftWitness::record(const Move& m) {
  K = std::max(K, move_ratio(m));
  moves.push_back(m);
}

void ShiftWitness::record_rule(std::string rule, double sup_ratio) {
  K = std::max(K, sup_ratio);
  rules.push_back(std::move(rule));
}

ShiftWitness compose(const ShiftWitness& first, const ShiftWitness& second) {
  ShiftWitness out;
  out.K = first.K * second.K;
  out.moves = first.moves;
  out.moves.insert(out.moves.end(), second.moves.begin(), second.moves.end());
  out.rules = first.rules;
  out.rules.insert(out.rules.end(), second.rules.begin(), second.rules.end());
  return out;
}

bool witness_consistent(const ShiftWitness& w) {
  if (!(w.K >= 1.0)) return false;
  return std::all_of(w.moves.begin(), w.moves.end(), [&](const Move& m) {
    return m.from > 0.0 && m.to > 0.0 && m.to / m.from <= w.K && m.from / m.to <= w.K;
  });
}

ShiftResult snap_to_grid(const SpectralMeasure& m, const GridSpec& grid) {
  if (!(grid.beta > 1.0 && grid.b > 0.0)) throw ContractError("snap_to_grid: need beta > 1 and b > 0");
  ShiftWitness w;
  AtomMap atoms({});
  for (const Atom& a : m.atoms()) {
    const double target = grid.snap(a.pos);
    if (target != a.pos) w.record({a.pos, target, a.weight});
    atoms.add(target, a.weight);
  }

  std::vector<Tail> tails;
  for (const Tail& t : m.tails()) {
    if (t.limit == 0.0) {
      Tail snapped = t;
      if (extend_chain(snapped.grids, grid)) w.record_rule("tail to 0 -> " + describe_grid(grid), grid.beta);
      tails.push_back(snapped);
      continue;
    }
    // Terms just above the limit all land in one bucket.
    std::int64_t k_final = grid.bucket(t.limit);
    if (!(grid.point(k_final) > t.limit)) ++k_final;
    const double sink = grid.point(k_final);
    std::int64_t j = t.first_index;
    const std::int64_t stop = t.first_at_or_below(sink);
    if (stop - j > kMaxExplicitTerms) throw CapacityError("snap_to_grid: too many tail head terms");
    for (; j < stop; ++j) {
      const double x = t.raw_term(j);
      const Cardinal amount = Cardinal::fin(t.mult);
      w.record({x, grid.snap(x), amount});
      atoms.add(grid.snap(x), amount);
    }
    atoms.add(sink, kAleph0);
    w.record_rule("tail accumulating at " + std::to_string(t.limit) + " -> aleph_0 atom at " + std::to_string(sink),
                  sink / t.limit);
  }

  std::vector<InfiniteFamily> families;
  for (const InfiniteFamily& f : m.families()) {
    InfiniteFamily snapped = f;
    if (extend_chain(snapped.grids, grid)) w.record_rule("family members -> " + describe_grid(grid), grid.beta);
    families.push_back(snapped);
  }
  return {SpectralMeasure(m.kernel(), atoms.atoms(), std::move(tails), std::move(families)), w};
}

ShiftResult transfer_masses(const SpectralMeasure& m, const std::vector<Move>& moves) {
  AtomMap atoms(m.atoms());
  ShiftWitness w;
  for (const Move& mv : moves) {
    if (!(mv.from > 0.0 && mv.to > 0.0 && std::isfinite(mv.from) && std::isfinite(mv.to)))
      throw ContractError("transfer_masses: positions must be positive; mass at 0 never moves");
    if (mv.amount.is_zero() || mv.from == mv.to) {
      if (m.atom_weight(mv.from) < mv.amount) throw ContractError("transfer_masses: moving more mass than present");
      continue;
    }
    atoms.remove(mv.from, mv.amount);
    atoms.add(mv.to, mv.amount);
    w.record(mv);
  }
  return {SpectralMeasure(m.kernel(), atoms.atoms(), m.tails(), m.families()), w};
}

ShiftResult absorb_near_infinite(const SpectralMeasure& m, double R) {
  if (!(R >= 1.0)) throw ContractError("absorb_near_infinite: R must be at least 1");
  ShiftWitness w;
  std::vector<Atom> atoms;
  for (const Atom& a : m.atoms()) {
    if (a.weight.is_finite()) {
      const auto target = nearest_infinite(m, a.pos);
      if (target && target->ratio <= R) {
        w.record({a.pos, target->pos, a.weight});
        continue;
      }
    }
    atoms.push_back(a);
  }

  const auto cover = covering_family(m, R);
  std::vector<Tail> tails;
  for (const Tail& t : m.tails()) {
    if (t.limit > 0.0) {
      // Every term lies between the head and the limit, so the ratio to a
      // fixed target is bounded by the worse of the two ends.
      const auto target = nearest_infinite(m, t.limit);
      if (target) {
        const double sup = std::max(ratio_of(t.head(), target->pos), target->ratio);
        if (target->ratio == 1.0 || sup <= R) {
          w.record_rule("tail absorbed into infinite point " + std::to_string(target->pos), sup);
          continue;
        }
      }
    }
    const double floor = t.limit == 0.0 && cover ? cover->member(0) : 0.0;
    Tail kept = t;
    bool whole = false;
    for (std::int64_t n = 0;; ++n, ++kept.first_index) {
      const double x = kept.term(kept.first_index);
      if (floor > 0.0 && x <= floor) {
        whole = true;
        break;
      }
      // Stop well before terms underflow; the rest stays a tail.
      if (n >= kMaxExplicitTerms || kept.term(kept.first_index + 1) < 1e-250) break;
      const auto target = nearest_infinite(m, x);
      if (!target || target->ratio > R) break;
      w.record({x, target->pos, Cardinal::fin(t.mult)});
    }
    if (whole) {
      w.record_rule("tail to 0 absorbed into family members", cover_ratio(*cover));
      continue;
    }
    tails.push_back(kept);
  }
  return {SpectralMeasure(m.kernel(), std::move(atoms), std::move(tails), m.families()), w};
}

ShiftResult truncate_tail_into_limit(const SpectralMeasure& m, std::size_t tail_index, std::size_t keep_head) {
  if (tail_index >= m.tails().size()) throw ContractError("truncate_tail_into_limit: no such tail");
  const Tail& t = m.tails()[tail_index];
  if (!(t.limit > 0.0)) throw ContractError("truncate_tail_into_limit: tail accumulates at 0");

  AtomMap atoms(m.atoms());
  ShiftWitness w;
  std::int64_t j = t.first_index;
  for (std::size_t i = 0; i < keep_head; ++i, ++j) atoms.add(t.raw_term(j), Cardinal::fin(t.mult));
  atoms.add(t.limit, kAleph0);
  w.record_rule("tail truncated into aleph_0 atom at " + std::to_string(t.limit), t.raw_term(j) / t.limit);

  std::vector<Tail> tails = m.tails();
  tails.erase(tails.begin() + static_cast<std::ptrdiff_t>(tail_index));
  return {SpectralMeasure(m.kernel(), atoms.atoms(), std::move(tails), m.families()), w};
}

}  // namespace opequiv
