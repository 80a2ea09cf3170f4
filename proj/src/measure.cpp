#include "opequiv/measure.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "opequiv/errors.hpp"

namespace opequiv {
namespace {

// Index estimates beyond this are not exactly representable as doubles.
constexpr double kMaxIndex = 9007199254740992.0;  // 2^53

std::int64_t checked_index(double estimate, std::int64_t floor) {
  if (!(estimate < kMaxIndex)) throw CapacityError("term index beyond representable range");
  return std::max<std::int64_t>(floor, static_cast<std::int64_t>(std::ceil(estimate)));
}

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

bool valid_chain(const GridChain& grids) {
  return std::all_of(grids.begin(), grids.end(), [](const GridSpec& g) { return g.beta > 1.0 && finite_positive(g.b); });
}

// Largest raw value whose chained snap stays <= h. Snaps are monotone, so the
// raw preimage of ]lo, hi] is ]raw_upper(lo), raw_upper(hi)].
double raw_upper(const GridChain& grids, double h) {
  for (auto it = grids.rbegin(); it != grids.rend() && h > 0.0 && std::isfinite(h); ++it) h = it->floor_point(h);
  return h;
}

Cardinal raw_tail_count(const Tail& t, double lo, double hi) {
  if (hi <= lo || hi <= t.limit) return kZero;
  if (lo <= t.limit) return kAleph0;
  const std::int64_t above_lo = t.first_at_or_below(lo);
  const std::int64_t above_hi = t.first_at_or_below(hi);
  return card_scale(Cardinal::fin(static_cast<std::uint64_t>(above_lo - above_hi)), t.mult);
}

bool raw_family_hit(const InfiniteFamily& f, double lo, double hi) {
  if (hi <= lo) return false;
  if (lo <= 0.0) return hi > 0.0;
  const std::int64_t k = f.first_at_or_below(hi);
  return f.raw_member(k) > lo;
}

// Upper bound of all positive positions carrying mass (0 if none).
double position_bound(const SpectralMeasure& m) {
  double top = 0.0;
  if (!m.atoms().empty()) top = m.atoms().front().pos;
  for (const Tail& t : m.tails()) top = std::max(top, t.head());
  for (const InfiniteFamily& f : m.families()) top = std::max(top, f.member(0));
  return top;
}

}  // namespace

double GridSpec::point(std::int64_t k) const { return b * std::pow(beta, static_cast<double>(k)); }

double GridSpec::floor_point(double h) const {
  std::int64_t k = bucket(h);
  if (point(k) > h) --k;
  return point(k);
}

std::int64_t GridSpec::bucket(double x) const {
  if (!finite_positive(x)) throw ContractError("GridSpec::bucket: position must be positive and finite");
  auto k = static_cast<std::int64_t>(std::ceil(std::log(x / b) / std::log(beta)));
  while (point(k - 1) >= x) --k;
  while (point(k) < x) ++k;
  return k;
}

Tail Tail::geometric(double a, double r, std::uint64_t mult, double limit) {
  return Tail{TailKind::Geometric, a, r, mult, limit, 0, {}};
}

Tail Tail::power(double a, double p, std::uint64_t mult, double limit) {
  return Tail{TailKind::Power, a, p, mult, limit, 1, {}};
}

double Tail::raw_term(std::int64_t j) const {
  const auto jd = static_cast<double>(j);
  return kind == TailKind::Geometric ? limit + a * std::pow(rate, jd) : limit + a * std::pow(jd, -rate);
}

std::int64_t Tail::first_at_or_below(double x) const {
  if (!(x > limit)) throw ContractError("Tail::first_at_or_below: query must lie above the limit");
  if (x == std::numeric_limits<double>::infinity()) return first_index;
  const double gap = x - limit;
  const double estimate = kind == TailKind::Geometric ? std::log(gap / a) / std::log(rate)
                                                      : std::pow(a / gap, 1.0 / rate);
  std::int64_t j = checked_index(estimate, first_index);
  while (j > first_index && raw_term(j - 1) <= x) --j;
  while (raw_term(j) > x) ++j;
  return j;
}

double InfiniteFamily::raw_member(std::int64_t k) const { return c * std::pow(rho, static_cast<double>(k)); }

std::int64_t InfiniteFamily::first_at_or_below(double x) const {
  if (x == std::numeric_limits<double>::infinity()) return 0;
  std::int64_t k = checked_index(std::log(x / c) / std::log(rho), 0);
  while (k > 0 && raw_member(k - 1) <= x) --k;
  while (raw_member(k) > x) ++k;
  return k;
}

double InfiniteFamily::gap_ratio() const {
  double g = 1.0 / rho;
  for (const GridSpec& s : grids) g *= s.beta;
  return g;
}

double snap_through(const GridChain& grids, double x) {
  for (const GridSpec& g : grids) x = g.snap(x);
  return x;
}

SpectralMeasure::SpectralMeasure(Cardinal kernel, std::vector<Atom> atoms, std::vector<Tail> tails,
                                 std::vector<InfiniteFamily> families)
    : kernel_(kernel), atoms_(std::move(atoms)), tails_(std::move(tails)), families_(std::move(families)) {
  for (const Atom& a : atoms_) {
    if (!finite_positive(a.pos)) throw ContractError("atom position must be positive and finite");
    if (a.weight.is_zero()) throw ContractError("atom weight must be nonzero");
  }
  std::sort(atoms_.begin(), atoms_.end(), [](const Atom& x, const Atom& y) { return x.pos > y.pos; });
  for (std::size_t i = 1; i < atoms_.size(); ++i)
    if (atoms_[i].pos == atoms_[i - 1].pos) throw ContractError("duplicate atom position");

  for (const Tail& t : tails_) {
    if (!finite_positive(t.a)) throw ContractError("tail scale a must be positive and finite");
    if (t.kind == TailKind::Geometric && !(t.rate > 0.0 && t.rate < 1.0))
      throw ContractError("geometric tail ratio must lie in (0,1)");
    if (t.kind == TailKind::Power && !finite_positive(t.rate))
      throw ContractError("power tail exponent must be positive");
    if (t.mult == 0) throw ContractError("tail multiplicity must be positive");
    if (!(std::isfinite(t.limit) && t.limit >= 0.0)) throw ContractError("tail limit must be nonnegative");
    if (t.first_index < (t.kind == TailKind::Geometric ? 0 : 1)) throw ContractError("tail start index out of range");
    if (!t.grids.empty()) {
      if (t.limit != 0.0) throw ContractError("grid-snapped tails must accumulate at 0");
      if (!valid_chain(t.grids)) throw ContractError("invalid tail grid");
      continue;
    }
    for (const Atom& a : atoms_) {
      if (a.pos <= t.limit) continue;
      if (t.raw_term(t.first_at_or_below(a.pos)) == a.pos)
        throw ContractError("tail term collides with an explicit atom");
    }
  }

  for (const InfiniteFamily& f : families_) {
    if (!finite_positive(f.c)) throw ContractError("family head must be positive");
    if (!(f.rho > 0.0 && f.rho < 1.0)) throw ContractError("family ratio must lie in (0,1)");
    if (!f.cardinal.is_aleph()) throw ContractError("family cardinal must be an aleph");
    if (!valid_chain(f.grids)) throw ContractError("invalid family grid");
  }
}

Cardinal SpectralMeasure::atom_weight(double pos) const {
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), pos,
                             [](const Atom& a, double p) { return a.pos > p; });
  return it != atoms_.end() && it->pos == pos ? it->weight : kZero;
}

Cardinal tail_weight(const Tail& tail, double lo, double hi) {
  if (hi <= lo) return kZero;
  return raw_tail_count(tail, raw_upper(tail.grids, lo), raw_upper(tail.grids, hi));
}

Cardinal family_weight(const InfiniteFamily& family, double lo, double hi) {
  if (hi <= lo) return kZero;
  return raw_family_hit(family, raw_upper(family.grids, lo), raw_upper(family.grids, hi)) ? family.cardinal : kZero;
}

Cardinal weight_interval(const SpectralMeasure& m, double mu_lo, double mu_hi) {
  if (!(mu_lo >= 0.0 && mu_lo <= mu_hi) || std::isnan(mu_hi))
    throw ContractError("weight_interval: requires 0 <= mu_lo <= mu_hi");
  const double hi = std::min(mu_hi, std::max(mu_lo, position_bound(m)));
  if (hi <= mu_lo) return kZero;

  Cardinal sum = kZero;
  for (const Atom& a : m.atoms())
    if (a.pos > mu_lo && a.pos <= hi) sum = card_add(sum, a.weight);
  for (const InfiniteFamily& f : m.families()) sum = card_add(sum, family_weight(f, mu_lo, hi));
  // A tail weighs at most aleph_0, so it cannot change an infinite sum.
  if (sum.is_aleph()) return sum;
  for (const Tail& t : m.tails()) sum = card_add(sum, tail_weight(t, mu_lo, hi));
  return sum;
}

Cardinal weight_prefix(const SpectralMeasure& m, double mu) {
  if (!(mu >= 0.0)) throw ContractError("weight_prefix: mu must be nonnegative");
  return card_add(m.kernel(), weight_interval(m, 0.0, mu));
}

Cardinal image_dim(const SpectralMeasure& m) {
  return weight_interval(m, 0.0, std::numeric_limits<double>::infinity());
}

Cardinal total_dim(const SpectralMeasure& m) { return card_add(m.kernel(), image_dim(m)); }

double support_sup(const SpectralMeasure& m) {
  if (total_dim(m).is_zero()) throw DomainError("support_sup: measure carries no mass");
  return position_bound(m);
}

FinInfReport fin_inf_decomposition(const SpectralMeasure& m) {
  FinInfReport report;
  std::map<double, InfPoint, std::greater<>> points;
  auto add = [&](double pos, InfReason reason, Cardinal w) {
    auto [it, inserted] = points.try_emplace(pos, InfPoint{pos, reason, w});
    if (!inserted) {
      it->second.reason = std::min(it->second.reason, reason);
      it->second.local_weight = card_add(it->second.local_weight, w);
    }
  };

  for (const Atom& a : m.atoms())
    if (a.weight.is_aleph()) add(a.pos, InfReason::InfiniteAtom, a.weight);
  for (const Tail& t : m.tails())
    if (t.limit > 0.0) add(t.limit, InfReason::TailAccumulation, kAleph0);
  for (const InfiniteFamily& f : m.families()) {
    for (std::int64_t k = 0; k < kFamilyListingDepth; ++k) {
      const double pos = f.member(k);
      if (points.contains(pos) && points.at(pos).reason == InfReason::FamilyMember) continue;
      add(pos, InfReason::FamilyMember, f.cardinal);
    }
    report.listing_floor = std::max(report.listing_floor, f.member(kFamilyListingDepth - 1));
  }
  // Finite atoms sitting on an inf point contribute to its local weight.
  for (auto& [pos, p] : points) {
    const Cardinal w = m.atom_weight(pos);
    if (w.is_finite()) p.local_weight = card_add(p.local_weight, w);
  }

  for (const auto& [pos, p] : points)
    if (pos >= report.listing_floor) report.inf_points.push_back(p);

  report.zero_in_inf = m.kernel().is_aleph() || !m.families().empty() ||
                       std::any_of(m.tails().begin(), m.tails().end(), [](const Tail& t) { return t.limit == 0.0; });

  double upper = std::numeric_limits<double>::infinity();
  for (const InfPoint& p : report.inf_points) {
    report.components.push_back({p.pos, upper});
    upper = p.pos;
  }
  if (report.listing_floor == 0.0) report.components.push_back({0.0, upper});
  return report;
}

SigmaListing component_sigma(const SpectralMeasure& m, const FinComponent& component) {
  const FinInfReport report = fin_inf_decomposition(m);
  if (std::find(report.components.begin(), report.components.end(), component) == report.components.end())
    throw ContractError("component_sigma: interval is not a FIN component");
  const double lo = component.lo, hi = component.hi;
  constexpr std::int64_t kMaxListed = 1'000'000;

  std::map<double, std::uint64_t, std::greater<>> listed;
  auto add = [&](double pos, std::uint64_t mult) {
    std::uint64_t& slot = listed[pos];
    slot = card_add(Cardinal::fin(slot), Cardinal::fin(mult)).value();
  };
  for (const Atom& a : m.atoms())
    if (a.pos > lo && a.pos < hi) add(a.pos, a.weight.value());

  SigmaListing out;
  for (std::size_t i = 0; i < m.tails().size(); ++i) {
    const Tail& t = m.tails()[i];
    // First index whose term lies strictly below hi.
    std::int64_t j = t.first_index;
    if (std::isfinite(hi)) {
      if (hi <= t.limit) continue;
      j = t.first_at_or_below(hi);
      while (t.term(j) >= hi) ++j;
    }
    if (t.limit == lo) {
      out.remainders.push_back({i, j});
      continue;
    }
    for (std::int64_t n = 0; t.term(j) > lo; ++j, ++n) {
      if (n >= kMaxListed) throw CapacityError("component_sigma: too many explicit terms");
      add(t.term(j), t.mult);
    }
  }
  for (const auto& [pos, mult] : listed) out.points.push_back({pos, mult});
  return out;
}

}  // namespace opequiv
