#include "opequiv/canonical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "opequiv/errors.hpp"

namespace opequiv {
namespace {

constexpr double kRateTolerance = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();
// Smallest position the interval searches will look at.
constexpr double kDeepest = 1e-290;

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

std::string fmt(const std::optional<Cardinal>& c) { return c ? c->to_string() : "none"; }

bool has_infinite_points(const SpectralMeasure& m) {
  if (!m.families().empty()) return true;
  return std::any_of(m.atoms().begin(), m.atoms().end(), [](const Atom& a) { return a.weight.is_aleph(); });
}

// Only finite atoms and tails to 0.
bool is_compact(const SpectralMeasure& m) {
  if (has_infinite_points(m)) return false;
  return std::all_of(m.tails().begin(), m.tails().end(), [](const Tail& t) { return t.limit == 0.0; });
}

TailClass classify_tails(const SpectralMeasure& m) {
  bool any = false;
  std::optional<double> min_p;
  double density = 0.0;
  for (const Tail& t : m.tails()) {
    if (t.limit != 0.0) continue;
    any = true;
    if (t.kind == TailKind::Power)
      min_p = min_p ? std::min(*min_p, t.rate) : t.rate;
    else
      density += static_cast<double>(t.mult) / std::log(1.0 / t.rate);
  }
  if (!any) return std::monostate{};
  if (min_p) return PowerClass{*min_p};
  return GeometricClass{std::exp(-1.0 / density)};
}

std::optional<Cardinal> max_family(const SpectralMeasure& m) {
  std::optional<Cardinal> out;
  for (const InfiniteFamily& f : m.families())
    if (!out || f.cardinal > *out) out = f.cardinal;
  return out;
}

std::optional<Cardinal> max_aleph_atom(const SpectralMeasure& m) {
  std::optional<Cardinal> out;
  for (const Atom& a : m.atoms())
    if (a.weight.is_aleph() && (!out || a.weight > *out)) out = a.weight;
  return out;
}

// Radius that lets absorb_near_infinite clear every finite mass that has an
// infinite point to go to.
double absorb_radius(const SpectralMeasure& m) {
  double R = 1.0;
  for (const Atom& a : m.atoms())
    if (a.weight.is_finite())
      if (const auto t = nearest_infinite(m, a.pos)) R = std::max(R, t->ratio);
  if (m.families().empty()) return R;
  double top = 0.0;
  for (const InfiniteFamily& f : m.families()) {
    R = std::max(R, cover_ratio(f));
    top = std::max(top, f.member(0));
  }
  for (const Tail& t : m.tails())
    if (t.limit == 0.0) R = std::max(R, t.head() / top);
  return R * (1 + 1e-12);
}

// ---- sorted term sequences of compact measures ----

struct Run {
  double value;
  std::uint64_t count;
};

class SortedTerms {
 public:
  explicit SortedTerms(const SpectralMeasure& m) : m_(m) {
    for (const Tail& t : m.tails()) next_.push_back(t.first_index);
  }

  // Next run of equal values from a single source, or none when exhausted.
  std::optional<Run> next() {
    double best = -1.0;
    int src = -1;  // -1 atom, else tail index
    if (atom_ < m_.atoms().size()) best = m_.atoms()[atom_].pos;
    for (std::size_t i = 0; i < next_.size(); ++i) {
      const double v = m_.tails()[i].term(next_[i]);
      if (v > best) {
        best = v;
        src = static_cast<int>(i);
      }
    }
    if (best < 0.0) return std::nullopt;
    if (src < 0) return Run{best, m_.atoms()[atom_++].weight.value()};
    const Tail& t = m_.tails()[static_cast<std::size_t>(src)];
    ++next_[static_cast<std::size_t>(src)];
    return Run{best, t.mult};
  }

 private:
  const SpectralMeasure& m_;
  std::size_t atom_ = 0;
  std::vector<std::int64_t> next_;
};

// Below this, every tail of m is counted by its asymptotic formula.
double asymptotic_threshold(const SpectralMeasure& m) {
  double y = kInf;
  for (const Atom& a : m.atoms()) y = std::min(y, a.pos);
  for (const Tail& t : m.tails()) y = std::min({y, t.raw_term(t.first_index), t.head()});
  return y;
}

std::uint64_t finite_mass(const SpectralMeasure& m) {
  std::uint64_t n = 0;
  for (const Atom& a : m.atoms()) n += a.weight.value();
  return n;
}

// Number of terms strictly above x is within [d ln(1/x) + B, d ln(1/x) + B + U).
struct GeometricCount {
  double d = 0.0, B = 0.0, U = 0.0;
};

GeometricCount geometric_count(const SpectralMeasure& m) {
  GeometricCount g;
  g.B = static_cast<double>(finite_mass(m));
  for (const Tail& t : m.tails()) {
    const double mult = static_cast<double>(t.mult);
    const double step = std::log(1.0 / t.rate);
    g.d += mult / step;
    g.B += mult * (std::log(t.a) / step - static_cast<double>(t.first_index));
    double lift = 0.0;  // a chain of snaps raises a term by less than the product of its betas
    for (const GridSpec& gs : t.grids) lift += std::log(gs.beta);
    g.U += mult * (1.0 + lift / step);
  }
  return g;
}

// The n-th largest term (0-based), located by bisection on the counting function.
std::optional<double> nth_term(const SpectralMeasure& m, double n, double top) {
  double lo = std::log(kDeepest), hi = std::log(top);
  try {
    if (static_cast<double>(weight_interval(m, kDeepest, kInf).value()) <= n) return std::nullopt;
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
      const double mid = 0.5 * (lo + hi);
      const Cardinal c = weight_interval(m, std::exp(mid), kInf);
      if (c.is_finite() && static_cast<double>(c.value()) <= n)
        hi = mid;
      else
        lo = mid;
    }
  } catch (const CapacityError&) {
    return std::nullopt;
  }
  return std::exp(hi);
}

// ---- matching of infinite points ----

// sup over the aleph-carrying points of `from` of the distance to a point of
// `to` with at least the same weight.
double point_match(const SpectralMeasure& from, const SpectralMeasure& to) {
  double K = 1.0;
  auto need = [&](double x, Cardinal w) {
    const auto t = nearest_infinite(to, x, w);
    if (!t) throw ContractError("decide_equivalent: infinite point without a partner");
    K = std::max(K, t->ratio);
  };
  for (const Atom& a : from.atoms())
    if (a.weight.is_aleph()) need(a.pos, a.weight);

  double depth = kInf;
  for (const Atom& a : to.atoms()) depth = std::min(depth, a.pos);
  for (const InfiniteFamily& g : to.families()) depth = std::min(depth, g.member(0));
  for (const InfiniteFamily& f : from.families()) {
    std::int64_t k = 0;
    for (; k < 100000 && f.member(k) >= depth; ++k) need(f.member(k), f.cardinal);
    if (k == 100000) throw CapacityError("decide_equivalent: family too shallow to match");
    double deep = kInf;
    for (const InfiniteFamily& g : to.families())
      if (g.cardinal >= f.cardinal) deep = std::min(deep, cover_ratio(g));
    if (!std::isfinite(deep)) throw ContractError("decide_equivalent: family without a partner");
    K = std::max(K, deep);
  }
  return K;
}

SpectralMeasure compact_part(const SpectralMeasure& m) {
  std::vector<Atom> atoms;
  for (const Atom& a : m.atoms())
    if (a.weight.is_finite()) atoms.push_back(a);
  std::vector<Tail> tails;
  for (const Tail& t : m.tails())
    if (t.limit == 0.0) tails.push_back(t);
  return SpectralMeasure(kZero, std::move(atoms), std::move(tails));
}

double canonical_match(const SpectralMeasure& c1, const SpectralMeasure& c2) {
  double K = std::max(point_match(c1, c2), point_match(c2, c1));
  const SpectralMeasure p1 = compact_part(c1), p2 = compact_part(c2);
  const bool e1 = image_dim(p1).is_zero(), e2 = image_dim(p2).is_zero();
  if (e1 && e2) return K;
  if (e1 != e2) throw ContractError("decide_equivalent: finite mass left on one side only");
  return std::max(K, compact_match_ratio(p1, p2));
}

// ---- certificates ----

int denser_tail_side(const TailClass& a, const TailClass& b) {
  if (a.index() != b.index()) return a.index() > b.index() ? 1 : 2;
  if (const auto* g = std::get_if<GeometricClass>(&a)) return g->rate > std::get<GeometricClass>(b).rate ? 1 : 2;
  return std::get<PowerClass>(a).exponent < std::get<PowerClass>(b).exponent ? 1 : 2;
}

int larger_side(const std::optional<Cardinal>& a, const std::optional<Cardinal>& b) {
  if (!a) return 2;
  if (!b) return 1;
  return *a > *b ? 1 : 2;
}

double smallest_feature(const SpectralMeasure& m) {
  double y = kInf;
  for (const Atom& a : m.atoms()) y = std::min(y, a.pos);
  for (const Tail& t : m.tails()) {
    y = std::min({y, t.raw_term(t.first_index), t.head()});
    if (t.limit > 0.0) y = std::min(y, t.limit);
  }
  for (const InfiniteFamily& f : m.families()) y = std::min(y, f.member(0));
  return y;
}

std::optional<Violation> try_interval(const SpectralMeasure& a, const SpectralMeasure& b, int side, double K,
                                      double lo, double hi) {
  try {
    const Cardinal small = weight_interval(a, lo, hi);
    const Cardinal inflated = weight_interval(b, lo / K, K * hi);
    if (small > inflated) return Violation{K, side, false, lo, hi, small, inflated};
  } catch (const CapacityError&) {
  }
  return std::nullopt;
}

}  // namespace

bool same_tail_class(const TailClass& a, const TailClass& b) {
  if (a.index() != b.index()) return false;
  auto close = [](double x, double y) { return std::abs(x - y) <= kRateTolerance * std::max(x, y); };
  if (const auto* g = std::get_if<GeometricClass>(&a)) return close(g->rate, std::get<GeometricClass>(b).rate);
  if (const auto* p = std::get_if<PowerClass>(&a)) return close(p->exponent, std::get<PowerClass>(b).exponent);
  return true;
}

std::string describe(const TailClass& c) {
  if (const auto* g = std::get_if<GeometricClass>(&c)) return "geometric(rate=" + fmt(g->rate) + ")";
  if (const auto* p = std::get_if<PowerClass>(&c)) return "power(p=" + fmt(p->exponent) + ")";
  return "none";
}

bool same_form(const CanonicalForm& a, const CanonicalForm& b) {
  return a.total == b.total && a.kernel == b.kernel && a.image == b.image && a.family == b.family &&
         a.heavy == b.heavy && same_tail_class(a.tail, b.tail);
}

const char* field_name(FormField f) {
  switch (f) {
    case FormField::Total: return "total";
    case FormField::Kernel: return "kernel";
    case FormField::Image: return "image";
    case FormField::Family: return "family";
    case FormField::Heavy: return "heavy";
    case FormField::Tail: return "tail";
  }
  return "?";
}

ShiftResult apply_step(const SpectralMeasure& m, const ShiftStep& step) {
  switch (step.kind) {
    case StepKind::Snap: return snap_to_grid(m, step.grid);
    case StepKind::Truncate: return truncate_tail_into_limit(m, step.tail_index);
    case StepKind::Absorb: return absorb_near_infinite(m, step.R);
  }
  throw ContractError("apply_step: unknown step");
}

Canonicalization canonicalize(const SpectralMeasure& m, double beta, double b) {
  if (!(beta > 1.0) || !std::isfinite(beta)) throw ContractError("canonicalize: beta must exceed 1");
  if (!(b > 0.0) || !std::isfinite(b)) throw ContractError("canonicalize: b must be positive");
  Canonicalization out;
  SpectralMeasure cur = m;
  auto run = [&](ShiftStep step) {
    ShiftResult r = apply_step(cur, step);
    step.witness = r.witness;
    out.witness = out.steps.empty() ? r.witness : compose(out.witness, r.witness);
    out.steps.push_back(std::move(step));
    cur = std::move(r.measure);
  };

  const GridSpec grid{beta, b};
  ShiftStep snap;
  snap.kind = StepKind::Snap;
  snap.grid = grid;
  run(snap);
  // Snapping already turns tails with a positive limit into atoms; anything
  // left is handled the same way.
  for (std::size_t i = 0; i < cur.tails().size();) {
    if (cur.tails()[i].limit > 0.0) {
      ShiftStep t;
      t.kind = StepKind::Truncate;
      t.tail_index = i;
      run(t);
    } else {
      ++i;
    }
  }
  if (has_infinite_points(cur)) {
    ShiftStep ab;
    ab.kind = StepKind::Absorb;
    ab.R = absorb_radius(cur);
    run(ab);
  }

  CanonicalForm& f = out.form;
  f.total = total_dim(m);
  f.kernel = m.kernel();
  f.image = image_dim(m);
  f.family = max_family(cur);
  f.heavy = max_aleph_atom(cur);
  if (f.family && f.heavy && *f.heavy <= *f.family) f.heavy.reset();
  f.tail = f.family ? TailClass{} : classify_tails(cur);

  EviSequence& e = out.evi;
  e.beta = beta;
  e.b = b;
  e.kernel = m.kernel();
  e.total = f.total;
  e.tail_class = f.tail;
  e.family_cardinal = f.family;
  for (const Atom& a : cur.atoms()) {
    const std::int64_t k = grid.bucket(a.pos);
    if (a.weight.is_aleph())
      e.items.push_back(Intermission{k, a.weight});
    else
      e.items.push_back(FiniteRun{k, a.weight.value()});
  }
  out.measure = std::move(cur);
  return out;
}

SpectralMeasure replay(const SpectralMeasure& m, const std::vector<ShiftStep>& steps, int side) {
  SpectralMeasure cur = m;
  for (const ShiftStep& s : steps) {
    if (s.side != side) continue;
    ShiftResult r = apply_step(cur, s);
    if (!witness_consistent(r.witness) || r.witness.K > s.witness.K * (1 + 1e-12))
      throw ContractError("replay: step exceeds its recorded ratio bound");
    cur = std::move(r.measure);
  }
  return cur;
}

std::optional<Violation> instantiate(const Certificate& cert, const SpectralMeasure& m1, const SpectralMeasure& m2,
                                     double K) {
  if (!cert.intervals) return std::nullopt;
  if (!(K >= 1.0)) throw ContractError("instantiate: K must be at least 1");
  const int side = cert.intervals->side;
  const SpectralMeasure& a = side == 1 ? m1 : m2;
  const SpectralMeasure& b = side == 1 ? m2 : m1;

  switch (cert.intervals->shape) {
    case FamilyShape::Window: {
      double X = std::min({smallest_feature(a), smallest_feature(b), 1.0}) / (2 * K * K);
      const double t_max = std::log(X / kDeepest);
      for (double t = 1.0; t <= t_max; t = t < 64 ? t + 1 : t * 1.1)
        if (auto v = try_interval(a, b, side, K, X * std::exp(-t), X)) return v;
      return std::nullopt;
    }
    case FamilyShape::Members: {
      const auto top = max_family(a);
      for (const InfiniteFamily& f : a.families()) {
        if (f.cardinal != *top) continue;
        for (std::int64_t k = 0; k < 4000 && f.member(k) > kDeepest; ++k) {
          const double y = f.member(k);
          if (auto v = try_interval(a, b, side, K, y * (1 - 1e-9), y)) return v;
        }
      }
      return std::nullopt;
    }
    case FamilyShape::Heavy: {
      for (const Atom& at : a.atoms())
        if (at.weight.is_aleph())
          if (auto v = try_interval(a, b, side, K, at.pos * (1 - 1e-9), at.pos)) return v;
      for (const Tail& t : a.tails())
        if (t.limit > 0.0)
          if (auto v = try_interval(a, b, side, K, t.limit, t.limit * (1 + 1e-9))) return v;
      return std::nullopt;
    }
  }
  return std::nullopt;
}

Verdict decide_equivalent(const SpectralMeasure& m1, const SpectralMeasure& m2, double beta, double b) {
  const Canonicalization c1 = canonicalize(m1, beta, b);
  const Canonicalization c2 = canonicalize(m2, beta, b);
  Verdict v;
  v.form1 = c1.form;
  v.form2 = c2.form;

  auto mismatch = [&](FormField field, std::string l, std::string r, std::optional<IntervalFamily> fam = {}) {
    v.equivalent = false;
    v.certificate = Certificate{field, std::move(l), std::move(r), std::move(fam)};
    return v;
  };
  const CanonicalForm &f1 = c1.form, &f2 = c2.form;
  // Kernel first: a kernel mismatch usually drags the total along.
  if (f1.kernel != f2.kernel) return mismatch(FormField::Kernel, f1.kernel.to_string(), f2.kernel.to_string());
  if (f1.total != f2.total) return mismatch(FormField::Total, f1.total.to_string(), f2.total.to_string());
  if (f1.image != f2.image) return mismatch(FormField::Image, f1.image.to_string(), f2.image.to_string());
  if (f1.family != f2.family)
    return mismatch(FormField::Family, fmt(f1.family), fmt(f2.family),
                    IntervalFamily{FamilyShape::Members, larger_side(f1.family, f2.family),
                                   "]y_k(1-1e-9), y_k] at members y_k of the larger family, k -> inf"});
  if (f1.heavy != f2.heavy)
    return mismatch(FormField::Heavy, fmt(f1.heavy), fmt(f2.heavy),
                    IntervalFamily{FamilyShape::Heavy, larger_side(f1.heavy, f2.heavy),
                                   "]p(1-1e-9), p] at the heaviest isolated infinite point p"});
  if (!same_tail_class(f1.tail, f2.tail))
    return mismatch(FormField::Tail, describe(f1.tail), describe(f2.tail),
                    IntervalFamily{FamilyShape::Window, denser_tail_side(f1.tail, f2.tail),
                                   "]X e^-t, X], X = (smallest positive feature)/(2K^2), t -> inf"});

  v.equivalent = true;
  v.steps = c1.steps;
  for (ShiftStep s : c2.steps) {
    s.side = 2;
    v.steps.push_back(std::move(s));
  }
  if (m1 == m2) {
    v.witness_K = 1.0;
  } else if (f1.image.is_finite()) {
    v.witness_K = *finite_shift_witness(m1, m2);
  } else if (is_compact(m1) && is_compact(m2)) {
    v.witness_K = compact_match_ratio(m1, m2);
  } else {
    v.witness_K = c1.witness.K * canonical_match(c1.measure, c2.measure) * c2.witness.K;
  }
  return v;
}

NecessaryReport check_necessary_condition(const SpectralMeasure& m1, const SpectralMeasure& m2, double K,
                                          const std::vector<std::pair<double, double>>& probes) {
  if (!(K >= 1.0) || !std::isfinite(K)) throw ContractError("check_necessary_condition: K must be at least 1");
  NecessaryReport rep;
  rep.K = K;
  for (const auto& [lo, hi] : probes) {
    if (!(lo >= 0.0 && lo <= hi)) throw ContractError("check_necessary_condition: probe needs 0 <= lo <= hi");
    ProbeResult r;
    r.lo = lo;
    r.hi = hi;
    r.w1 = weight_interval(m1, lo, hi);
    r.w2_inflated = weight_interval(m2, lo / K, K * hi);
    r.w2 = weight_interval(m2, lo, hi);
    r.w1_inflated = weight_interval(m1, lo / K, K * hi);
    r.p1 = weight_prefix(m1, hi);
    r.p2_inflated = weight_prefix(m2, K * hi);
    r.p2 = weight_prefix(m2, hi);
    r.p1_inflated = weight_prefix(m1, K * hi);
    r.pass = r.w1 <= r.w2_inflated && r.w2 <= r.w1_inflated && r.p1 <= r.p2_inflated && r.p2 <= r.p1_inflated;
    rep.pass = rep.pass && r.pass;
    rep.probes.push_back(r);
  }
  return rep;
}

std::optional<double> finite_shift_witness(const SpectralMeasure& m1, const SpectralMeasure& m2) {
  for (const SpectralMeasure* m : {&m1, &m2}) {
    if (!m->tails().empty() || has_infinite_points(*m))
      throw ContractError("finite_shift_witness: needs purely finite atomic measures");
  }
  if (m1.kernel() != m2.kernel() || finite_mass(m1) != finite_mass(m2)) return std::nullopt;
  // Sorted matching minimizes the largest log-distance.
  double K = 1.0;
  std::size_t i = 0, j = 0;
  std::uint64_t left_i = 0, left_j = 0;
  while (i < m1.atoms().size() && j < m2.atoms().size()) {
    if (left_i == 0) left_i = m1.atoms()[i].weight.value();
    if (left_j == 0) left_j = m2.atoms()[j].weight.value();
    K = std::max(K, ratio_of(m1.atoms()[i].pos, m2.atoms()[j].pos));
    const std::uint64_t step = std::min(left_i, left_j);
    left_i -= step;
    left_j -= step;
    if (left_i == 0) ++i;
    if (left_j == 0) ++j;
  }
  return K;
}

double compact_match_ratio(const SpectralMeasure& a, const SpectralMeasure& b) {
  if (!is_compact(a) || !is_compact(b))
    throw ContractError("compact_match_ratio: needs finite atoms and tails to 0 only");
  const TailClass ca = classify_tails(a), cb = classify_tails(b);
  if (!same_tail_class(ca, cb)) throw ContractError("compact_match_ratio: tail classes differ");
  if (std::holds_alternative<std::monostate>(ca)) {
    const SpectralMeasure fa(kZero, a.atoms()), fb(kZero, b.atoms());
    const auto K = finite_shift_witness(fa, fb);
    if (!K) throw ContractError("compact_match_ratio: finite masses differ");
    return *K;
  }

  // Exact sup over a prefix of both sorted sequences.
  constexpr std::uint64_t kPrefix = 4096;
  constexpr std::uint64_t kMaxPrefix = 1u << 22;
  const double ya = asymptotic_threshold(a), yb = asymptotic_threshold(b);
  SortedTerms sa(a), sb(b);
  auto ra = sa.next(), rb = sb.next();
  double K = 1.0;
  std::uint64_t n = 0;
  auto more = [&] {
    if (ra->value >= ya || rb->value >= yb) return true;
    return n < kPrefix && std::min(ra->value, rb->value) > 1e-250;
  };
  while (ra && rb && more()) {
    if (n > kMaxPrefix) throw CapacityError("compact_match_ratio: sequences too long before their asymptotics");
    K = std::max(K, ratio_of(ra->value, rb->value));
    const std::uint64_t step = std::min(ra->count, rb->count);
    n += step;
    ra->count -= step;
    rb->count -= step;
    if (ra->count == 0) ra = sa.next();
    if (rb->count == 0) rb = sb.next();
  }

  if (std::holds_alternative<GeometricClass>(ca)) {
    const GeometricCount ga = geometric_count(a), gb = geometric_count(b);
    const double d = 0.5 * (ga.d + gb.d);
    const double spread = std::max({gb.B + gb.U - ga.B - 1.0, ga.B + ga.U - gb.B - 1.0, 0.0});
    return std::max(K, std::exp(spread / d) * (1 + 1e-9));
  }

  // Power class: the ratio settles to a constant; sample it and keep a margin.
  const double top = std::max(ya, yb) * 2;
  double sampled = 1.0;
  for (double m = static_cast<double>(n); m < 0x1p50; m *= 2) {
    const auto s = nth_term(a, m, top), t = nth_term(b, m, top);
    if (!s || !t) break;
    sampled = std::max(sampled, ratio_of(*s, *t));
  }
  return std::max(K, sampled * 1.25);
}

}  // namespace opequiv
