#include <doctest.h>

#include <cmath>
#include <random>

#include "opequiv/errors.hpp"
#include "opequiv/shift.hpp"
#include "test_support.hpp"

using namespace opequiv;
using namespace opequiv::testing;

namespace {

const GridSpec kBinary{2.0, 1.0};

void check_conserved(const SpectralMeasure& before, const SpectralMeasure& after) {
  CHECK(total_dim(after) == total_dim(before));
  CHECK(after.kernel() == before.kernel());
  CHECK(image_dim(after) == image_dim(before));
}

}  // namespace

TEST_CASE("snap_to_grid examples") {
  // 0.25 < 0.3 <= 0.5
  const auto one = snap_to_grid(SpectralMeasure(kZero, {{0.3, Cardinal::fin(1)}}), kBinary);
  CHECK(one.measure.atoms() == std::vector<Atom>{{0.5, Cardinal::fin(1)}});
  CHECK(one.witness.K <= 2.0);
  CHECK(witness_consistent(one.witness));

  const auto merged =
      snap_to_grid(SpectralMeasure(kZero, {{0.5, Cardinal::fin(2)}, {0.4, Cardinal::fin(1)}}), kBinary);
  CHECK(merged.measure.atoms() == std::vector<Atom>{{0.5, Cardinal::fin(3)}});

  const SpectralMeasure kernel_only(kAleph0, {});
  CHECK(snap_to_grid(kernel_only, GridSpec{3.0, 0.7}).measure == kernel_only);
}

TEST_CASE("snap_to_grid turns a convergent tail into head atoms and an aleph_0 atom") {
  // Terms 0.25 + 2^-j: 1.25, 0.75, 0.5, 0.375, ... ; the bucket ]0.25, 0.5] collects all j >= 2.
  const SpectralMeasure m(kZero, {}, {Tail::geometric(1, 0.5, 1, 0.25)});
  const auto out = snap_to_grid(m, kBinary);
  CHECK(out.measure.tails().empty());
  CHECK(out.measure.atoms() == std::vector<Atom>{{2.0, Cardinal::fin(1)}, {1.0, Cardinal::fin(1)}, {0.5, kAleph0}});
  CHECK(out.witness.K <= 2.0);
  check_conserved(m, out.measure);
}

TEST_CASE("snapping onto a second grid chains the snaps") {
  const auto once = snap_to_grid(SpectralMeasure(kZero, {}, {Tail::geometric(1, 0.3)}), kBinary);
  const auto twice = snap_to_grid(once.measure, GridSpec{3.0, 1.0});
  CHECK(twice.witness.K == 3.0);
  const Tail& t = twice.measure.tails()[0];
  REQUIRE(t.grids.size() == 2);
  // 1 -> 1 -> 1; 0.3 -> 0.5 -> 1; 0.09 -> 0.125 -> 1/3; 0.027 -> 1/32 -> 1/27.
  CHECK(t.term(1) == 1.0);
  const double third = GridSpec{3.0, 1.0}.point(-1);
  CHECK(t.term(2) == third);
  CHECK(weight_interval(twice.measure, 0.9, 1.0) == Cardinal::fin(2));
  CHECK(weight_interval(twice.measure, 1.0, 3.0) == kZero);
  CHECK(weight_interval(twice.measure, third * 0.99, 1.0) == Cardinal::fin(3));
  CHECK(weight_interval(twice.measure, third / 3, third) == Cardinal::fin(1));
  CHECK(weight_interval(twice.measure, 0.34, 0.99) == kZero);
}

TEST_CASE("transfer_masses examples") {
  const auto moved = transfer_masses(SpectralMeasure(kZero, {{1.0, Cardinal::fin(2)}}), {{1.0, 2.0, Cardinal::fin(1)}});
  CHECK(moved.measure.atoms() == std::vector<Atom>{{2.0, Cardinal::fin(1)}, {1.0, Cardinal::fin(1)}});
  CHECK(moved.witness.K == 2.0);

  const SpectralMeasure m(kZero, {{1.0, Cardinal::fin(2)}});
  const auto same = transfer_masses(m, {{1.0, 1.0, Cardinal::fin(2)}});
  CHECK(same.measure == m);
  CHECK(same.witness.K == 1.0);

  const SpectralMeasure infinite(kZero, {{1.0, kAleph0}, {2.0, Cardinal::aleph(1)}});
  const auto merged = transfer_masses(infinite, {{1.0, 2.0, kAleph0}});
  CHECK(merged.measure.atoms() == std::vector<Atom>{{2.0, Cardinal::aleph(1)}});
  CHECK(merged.witness.K == 2.0);

  CHECK_THROWS_AS(transfer_masses(m, {{1.0, 2.0, Cardinal::fin(3)}}), ContractError);
  CHECK_THROWS_AS(transfer_masses(m, {{1.0, 0.0, Cardinal::fin(1)}}), ContractError);
  CHECK_THROWS_AS(transfer_masses(m, {{0.5, 1.0, Cardinal::fin(1)}}), ContractError);
}

TEST_CASE("absorb_near_infinite examples") {
  const SpectralMeasure near(kZero, {{1.0, kAleph0}, {1.5, Cardinal::fin(7)}});
  const auto a = absorb_near_infinite(near, 2.0);
  CHECK(a.measure.atoms() == std::vector<Atom>{{1.0, kAleph0}});
  CHECK(a.witness.K <= 2.0);

  const SpectralMeasure far(kZero, {{1.0, kAleph0}, {8.0, Cardinal::fin(1)}});
  CHECK(absorb_near_infinite(far, 2.0).measure == far);

  const SpectralMeasure with_tail(kZero, {{0.25, Cardinal::aleph(1)}}, {Tail::geometric(1, 0.5, 1, 0.25)});
  const auto b = absorb_near_infinite(with_tail, 2.0);
  CHECK(b.measure == SpectralMeasure(kZero, {{0.25, Cardinal::aleph(1)}}));
  // Staged witness: the head term 1.25 moves by 5.
  CHECK(b.witness.K == doctest::Approx(5.0));
  check_conserved(with_tail, b.measure);

  CHECK_THROWS_AS(absorb_near_infinite(near, 0.5), ContractError);
}

TEST_CASE("absorb_near_infinite re-indexes tails that lose head terms") {
  // 1/j for j >= 1; the aleph atom at 1.1 swallows 1 and 1/2 at R = 2.3.
  const SpectralMeasure m(kZero, {{1.1, kAleph0}}, {Tail::power(1, 1)});
  const auto out = absorb_near_infinite(m, 2.3);
  REQUIRE(out.measure.tails().size() == 1);
  CHECK(out.measure.tails()[0].first_index == 3);
  check_conserved(m, out.measure);
}

TEST_CASE("a covering family swallows a tail to 0") {
  const SpectralMeasure m(kZero, {}, {Tail::power(0.5, 2)}, {{1.0, 0.5, kAleph0, {}}});
  const auto out = absorb_near_infinite(m, 2.0);
  CHECK(out.measure.tails().empty());
  check_conserved(m, out.measure);
}

TEST_CASE("truncate_tail_into_limit examples") {
  const auto geo = truncate_tail_into_limit(SpectralMeasure(kZero, {}, {Tail::geometric(1, 0.5, 1, 0.25)}), 0);
  CHECK(geo.measure == SpectralMeasure(kZero, {{0.25, kAleph0}}));

  CHECK_THROWS_AS(truncate_tail_into_limit(SpectralMeasure(kZero, {}, {Tail::geometric(1, 0.5)}), 0), ContractError);

  const auto pw = truncate_tail_into_limit(SpectralMeasure(kZero, {}, {Tail::power(1, 1, 2, 0.1)}), 0);
  CHECK(pw.measure == SpectralMeasure(kZero, {{0.1, kAleph0}}));

  const auto kept = truncate_tail_into_limit(SpectralMeasure(kZero, {}, {Tail::geometric(1, 0.5, 1, 0.25)}), 0, 2);
  CHECK(kept.measure.atoms() ==
        std::vector<Atom>{{1.25, Cardinal::fin(1)}, {0.75, Cardinal::fin(1)}, {0.25, kAleph0}});
}

TEST_CASE("snap_to_grid is idempotent") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const SpectralMeasure m = random_measure(rng);
    const GridSpec g{uniform(rng, 1.5, 10.0), uniform(rng, 0.2, 3.0)};
    const auto once = snap_to_grid(m, g);
    const auto twice = snap_to_grid(once.measure, g);
    CHECK(twice.measure == once.measure);
    CHECK(twice.witness.K == 1.0);
  }
}

TEST_CASE("random shift pipelines conserve mass and respect their witness") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 150; ++trial) {
    const SpectralMeasure m = random_measure(rng);
    const double betas[] = {2.0, 3.0, 10.0};
    const auto snapped = snap_to_grid(m, GridSpec{betas[uniform_int(rng, 0, 2)], uniform(rng, 0.5, 2.0)});

    std::vector<Move> moves;
    for (const Atom& a : snapped.measure.atoms())
      if (uniform_int(rng, 0, 1) == 0) moves.push_back({a.pos, a.pos * uniform(rng, 0.4, 2.5), a.weight});
    const auto moved = transfer_masses(snapped.measure, moves);
    const auto absorbed = absorb_near_infinite(moved.measure, uniform(rng, 1.0, 4.0));

    const ShiftWitness chain = compose(compose(snapped.witness, moved.witness), absorbed.witness);
    for (const auto* w : {&snapped.witness, &moved.witness, &absorbed.witness, &chain})
      CHECK(witness_consistent(*w));
    CHECK(chain.K <= snapped.witness.K * moved.witness.K * absorbed.witness.K * (1 + 1e-12));

    for (const auto* out : {&snapped.measure, &moved.measure, &absorbed.measure}) check_conserved(m, *out);
    CHECK(interval_consistent(m, snapped.measure, snapped.witness.K, rng, 10));
    CHECK(interval_consistent(snapped.measure, moved.measure, moved.witness.K, rng, 10));
    CHECK(interval_consistent(moved.measure, absorbed.measure, absorbed.witness.K, rng, 10));
    CHECK(interval_consistent(m, absorbed.measure, chain.K, rng, 10));
  }
}
