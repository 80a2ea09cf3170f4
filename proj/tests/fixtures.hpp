#pragma once

// Comparison fixtures with known answers. The sequence fixtures also carry
// closed forms for their sorted terms, used as an oracle for the sup of the
// log ratio.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "opequiv/measure.hpp"

namespace opequiv::testing {

struct SequenceOracle {
  // log of the i-th largest term (i from 0) on each side
  std::function<double(std::size_t)> log_s, log_t;
  // sup over i >= N of |log s_i - log t_i|; +inf when it diverges
  std::function<double(std::size_t)> tail_sup;
};

struct Fixture {
  std::string name;
  SpectralMeasure a, b;
  bool equivalent = false;
  std::optional<SequenceOracle> sequences;
};

inline Tail starting_at(Tail t, std::int64_t j) {
  t.first_index = j;
  return t;
}

inline SpectralMeasure only_tails(std::vector<Tail> t) { return SpectralMeasure(kZero, {}, std::move(t)); }

inline std::vector<Fixture> fixture_suite() {
  const double inf = std::numeric_limits<double>::infinity();
  const double ln2 = std::log(2.0);
  std::vector<Fixture> f;

  f.push_back({"1/n vs 1/(n+1)", only_tails({Tail::power(1, 1)}), only_tails({starting_at(Tail::power(1, 1), 2)}), true,
               SequenceOracle{[](std::size_t i) { return -std::log(i + 1.0); },
                              [](std::size_t i) { return -std::log(i + 2.0); },
                              [](std::size_t N) { return std::log1p(1.0 / (N + 1.0)); }}});
  f.push_back({"2^-n vs 3^-n", only_tails({Tail::geometric(1, 0.5)}), only_tails({Tail::geometric(1, 1.0 / 3)}), false,
               SequenceOracle{[=](std::size_t i) { return -ln2 * i; }, [](std::size_t i) { return -std::log(3.0) * i; },
                              [=](std::size_t) { return inf; }}});
  for (double c : {0.1, 10.0})
    f.push_back({"2^-n vs " + std::string(c < 1 ? "0.1" : "10") + "*2^-n", only_tails({Tail::geometric(1, 0.5)}),
                 only_tails({Tail::geometric(c, 0.5)}), true,
                 SequenceOracle{[=](std::size_t i) { return -ln2 * i; },
                                [=](std::size_t i) { return std::log(c) - ln2 * i; },
                                [=](std::size_t) { return std::abs(std::log(c)); }}});
  f.push_back({"n^-1 vs n^-2", only_tails({Tail::power(1, 1)}), only_tails({Tail::power(1, 2)}), false,
               SequenceOracle{[](std::size_t i) { return -std::log(i + 1.0); },
                              [](std::size_t i) { return -2 * std::log(i + 1.0); }, [=](std::size_t) { return inf; }}});
  f.push_back({"2^-n twice vs 2^-(n/2)", only_tails({Tail::geometric(1, 0.5, 2)}),
               only_tails({Tail::geometric(1, std::sqrt(0.5))}), true,
               SequenceOracle{[=](std::size_t i) { return -ln2 * static_cast<double>(i / 2); },
                              [=](std::size_t i) { return -ln2 * i / 2; }, [=](std::size_t) { return ln2 / 2; }}});

  // Fixtures without a sequence oracle; the answer follows from the
  // dimension counts or from an explicit shift.
  f.push_back({"infinite atoms merge", SpectralMeasure(kZero, {{1.0, kAleph0}}),
               SpectralMeasure(kZero, {{2.0, kAleph0}, {1.0, kAleph0}}), true, {}});
  f.push_back({"kernel 1 vs 2", SpectralMeasure(Cardinal::fin(1), {}), SpectralMeasure(Cardinal::fin(2), {}), false, {}});
  f.push_back({"families rho 1/2 vs 1/4", SpectralMeasure(kZero, {}, {}, {{1.0, 0.5, kAleph0, {}}}),
               SpectralMeasure(kZero, {}, {}, {{1.0, 0.25, kAleph0, {}}}), true, {}});
  f.push_back({"family aleph_0 vs aleph_1", SpectralMeasure(kZero, {}, {}, {{1.0, 0.5, kAleph0, {}}}),
               SpectralMeasure(kZero, {}, {}, {{1.0, 0.5, Cardinal::aleph(1), {}}}), false, {}});
  f.push_back({"tail to 1 vs aleph_0 atom", only_tails({Tail::geometric(1, 0.5, 1, 1.0)}),
               SpectralMeasure(kZero, {{1.5, kAleph0}}), true, {}});
  f.push_back({"finite rank 3", SpectralMeasure(kZero, {{1.0, Cardinal::fin(2)}, {3.0, Cardinal::fin(1)}}),
               SpectralMeasure(kZero, {{5.0, Cardinal::fin(3)}}), true, {}});
  f.push_back({"finite rank 2 vs 3", SpectralMeasure(kZero, {{1.0, Cardinal::fin(2)}}),
               SpectralMeasure(kZero, {{1.0, Cardinal::fin(3)}}), false, {}});
  f.push_back({"compact vs invertible", only_tails({Tail::geometric(1, 0.5)}), SpectralMeasure(kZero, {{1.0, kAleph0}}),
               false, {}});
  f.push_back({"heavy aleph_1 vs aleph_0", SpectralMeasure(kZero, {{1.0, Cardinal::aleph(1)}}),
               SpectralMeasure(kZero, {{1.0, kAleph0}}), false, {}});
  return f;
}

}  // namespace opequiv::testing
