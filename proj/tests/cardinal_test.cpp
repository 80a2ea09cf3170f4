#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "opequiv/cardinal.hpp"
#include "opequiv/errors.hpp"

using namespace opequiv;

namespace {

Cardinal random_cardinal(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kind(0, 3);
  std::uniform_int_distribution<std::uint64_t> small(0, 1000);
  std::uniform_int_distribution<std::uint64_t> index(0, 3);
  return kind(rng) == 0 ? Cardinal::aleph(index(rng)) : Cardinal::fin(small(rng));
}

}  // namespace

TEST_CASE("card_add examples") {
  CHECK(card_add(Cardinal::fin(2), Cardinal::fin(3)) == Cardinal::fin(5));
  CHECK(card_add(Cardinal::fin(7), Cardinal::aleph(0)) == Cardinal::aleph(0));
  CHECK(card_add(Cardinal::aleph(0), Cardinal::aleph(1)) == Cardinal::aleph(1));
}

TEST_CASE("card_add overflow is a capacity error") {
  const auto big = Cardinal::fin(~std::uint64_t{0});
  CHECK_THROWS_AS(card_add(big, Cardinal::fin(1)), CapacityError);
  CHECK(card_add(big, kZero) == big);
  CHECK(card_add(big, kAleph0) == kAleph0);
}

TEST_CASE("card_compare examples") {
  CHECK(card_compare(Cardinal::fin(10), Cardinal::aleph(0)) == std::strong_ordering::less);
  CHECK(card_compare(Cardinal::aleph(2), Cardinal::aleph(2)) == std::strong_ordering::equal);
  CHECK(card_compare(Cardinal::fin(0), Cardinal::fin(1)) == std::strong_ordering::less);
}

TEST_CASE("card_countable_sum examples") {
  const std::vector<Cardinal> terms{Cardinal::fin(1), Cardinal::fin(2), Cardinal::fin(3)};
  CHECK(card_countable_sum({terms}) == Cardinal::fin(6));
  CHECK(card_countable_sum({{}, true, Cardinal::fin(1)}) == kAleph0);
  CHECK(card_countable_sum({{}, true, Cardinal::aleph(1)}) == Cardinal::aleph(1));
}

TEST_CASE("cardinal algebra properties") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const Cardinal a = random_cardinal(rng), b = random_cardinal(rng), c = random_cardinal(rng);
    CHECK(card_add(a, card_add(b, c)) == card_add(card_add(a, b), c));
    CHECK(card_add(a, b) == card_add(b, a));
    CHECK(card_add(a, kZero) == a);

    const int outcomes = (a < b) + (a == b) + (a > b);
    CHECK(outcomes == 1);
    if (a <= b && b <= c) CHECK(a <= c);
  }
}

TEST_CASE("finite countable sum is order independent") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    std::vector<Cardinal> terms(1 + rng() % 8);
    for (auto& t : terms) t = random_cardinal(rng);
    const Cardinal expected = card_countable_sum({terms});
    std::shuffle(terms.begin(), terms.end(), rng);
    Cardinal folded = kZero;
    for (const auto& t : terms) folded = card_add(folded, t);
    CHECK(folded == expected);
  }
}
