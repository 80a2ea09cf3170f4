#include "opequiv/cardinal.hpp"

#include <algorithm>
#include <limits>

#include "opequiv/errors.hpp"

namespace opequiv {

std::string Cardinal::to_string() const {
  return is_aleph() ? "aleph_" + std::to_string(value()) : std::to_string(value());
}

Cardinal card_add(Cardinal a, Cardinal b) {
  if (a.is_aleph() || b.is_aleph()) return std::max(a, b);
  if (a.value() > std::numeric_limits<std::uint64_t>::max() - b.value())
    throw CapacityError("card_add: finite cardinal overflow");
  return Cardinal::fin(a.value() + b.value());
}

std::strong_ordering card_compare(Cardinal a, Cardinal b) { return a <=> b; }

Cardinal card_scale(Cardinal a, std::uint64_t n) {
  if (n == 0) return kZero;
  if (a.is_aleph()) return a;
  if (a.value() != 0 && n > std::numeric_limits<std::uint64_t>::max() / a.value())
    throw CapacityError("card_scale: finite cardinal overflow");
  return Cardinal::fin(a.value() * n);
}

Cardinal card_countable_sum(const CountableFamily& family) {
  if (family.infinitely_many) return std::max(kAleph0, family.supremum);
  Cardinal sum = kZero;
  for (const Cardinal& c : family.terms) sum = card_add(sum, c);
  return sum;
}

}  // namespace opequiv
