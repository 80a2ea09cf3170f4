#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>

namespace opequiv {

/// A finite nonnegative integer or an aleph with finite index.
///
/// Ordering: every finite value lies below every aleph; alephs are ordered by
/// index. Addition of two finite values is checked integer addition, any sum
/// that involves an aleph is the larger operand.
class Cardinal {
 public:
  constexpr Cardinal() = default;

  static constexpr Cardinal fin(std::uint64_t n) { return Cardinal(false, n); }
  static constexpr Cardinal aleph(std::uint64_t index) { return Cardinal(true, index); }

  constexpr bool is_finite() const { return !infinite_; }
  constexpr bool is_aleph() const { return infinite_; }
  constexpr bool is_zero() const { return !infinite_ && value_ == 0; }

  // Count for finite values, index for alephs.
  constexpr std::uint64_t value() const { return value_; }

  friend constexpr bool operator==(const Cardinal&, const Cardinal&) = default;
  friend constexpr std::strong_ordering operator<=>(const Cardinal& a, const Cardinal& b) {
    if (a.infinite_ != b.infinite_) return a.infinite_ ? std::strong_ordering::greater : std::strong_ordering::less;
    return a.value_ <=> b.value_;
  }

  std::string to_string() const;

 private:
  constexpr Cardinal(bool infinite, std::uint64_t v) : infinite_(infinite), value_(v) {}

  bool infinite_ = false;
  std::uint64_t value_ = 0;
};

inline constexpr Cardinal kZero = Cardinal::fin(0);
inline constexpr Cardinal kAleph0 = Cardinal::aleph(0);

// Throws CapacityError on finite overflow.
Cardinal card_add(Cardinal a, Cardinal b);

std::strong_ordering card_compare(Cardinal a, Cardinal b);

// Finite multiple n*a, checked.
Cardinal card_scale(Cardinal a, std::uint64_t n);

/// Countable family of cardinal terms: either an explicit finite list, or
/// infinitely many nonzero terms summarized by their supremum.
struct CountableFamily {
  std::span<const Cardinal> terms;
  bool infinitely_many = false;
  Cardinal supremum{};
};

Cardinal card_countable_sum(const CountableFamily& family);

}  // namespace opequiv
