#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace flrw {

// Non-negative-or-finite real extended by +infinity. Used for life spans,
// exponents and horizon times that may be unbounded.
class ExtendedReal {
 public:
  constexpr ExtendedReal() = default;
  constexpr explicit ExtendedReal(double v) : value_(v), finite_(true) {}

  static constexpr ExtendedReal infinity() {
    ExtendedReal r;
    r.finite_ = false;
    return r;
  }
  // Maps IEEE +inf onto the infinite tag; anything else must be finite.
  static ExtendedReal from_double(double v);
  static ExtendedReal parse(std::string_view text);

  constexpr bool is_finite() const { return finite_; }
  constexpr bool is_infinite() const { return !finite_; }
  double value() const;
  constexpr double value_or(double fallback) const { return finite_ ? value_ : fallback; }
  // IEEE view for arithmetic inside numerics.
  double as_double() const;

  std::string to_string() const;

  friend bool operator==(const ExtendedReal& a, const ExtendedReal& b);
  friend std::partial_ordering operator<=>(const ExtendedReal& a, const ExtendedReal& b);
  friend bool operator==(const ExtendedReal& a, double b) { return a == ExtendedReal(b); }
  friend std::partial_ordering operator<=>(const ExtendedReal& a, double b) {
    return a <=> ExtendedReal(b);
  }

 private:
  double value_ = 0.0;
  bool finite_ = true;
};

ExtendedReal min(const ExtendedReal& a, const ExtendedReal& b);
ExtendedReal max(const ExtendedReal& a, const ExtendedReal& b);

// Shortest round-trip decimal (17 significant digits).
std::string format_double(double v);

}  // namespace flrw
