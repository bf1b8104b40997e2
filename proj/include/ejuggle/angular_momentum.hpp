#pragma once

#include <compare>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ejuggle {

/// Angular momentum quantum number stored as twice its value, so that
/// half-integers compare exactly.
class HalfInt {
 public:
  constexpr HalfInt() = default;

  static constexpr HalfInt from_twice(int twice) { return HalfInt(twice); }
  static constexpr HalfInt from_int(int value) { return HalfInt(2 * value); }

  /// Parses "3/2", "-1/2", "1" or "0".
  static HalfInt parse(std::string_view text);

  constexpr int twice() const { return twice_; }
  constexpr double value() const { return 0.5 * twice_; }
  constexpr bool is_integer() const { return twice_ % 2 == 0; }

  /// Number of projections 2j+1.
  constexpr int multiplicity() const { return twice_ + 1; }

  constexpr HalfInt operator-() const { return HalfInt(-twice_); }
  constexpr HalfInt operator+(HalfInt o) const { return HalfInt(twice_ + o.twice_); }
  constexpr HalfInt operator-(HalfInt o) const { return HalfInt(twice_ - o.twice_); }
  constexpr auto operator<=>(const HalfInt&) const = default;

  std::string to_string() const;

 private:
  constexpr explicit HalfInt(int twice) : twice_(twice) {}
  int twice_ = 0;
};

/// Thrown for arguments that do not describe a valid (j, m) pairing.
class AngularMomentumError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Largest 2j accepted by the exact evaluators. Factorials are accumulated
/// as 128-bit rationals, which stays exact well past this bound.
inline constexpr int kMaxTwiceJ = 16;

/// Wigner 3j symbol
///   ( j1 j2 j3 )
///   ( m1 m2 m3 )
/// evaluated with the Racah single-sum formula in exact rational arithmetic.
/// Returns exactly 0 when a selection rule fails (m-sum, triangle, |m| > j).
/// Throws AngularMomentumError when some m is not in the parity class of its
/// j, when j < 0, or when 2j exceeds kMaxTwiceJ.
double wigner3j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt m1, HalfInt m2, HalfInt m3);

/// Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M> (Condon-Shortley phase).
double clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt J, HalfInt M);

}  // namespace ejuggle
