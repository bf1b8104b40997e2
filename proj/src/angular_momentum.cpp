#include "ejuggle/angular_momentum.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>

namespace ejuggle {

namespace {

using Int = __int128;

Int gcd(Int a, Int b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    Int t = a % b;
    a = b;
    b = t;
  }
  return a;
}

// Exact rational with a positive denominator, always reduced.
struct Rational {
  Int num = 0;
  Int den = 1;

  void reduce() {
    Int g = gcd(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    if (den < 0) {
      num = -num;
      den = -den;
    }
  }

  Rational& operator+=(const Rational& o) {
    Int g = gcd(den, o.den);
    Int lhs_scale = o.den / g;
    num = num * lhs_scale + o.num * (den / g);
    den *= lhs_scale;
    reduce();
    return *this;
  }

  Rational& operator*=(const Rational& o) {
    // Cross-reduce first to keep intermediates small.
    Int g1 = gcd(num, o.den);
    Int g2 = gcd(o.num, den);
    num = (num / g1) * (o.num / g2);
    den = (den / g2) * (o.den / g1);
    reduce();
    return *this;
  }

  long double to_long_double() const {
    return static_cast<long double>(num) / static_cast<long double>(den);
  }
};

Int factorial(int n) {
  Int f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// n is a doubled quantity known to be even and non-negative.
int half(int twice) { return twice / 2; }

void check_pair(HalfInt j, HalfInt m, const char* name) {
  if (j.twice() < 0) {
    throw AngularMomentumError(std::string(name) + ": negative angular momentum " + j.to_string());
  }
  if (j.twice() > kMaxTwiceJ) {
    throw AngularMomentumError(std::string(name) + ": j = " + j.to_string() +
                               " exceeds the supported range");
  }
  if (std::abs(j.twice() - m.twice()) % 2 != 0) {
    throw AngularMomentumError(std::string(name) + ": m = " + m.to_string() +
                               " has the wrong parity for j = " + j.to_string());
  }
}

}  // namespace

HalfInt HalfInt::parse(std::string_view text) {
  auto parse_int = [&](std::string_view s) {
    int v = 0;
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw AngularMomentumError("cannot parse angular momentum '" + std::string(text) + "'");
    }
    return v;
  };
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return from_int(parse_int(text));
  int numerator = parse_int(text.substr(0, slash));
  int denominator = parse_int(text.substr(slash + 1));
  if (denominator == 1) return from_int(numerator);
  if (denominator != 2) {
    throw AngularMomentumError("angular momentum '" + std::string(text) + "' is not a half-integer");
  }
  return from_twice(numerator);
}

std::string HalfInt::to_string() const {
  if (is_integer()) return std::to_string(twice_ / 2);
  return std::to_string(twice_) + "/2";
}

double wigner3j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt m1, HalfInt m2, HalfInt m3) {
  check_pair(j1, m1, "wigner3j(j1, m1)");
  check_pair(j2, m2, "wigner3j(j2, m2)");
  check_pair(j3, m3, "wigner3j(j3, m3)");

  const int a = j1.twice(), b = j2.twice(), c = j3.twice();
  const int x = m1.twice(), y = m2.twice(), z = m3.twice();

  if (x + y + z != 0) return 0.0;
  if (std::abs(x) > a || std::abs(y) > b || std::abs(z) > c) return 0.0;
  if (c < std::abs(a - b) || c > a + b) return 0.0;
  if ((a + b + c) % 2 != 0) return 0.0;

  // Triangle coefficient and the projection factorials, all under the root.
  Rational root{factorial(half(a + b - c)) * factorial(half(a - b + c)) * factorial(half(-a + b + c)),
                factorial(half(a + b + c) + 1)};
  root.reduce();
  const std::array<int, 6> projections{a + x, a - x, b + y, b - y, c + z, c - z};
  for (int p : projections) root *= Rational{factorial(half(p)), 1};

  // Racah sum over k where every factorial argument is non-negative.
  const int t1 = half(c - b + x);
  const int t2 = half(c - a - y);
  const int t3 = half(a + b - c);
  const int t4 = half(a - x);
  const int t5 = half(b + y);
  const int k_min = std::max({0, -t1, -t2});
  const int k_max = std::min({t3, t4, t5});

  Rational sum;
  for (int k = k_min; k <= k_max; ++k) {
    Int den = factorial(k) * factorial(t1 + k) * factorial(t2 + k) * factorial(t3 - k) *
              factorial(t4 - k) * factorial(t5 - k);
    Rational term{(k % 2 == 0) ? Int(1) : Int(-1), den};
    sum += term;
  }
  if (sum.num == 0) return 0.0;

  // Overall phase (-1)^(j1 - j2 - m3).
  const int phase_exp = half(a - b - z);
  const long double sign = (phase_exp % 2 == 0) ? 1.0L : -1.0L;
  return static_cast<double>(sign * std::sqrt(root.to_long_double()) * sum.to_long_double());
}

double clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt J, HalfInt M) {
  check_pair(j1, m1, "clebsch_gordan(j1, m1)");
  check_pair(j2, m2, "clebsch_gordan(j2, m2)");
  check_pair(J, M, "clebsch_gordan(J, M)");
  if (m1 + m2 != M) return 0.0;
  // <j1 m1; j2 m2 | J M> = (-1)^(j1 - j2 + M) sqrt(2J + 1) (j1 j2 J; m1 m2 -M)
  const int phase_exp = half(j1.twice() - j2.twice() + M.twice());
  const double sign = (phase_exp % 2 == 0) ? 1.0 : -1.0;
  return sign * std::sqrt(static_cast<double>(J.multiplicity())) * wigner3j(j1, j2, J, m1, m2, -M);
}

}  // namespace ejuggle
