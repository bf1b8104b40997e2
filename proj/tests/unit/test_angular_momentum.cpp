#include <doctest.h>

#include <cmath>
#include <map>
#include <tuple>

#include <Eigen/Dense>

#include "ejuggle/angular_momentum.hpp"

using namespace ejuggle;

namespace {

HalfInt h(int twice) { return HalfInt::from_twice(twice); }

// Clebsch-Gordan table built from ladder operators on the product basis,
// keyed by (2m1, 2m2, 2J, 2M).
using CgTable = std::map<std::tuple<int, int, int, int>, double>;

CgTable ladder_clebsch_gordan(int tj1, int tj2) {
  const int n1 = tj1 + 1, n2 = tj2 + 1, n = n1 * n2;
  // Basis index a * n2 + b has 2m1 = tj1 - 2a, 2m2 = tj2 - 2b.
  auto lowering = [](int tj) {
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(tj + 1, tj + 1);
    for (int a = 0; a + 1 <= tj; ++a) {
      const double j = 0.5 * tj, m = 0.5 * (tj - 2 * a);
      l(a + 1, a) = std::sqrt((j + m) * (j - m + 1));
    }
    return l;
  };
  const Eigen::MatrixXd l1 = lowering(tj1), l2 = lowering(tj2);
  Eigen::MatrixXd lower = Eigen::MatrixXd::Zero(n, n);
  for (int a = 0; a < n1; ++a)
    for (int b = 0; b < n2; ++b)
      for (int c = 0; c < n1; ++c)
        for (int d = 0; d < n2; ++d)
          lower(c * n2 + d, a * n2 + b) = l1(c, a) * (b == d ? 1.0 : 0.0) + (a == c ? 1.0 : 0.0) * l2(d, b);
  auto twice_m = [&](int idx) { return (tj1 - 2 * (idx / n2)) + (tj2 - 2 * (idx % n2)); };

  std::map<std::pair<int, int>, Eigen::VectorXd> states;  // (2J, 2M)
  CgTable table;
  for (int tJ = tj1 + tj2; tJ >= std::abs(tj1 - tj2); tJ -= 2) {
    // Stretched state: the M = J subspace orthogonal to every larger J.
    std::vector<int> sub;
    for (int k = 0; k < n; ++k)
      if (twice_m(k) == tJ) sub.push_back(k);
    Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(n, static_cast<int>(sub.size()));
    for (std::size_t k = 0; k < sub.size(); ++k) basis(sub[k], static_cast<int>(k)) = 1.0;
    Eigen::MatrixXd taken(n, 0);
    for (const auto& [key, v] : states) {
      if (key.second == tJ) {
        taken.conservativeResize(n, taken.cols() + 1);
        taken.col(taken.cols() - 1) = v;
      }
    }
    Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(n, n) - taken * taken.transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(proj * basis, Eigen::ComputeThinU);
    Eigen::VectorXd top = svd.matrixU().col(0);
    // Condon-Shortley: the component with m1 = j1 is positive.
    for (int k = 0; k < n; ++k) {
      if (k / n2 == 0 && std::abs(top[k]) > 1e-12) {
        if (top[k] < 0) top = -top;
        break;
      }
    }
    Eigen::VectorXd v = top.normalized();
    for (int tM = tJ; tM >= -tJ; tM -= 2) {
      states[{tJ, tM}] = v;
      for (int k = 0; k < n; ++k) table[{tj1 - 2 * (k / n2), tj2 - 2 * (k % n2), tJ, tM}] = v[k];
      if (tM > -tJ) v = (lower * v).normalized();
    }
  }
  return table;
}

}  // namespace

TEST_CASE("HalfInt parses integers and halves") {
  CHECK(HalfInt::parse("3/2").twice() == 3);
  CHECK(HalfInt::parse("-1/2").twice() == -1);
  CHECK(HalfInt::parse("2").twice() == 4);
  CHECK(HalfInt::parse("0").twice() == 0);
  CHECK(HalfInt::parse("5/2").multiplicity() == 6);
  CHECK_THROWS(HalfInt::parse("1/3"));
  CHECK_THROWS(HalfInt::parse("abc"));
  CHECK_THROWS(HalfInt::parse(""));
  CHECK(HalfInt::parse("3/2").to_string() == "3/2");
}

TEST_CASE("wigner3j known values") {
  CHECK(wigner3j(h(2), h(2), h(0), h(0), h(0), h(0)) == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-14));
  // (1/2 1/2 1; 1/2 -1/2 0) = 1/sqrt(6)
  CHECK(wigner3j(h(1), h(1), h(2), h(1), h(-1), h(0)) == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-14));
}

TEST_CASE("wigner3j selection rules give exact zeros") {
  CHECK(wigner3j(h(1), h(2), h(1), h(1), h(2), h(-3)) == 0.0);  // |m3| > j3
  CHECK(wigner3j(h(1), h(2), h(5), h(1), h(0), h(-1)) == 0.0);  // triangle
  CHECK(wigner3j(h(1), h(2), h(3), h(1), h(0), h(1)) == 0.0);   // m-sum
}

TEST_CASE("wigner3j rejects parity mismatches") {
  CHECK_THROWS_AS(wigner3j(h(1), h(2), h(1), h(0), h(0), h(0)), AngularMomentumError);
  CHECK_THROWS_AS(clebsch_gordan(h(2), h(1), h(1), h(1), h(3), h(2)), AngularMomentumError);
  CHECK_THROWS_AS(wigner3j(h(-2), h(2), h(0), h(0), h(0), h(0)), AngularMomentumError);
}

TEST_CASE("clebsch_gordan examples") {
  CHECK(clebsch_gordan(h(1), h(1), h(1), h(-1), h(0), h(0)) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(clebsch_gordan(h(1), h(1), h(1), h(1), h(2), h(0)) == 0.0);
  for (int tj = 0; tj <= 5; ++tj) CHECK(clebsch_gordan(h(tj), h(tj), h(0), h(0), h(tj), h(tj)) == doctest::Approx(1.0));
}

TEST_CASE("clebsch_gordan agrees with a ladder-operator construction for j <= 5/2") {
  int compared = 0;
  double worst = 0.0;
  for (int tj1 = 0; tj1 <= 5; ++tj1) {
    for (int tj2 = 0; tj2 <= 5; ++tj2) {
      const CgTable oracle = ladder_clebsch_gordan(tj1, tj2);
      for (const auto& [key, value] : oracle) {
        const auto [tm1, tm2, tJ, tM] = key;
        const double got = clebsch_gordan(h(tj1), h(tm1), h(tj2), h(tm2), h(tJ), h(tM));
        worst = std::max(worst, std::abs(got - value));
        ++compared;
        // 3j from the same oracle: (-1)^{j1-j2+M} / sqrt(2J+1) <j1 m1 j2 m2|J M>.
        const int phase_twice = tj1 - tj2 + tM;
        const double sign = (phase_twice / 2) % 2 == 0 ? 1.0 : -1.0;
        const double w = wigner3j(h(tj1), h(tj2), h(tJ), h(tm1), h(tm2), h(-tM));
        worst = std::max(worst, std::abs(w - sign * value / std::sqrt(tJ + 1.0)));
      }
    }
  }
  CHECK(compared > 500);
  CHECK(worst < 1e-12);
}

TEST_CASE("3j orthogonality and permutation symmetry on j <= 5/2") {
  double worst_orth = 0.0, worst_sym = 0.0;
  for (int a = 0; a <= 5; ++a) {
    for (int b = 0; b <= 5; ++b) {
      for (int ma = -a; ma <= a; ma += 2) {
        for (int mb = -b; mb <= b; mb += 2) {
          double sum = 0.0;
          for (int c = std::abs(a - b); c <= a + b; c += 2) {
            const int mc = -ma - mb;
            if (std::abs(mc) > c) continue;
            const double w = wigner3j(h(a), h(b), h(c), h(ma), h(mb), h(mc));
            sum += (c + 1) * w * w;
            const double cyclic = wigner3j(h(b), h(c), h(a), h(mb), h(mc), h(ma));
            const double odd = wigner3j(h(b), h(a), h(c), h(mb), h(ma), h(mc));
            const double sign = ((a + b + c) / 2) % 2 == 0 ? 1.0 : -1.0;
            const double flipped = wigner3j(h(a), h(b), h(c), h(-ma), h(-mb), h(-mc));
            worst_sym = std::max({worst_sym, std::abs(cyclic - w), std::abs(odd - sign * w),
                                  std::abs(flipped - sign * w)});
          }
          worst_orth = std::max(worst_orth, std::abs(sum - 1.0));
        }
      }
    }
  }
  CHECK(worst_orth < 1e-12);
  CHECK(worst_sym < 1e-14);
}
