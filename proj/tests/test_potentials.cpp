#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <vector>

#include "appellsep/calibration_table.hpp"
#include "appellsep/potentials.hpp"
#include "appellsep/sampling.hpp"

using namespace appellsep;

namespace {

LaurentPoly xy(int a, int b, Rational c = 1) { return LaurentPoly::monomial(2, {a, b}, c); }

LaurentPoly swap_xy(const LaurentPoly& p) {
  const std::array<std::size_t, 2> t{1, 0};
  return embed(p, 2, std::span<const std::size_t>(t));
}

Rational r(long p, long q = 1) { return make_rational(p, q); }

const Convention kEllipse = calibrated_convention(Family::ellipse);

}  // namespace

TEST(EllipseLaurent, MatchesDirectExpansion) {
  // sympy expansion of the finite double sum, k = 3, lambda = 3/2
  const LaurentPoly expect = xy(4, -6, r(4, 9)) + xy(2, -4, r(4, 9)) - xy(2, -6, r(4, 3)) + xy(0, -6);
  EXPECT_EQ(ellipse_vk_laurent(EllipseFamilySpec{3, r(3, 2)}), expect);
  EXPECT_EQ(ellipse_vk_laurent(EllipseFamilySpec{2, 1, 1, Branch::w}), xy(-4, 0) + xy(-4, 2));
  EXPECT_EQ(ellipse_vk_laurent(EllipseFamilySpec{1, 1}), xy(0, -2));
  EXPECT_EQ(ellipse_vk_laurent(EllipseFamilySpec{2, 1, r(1, 20)}), xy(0, -4, r(1, 20)) - xy(2, -4, r(1, 20)));
}

TEST(EllipseLaurent, RejectsBadParameters) {
  EXPECT_THROW(ellipse_vk_laurent(EllipseFamilySpec{0, 1}), InvalidParameter);
  EXPECT_THROW(ellipse_vk_laurent(EllipseFamilySpec{r(5, 2), 1}), InvalidParameter);
  EXPECT_THROW(ellipse_vk_laurent(EllipseFamilySpec{2, 0}), InvalidParameter);
}

TEST(EllipseLaurent, SwapSymmetry) {
  for (long k = 1; k <= 8; ++k) {
    for (const Rational& lam : {Rational(1), r(3, 2), r(-2)}) {
      const auto w = ellipse_vk_laurent(EllipseFamilySpec{k, lam, 1, Branch::w});
      const auto v = ellipse_vk_laurent(EllipseFamilySpec{k, -lam, 1, Branch::v});
      EXPECT_EQ(w, swap_xy(v)) << "k=" << k;
    }
  }
}

TEST(Recurrence, FirstStep) {
  const auto t = ellipse_recurrence_coeffs(2, 10);
  EXPECT_EQ(t.entries.size(), 1u);
  EXPECT_EQ(t.coefficient(2, 0), r(-1));
  EXPECT_EQ(t.to_laurent(), xy(0, -4) - xy(2, -4));
}

TEST(Recurrence, AgreesWithLaurentFamilyAtUnitLambda) {
  for (long g = 2; g <= 8; ++g)
    EXPECT_EQ(ellipse_recurrence_coeffs(g, 20).to_laurent(), ellipse_vk_laurent(EllipseFamilySpec{g, 1})) << g;
}

TEST(Recurrence, MatchesSeriesCoefficientsForRationalExponent) {
  // a_{2m+2, 2n-2g} = (1-g) (-1)^n c_{m,n}, c the F4(1, 2-g; 2, 1-g) coefficients
  const Rational g = r(7, 3);
  const auto table = ellipse_recurrence_coeffs(g, 6);
  const auto c = f4_coefficients(F4ParamsExact{1, 2 - g, 2, 1 - g}, 6);
  for (int t = 0; t <= 6; ++t) {
    for (int m = 0; m <= t; ++m) {
      const int n = t - m;
      const Rational expect = (1 - g) * c[static_cast<std::size_t>(t)][static_cast<std::size_t>(m)] * (n % 2 == 0 ? 1 : -1);
      EXPECT_EQ(table.at(m, n), expect) << m << "," << n;
    }
  }
}

TEST(ClosedForm, ExponentTwoIsElementary) {
  const SeriesForm f = ellipse_form(EllipseFamilySpec{2, 1}, kEllipse);
  SeriesEvaluator<double> ev(f, 2.0, 40);
  const std::array<double, 2> q{0.3, 0.45};
  EXPECT_NEAR(ev(std::span<const double>(q)), (1 - 0.09) / std::pow(0.45, 4), 1e-12);
  EXPECT_EQ(expand_exact(f, 2), xy(0, -4) - xy(2, -4));
}

// Values from an independent sympy evaluation of the closed forms.
TEST(ClosedForm, PointValuesAgainstOracle) {
  const std::array<Rational, 2> p2{r(1, 3), r(-2, 5)};
  const std::array<Rational, 3> p3{r(1, 2), r(2, 3), r(-3, 4)};
  const Rational ell[] = {r(15625, 192), r(9855625, 13824), r(6209535625, 995328)};
  const Rational jac[] = {r(3625, 9), r(2685725, 324), r(1990984225, 11664)};
  const Rational cur[] = {r(5248, 729), r(953984, 59049), r(179314816, 4782969)};
  const Rational sym[] = {r(6016, 729), r(1390208, 59049), r(289093504, 4782969)};
  for (long g = 2; g <= 4; ++g) {
    const std::size_t i = static_cast<std::size_t>(g - 2);
    EXPECT_EQ(eval_exact(ellipse_form(EllipseFamilySpec{g, r(3, 2)}, kEllipse), g, std::span<const Rational>(p2)), ell[i]);
    EXPECT_EQ(eval_exact(jacobi_form(JacobiFamilySpec{g, 5, 3, 2}, calibrated_convention(Family::jacobi)), g,
                         std::span<const Rational>(p3)),
              jac[i]);
    EXPECT_EQ(eval_exact(curved_form(CurvedFamilySpec{g, 3, 2, 1, -1}, calibrated_convention(Family::curved)), g,
                         std::span<const Rational>(p3)),
              cur[i]);
    EXPECT_EQ(eval_exact(symmetric3d_form(EllipsoidFamilySpec{g, 3, 3, 1}, calibrated_convention(Family::symmetric3d)), g,
                         std::span<const Rational>(p3)),
              sym[i]);
  }
}

TEST(ClosedForm, EllipseEqualsKappaTimesLaurent) {
  for (long g = 2; g <= 4; ++g) {
    const SeriesForm f = ellipse_form(EllipseFamilySpec{g, r(3, 2)}, kEllipse);
    EXPECT_EQ(kappa(f, g), pow_int(r(3, 2), g));
    EXPECT_EQ(expand_exact(f, g), ellipse_vk_laurent(EllipseFamilySpec{g, r(3, 2)}) * kappa(f, g));
  }
}

TEST(ClosedForm, WBranchIsCoordinateSwap) {
  const SeriesForm w = ellipse_form(EllipseFamilySpec{3, r(3, 2), 1, Branch::w}, kEllipse);
  const SeriesForm v = ellipse_form(EllipseFamilySpec{3, r(-3, 2)}, kEllipse);
  EXPECT_EQ(expand_exact(w, 3), swap_xy(expand_exact(v, 3)));
}

TEST(ClosedForm, SymmetricNReducesToThreeDimensions) {
  for (long g = 2; g <= 4; ++g) {
    const auto n3 = expand_exact(symmetric_n_form(SymmetricNFamilySpec{g, 3, 3, 1}, calibrated_convention(Family::symmetric_n)), g);
    const auto s3 = expand_exact(symmetric3d_form(EllipsoidFamilySpec{g, 3, 3, 1}, calibrated_convention(Family::symmetric3d)), g);
    EXPECT_EQ(n3, s3);
  }
}

TEST(ClosedForm, OutsideDomainIsRejectedForNonTerminatingSeries) {
  const SeriesForm f = ellipse_form(EllipseFamilySpec{r(27, 10), 1}, kEllipse);
  SeriesEvaluator<double> ev(f, 2.7, 40);
  const std::array<double, 2> bad{0.9, 0.9}, good{0.2, 0.5};
  EXPECT_THROW(ev(std::span<const double>(bad)), OutOfDomain);
  EXPECT_NO_THROW(ev(std::span<const double>(good)));
}

TEST(ClosedForm, DegenerateGeometries) {
  EXPECT_THROW(curved_form(CurvedFamilySpec{2, 2, 2, 1, 1}, kEllipse), DegenerateGeometry);
  EXPECT_THROW(curved_form(CurvedFamilySpec{2, 3, 2, 1, 0}, kEllipse), InvalidParameter);
  EXPECT_THROW(symmetric3d_form(EllipsoidFamilySpec{2, 4, 2, 1}, kEllipse), DegenerateGeometry);
  EXPECT_THROW(jacobi_form(JacobiFamilySpec{2, 3, 3, 1}, kEllipse), DegenerateGeometry);
  EXPECT_THROW(symmetric_n_form(SymmetricNFamilySpec{2, 2, 3, 1}, kEllipse), InvalidParameter);
}

TEST(Pmn, CollapsesOnSymmetricAxes) {
  const Rational b = r(2, 7);
  EXPECT_EQ(pmn_poly(1, 1, 2, b, -b), 3 * b * b);
  EXPECT_EQ(pmn_symmetric(1, 1, 2, b), 3 * b * b);
  EXPECT_EQ(pmn_symmetric(0, 0, 3, b), Rational(0));
  EXPECT_EQ(pmn_poly(0, 0, 3, b, -b), Rational(0));
  for (long m = 0; m <= 8; ++m)
    for (long n = 0; n <= 8; ++n)
      for (long k = 0; k <= 8; ++k) ASSERT_EQ(pmn_poly(m, n, k, b, -b), pmn_symmetric(m, n, k, b));
}

TEST(Sampling, AdmissiblePointsRespectDomainAndPoles) {
  const SeriesForm f = jacobi_form(JacobiFamilySpec{r(3, 10), 5, 3, 2}, calibrated_convention(Family::jacobi));
  const auto pts = admissible_points(f, false, 20, 42);
  ASSERT_EQ(pts.size(), 20u);
  const CompiledPoly<double> X(f.x_arg), Y(f.y_arg);
  for (const auto& q : pts) {
    EXPECT_GE(std::abs(q[2]), 0.1);
    const std::span<const double> s(q);
    EXPECT_LE(std::sqrt(std::abs(X(s))) + std::sqrt(std::abs(Y(s))), 0.6);
  }
  EXPECT_EQ(admissible_points(f, false, 5, 42), admissible_points(f, false, 5, 42));
}
