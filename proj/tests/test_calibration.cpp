#include <gtest/gtest.h>

#include "appellsep/calibration.hpp"

using namespace appellsep;

class CalibrationFamilies : public ::testing::TestWithParam<Family> {};

TEST_P(CalibrationFamilies, ReproducesCommittedConvention) {
  const Family f = GetParam();
  const auto res = calibrate_signs(f);
  EXPECT_EQ(res.candidates.size(), detail::has_printed_variant(f) ? 16u : 8u);
  ASSERT_EQ(res.passing.size(), 1u) << family_name(f);
  EXPECT_TRUE(res.matches_committed());
  EXPECT_FALSE(res.kappa.empty());
  for (const auto& k : res.kappa) EXPECT_TRUE(k.holds) << k.geometry << " g=" << k.exponent;
  EXPECT_TRUE(res.reduction_holds);
}

INSTANTIATE_TEST_SUITE_P(All, CalibrationFamilies,
                         ::testing::Values(Family::ellipse, Family::jacobi, Family::curved, Family::symmetric3d,
                                           Family::symmetric_n),
                         [](const auto& info) {
                           std::string s = family_name(info.param);
                           for (auto& ch : s)
                             if (ch == '-') ch = '_';
                           return s;
                         });

TEST(Calibration, FlippedSignsFail) {
  const auto cases = detail::reference_cases(Family::ellipse);
  Convention c = calibrated_convention(Family::ellipse);
  EXPECT_TRUE(convention_passes(cases, c, {2, 3}));
  c.eps_y = -1;
  EXPECT_FALSE(convention_passes(cases, c, {2, 3}));
  c = calibrated_convention(Family::ellipse);
  c.weight = SeriesWeight::one;
  EXPECT_FALSE(convention_passes(cases, c, {2, 3}));
}

TEST(Calibration, PrintedVariantsFail) {
  for (Family f : {Family::jacobi, Family::curved}) {
    Convention c = calibrated_convention(f);
    c.variant = FormVariant::printed;
    EXPECT_FALSE(convention_passes(detail::reference_cases(f), c, {2, 3})) << family_name(f);
  }
}

TEST(Calibration, KappaCarriesCurvatureSign) {
  const Convention c = calibrated_convention(Family::curved);
  for (long g = 2; g <= 5; ++g) {
    const Rational pos = kappa(curved_form(CurvedFamilySpec{g, 3, 2, 1, 1}, c), g);
    const Rational neg = kappa(curved_form(CurvedFamilySpec{g, 3, 2, 1, -1}, c), g);
    EXPECT_GT(pos, 0);
    EXPECT_EQ(neg, (g % 2 == 0) ? Rational(-pos) : pos);
  }
}

TEST(Calibration, Proportionality) {
  const LaurentPoly p = LaurentPoly::monomial(2, {0, -4}) - LaurentPoly::monomial(2, {2, -4});
  EXPECT_EQ(proportionality(p * make_rational(9, 4), p), make_rational(9, 4));
  EXPECT_FALSE(proportionality(p + LaurentPoly::monomial(2, {2, -2}), p).has_value());
}
