#pragma once

namespace appellsep {

// Every closed form has the shape
//   V = M * |P|^(-g) * (seed + w(g) * S * F4(1, 2-g; 2, 1-g; X, Y))
// `printed` is the literal transcription; `corrected` moves the geometry
// constants and extra coordinate powers to where the exact residual test
// puts them (see docs/calibration.md).
enum class FormVariant { printed, corrected };
enum class SeriesWeight { one, one_minus_gamma };
enum class Family { ellipse, jacobi, curved, symmetric3d, symmetric_n };

struct Convention {
  int eps_x = 1;  // sign applied to the first series argument
  int eps_y = 1;  // sign applied to the second series argument
  SeriesWeight weight = SeriesWeight::one_minus_gamma;
  FormVariant variant = FormVariant::corrected;

  friend bool operator==(const Convention&, const Convention&) = default;
};

// Committed output of `calibrate`. The overall constant relating a closed
// form to its Laurent family is kappa(g) = s^(g-1) |p0|^(-g), p0 the
// coefficient of the prefactor monomial P, s the curvature sign (curved
// family) or 1.
inline constexpr Convention kCalibrated[] = {
    {+1, +1, SeriesWeight::one_minus_gamma, FormVariant::corrected},  // ellipse
    {+1, +1, SeriesWeight::one_minus_gamma, FormVariant::corrected},  // jacobi
    {+1, +1, SeriesWeight::one_minus_gamma, FormVariant::corrected},  // curved
    {+1, +1, SeriesWeight::one_minus_gamma, FormVariant::corrected},  // symmetric3d
    {+1, +1, SeriesWeight::one_minus_gamma, FormVariant::corrected},  // symmetric_n
};

constexpr Convention calibrated_convention(Family f) { return kCalibrated[static_cast<int>(f)]; }

constexpr const char* family_name(Family f) {
  switch (f) {
    case Family::ellipse: return "ellipse";
    case Family::jacobi: return "jacobi";
    case Family::curved: return "curved";
    case Family::symmetric3d: return "symmetric3d";
    case Family::symmetric_n: return "symmetric-n";
  }
  return "?";
}

}  // namespace appellsep
