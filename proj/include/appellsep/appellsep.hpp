#pragma once

#include "appellsep/billiard.hpp"
#include "appellsep/calibration.hpp"
#include "appellsep/calibration_table.hpp"
#include "appellsep/errors.hpp"
#include "appellsep/fd.hpp"
#include "appellsep/hypergeom.hpp"
#include "appellsep/laurent.hpp"
#include "appellsep/mechanics.hpp"
#include "appellsep/potentials.hpp"
#include "appellsep/rational.hpp"
#include "appellsep/residuals.hpp"
#include "appellsep/sampling.hpp"

namespace appellsep {
inline constexpr const char* kVersion = "0.1.0";
}
