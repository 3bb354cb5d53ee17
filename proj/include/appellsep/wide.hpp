#pragma once

#include <boost/multiprecision/float128.hpp>

namespace appellsep {

// Quad precision for finite differences: keeps the roundoff term eps/h^2 far
// below the truncation error at the default step.
using Wide = boost::multiprecision::float128;

}  // namespace appellsep
