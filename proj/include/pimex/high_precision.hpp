#pragma once

// Extended-precision scalar for checks whose answer is below double
// round-off, e.g. spectra of nilpotent stability matrices. Eigen picks up
// NumTraits through boost/multiprecision/eigen.hpp.

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/eigen.hpp>

namespace pimex {

using HighPrecision = boost::multiprecision::cpp_bin_float_100;

}  // namespace pimex
