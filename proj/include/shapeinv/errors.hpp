#pragma once

#include <stdexcept>
#include <string>

namespace shapeinv {

// Input could not be parsed (bad file, bad header, bad row).
class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Shape carries no usable mass/spread (zero weight, zero covariance trace).
class DegenerateShapeError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Dimensions, orders, catalogs or normalization flags do not line up.
class MismatchError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace shapeinv
