#pragma once

#include "georank/embedded.hpp"
#include "georank/quotient.hpp"

#include <string>

namespace georank {

struct SandwichCoefficients {
  double alpha = 0.0;
  double beta = 0.0;
  Geometry geometry = Geometry::PsdQ1;
  Metric metric = Metric::Q1Identity;
  std::string closed_form;  // formula the values were evaluated from
};

// Differential of the factor map restricted to horizontal vectors, in the block
// coordinates of Z.base. With check = false the horizontality test is skipped, for vectors that
// are horizontal by construction but may be tiny.
EmbeddedTangent forward_map(const QuotientPoint& Z, const HorizontalVector& theta, Metric m,
                            bool check = true);

// Horizontal vector whose image under forward_map is xi (xi in the blocks of Z.base).
HorizontalVector inverse_map(const QuotientPoint& Z, const EmbeddedTangent& xi, Metric m);

SandwichCoefficients spectrum_bounds(const QuotientPoint& Z, Metric m);

}  // namespace georank
