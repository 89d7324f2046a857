#pragma once

#include <string>

#include "tbie/common.hpp"

namespace tbie {

enum class Classification { True, Fictitious, Unclassified };

inline const char* to_string(Classification c) {
  switch (c) {
    case Classification::True: return "True";
    case Classification::Fictitious: return "Fictitious";
    case Classification::Unclassified: return "unclassified";
  }
  return "?";
}

/// Open axis-aligned rectangle in the complex plane.
struct Rect {
  double re_min = 0.0;
  double re_max = 0.0;
  double im_min = 0.0;
  double im_max = 0.0;

  bool contains(Complex z) const {
    return z.real() > re_min && z.real() < re_max && z.imag() > im_min && z.imag() < im_max;
  }
  bool contains_zero() const { return re_min <= 0.0 && re_max >= 0.0 && im_min <= 0.0 && im_max >= 0.0; }
};

struct EigenResult {
  Complex lambda;
  /// Fourier order for oracle roots, tile index for contour-solver roots.
  int index = 0;
  Classification classification = Classification::Unclassified;
  double residual = 0.0;
  /// False when the refinement did not converge; the root is then unrefined.
  bool converged = true;
  /// Number of coalesced copies (the pair +-n for oracle roots with n > 0).
  int multiplicity = 1;
};

}  // namespace tbie
