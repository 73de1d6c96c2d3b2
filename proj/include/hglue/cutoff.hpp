#pragma once

namespace hglue {

struct CutoffJet {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// chi(r) = 1 - S(2r - 1) on [1/2, 1] with the quintic smoothstep
/// S(x) = 6x^5 - 15x^4 + 10x^3; chi = 1 below 1/2 and 0 above 1. C^2.
CutoffJet cutoff(double r);

inline constexpr double kCutoffInner = 0.5;
inline constexpr double kCutoffOuter = 1.0;

}  // namespace hglue
