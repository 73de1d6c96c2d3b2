#include "hglue/cutoff.hpp"

namespace hglue {

CutoffJet cutoff(double r) {
  if (r <= kCutoffInner) return {1.0, 0.0, 0.0};
  if (r >= kCutoffOuter) return {0.0, 0.0, 0.0};
  const double x = 2.0 * r - 1.0;
  const double x2 = x * x;
  const double s = x2 * x * (10.0 + x * (-15.0 + 6.0 * x));
  const double ds = 30.0 * x2 * (1.0 - x) * (1.0 - x);
  const double dds = 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x);
  return {1.0 - s, -2.0 * ds, -4.0 * dds};
}

}  // namespace hglue
