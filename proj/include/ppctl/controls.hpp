#pragma once

#include <cstddef>
#include <vector>

namespace ppctl {

enum class ControlMode { kQuality, kQuantity };

const char* to_string(ControlMode m);

/// Admissible interval [lo, hi] for a control value, lo >= 0.
struct Bounds {
  double lo = 0.0;
  double hi = 10.0;

  void validate() const;  // throws InvalidInput
  double clamp(double v) const;
};

/// Open-loop control values on the simulation grid. In quality mode the
/// values are alpha and xi stays at its ModelParams value; in quantity mode
/// the values are xi and alpha stays fixed.
struct ControlSchedule {
  ControlMode mode = ControlMode::kQuality;
  Bounds bounds;
  std::vector<double> values;  ///< one per grid point

  static ControlSchedule constant(ControlMode mode, double value, std::size_t n_points,
                                  Bounds bounds);

  void validate() const;  // throws InvalidInput
};

}  // namespace ppctl
