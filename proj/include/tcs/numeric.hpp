#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace tcs {

/// Neumaier-compensated accumulator. Long pairwise sums in the model cancel
/// almost exactly; plain summation would leak the cancellation error into
/// quantities that are checked near machine precision.
class CompensatedSum {
public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_total(std::span<const double> xs) {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

inline bool all_finite(std::span<const double> xs) {
  for (double x : xs) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

inline double squared_norm(std::span<const double> xs) {
  double q = 0.0;
  for (double x : xs) q += x * x;
  return q;
}

}  // namespace tcs
