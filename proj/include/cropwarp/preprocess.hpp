#pragma once

#include <vector>

#include "cropwarp/types.hpp"

namespace cropwarp {

// Replaces every non-clear sample by an inverse-distance-weighted mean of
// the nearest clear sample on each side (distance in days); with clear
// support on only one side the neighbor value is copied. Clear samples pass
// through bit-identical and all output flags are clear. Throws
// UnfillableError when the series has no clear sample.
Series fill_cloud_gaps_idw(const Series& series);

// Savitzky-Golay smoothing by sample index: each value is replaced by a
// least-squares polynomial fit of degree `order` over `window` samples
// centered on it, evaluated at the center. Edge points use the same fit on
// the truncated window. Requires window odd, order < window <= series size.
Series savitzky_golay(const Series& series, int window, int order);

// f(t) = v_min + (v_max - v_min) * (sigma(m1*(t-s1)) - sigma(m2*(t-s2)))
// with sigma the logistic; the rising-then-falling shape of one season.
struct SigmoidParams {
  double v_min = 0;
  double v_max = 0;
  double s1 = 0;  // inflection day of green-up
  double s2 = 0;  // inflection day of senescence
  double m1 = 0;  // slopes, 1/day
  double m2 = 0;
};

void validate_sigmoid(const SigmoidParams& p);

struct SigmoidFit {
  SigmoidParams params;
  double rmse = 0;
  bool degraded = false;  // refinement failed to improve the initialization
};

// Least-squares double-sigmoid fit: coarse grid search over the inflection
// days with closed-form level estimates, then Nelder-Mead refinement
// (500 iterations cap, stops when the RMSE improvement drops below 1e-8).
// Requires at least 7 samples.
SigmoidFit fit_double_sigmoid(const Series& series);

double eval_double_sigmoid_at(const SigmoidParams& p, double t);
Series eval_double_sigmoid(const SigmoidParams& p, const TimeGrid& grid);

// Intersection of per-year acquisition spans: t_l is the latest first day,
// t_u the earliest last day. Throws CoverageError when the years do not
// overlap.
TimeGrid common_grid(const std::vector<std::vector<int>>& calendars, int step = 1);

// Linear interpolation onto the grid. The series must span [t_l, t_u];
// grid days that coincide with sample days reproduce the sample value
// exactly.
Series resample_linear(const Series& series, const TimeGrid& grid);

}  // namespace cropwarp
